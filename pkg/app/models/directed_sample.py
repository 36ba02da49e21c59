"""Activation times on the finite directed binary tree T(n)."""

from dataclasses import dataclass

import numpy as np

from app.core.exceptions import SiteAddressError
from app.utils.validators import SiteId, format_address


def heap_index(site: SiteId) -> int:
    """Heap position of a directed-tree address: children of k are 2k+1 and 2k+2."""
    k = 0
    for step in site:
        k = 2 * k + 1 + step
    return k


@dataclass(frozen=True)
class DirectedSample:
    """U on the 2^(n+1) - 1 sites of T(n), root degree 2, levels 0..n, in heap order."""

    depth: int
    u: np.ndarray

    @property
    def size(self) -> int:
        return self.u.size

    def is_leaf(self, k: int) -> bool:
        return 2 * k + 1 >= self.size

    def index(self, site: SiteId) -> int:
        """Heap position of ``site``.

        Raises:
            SiteAddressError: If the address is not a site of T(n)
        """
        if len(site) > self.depth or any(step not in (0, 1) for step in site):
            raise SiteAddressError(format_address(site), f"not a site of T({self.depth})")
        return heap_index(site)
