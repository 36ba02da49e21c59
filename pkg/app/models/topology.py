"""Addressing and topology of finite patches of the degree-3 tree.

A site is addressed by its child-index path from the root O: the first step
is in {0, 1, 2} (O has three children), every later step in {0, 1}.

A patch is a parent-closed set of addresses (it always contains O). Every
site of a patch has exactly three neighbours in the infinite tree; each
neighbour sits in one of three *slots*:

* O: slots 0, 1, 2 are its children 0, 1, 2.
* any other site: slot 0 is the parent, slots 1 and 2 are children 0 and 1.

A slot whose neighbour is outside the patch is a boundary edge.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.core.exceptions import SiteAddressError, ValidationError
from app.utils.validators import SiteId, format_address

ROOT: SiteId = ()
OUTSIDE = -1


def depth(site: SiteId) -> int:
    return len(site)


def parent(site: SiteId) -> Optional[SiteId]:
    return site[:-1] if site else None


def children(site: SiteId) -> List[SiteId]:
    if not site:
        return [(0,), (1,), (2,)]
    return [site + (0,), site + (1,)]


def slot_neighbours(site: SiteId) -> List[SiteId]:
    """The three neighbours of ``site`` in slot order."""
    if not site:
        return children(site)
    return [site[:-1]] + children(site)


def slot_of(site: SiteId, neighbour: SiteId) -> int:
    """Slot of ``site`` that holds ``neighbour``."""
    if site and neighbour == site[:-1]:
        return 0
    if neighbour[:-1] != site or len(neighbour) != len(site) + 1:
        raise SiteAddressError(
            format_address(neighbour), f"not adjacent to '{format_address(site)}'"
        )
    return neighbour[-1] + (0 if not site else 1)


def validate_site(site: SiteId) -> SiteId:
    for position, step in enumerate(site):
        limit = 2 if position == 0 else 1
        if not 0 <= step <= limit:
            raise SiteAddressError(format_address(site), "child index out of range")
    return tuple(site)


def _closure(sites: Iterable[SiteId]) -> List[SiteId]:
    closed = {ROOT}
    for site in sites:
        site = validate_site(site)
        for k in range(len(site) + 1):
            closed.add(site[:k])
    return sorted(closed, key=lambda s: (len(s), s))


@dataclass(frozen=True)
class SubtreeTopology:
    """Index tables of a finite patch, sites in breadth-first order."""

    addresses: Tuple[SiteId, ...]
    radius: Optional[int] = None
    index: Dict[SiteId, int] = field(init=False, repr=False, compare=False)
    depths: np.ndarray = field(init=False, repr=False, compare=False)
    parents: np.ndarray = field(init=False, repr=False, compare=False)
    slot_site: np.ndarray = field(init=False, repr=False, compare=False)
    slot_back: np.ndarray = field(init=False, repr=False, compare=False)
    boundary_slot: np.ndarray = field(init=False, repr=False, compare=False)
    boundary_edges: Tuple[Tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        addresses = self.addresses
        index = {site: k for k, site in enumerate(addresses)}
        if ROOT not in index or any(parent(s) not in index for s in addresses if s):
            raise ValidationError("Patch must contain the root and be closed under parents")

        n = len(addresses)
        depths = np.array([len(s) for s in addresses], dtype=np.int64)
        parents = np.array([index[s[:-1]] if s else OUTSIDE for s in addresses], dtype=np.int64)
        slot_site = np.full((n, 3), OUTSIDE, dtype=np.int64)
        slot_back = np.full((n, 3), OUTSIDE, dtype=np.int64)
        boundary_slot = np.full((n, 3), OUTSIDE, dtype=np.int64)
        boundary_edges = []

        for i, site in enumerate(addresses):
            for slot, neighbour in enumerate(slot_neighbours(site)):
                j = index.get(neighbour, OUTSIDE)
                slot_site[i, slot] = j
                if j == OUTSIDE:
                    boundary_slot[i, slot] = len(boundary_edges)
                    boundary_edges.append((i, slot))
                else:
                    slot_back[i, slot] = slot_of(neighbour, site)

        object.__setattr__(self, "index", index)
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "slot_site", slot_site)
        object.__setattr__(self, "slot_back", slot_back)
        object.__setattr__(self, "boundary_slot", boundary_slot)
        object.__setattr__(self, "boundary_edges", tuple(boundary_edges))

    @classmethod
    def ball(cls, radius: int) -> "SubtreeTopology":
        """All sites within distance ``radius`` of O."""
        if radius < 1:
            raise ValidationError("Ball radius must be at least 1", details={"radius": radius})
        addresses: List[SiteId] = [ROOT]
        frontier: List[SiteId] = [ROOT]
        for _ in range(radius):
            frontier = [c for s in frontier for c in children(s)]
            addresses.extend(frontier)
        return cls(addresses=tuple(addresses), radius=radius)

    @classmethod
    def spanning(cls, sites: Iterable[SiteId]) -> "SubtreeTopology":
        """Smallest patch holding ``sites``: the union of their paths to O."""
        return cls(addresses=tuple(_closure(sites)))

    @property
    def size(self) -> int:
        return len(self.addresses)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_edges)

    @property
    def max_depth(self) -> int:
        return int(self.depths.max())

    @property
    def is_ball(self) -> bool:
        return self.radius is not None

    @property
    def frontier(self) -> np.ndarray:
        """Mask of sites with at least one boundary edge (V_radius for a ball)."""
        return (self.slot_site == OUTSIDE).any(axis=1)

    def site_index(self, site: SiteId) -> int:
        """Row of ``site`` in every per-site array.

        Raises:
            SiteAddressError: If the site is not in the patch
        """
        try:
            return self.index[tuple(site)]
        except KeyError:
            raise SiteAddressError(format_address(site), "outside the sampled patch")

    def level(self, d: int) -> np.ndarray:
        """Indices of the sites at depth ``d``."""
        return np.flatnonzero(self.depths == d)
