"""Containers for sampled realizations of the process on a finite patch."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from app.core.exceptions import PreconditionError, SiteAddressError
from app.models.topology import OUTSIDE, SubtreeTopology, slot_neighbours, slot_of
from app.schemas.common import Colour
from app.utils.validators import SiteId, format_address


def colour_codes(u: np.ndarray, z: np.ndarray, t: float) -> np.ndarray:
    """Vectorised colours: WHITE iff U > t, RED iff Z <= t, GREEN otherwise."""
    return np.where(u > t, Colour.WHITE, np.where(z <= t, Colour.RED, Colour.GREEN)).astype(np.int8)


@dataclass(frozen=True)
class BallBatch:
    """R independent realizations on the same patch, replica axis first.

    ``out[r, i, s]`` is Y(i -> neighbour in slot s). Before propagation only
    boundary slots are set (the rest is NaN) and ``z`` is None.
    """

    topology: SubtreeTopology
    u: np.ndarray
    boundary: np.ndarray
    out: np.ndarray
    z: Optional[np.ndarray] = None

    @property
    def replicas(self) -> int:
        return self.u.shape[0]

    @property
    def propagated(self) -> bool:
        return self.z is not None

    def colours(self, t: float) -> np.ndarray:
        """Colour codes of every site in every replica at time t."""
        self._require_propagated("colours")
        return colour_codes(self.u, self.z, t)

    def realization(self, k: int) -> "BallRealization":
        """Replica ``k`` as a single realization."""
        return BallRealization(
            topology=self.topology,
            u=self.u[k],
            boundary=self.boundary[k],
            out=self.out[k],
            z=None if self.z is None else self.z[k],
        )

    def _require_propagated(self, operation: str) -> None:
        if self.z is None:
            raise PreconditionError(operation, "realization has not been propagated")


@dataclass(frozen=True)
class BallRealization:
    """One sample: U per site, Y per directed edge, Z per site."""

    topology: SubtreeTopology
    u: np.ndarray
    boundary: np.ndarray
    out: np.ndarray
    z: Optional[np.ndarray] = None

    @property
    def radius(self) -> Optional[int]:
        return self.topology.radius

    @property
    def propagated(self) -> bool:
        return self.z is not None

    def as_batch(self) -> BallBatch:
        return BallBatch(
            topology=self.topology,
            u=self.u[None, :],
            boundary=self.boundary[None, :],
            out=self.out[None, :, :],
            z=None if self.z is None else self.z[None, :],
        )

    def index(self, site: SiteId) -> int:
        return self.topology.site_index(site)

    def activation(self, site: SiteId) -> float:
        return float(self.u[self.index(site)])

    def y(self, source: SiteId, target: SiteId) -> float:
        """Y(source -> target): the freeze time of ``target`` in the subtree directed away from ``source``.

        Raises:
            SiteAddressError: If ``source`` is not in the patch
        """
        i = self.index(source)
        return float(self.out[i, slot_of(tuple(source), tuple(target))])

    def outgoing(self, site: SiteId) -> List[float]:
        """Y(site -> j) for the three neighbours j, in slot order."""
        return [float(v) for v in self.out[self.index(site)]]

    def incoming(self, site: SiteId) -> List[float]:
        """Y(j -> site) for the three neighbours j, in slot order.

        Raises:
            SiteAddressError: If a neighbour lies outside the patch
        """
        values = []
        for nb in slot_neighbours(tuple(site)):
            if nb not in self.topology.index:
                raise SiteAddressError(
                    format_address(site), "incoming edge from outside the sampled patch"
                )
            values.append(self.y(nb, site))
        return values

    def has_full_incoming(self, site: SiteId) -> bool:
        return bool((self.topology.slot_site[self.index(site)] != OUTSIDE).all())

    def freeze(self, site: SiteId) -> float:
        self._require_propagated("freeze")
        return float(self.z[self.index(site)])

    def colours(self, t: float) -> np.ndarray:
        self._require_propagated("colours")
        return colour_codes(self.u, self.z, t)

    def _require_propagated(self, operation: str) -> None:
        if self.z is None:
            raise PreconditionError(operation, "realization has not been propagated")
