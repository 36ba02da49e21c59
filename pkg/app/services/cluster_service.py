"""Cluster extraction on propagated realizations."""

import math
from collections import deque
from typing import Callable, List, NamedTuple, Set

from app.core.exceptions import PreconditionError
from app.core.logging import get_logger
from app.models.realization import BallRealization
from app.models.topology import OUTSIDE, slot_neighbours
from app.schemas.common import Colour
from app.services.bethe_sampler import BetheSampler
from app.services.tree_service import TreeService
from app.utils.validators import SiteId, format_address

logger = get_logger(__name__)


class Cluster(NamedTuple):
    sites: Set[SiteId]
    truncated: bool


def _component(realization: BallRealization, start: int, member: Callable[[int], bool]) -> Cluster:
    """Breadth-first component of ``start`` among patch sites satisfying ``member``."""
    topology = realization.topology
    frontier = topology.frontier
    seen = {start}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in topology.slot_site[i]:
            j = int(j)
            if j != OUTSIDE and j not in seen and member(j):
                seen.add(j)
                queue.append(j)
    truncated = any(bool(frontier[i]) for i in seen)
    return Cluster({topology.addresses[i] for i in seen}, truncated)


class ClusterService:
    """Service for green and frozen clusters and the containment criterion."""

    @staticmethod
    def green_cluster(realization: BallRealization, site: SiteId, t: float) -> Cluster:
        """Connected green component of ``site`` at time t.

        ``truncated`` is set when the component reaches the outer generation
        of the patch, so its true extent may be larger.

        Raises:
            PreconditionError: If the site is not green at t
        """
        if BetheSampler.colour(realization, site, t) != Colour.GREEN:
            raise PreconditionError("green_cluster", f"site '{format_address(site)}' is not green at t={t}")
        colours = realization.colours(t)
        return _component(realization, realization.index(site), lambda j: colours[j] == Colour.GREEN)

    @staticmethod
    def frozen_cluster(realization: BallRealization, site: SiteId, t: float) -> Cluster:
        """Connected component of sites sharing the freeze time of ``site`` (bit-exact), frozen by t.

        Raises:
            PreconditionError: If the site is not red at t
        """
        if BetheSampler.colour(realization, site, t) != Colour.RED:
            raise PreconditionError("frozen_cluster", f"site '{format_address(site)}' is not red at t={t}")
        z = realization.z
        z_i = realization.freeze(site)
        return _component(realization, realization.index(site), lambda j: z[j] == z_i and z[j] <= t)

    @staticmethod
    def cluster_before_freeze(realization: BallRealization, site: SiteId) -> Cluster:
        """Green cluster of ``site`` just before its freeze time Z_i.

        Membership is structural: the component of ``site`` within
        {j : U_j < Z_i, Z_j >= Z_i}.

        Raises:
            PreconditionError: If the site never freezes
        """
        z_i = realization.freeze(site)
        if math.isinf(z_i):
            raise PreconditionError("cluster_before_freeze", f"site '{format_address(site)}' never freezes")
        u, z = realization.u, realization.z
        return _component(realization, realization.index(site), lambda j: u[j] < z_i and z[j] >= z_i)

    @staticmethod
    def check_containment(realization: BallRealization, sites: List[SiteId], t: float) -> bool:
        """Whether the boundary criterion for S being entirely green at t holds.

        (a) U_w <= t for every w in S, and (b) for every neighbour v outside S
        of some s in S, Y(s -> v) < U_s or Y(s -> v) > t.

        Raises:
            PreconditionError: If |S| < 2 or S reaches the outer generation of the patch
            SiteAddressError: If S is disconnected or leaves the patch
        """
        sites = TreeService.require_connected(sites)
        if len(sites) < 2:
            raise PreconditionError("check_containment", "needs a set of at least two sites")
        topology = realization.topology
        for site in sites:
            if (topology.slot_site[topology.site_index(site)] == OUTSIDE).any():
                raise PreconditionError(
                    "check_containment", f"site '{format_address(site)}' touches the patch boundary"
                )

        site_set = set(sites)
        if any(realization.activation(w) > t for w in sites):
            return False
        for s in sites:
            u_s = realization.activation(s)
            for v in slot_neighbours(s):
                if v in site_set:
                    continue
                y = realization.y(s, v)
                if not (y < u_s or y > t):
                    return False
        return True
