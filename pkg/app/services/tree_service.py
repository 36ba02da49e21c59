"""Geometry of the degree-3 tree: generations, neighbourhoods, paths and boundary counts."""

from collections import deque
from typing import Iterable, List, NamedTuple, Set

from app.core.exceptions import SiteAddressError, ValidationError
from app.core.logging import get_logger
from app.models.topology import ROOT, children, depth, slot_neighbours, validate_site
from app.utils.validators import SiteId, format_address

logger = get_logger(__name__)


class Neighbour(NamedTuple):
    site: SiteId
    boundary: bool


class PathInfo(NamedTuple):
    """Unique path between two sites, endpoints included."""

    sites: List[SiteId]

    @property
    def inclusive_count(self) -> int:
        """Number of sites on the path, endpoints included."""
        return len(self.sites)

    @property
    def between_count(self) -> int:
        """Number of sites strictly between the endpoints."""
        return max(len(self.sites) - 2, 0)


class GeometryCounts(NamedTuple):
    """Sites of a set with 0, 1 and 2 neighbours outside the set."""

    n0: int
    n1: int
    n2: int


class TreeService:
    """Service for the topology of the degree-3 tree."""

    @staticmethod
    def generation(n: int) -> List[SiteId]:
        """All sites at distance exactly ``n`` from O, in address order."""
        if n < 0:
            raise ValidationError("Generation index must be nonnegative", details={"n": n})
        frontier: List[SiteId] = [ROOT]
        for _ in range(n):
            frontier = [c for s in frontier for c in children(s)]
        return frontier

    @staticmethod
    def ball_size(radius: int) -> int:
        """|V_{<=n}| = 1 + 3(2^n - 1)."""
        return 1 + 3 * (2**radius - 1)

    @staticmethod
    def neighbors(site: SiteId, ball_radius: int) -> List[Neighbour]:
        """The three neighbours of ``site``; those beyond the ball are flagged as boundary.

        Raises:
            SiteAddressError: If the address is invalid or deeper than the ball
        """
        site = validate_site(site)
        if depth(site) > ball_radius:
            raise SiteAddressError(format_address(site), f"deeper than ball radius {ball_radius}")
        return [Neighbour(nb, depth(nb) > ball_radius) for nb in slot_neighbours(site)]

    @staticmethod
    def path_between(v: SiteId, w: SiteId) -> PathInfo:
        """The unique path v = i_1, ..., i_k = w through the last common ancestor."""
        v, w = validate_site(v), validate_site(w)
        common = 0
        while common < min(len(v), len(w)) and v[common] == w[common]:
            common += 1

        up = [v[:k] for k in range(len(v), common - 1, -1)]
        down = [w[:k] for k in range(common + 1, len(w) + 1)]
        return PathInfo(up + down)

    @staticmethod
    def is_connected(sites: Iterable[SiteId]) -> bool:
        site_set: Set[SiteId] = set(sites)
        if not site_set:
            return False
        start = next(iter(site_set))
        seen = {start}
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for nb in slot_neighbours(current):
                if nb in site_set and nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        return len(seen) == len(site_set)

    @staticmethod
    def require_connected(sites: List[SiteId]) -> List[SiteId]:
        """Validate addresses and connectivity of a site set.

        Raises:
            ValidationError: If the set is empty
            SiteAddressError: If the set is disconnected
        """
        if not sites:
            raise ValidationError("Site set must be nonempty")
        validated = [validate_site(s) for s in sites]
        if not TreeService.is_connected(validated):
            raise SiteAddressError(
                ",".join(format_address(s) for s in validated), "site set is not connected"
            )
        return validated

    @staticmethod
    def geometry_counts(sites: List[SiteId]) -> GeometryCounts:
        """Count sites of a connected set by their number of outside neighbours.

        For |S| > 1 every site has at most two outside neighbours and
        n0 + 2 = n2. A single site has three and is counted in none of the bins.
        """
        validated = TreeService.require_connected(sites)
        site_set = set(validated)
        bins = [0, 0, 0]
        for site in validated:
            outside = sum(1 for nb in slot_neighbours(site) if nb not in site_set)
            if outside <= 2:
                bins[outside] += 1
        return GeometryCounts(*bins)
