"""Closed-form values of the quantities estimated by simulation."""

import math
from typing import Callable, Dict, List, Optional

from app.core.config import get_settings
from app.core.exceptions import ValidationError
from app.core.logging import get_logger
from app.services.distribution_service import (
    DECAY_CONSTANT_EXACT,
    LN2,
    decay_constant,
    single_site_green_prob,
)
from app.services.tree_service import TreeService
from app.utils.validators import SiteId

logger = get_logger(__name__)

GREEN_FINAL = 1.5 * LN2**2 - 0.5
RED_FINAL = 1.0 - GREEN_FINAL
DISTINCT_FROZEN_PAIR = 2.0 - 2.0 * LN2 - LN2**2
SHARED_FROZEN_PAIR = 1.0 - LN2**2
DISPLAYED_DISTINCT_FROZEN_PAIR = 3.0 * LN2 - 2.0
CUT_PROBABILITY = 1.0 - DECAY_CONSTANT_EXACT


def _critical_gap(t: float) -> float:
    """t - ln(2t): factor of a set site with two outside neighbours."""
    return t - math.log(2.0 * t)


class OracleService:
    """Service for closed-form oracles."""

    @staticmethod
    def green_final() -> float:
        return GREEN_FINAL

    @staticmethod
    def red_final() -> float:
        return RED_FINAL

    @staticmethod
    def distinct_frozen_pair() -> float:
        """P(adjacent v, w both red at t = 1 with Z_v != Z_w) = 2 - 2 ln 2 - ln^2 2.

        With A = min{Y(v -> j) >= U_v : j outside the pair} and B likewise at w,
        Z_v = Z_w < inf exactly when the smaller of A, B is finite and not below
        the other site's activation time, which has probability 1 - ln^2 2.
        Subtracting that from P(both red) = 1 - 2 P(green) + (1 - ln 2)^2 gives
        the value.
        """
        return DISTINCT_FROZEN_PAIR

    @staticmethod
    def shared_frozen_pair() -> float:
        """P(adjacent v, w both red at t = 1 with Z_v = Z_w) = 1 - ln^2 2."""
        return SHARED_FROZEN_PAIR

    @staticmethod
    def distinct_frozen_pair_candidates() -> Dict[str, float]:
        """The commonly quoted constant 3 ln 2 - 2, reported next to the exact value."""
        return {"displayed": DISPLAYED_DISTINCT_FROZEN_PAIR}

    @staticmethod
    def boundary_factor(k: int, t: float) -> float:
        """Contribution of a set site with k outside neighbours to P(S in G(t))."""
        if k not in (0, 1, 2):
            raise ValidationError("Outside-neighbour count must be 0, 1 or 2", details={"k": k})
        if t <= 0.5 or k == 0:
            return t
        return 0.5 if k == 1 else _critical_gap(t)

    @staticmethod
    def containment(sites: List[SiteId], t: float) -> float:
        """P(S is entirely green at t) for a connected set S.

        t^|S| for t <= 1/2; (t - ln 2t)^n2 (1/2)^n1 t^n0 above, with the
        counts taken from the geometry of S.
        """
        counts = TreeService.geometry_counts(sites)
        if t <= 0.5:
            return t ** len(sites)
        if len(sites) < 2:
            raise ValidationError("Containment above t = 1/2 needs at least two sites")
        return _critical_gap(t) ** counts.n2 * 0.5**counts.n1 * t**counts.n0

    @staticmethod
    def generation_mean(t: float) -> float:
        """E|G_O(t) ∩ V_n| = 3 (t - ln 2t)^2, the same for every n >= 1 (t >= 1/2)."""
        if t < 0.5:
            raise ValidationError("Generation mean oracle holds for t >= 1/2", details={"t": t})
        return 3.0 * _critical_gap(t) ** 2

    @staticmethod
    def decay_bound(distance: int, steps: Optional[int] = None) -> float:
        """5 A^floor(d / 12) with A from quadrature."""
        steps = steps or get_settings().QUADRATURE_STEPS
        return 5.0 * decay_constant(steps) ** (distance // 12)

    @staticmethod
    def single_site_green(t: float, steps: Optional[int] = None) -> float:
        return single_site_green_prob(t, steps or get_settings().QUADRATURE_STEPS)

    @staticmethod
    def cut_probability() -> float:
        """P(Y < min(U_1, U_2)) = 2 int_{1/2}^1 (1 - s) ln(2s) ds."""
        return CUT_PROBABILITY

    @staticmethod
    def persistence_factor(t1: float, t2: float) -> float:
        """P(U <= t1 and (Y >= t2 or Y < U)) = 1/2 + t1 ln(t1 / t2), for 1/2 <= t1 <= t2 <= 1."""
        if not 0.5 <= t1 <= t2 <= 1.0:
            raise ValidationError(
                "Persistence factor needs 1/2 <= t1 <= t2 <= 1", details={"t1": t1, "t2": t2}
            )
        return 0.5 + t1 * math.log(t1 / t2)

    @staticmethod
    def path_connectivity_candidates(path_sites: int, t: float) -> Dict[str, float]:
        """Candidate formulas for P(a path of k sites is entirely green at t), k >= 2.

        The displayed constant-prefactor formula is given under both path
        conventions (sites inclusive, sites strictly between); the product
        formula follows from the boundary factors of a path.
        """
        if path_sites < 2:
            raise ValidationError("Path needs at least two sites", details={"sites": path_sites})
        prefactor = ((1.0 - LN2) / 2.0) ** 2
        return {
            "displayed_inclusive": prefactor * 0.5**path_sites,
            "displayed_between": prefactor * 0.5 ** (path_sites - 2),
            "product_formula": (
                _critical_gap(t) ** 2 * 0.5 ** (path_sites - 2) if t > 0.5 else t**path_sites
            ),
        }

    @staticmethod
    def oracle(quantity: str, **params) -> float:
        """Dispatch on a quantity identifier.

        Raises:
            ValidationError: If the quantity is unknown or its parameters are missing
        """
        table: Dict[str, Callable[..., float]] = {
            "green_final": OracleService.green_final,
            "red_final": OracleService.red_final,
            "distinct_frozen_pair": OracleService.distinct_frozen_pair,
            "shared_frozen_pair": OracleService.shared_frozen_pair,
            "containment": OracleService.containment,
            "generation_mean": OracleService.generation_mean,
            "decay_bound": OracleService.decay_bound,
            "single_site_green": OracleService.single_site_green,
            "cut_probability": OracleService.cut_probability,
            "persistence_factor": OracleService.persistence_factor,
            "boundary_factor": OracleService.boundary_factor,
        }
        handler = table.get(quantity)
        if handler is None:
            raise ValidationError(
                f"Unknown quantity: {quantity}. Supported: {sorted(table)}",
            )
        try:
            return handler(**params)
        except TypeError as e:
            raise ValidationError(f"Bad parameters for {quantity}: {e}", details=params)
