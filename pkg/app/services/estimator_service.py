"""Monte Carlo estimators, their oracles, and the pass/fail gate."""

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import kstwo

from app.core.config import get_settings
from app.core.exceptions import NoOracleError, ValidationError
from app.core.logging import get_logger
from app.models.realization import BallBatch
from app.models.topology import SubtreeTopology, slot_of
from app.schemas.common import Colour
from app.schemas.estimate import EstimateParameters, EstimateReport, ReportKind
from app.services.bethe_sampler import BetheSampler
from app.services.directed_sampler import DirectedSampler
from app.services.distribution_service import (
    aldous_G,
    cdf_F,
    cdf_zero,
    fixed_point_residual,
    ks_distance_to_F,
    phi_fixed_point_sample,
)
from app.services.oracle_service import OracleService
from app.services.replica_runner import ReplicaRunner, chunk_rng, derived_seed
from app.services.tree_service import TreeService
from app.utils.validators import SiteId, format_address

logger = get_logger(__name__)

ROOT: SiteId = ()
RESIDUAL_TOLERANCE = 1e-6
KS_ALPHA = 1e-3

EVENT_QUANTITIES = (
    "green_final",
    "red_final",
    "distinct_frozen_pair",
    "shared_frozen_pair",
    "containment",
    "single_site_green",
    "cut_probability",
    "persistence_factor",
    "path_connectivity",
)


@dataclass(frozen=True)
class EventPlan:
    """Everything a chunk needs to evaluate one indicator on fresh realizations."""

    quantity: str
    topology: SubtreeTopology
    indices: Tuple[int, ...]
    t: float
    t2: Optional[float] = None
    slot: Optional[int] = None
    oracle: Optional[float] = None
    kind: ReportKind = ReportKind.EQUALITY
    candidates: Dict[str, float] = field(default_factory=dict)
    sites: Tuple[SiteId, ...] = ()


def _format_sites(sites) -> str:
    return ",".join(format_address(s) or "O" for s in sites)


def _indicator(plan: EventPlan, batch: BallBatch) -> np.ndarray:
    idx = list(plan.indices)
    quantity = plan.quantity

    if quantity == "cut_probability":
        a, b, centre = idx
        pendant = batch.out[:, centre, plan.slot]
        return pendant < np.minimum(batch.u[:, a], batch.u[:, b])

    if quantity == "persistence_factor":
        (centre,) = idx
        u = batch.u[:, centre]
        y = batch.out[:, centre, plan.slot]
        return (u <= plan.t) & ((y >= plan.t2) | (y < u))

    colours = batch.colours(plan.t)
    if quantity in ("green_final", "single_site_green"):
        return colours[:, idx[0]] == Colour.GREEN
    if quantity == "red_final":
        return colours[:, idx[0]] == Colour.RED
    if quantity in ("distinct_frozen_pair", "shared_frozen_pair"):
        v, w = idx
        both_red = (colours[:, v] == Colour.RED) & (colours[:, w] == Colour.RED)
        same = batch.z[:, v] == batch.z[:, w]
        return both_red & (same if quantity == "shared_frozen_pair" else ~same)
    # containment, path_connectivity
    return (colours[:, idx] == Colour.GREEN).all(axis=1)


def _event_chunk(plan: EventPlan, count: int, rng: np.random.Generator) -> np.ndarray:
    batch = BetheSampler.propagate_batch(BetheSampler.sample_batch(plan.topology, count, rng))
    hits = float(np.count_nonzero(_indicator(plan, batch)))
    return np.array([hits, hits])


def _generation_chunk(
    topology: SubtreeTopology, n: int, t: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    batch = BetheSampler.propagate_batch(BetheSampler.sample_batch(topology, count, rng))
    green = batch.colours(t) == Colour.GREEN
    path_green = np.zeros_like(green)
    path_green[:, 0] = green[:, 0]
    for d in range(1, n + 1):
        level = topology.level(d)
        path_green[:, level] = path_green[:, topology.parents[level]] & green[:, level]
    counts = path_green[:, topology.level(n)].sum(axis=1).astype(float)
    return np.array([counts.sum(), (counts**2).sum()])


def _covariance_chunk(
    topology: SubtreeTopology, v: int, w: int, t: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    batch = BetheSampler.propagate_batch(BetheSampler.sample_batch(topology, count, rng))
    colours = batch.colours(t)
    joint = np.zeros((3, 3))
    np.add.at(joint, (colours[:, v], colours[:, w]), 1.0)
    return joint.ravel()


def covariance_pair(distance: int) -> Tuple[SiteId, SiteId]:
    """Canonical sites with ``distance`` sites strictly between them, on a path through O."""
    if distance < 0:
        raise ValidationError("Distance must be nonnegative", details={"distance": distance})
    a = (distance + 2) // 2
    b = (distance + 1) // 2
    v = (0,) + (0,) * (a - 1)
    w = ((1,) + (0,) * (b - 1)) if b > 0 else ROOT
    return v, w


class EstimatorService:
    """Service running Monte Carlo experiments against closed-form oracles."""

    def __init__(self, runner: Optional[ReplicaRunner] = None):
        self.runner = runner or ReplicaRunner()

    def _plan(self, quantity: str, t: Optional[float], t2: Optional[float],
              sites: Optional[List[SiteId]], distance: Optional[int]) -> EventPlan:
        ball = BetheSampler.ball_topology

        if quantity in ("green_final", "red_final"):
            oracle = OracleService.green_final() if quantity == "green_final" else OracleService.red_final()
            return EventPlan(quantity, ball(1), (0,), 1.0, oracle=oracle, sites=(ROOT,))

        if quantity in ("distinct_frozen_pair", "shared_frozen_pair"):
            topology = ball(2)
            w = (0,)
            if quantity == "distinct_frozen_pair":
                oracle = OracleService.distinct_frozen_pair()
                candidates = OracleService.distinct_frozen_pair_candidates()
            else:
                oracle, candidates = OracleService.shared_frozen_pair(), {}
            return EventPlan(
                quantity, topology, (0, topology.site_index(w)), 1.0,
                oracle=oracle, candidates=candidates, sites=(ROOT, w),
            )

        if quantity == "single_site_green":
            t = self._require_t(quantity, t)
            return EventPlan(quantity, ball(1), (0,), t, oracle=OracleService.single_site_green(t), sites=(ROOT,))

        if quantity == "cut_probability":
            topology = ball(2)
            a, b = (0,), (1,)
            return EventPlan(
                quantity, topology,
                (topology.site_index(a), topology.site_index(b), 0), 1.0,
                slot=slot_of(ROOT, (2,)), oracle=OracleService.cut_probability(),
                sites=(a, ROOT, b),
            )

        if quantity == "persistence_factor":
            t = self._require_t(quantity, t)
            if t2 is None:
                raise ValidationError("persistence_factor needs t2")
            return EventPlan(
                quantity, ball(1), (0,), t, t2=t2, slot=slot_of(ROOT, (0,)),
                oracle=OracleService.persistence_factor(t, t2), sites=(ROOT,),
            )

        if quantity == "containment":
            t = self._require_t(quantity, t)
            if not sites:
                raise ValidationError("containment needs a site set")
            sites = TreeService.require_connected(sites)
            topology = ball(max(len(s) for s in sites) + 1)
            return EventPlan(
                quantity, topology, tuple(topology.site_index(s) for s in sites), t,
                oracle=OracleService.containment(sites, t), sites=tuple(sites),
            )

        if quantity == "path_connectivity":
            t = self._require_t(quantity, t)
            if distance is None:
                raise ValidationError("path_connectivity needs a distance")
            v, w = covariance_pair(distance)
            path = TreeService.path_between(v, w).sites
            topology = SubtreeTopology.spanning(path)
            return EventPlan(
                quantity, topology, tuple(topology.site_index(s) for s in path), t,
                kind=ReportKind.REPORT,
                candidates=OracleService.path_connectivity_candidates(len(path), t),
                sites=tuple(path),
            )

        raise ValidationError(
            f"Unknown quantity: {quantity}. Supported: {list(EVENT_QUANTITIES)}",
        )

    @staticmethod
    def _require_t(quantity: str, t: Optional[float]) -> float:
        if t is None:
            raise ValidationError(f"{quantity} needs a time t")
        if not 0.0 <= t <= 1.0:
            raise ValidationError("t must be in [0, 1]", details={"t": t})
        return t

    def mc_event(
        self,
        quantity: str,
        n: int,
        seed: int,
        t: Optional[float] = None,
        t2: Optional[float] = None,
        sites: Optional[List[SiteId]] = None,
        distance: Optional[int] = None,
    ) -> EstimateReport:
        """Estimate the probability of a single-realization event over n exact realizations.

        The ball radius is the deepest referenced site plus one.

        Raises:
            ValidationError: If the quantity is unknown or n = 0
        """
        plan = self._plan(quantity, t, t2, sites, distance)
        floats = plan.topology.size * 12
        total, total_sq = self.runner.run(
            partial(_event_chunk, plan), n, seed, chunk_size=self.runner.chunk_size_for(floats)
        )
        report = EstimateReport.from_sums(
            quantity,
            total,
            total_sq,
            n,
            parameters=EstimateParameters(
                t=plan.t,
                t2=plan.t2,
                radius=plan.topology.radius,
                sites=_format_sites(plan.sites),
                distance=distance if quantity == "path_connectivity" else None,
            ),
            oracle=plan.oracle,
            kind=plan.kind,
            seed=seed,
            candidates=plan.candidates,
        )
        logger.info("Event estimated", quantity=quantity, n=n, mean=report.mean, oracle=report.oracle)
        return report

    def mc_generation_count(self, t: float, depth: int, n: int, seed: int) -> EstimateReport:
        """Mean number of sites v at distance ``depth`` whose path from O is green at t."""
        if depth < 1:
            raise ValidationError("Generation depth must be at least 1", details={"depth": depth})
        self._require_t("generation", t)
        topology = BetheSampler.ball_topology(depth + 1)
        floats = topology.size * 12
        total, total_sq = self.runner.run(
            partial(_generation_chunk, topology, depth, t),
            n,
            seed,
            chunk_size=self.runner.chunk_size_for(floats),
        )
        oracle = OracleService.generation_mean(t) if t >= 0.5 else None
        return EstimateReport.from_sums(
            "generation_count",
            total,
            total_sq,
            n,
            parameters=EstimateParameters(t=t, depth=depth, radius=topology.radius),
            oracle=oracle,
            kind=ReportKind.EQUALITY if oracle is not None else ReportKind.REPORT,
            seed=seed,
        )

    def mc_covariance_table(self, distance: int, t: float, n: int, seed: int) -> List[EstimateReport]:
        """Covariances of the colour indicators of two sites, for all nine colour pairs.

        For t <= 1/2 every covariance is compared with 0; above, the absolute
        covariance is compared with the upper bound 5 A^floor(d / 12).
        """
        self._require_t("covariance", t)
        v, w = covariance_pair(distance)
        topology = SubtreeTopology.spanning([v, w])
        joint = self.runner.run(
            partial(_covariance_chunk, topology, topology.site_index(v), topology.site_index(w), t),
            n,
            seed,
            chunk_size=self.runner.chunk_size_for(topology.size * 12),
        ).reshape(3, 3)

        if t <= 0.5:
            oracle, kind = 0.0, ReportKind.EQUALITY
        else:
            oracle, kind = OracleService.decay_bound(distance), ReportKind.UPPER_BOUND

        p_xy = joint / n
        p_x = p_xy.sum(axis=1)
        p_y = p_xy.sum(axis=0)
        reports = []
        for c1 in Colour:
            for c2 in Colour:
                a, b = p_x[c1], p_y[c2]
                cov = p_xy[c1, c2] - a * b
                second = (
                    p_xy[c1, c2] * (1 - 2 * a) * (1 - 2 * b)
                    + a * (1 - 2 * a) * b * b
                    + b * (1 - 2 * b) * a * a
                    + a * a * b * b
                )
                stderr = math.sqrt(max(second - cov * cov, 0.0) / n)
                reports.append(EstimateReport.build(
                    "covariance",
                    float(cov),
                    stderr,
                    n,
                    parameters=EstimateParameters(
                        t=t,
                        distance=distance,
                        sites=_format_sites((v, w)),
                        colours=f"{c1.name.lower()},{c2.name.lower()}",
                    ),
                    oracle=oracle,
                    kind=kind,
                    seed=seed,
                ))
        return reports

    def mc_covariance(
        self, distance: int, t: float, c1: Colour, c2: Colour, n: int, seed: int
    ) -> EstimateReport:
        """Covariance report for one colour pair."""
        table = self.mc_covariance_table(distance, t, n, seed)
        return table[3 * int(c1) + int(c2)]

    def directed_bound(
        self, t: float, depths: List[int], n: int, seed: int
    ) -> List[EstimateReport]:
        """F_n(t) over a range of depths plus the check max_n (F_n + k stderr) >= 1 - 1/(2t).

        Each depth runs on its own stream, seeded by ``derived_seed(seed, depth)``.
        """
        threshold = get_settings().Z_THRESHOLD
        per_depth = [
            DirectedSampler.estimate_Fn(depth, t, n, derived_seed(seed, depth), runner=self.runner)
            for depth in depths
        ]
        best = max(per_depth, key=lambda r: r.mean + threshold * r.stderr)
        summary = EstimateReport.build(
            "directed_fn_bound",
            best.mean,
            best.stderr,
            n,
            parameters=EstimateParameters(t=t, depth=best.parameters.depth),
            oracle=float(aldous_G(t)),
            kind=ReportKind.LOWER_BOUND,
            seed=seed,
        )
        return per_depth + [summary]

    @staticmethod
    def fixed_point_table(grid: List[float], steps: int) -> List[EstimateReport]:
        """Quadrature residuals of F and of the zero solution on a grid of t."""
        reports = []
        for t in grid:
            for quantity, cdf, tolerance in (
                ("fixed_point_residual", cdf_F, RESIDUAL_TOLERANCE),
                ("zero_solution_residual", cdf_zero, 0.0),
            ):
                residual = fixed_point_residual(t, cdf, steps)
                reports.append(EstimateReport.build(
                    quantity,
                    residual,
                    0.0,
                    0,
                    parameters=EstimateParameters(t=t),
                    oracle=0.0,
                    kind=ReportKind.TOLERANCE,
                    tolerance=tolerance,
                ))
        return reports

    @staticmethod
    def phi_ks(n: int, seed: int, alpha: float = KS_ALPHA) -> EstimateReport:
        """KS distance of phi(min(Y1, Y2), max(Y1, Y2), U) against F, gated at the alpha critical value."""
        if n < 1:
            raise ValidationError("Sample size must be at least 1", details={"n": n})
        samples = phi_fixed_point_sample(chunk_rng(seed, 0), n)
        distance = ks_distance_to_F(samples)
        return EstimateReport.build(
            "phi_ks_distance",
            distance,
            0.0,
            n,
            oracle=float(kstwo.isf(alpha, n)),
            kind=ReportKind.UPPER_BOUND,
            seed=seed,
            candidates={"dkw_bound": math.sqrt(math.log(2.0 / alpha) / (2.0 * n))},
        )

    @staticmethod
    def compare(report: EstimateReport, threshold: Optional[float] = None) -> bool:
        """Gate a report against its oracle.

        Raises:
            NoOracleError: If the report has no oracle
        """
        if report.oracle is None:
            raise NoOracleError(report.quantity)
        threshold = get_settings().Z_THRESHOLD if threshold is None else threshold

        if report.kind == ReportKind.EQUALITY:
            return abs(report.z) <= threshold
        if report.kind == ReportKind.UPPER_BOUND:
            return abs(report.mean) - threshold * report.stderr <= report.oracle
        if report.kind == ReportKind.LOWER_BOUND:
            return report.mean + threshold * report.stderr >= report.oracle
        if report.kind == ReportKind.TOLERANCE:
            return abs(report.mean - report.oracle) <= (report.tolerance or 0.0)
        raise NoOracleError(report.quantity)

    @staticmethod
    def with_verdict(report: EstimateReport, threshold: Optional[float] = None) -> EstimateReport:
        """Copy of the report with ``passed`` set; ungated reports pass through unchanged."""
        if report.kind == ReportKind.REPORT or report.oracle is None:
            return report
        return report.model_copy(update={"passed": EstimatorService.compare(report, threshold)})
