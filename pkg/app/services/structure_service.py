"""Structural invariants checked on every sampled realization.

Each check contributes (cases examined, cases failed); the counts are
additive, so the suite runs through the same chunked replica runner as the
Monte Carlo estimators.
"""

from functools import partial
from typing import List, Optional, Tuple

import numpy as np

from app.core.exceptions import ValidationError
from app.core.logging import get_logger
from app.models.realization import BallBatch
from app.models.topology import OUTSIDE, SubtreeTopology
from app.schemas.estimate import EstimateParameters, EstimateReport, ReportKind
from app.services.bethe_sampler import BetheSampler
from app.services.cluster_service import ClusterService
from app.services.distribution_service import phi_of_pair
from app.services.replica_runner import ReplicaRunner

logger = get_logger(__name__)

CHECKS = (
    "recursion_reevaluation",
    "dual_freeze_time",
    "monotone_colours",
    "frozen_cluster_reaches_boundary",
    "pre_freeze_cluster_shares_z",
    "activation_distinct_from_y",
)
MONOTONE_GRID = tuple(np.linspace(0.0, 1.0, 41))

_OTHER_SLOTS = ((1, 2), (0, 2), (0, 1))


def recursion_counts(batch: BallBatch) -> Tuple[int, int]:
    """Re-evaluate Y(j -> i) from the values leaving i, on every edge inside the patch."""
    topology = batch.topology
    checked = failed = 0
    for slot, (a, b) in enumerate(_OTHER_SLOTS):
        sites = np.flatnonzero(topology.slot_site[:, slot] != OUTSIDE)
        if sites.size == 0:
            continue
        expected = phi_of_pair(batch.out[:, sites, a], batch.out[:, sites, b], batch.u[:, sites])
        sources = topology.slot_site[sites, slot]
        back = topology.slot_back[sites, slot]
        actual = batch.out[:, sources, back]
        checked += expected.size
        failed += int(np.count_nonzero(expected != actual))
    return checked, failed


def _dual_counts(batch: BallBatch) -> Tuple[int, int]:
    full = (batch.topology.slot_site != OUTSIDE).all(axis=1)
    z_in = BetheSampler.incoming_freeze(batch.topology, batch.out)[:, full]
    return z_in.size, int(np.count_nonzero(z_in != batch.z[:, full]))


def _monotone_counts(batch: BallBatch) -> Tuple[int, int]:
    codes = np.stack([batch.colours(t) for t in MONOTONE_GRID])
    steps = np.diff(codes.astype(np.int16), axis=0)
    # WHITE=0 < GREEN=1 < RED=2; no step may go backwards
    backwards = (steps < 0).any(axis=0)
    return backwards.size, int(np.count_nonzero(backwards))


def _cluster_counts(batch: BallBatch) -> Tuple[int, int, int, int]:
    """Frozen clusters reaching the outer generation, and pre-freeze clusters sharing Z."""
    reached = unreached = shared = split = 0
    addresses = batch.topology.addresses
    for k in range(batch.replicas):
        realization = batch.realization(k)
        z = realization.z
        seen = set()
        for i in np.flatnonzero(np.isfinite(z)):
            if i in seen:
                continue
            site = addresses[i]
            frozen = ClusterService.frozen_cluster(realization, site, 1.0)
            seen.update(realization.index(s) for s in frozen.sites)
            if frozen.truncated:
                reached += 1
            else:
                unreached += 1

            before = ClusterService.cluster_before_freeze(realization, site)
            z_i = z[i]
            if all(z[realization.index(s)] == z_i for s in before.sites):
                shared += 1
            else:
                split += 1
    return reached + unreached, unreached, shared + split, split


def _distinct_counts(batch: BallBatch) -> Tuple[int, int]:
    failed = 0
    for k in range(batch.replicas):
        if np.intersect1d(batch.u[k], batch.out[k].ravel()).size:
            failed += 1
    return batch.replicas, failed


def _structure_chunk(topology: SubtreeTopology, count: int, rng: np.random.Generator) -> np.ndarray:
    batch = BetheSampler.propagate_batch(BetheSampler.sample_batch(topology, count, rng))
    clusters = _cluster_counts(batch)
    counts = (
        recursion_counts(batch),
        _dual_counts(batch),
        _monotone_counts(batch),
        clusters[:2],
        clusters[2:],
        _distinct_counts(batch),
    )
    return np.array([value for pair in counts for value in pair], dtype=float)


class StructureService:
    """Service for the structural invariant suite."""

    @staticmethod
    def run_suite(
        radius: int,
        realizations: int,
        seed: int,
        runner: Optional[ReplicaRunner] = None,
    ) -> List[EstimateReport]:
        """Run every structural check on fresh realizations of a ball.

        Args:
            radius: Ball radius (>= 1)
            realizations: Number of realizations
            seed: Master seed

        Returns:
            One report per check: ``mean`` is the failure count out of ``n`` cases,
            gated at zero tolerance

        Raises:
            ValidationError: If radius < 1 or realizations < 1
        """
        if realizations < 1:
            raise ValidationError("Realization count must be at least 1", details={"n": realizations})
        topology = BetheSampler.ball_topology(radius)
        runner = runner or ReplicaRunner()
        totals = runner.run(
            partial(_structure_chunk, topology),
            realizations,
            seed,
            chunk_size=runner.chunk_size_for(topology.size * 48),
        )

        reports = []
        for position, check in enumerate(CHECKS):
            cases, failures = totals[2 * position], totals[2 * position + 1]
            reports.append(EstimateReport.build(
                f"structure_{check}",
                float(failures),
                0.0,
                int(cases),
                parameters=EstimateParameters(radius=radius),
                oracle=0.0,
                kind=ReportKind.TOLERANCE,
                tolerance=0.0,
                seed=seed,
            ))
            if failures:
                logger.warning("Structural check failed", check=check, failures=int(failures), cases=int(cases))

        logger.info("Structural suite finished", radius=radius, realizations=realizations)
        return reports

