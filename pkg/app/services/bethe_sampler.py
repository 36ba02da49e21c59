"""Exact sampling of the process on a finite patch of the degree-3 tree.

Outward boundary edges of the patch get independent F-distributed freeze
times, sites get independent uniform activation times, and the recursion
Y(j -> i) = phi(min, max of Y(i -> k), Y(i -> l), U_i) is applied in two
sweeps: leaves inward for edges pointing away from O, then O outward for
edges pointing towards O. The result is the exact restriction of the
infinite-lattice law to the patch.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np

from app.core.exceptions import InvariantViolation, PropagationError, ValidationError
from app.core.logging import get_logger
from app.models.realization import BallBatch, BallRealization
from app.models.topology import OUTSIDE, SubtreeTopology
from app.schemas.common import INF, Colour
from app.services.distribution_service import phi_of_pair, sample_F
from app.utils.validators import SiteId, format_address

logger = get_logger(__name__)

_OTHER_SLOTS = {0: (1, 2), 1: (0, 2), 2: (0, 1)}


@lru_cache(maxsize=32)
def _ball_topology(radius: int) -> SubtreeTopology:
    return SubtreeTopology.ball(radius)


@lru_cache(maxsize=64)
def _sweep_plan(topology: SubtreeTopology) -> Tuple[list, list]:
    """Per-depth index arrays for the inward and outward sweeps."""
    inward = []
    for d in range(topology.max_depth, 0, -1):
        sites = topology.level(d)
        inward.append((
            sites,
            topology.parents[sites],
            topology.slot_back[sites, 0],
        ))

    outward = []
    for d in range(0, topology.max_depth):
        rows, slots, targets = [], [], []
        for i in topology.level(d):
            child_slots = (0, 1, 2) if d == 0 else (1, 2)
            for s in child_slots:
                c = topology.slot_site[i, s]
                if c != OUTSIDE:
                    rows.append(i)
                    slots.append(s)
                    targets.append(c)
        if rows:
            rows_arr = np.array(rows, dtype=np.int64)
            other = np.array([_OTHER_SLOTS[s] for s in slots], dtype=np.int64)
            outward.append((rows_arr, other[:, 0], other[:, 1], np.array(targets, dtype=np.int64)))
    return inward, outward


def _checked(values: np.ndarray, what: str) -> np.ndarray:
    if np.isnan(values).any():
        raise PropagationError(f"{what} read before it was written")
    return values


class BetheSampler:
    """Service for exact finite-patch realizations."""

    @staticmethod
    def ball_topology(radius: int) -> SubtreeTopology:
        return _ball_topology(radius)

    @staticmethod
    def sample_batch(topology: SubtreeTopology, replicas: int, rng: np.random.Generator) -> BallBatch:
        """Draw U on every site and F-distributed Y on every boundary edge.

        Args:
            topology: Patch to sample
            replicas: Number of independent realizations
            rng: Random generator owned by the caller

        Returns:
            Unpropagated batch
        """
        u = rng.random((replicas, topology.size))
        boundary = np.asarray(sample_F(rng, (replicas, topology.n_boundary)), dtype=float)
        return BetheSampler.batch_from_values(topology, u, boundary)

    @staticmethod
    def batch_from_values(topology: SubtreeTopology, u: np.ndarray, boundary: np.ndarray) -> BallBatch:
        """Unpropagated batch from given activation and boundary freeze times.

        Args:
            topology: Patch the values belong to
            u: (replicas, sites) activation times in site order
            boundary: (replicas, boundary edges) freeze times in ``topology.boundary_edges`` order

        Raises:
            ValidationError: If the shapes do not match the patch
        """
        u = np.asarray(u, dtype=float)
        boundary = np.asarray(boundary, dtype=float)
        if u.ndim != 2 or u.shape[1] != topology.size or boundary.shape != (u.shape[0], topology.n_boundary):
            raise ValidationError(
                "Values do not match the patch",
                details={"u": list(u.shape), "boundary": list(boundary.shape), "sites": topology.size},
            )

        out = np.full((u.shape[0], topology.size, 3), np.nan)
        if topology.n_boundary:
            rows, slots = np.array(topology.boundary_edges, dtype=np.int64).T
            out[:, rows, slots] = boundary
        return BallBatch(topology=topology, u=u, boundary=boundary, out=out)

    @staticmethod
    def from_values(topology: SubtreeTopology, u, boundary) -> BallRealization:
        """Single-realization form of batch_from_values."""
        batch = BetheSampler.batch_from_values(topology, np.atleast_2d(u), np.atleast_2d(boundary))
        return batch.realization(0)

    @staticmethod
    def sample_ball(radius: int, rng: np.random.Generator) -> BallRealization:
        """U on V_{<=radius} and one F-distributed Y per outward boundary edge.

        Raises:
            ValidationError: If radius < 1
        """
        batch = BetheSampler.sample_batch(_ball_topology(radius), 1, rng)
        return batch.realization(0)

    @staticmethod
    def propagate_batch(batch: BallBatch) -> BallBatch:
        """Complete Y on every directed edge of the patch and compute Z.

        Raises:
            PropagationError: If boundary values are missing or an edge is read before written
        """
        topology = batch.topology
        out = batch.out.copy()
        u = batch.u
        inward, outward = _sweep_plan(topology)

        for sites, parents, back in inward:
            values = phi_of_pair(
                _checked(out[:, sites, 1], "inward edge"),
                _checked(out[:, sites, 2], "inward edge"),
                u[:, sites],
            )
            out[:, parents, back] = values

        for rows, slot_a, slot_b, targets in outward:
            values = phi_of_pair(
                _checked(out[:, rows, slot_a], "outward edge"),
                _checked(out[:, rows, slot_b], "outward edge"),
                u[:, rows],
            )
            out[:, targets, 0] = values

        _checked(out, "directed edge")
        z = np.where(out >= u[:, :, None], out, INF).min(axis=2)

        BetheSampler._check_dual_freeze(topology, out, z)
        logger.debug("Batch propagated", sites=topology.size, replicas=batch.replicas)
        return BallBatch(topology=topology, u=u, boundary=batch.boundary, out=out, z=z)

    @staticmethod
    def propagate(realization: BallRealization) -> BallRealization:
        """Single-realization form of propagate_batch."""
        return BetheSampler.propagate_batch(realization.as_batch()).realization(0)

    @staticmethod
    def incoming_freeze(topology: SubtreeTopology, out: np.ndarray) -> np.ndarray:
        """min over neighbours j of Y(j -> i); NaN where a neighbour is outside the patch."""
        inner = topology.slot_site != OUTSIDE
        source = np.where(inner, topology.slot_site, 0)
        back = np.where(inner, topology.slot_back, 0)
        incoming = out[:, source, back]
        incoming = np.where(inner[None, :, :], incoming, np.nan)
        return incoming.min(axis=2)

    @staticmethod
    def _check_dual_freeze(topology: SubtreeTopology, out: np.ndarray, z: np.ndarray) -> None:
        full = (topology.slot_site != OUTSIDE).all(axis=1)
        if not full.any():
            return
        z_in = BetheSampler.incoming_freeze(topology, out)
        mismatch = (z_in[:, full] != z[:, full])
        if mismatch.any():
            replica, column = np.argwhere(mismatch)[0]
            site = topology.addresses[np.flatnonzero(full)[column]]
            raise InvariantViolation(
                "dual-freeze-time",
                "incoming and outgoing forms of Z differ",
                details={"replica": int(replica), "site": format_address(site)},
            )

    @staticmethod
    def freeze_time(realization: BallRealization, site: SiteId) -> float:
        """Z_i, checked against min{Y(i -> j) : Y(i -> j) >= U_i} when all incoming edges are sampled.

        Raises:
            SiteAddressError: If the site is outside the patch
            InvariantViolation: If the two forms disagree
        """
        z = realization.freeze(site)
        u = realization.activation(site)
        outgoing = [y for y in realization.outgoing(site) if y >= u]
        z_out = min(outgoing) if outgoing else INF
        if realization.has_full_incoming(site):
            z_in = min(realization.incoming(site))
            if z_in != z_out:
                raise InvariantViolation(
                    "dual-freeze-time",
                    "incoming and outgoing forms of Z differ",
                    details={"site": format_address(site), "incoming": z_in, "outgoing": z_out},
                )
        if z_out != z:
            raise InvariantViolation(
                "dual-freeze-time", "stored Z differs from its definition",
                details={"site": format_address(site)},
            )
        return z

    @staticmethod
    def colour(realization: BallRealization, site: SiteId, t: float) -> Colour:
        """WHITE iff U_i > t, RED iff Z_i <= t, GREEN otherwise."""
        u = realization.activation(site)
        if u > t:
            return Colour.WHITE
        if realization.freeze(site) <= t:
            return Colour.RED
        return Colour.GREEN
