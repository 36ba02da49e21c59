"""Tests for exact patch sampling and freeze-time propagation."""

import math

import numpy as np
import pytest
from scipy.stats import kstwo

from app.core.exceptions import PreconditionError, PropagationError, ValidationError
from app.models.realization import BallBatch
from app.models.topology import OUTSIDE, SubtreeTopology
from app.schemas.common import Colour
from app.services.bethe_sampler import BetheSampler
from app.services.distribution_service import ks_distance_to_F


def test_sample_batch_shapes(rng):
    """U per site, Y per boundary edge, NaN elsewhere before propagation."""
    topology = BetheSampler.ball_topology(2)
    batch = BetheSampler.sample_batch(topology, 7, rng)
    assert batch.u.shape == (7, 10)
    assert batch.boundary.shape == (7, 12)
    assert batch.out.shape == (7, 10, 3)
    assert not batch.propagated
    assert np.isnan(batch.out[:, 0, :]).all()

    finite = batch.boundary[np.isfinite(batch.boundary)]
    assert ((finite > 0.5) & (finite <= 1.0)).all()


def test_unpropagated_batch_has_no_colours(rng):
    batch = BetheSampler.sample_batch(BetheSampler.ball_topology(1), 3, rng)
    with pytest.raises(PreconditionError):
        batch.colours(0.5)


def test_propagation_fills_every_edge(small_batch):
    """Every directed edge gets a value and Z is defined everywhere."""
    assert small_batch.propagated
    assert not np.isnan(small_batch.out).any()
    assert small_batch.z.shape == small_batch.u.shape


def test_freeze_time_is_at_least_activation(small_batch):
    """Z_i >= U_i, finite freeze times lie in [1/2, 1]."""
    z, u = small_batch.z, small_batch.u
    assert (z >= u).all()
    finite = z[np.isfinite(z)]
    assert ((finite >= 0.5) & (finite <= 1.0)).all()


def test_dual_freeze_time_on_interior_sites(realization):
    """Incoming and outgoing forms of Z agree wherever both are defined."""
    for site in realization.topology.addresses:
        z = BetheSampler.freeze_time(realization, site)
        if realization.has_full_incoming(site):
            assert min(realization.incoming(site)) == z


def test_activation_times_differ_from_edge_values(small_batch):
    """No U coincides with any Y."""
    for k in range(small_batch.replicas):
        assert np.intersect1d(small_batch.u[k], small_batch.out[k].ravel()).size == 0


def test_colour_matches_vector_form(realization):
    """Scalar and vectorised colours agree at several times."""
    for t in (0.3, 0.6, 0.8, 1.0):
        codes = realization.colours(t)
        for k, site in enumerate(realization.topology.addresses):
            assert BetheSampler.colour(realization, site, t) == Colour(codes[k])


def test_colours_are_monotone_in_time(small_batch):
    """WHITE -> GREEN -> RED, never backwards."""
    grid = np.linspace(0.0, 1.0, 21)
    codes = np.stack([small_batch.colours(t) for t in grid])
    assert (np.diff(codes.astype(int), axis=0) >= 0).all()


def test_missing_boundary_value_is_reported(rng):
    """A boundary edge without a value cannot be propagated."""
    topology = BetheSampler.ball_topology(2)
    batch = BetheSampler.sample_batch(topology, 4, rng)
    out = batch.out.copy()
    row, slot = topology.boundary_edges[0]
    out[:, row, slot] = np.nan
    broken = BallBatch(topology=topology, u=batch.u, boundary=batch.boundary, out=out)
    with pytest.raises(PropagationError):
        BetheSampler.propagate_batch(broken)


def test_sampling_is_deterministic():
    """Same seed, same realization."""
    a = BetheSampler.propagate(BetheSampler.sample_ball(2, np.random.default_rng(11)))
    b = BetheSampler.propagate(BetheSampler.sample_ball(2, np.random.default_rng(11)))
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.out, b.out)
    np.testing.assert_array_equal(a.z, b.z)


def test_edge_values_inside_the_ball_follow_F():
    """Y(O -> (0,)) computed from the boundary is again F-distributed."""
    n = 20_000
    topology = BetheSampler.ball_topology(2)
    batch = BetheSampler.propagate_batch(
        BetheSampler.sample_batch(topology, n, np.random.default_rng(99))
    )
    assert ks_distance_to_F(batch.out[:, 0, 0]) < kstwo.isf(1e-3, n)


def test_red_frequency_at_root(rng):
    """P(O is red at t = 1) is 1 - ((3/2) ln^2 2 - 1/2)."""
    n = 40_000
    topology = BetheSampler.ball_topology(1)
    batch = BetheSampler.propagate_batch(BetheSampler.sample_batch(topology, n, rng))
    red = np.count_nonzero(batch.colours(1.0)[:, 0] == Colour.RED) / n
    expected = 1.0 - (1.5 * math.log(2) ** 2 - 0.5)
    assert abs(red - expected) <= 4 * math.sqrt(expected * (1 - expected) / n)


def test_spanning_patch_propagates(rng):
    """A thin patch is sampled and propagated like a ball."""
    topology = SubtreeTopology.spanning([(0, 0, 0, 0), (1, 0, 0)])
    batch = BetheSampler.propagate_batch(BetheSampler.sample_batch(topology, 50, rng))
    assert batch.z.shape == (50, topology.size)
    assert not np.isnan(batch.out).any()
    inner = (topology.slot_site != OUTSIDE).all(axis=1)
    z_in = BetheSampler.incoming_freeze(topology, batch.out)
    np.testing.assert_array_equal(z_in[:, inner], batch.z[:, inner])


def test_realization_accessors(realization):
    """Y lookups by site pair match the outgoing table."""
    assert realization.radius == 3
    assert realization.y((), (1,)) == realization.outgoing(())[1]
    assert realization.y((0,), ()) == realization.outgoing((0,))[0]
    assert realization.has_full_incoming(())
    assert not realization.has_full_incoming((0, 0, 0))


def _child_boundary(topology, values):
    """Boundary vector giving both outward edges of child ``c`` of O the value ``values[c]``."""
    return [values[topology.addresses[row]] for row, _ in topology.boundary_edges]


def test_all_infinite_boundary_never_freezes(rng):
    """Radius 1, all six boundary values infinite: every Y and every Z is infinite."""
    topology = BetheSampler.ball_topology(1)
    realization = BetheSampler.propagate(
        BetheSampler.from_values(topology, rng.random(4), [math.inf] * 6)
    )
    assert np.isinf(realization.out).all()
    assert np.isinf(realization.z).all()


def test_edge_value_passes_through_activated_child():
    """Both boundary values out of c are 0.9 and U_c = 0.4, so Y(O -> c) = 0.9."""
    topology = BetheSampler.ball_topology(1)
    boundary = _child_boundary(topology, {(0,): 0.9, (1,): math.inf, (2,): math.inf})
    realization = BetheSampler.propagate(
        BetheSampler.from_values(topology, [0.5, 0.4, 0.8, 0.8], boundary)
    )
    assert realization.y((), (0,)) == 0.9
    assert realization.out[0, 0] == 0.9
    assert BetheSampler.freeze_time(realization, (0,)) == 0.9


def test_freeze_time_is_smallest_incoming_value():
    """Incoming {0.8, inf, 0.6} at O gives Z_O = 0.6."""
    topology = BetheSampler.ball_topology(1)
    out = np.full((1, topology.size, 3), np.nan)
    out[0, 1:, 0] = [0.8, math.inf, 0.6]
    assert BetheSampler.incoming_freeze(topology, out)[0, 0] == 0.6


def test_freeze_time_from_values_around_the_root():
    """Y(O -> c) = {0.8, inf, 0.6} with U_O = 0.5: both forms of Z_O give 0.6."""
    topology = BetheSampler.ball_topology(1)
    boundary = _child_boundary(topology, {(0,): 0.8, (1,): math.inf, (2,): 0.6})
    realization = BetheSampler.propagate(
        BetheSampler.from_values(topology, [0.5, 0.3, 0.7, 0.2], boundary)
    )
    assert realization.outgoing(()) == [0.8, math.inf, 0.6]
    assert realization.incoming(()) == [0.6, 0.6, 0.8]
    assert BetheSampler.freeze_time(realization, ()) == 0.6


def test_colour_at_the_freeze_time_is_red():
    """U = 0.3, Z = 0.7: white before 0.3, green until 0.7, red from 0.7 on."""
    topology = BetheSampler.ball_topology(1)
    realization = BetheSampler.propagate(
        BetheSampler.from_values(topology, [0.3, 0.1, 0.1, 0.1], [0.7] * 6)
    )
    assert realization.freeze(()) == 0.7
    assert BetheSampler.colour(realization, (), 0.7) == Colour.RED
    assert BetheSampler.colour(realization, (), 0.69) == Colour.GREEN
    assert BetheSampler.colour(realization, (), 0.3) == Colour.GREEN
    assert BetheSampler.colour(realization, (), 0.29) == Colour.WHITE


def test_from_values_rejects_wrong_shapes():
    topology = BetheSampler.ball_topology(1)
    with pytest.raises(ValidationError):
        BetheSampler.from_values(topology, [0.5, 0.5, 0.5], [0.7] * 6)
    with pytest.raises(ValidationError):
        BetheSampler.from_values(topology, [0.5] * 4, [0.7] * 5)
