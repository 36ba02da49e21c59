"""Tests for Monte Carlo estimators against their oracles."""

import math

import pytest

from app.core.exceptions import NoOracleError, SiteAddressError, ValidationError
from app.schemas.common import Colour
from app.schemas.estimate import EstimateReport, ReportKind
from app.services.directed_sampler import DirectedSampler
from app.services.estimator_service import EstimatorService, covariance_pair
from app.services.replica_runner import ReplicaRunner, derived_seed
from app.services.tree_service import TreeService

N = 40_000


@pytest.fixture
def estimator():
    return EstimatorService(ReplicaRunner(chunk_size=10_000, workers=1))


@pytest.mark.parametrize(
    "quantity,kwargs",
    [
        ("green_final", {}),
        ("red_final", {}),
        ("distinct_frozen_pair", {}),
        ("shared_frozen_pair", {}),
        ("containment", {"t": 0.75, "sites": [(0,), (), (1,)]}),
        ("containment", {"t": 0.4, "sites": [(), (0,), (1,), (2,)]}),
        ("containment", {"t": 0.9, "sites": [(0, 1), (0,), (), (2,)]}),
        ("single_site_green", {"t": 0.8}),
        ("single_site_green", {"t": 0.45}),
        ("cut_probability", {}),
        ("persistence_factor", {"t": 0.6, "t2": 0.9}),
    ],
)
def test_event_matches_oracle(estimator, quantity, kwargs):
    """Every event estimate lands within four standard errors of its oracle."""
    report = estimator.mc_event(quantity, N, seed=2024, **kwargs)
    assert report.n == N
    assert report.oracle is not None
    assert abs(report.z) <= 4.0
    assert EstimatorService.compare(report, 4.0)


def test_green_final_report_fields(estimator):
    """Mean, interval and parameters are filled in."""
    report = estimator.mc_event("green_final", N, seed=42)
    assert report.parameters.t == 1.0
    assert report.parameters.radius == 1
    assert report.parameters.sites == "O"
    assert report.ci95[0] < report.mean < report.ci95[1]
    assert report.stderr == pytest.approx(math.sqrt(report.mean * (1 - report.mean) / N), rel=1e-3)
    assert report.seed == 42


def test_red_and_green_partition_the_final_state(estimator):
    """With the same seed every site is red or green at t = 1."""
    green = estimator.mc_event("green_final", 10_000, seed=5)
    red = estimator.mc_event("red_final", 10_000, seed=5)
    assert green.mean + red.mean == pytest.approx(1.0, abs=1e-12)


def test_distinct_frozen_pair_gates_on_exact_value(estimator):
    """The displayed constant is carried as a candidate and sits far from the measurement."""
    report = estimator.mc_event("distinct_frozen_pair", N, seed=31)
    assert report.kind == ReportKind.EQUALITY
    assert report.oracle == pytest.approx(0.133253, abs=1e-6)
    assert report.candidates == {"displayed": pytest.approx(0.079442, abs=1e-6)}
    assert abs(report.mean - report.candidates["displayed"]) > 8 * report.stderr
    assert EstimatorService.compare(report, 4.0)


def test_path_connectivity_reports_candidates(estimator):
    """No gate; the product formula is the one the measurement supports."""
    report = estimator.mc_event("path_connectivity", N, seed=17, t=0.8, distance=2)
    assert report.kind == ReportKind.REPORT
    assert report.oracle is None
    assert set(report.candidates) == {"displayed_inclusive", "displayed_between", "product_formula"}
    assert abs(report.mean - report.candidates["product_formula"]) <= 4 * report.stderr


def test_generation_count(estimator):
    """E|G_O(t) ∩ V_n| = 3 (t - ln 2t)^2 at every depth."""
    for depth in (1, 3):
        report = estimator.mc_generation_count(0.75, depth, 20_000, seed=9)
        assert report.parameters.depth == depth
        assert abs(report.z) <= 4.0


def test_generation_count_below_one_half_is_ungated(estimator):
    report = estimator.mc_generation_count(0.4, 2, 2_000, seed=9)
    assert report.kind == ReportKind.REPORT
    assert report.oracle is None


def test_covariance_pair_distance():
    """The canonical pair has exactly d sites strictly between."""
    for d in (0, 1, 4, 11, 24):
        v, w = covariance_pair(d)
        assert TreeService.path_between(v, w).between_count == d


def test_covariance_vanishes_below_one_half(estimator):
    """Below 1/2 colours of distinct sites are independent."""
    table = estimator.mc_covariance_table(0, 0.4, 20_000, seed=4)
    assert len(table) == 9
    assert {r.parameters.colours for r in table} == {
        f"{a},{b}" for a in ("white", "green", "red") for b in ("white", "green", "red")
    }
    for report in table:
        assert report.kind == ReportKind.EQUALITY
        assert report.oracle == 0.0
        assert EstimatorService.compare(report, 4.0)


def test_covariance_above_one_half_is_bounded(estimator):
    table = estimator.mc_covariance_table(12, 0.9, 10_000, seed=4)
    for report in table:
        assert report.kind == ReportKind.UPPER_BOUND
        assert report.oracle < 5.0
        assert EstimatorService.compare(report, 4.0)


def test_single_covariance_matches_table(estimator):
    table = estimator.mc_covariance_table(3, 0.8, 5_000, seed=6)
    single = estimator.mc_covariance(3, 0.8, Colour.GREEN, Colour.RED, 5_000, seed=6)
    assert single == table[3 * Colour.GREEN + Colour.RED]


def test_estimates_are_deterministic(estimator):
    a = estimator.mc_event("containment", 8_000, seed=77, t=0.75, sites=[(0,), (), (1,)])
    b = estimator.mc_event("containment", 8_000, seed=77, t=0.75, sites=[(0,), (), (1,)])
    assert a == b


def test_directed_bound(estimator):
    """max_n F_n(t) clears 1 - 1/(2t)."""
    reports = estimator.directed_bound(0.8, [1, 2], 4_000, seed=7)
    assert [r.quantity for r in reports] == ["directed_fn", "directed_fn", "directed_fn_bound"]
    summary = reports[-1]
    assert summary.kind == ReportKind.LOWER_BOUND
    assert summary.oracle == pytest.approx(0.375)
    assert EstimatorService.compare(summary, 4.0)


def test_directed_bound_gives_each_depth_its_own_stream(estimator):
    reports = estimator.directed_bound(0.8, [2, 3], 2_000, seed=7)
    assert [r.seed for r in reports[:2]] == [derived_seed(7, 2), derived_seed(7, 3)]
    assert reports[0].seed != reports[1].seed
    assert reports[-1].seed == 7
    again = DirectedSampler.estimate_Fn(3, 0.8, 2_000, derived_seed(7, 3), runner=estimator.runner)
    assert again == reports[1]


def test_derived_seeds_differ_by_key():
    seeds = {derived_seed(7, depth) for depth in range(1, 11)}
    assert len(seeds) == 10
    assert derived_seed(7, 3) == derived_seed(7, 3)
    assert derived_seed(7, 3) != derived_seed(8, 3)


def test_fixed_point_table():
    reports = EstimatorService.fixed_point_table([0.5, 0.75, 1.0], 100_000)
    assert len(reports) == 6
    assert all(EstimatorService.compare(r) for r in reports)
    assert {r.quantity for r in reports} == {"fixed_point_residual", "zero_solution_residual"}


def test_phi_ks():
    report = EstimatorService.phi_ks(100_000, seed=1)
    assert report.kind == ReportKind.UPPER_BOUND
    assert "dkw_bound" in report.candidates
    assert EstimatorService.compare(report)


def test_invalid_requests(estimator):
    with pytest.raises(ValidationError):
        estimator.mc_event("green_final", 0, seed=1)
    with pytest.raises(ValidationError):
        estimator.mc_event("nonsense", 10, seed=1)
    with pytest.raises(ValidationError):
        estimator.mc_event("containment", 10, seed=1, t=0.7)
    with pytest.raises(SiteAddressError):
        estimator.mc_event("containment", 10, seed=1, t=0.7, sites=[(0,), (1,)])
    with pytest.raises(ValidationError):
        estimator.mc_generation_count(0.7, 0, 10, seed=1)


def test_compare_kinds():
    """Each gate kind applies its own rule."""
    equality = EstimateReport.build("q", 0.51, 0.01, 100, oracle=0.5)
    assert EstimatorService.compare(equality, 4.0)
    assert not EstimatorService.compare(equality, 0.5)

    upper = EstimateReport.build("q", -0.3, 0.01, 100, oracle=0.25, kind=ReportKind.UPPER_BOUND)
    assert not EstimatorService.compare(upper, 4.0)

    lower = EstimateReport.build("q", 0.35, 0.01, 100, oracle=0.375, kind=ReportKind.LOWER_BOUND)
    assert EstimatorService.compare(lower, 4.0)
    assert not EstimatorService.compare(lower, 1.0)

    tolerance = EstimateReport.build("q", 2e-6, 0.0, 0, oracle=0.0, kind=ReportKind.TOLERANCE, tolerance=1e-6)
    assert not EstimatorService.compare(tolerance)

    with pytest.raises(NoOracleError):
        EstimatorService.compare(EstimateReport.build("q", 0.1, 0.01, 100))


def test_with_verdict_sets_passed():
    report = EstimateReport.build("q", 0.5, 0.01, 100, oracle=0.5)
    assert EstimatorService.with_verdict(report, 4.0).passed is True
    ungated = EstimateReport.build("q", 0.5, 0.01, 100, kind=ReportKind.REPORT)
    assert EstimatorService.with_verdict(ungated).passed is None
