"""Tests for the command-line entry point."""

import csv
import io
import json

import pytest

from app.core.config import get_settings
from app.core.exceptions import EXIT_IO, EXIT_USAGE
from app.main import main


def _run(capsys, argv):
    status = main(argv)
    return status, capsys.readouterr().out


def test_fixed_point_table(capsys):
    status, out = _run(capsys, ["fixed-point", "--grid", "0.5:1.0:0.25", "--steps", "100000"])
    assert status == 0
    lines = out.splitlines()
    assert lines[0].startswith("quantity,t,t2,radius")
    assert len(lines) == 1 + 3 * 2
    assert all(",true," in line for line in lines[1:])


def test_fixed_point_with_simulated_ks(capsys):
    status, out = _run(capsys, ["fixed-point", "--grid", "0.75", "--samples", "50000", "--seed", "3"])
    assert status == 0
    assert "phi_ks_distance" in out


def test_estimate_is_byte_identical(capsys):
    argv = ["estimate", "--quantity", "green_final", "--n", "20000", "--seed", "42"]
    first = _run(capsys, argv)
    second = _run(capsys, argv)
    assert first[0] == 0
    assert first == second


def test_default_seed_from_environment(capsys, monkeypatch):
    """DEFAULT_SEED applies when --seed is absent; the flag wins otherwise."""
    argv = ["estimate", "--quantity", "red_final", "--n", "5000"]
    _, explicit = _run(capsys, argv + ["--seed", "42"])

    monkeypatch.setenv("DEFAULT_SEED", "42")
    get_settings.cache_clear()
    _, from_env = _run(capsys, argv)
    _, overridden = _run(capsys, argv + ["--seed", "43"])

    assert from_env == explicit
    assert overridden != explicit


def test_containment_json(capsys):
    status, out = _run(capsys, [
        "containment", "--sites", "0,O,1", "--t", "0.75",
        "--n", "20000", "--seed", "5", "--format", "json",
    ])
    assert status == 0
    document = json.loads(out)
    report = document["reports"][0]
    assert document["command"] == "containment"
    assert report["quantity"] == "containment"
    assert report["parameters"]["sites"] == "0,O,1"
    assert report["passed"] is True


def test_covariance_all_pairs(capsys):
    status, out = _run(capsys, [
        "covariance", "--distance", "0", "--t", "0.4", "--n", "5000", "--seed", "1",
    ])
    assert status == 0
    assert len(out.splitlines()) == 1 + 9


def test_covariance_single_pair(capsys):
    status, out = _run(capsys, [
        "covariance", "--distance", "2", "--t", "0.8", "--colours", "green,red",
        "--n", "5000", "--seed", "1",
    ])
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert rows[0]["quantity"] == "covariance"
    assert rows[0]["colours"] == "green,red"


def test_generation_levels(capsys):
    status, out = _run(capsys, ["generation", "--t", "0.75", "--levels", "1:2", "--n", "5000", "--seed", "2"])
    assert status == 0
    assert len(out.splitlines()) == 1 + 2


def test_directed_fn(capsys):
    status, out = _run(capsys, ["directed-fn", "--t", "0.8", "--levels", "1:2", "--n", "2000", "--seed", "7"])
    assert status == 0
    assert "directed_fn_bound" in out


def test_dump_realization(capsys):
    status, out = _run(capsys, ["dump-realization", "--radius", "2", "--seed", "9", "--format", "json"])
    assert status == 0
    document = json.loads(out)
    assert len(document["sites"]) == 10
    assert document["seed"] == 9


def test_structure(capsys):
    status, out = _run(capsys, ["structure", "--radius", "3", "--realizations", "50", "--seed", "4"])
    assert status == 0
    assert out.count(",true,") == 6


def test_no_gate_leaves_verdict_empty(capsys):
    status, out = _run(capsys, [
        "estimate", "--quantity", "green_final", "--n", "2000", "--seed", "1", "--no-gate",
    ])
    assert status == 0
    assert ",true," not in out and ",false," not in out


def test_failed_gate_exit_status(capsys):
    """An absurd threshold makes the gate fail."""
    status, _ = _run(capsys, [
        "estimate", "--quantity", "green_final", "--n", "2000", "--seed", "1", "--threshold", "1e-9",
    ])
    assert status == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["estimate", "--quantity", "nonsense"],
        ["estimate", "--quantity", "green_final", "--n", "0"],
        ["containment", "--sites", "0,1", "--t", "0.5", "--n", "10"],
        ["containment", "--sites", "0.7", "--t", "0.5", "--n", "10"],
        ["fixed-point", "--grid", "0.2:0.4:0.1"],
        ["dump-realization", "--radius", "0"],
        ["covariance", "--distance", "2", "--t", "0.8", "--colours", "green"],
        ["no-such-command"],
    ],
)
def test_usage_errors(capsys, argv):
    status, out = _run(capsys, argv)
    assert status == EXIT_USAGE
    assert out == ""


def test_output_path_failure(capsys, tmp_path):
    status, _ = _run(capsys, [
        "fixed-point", "--grid", "0.75", "--output-path", str(tmp_path / "missing" / "out.csv"),
    ])
    assert status == EXIT_IO


def test_output_path(capsys, tmp_path):
    path = tmp_path / "reports.csv"
    status, out = _run(capsys, ["fixed-point", "--grid", "0.75", "--output-path", str(path)])
    assert status == 0
    assert out == ""
    assert path.read_text().startswith("quantity,")


def test_distinct_frozen_pair_passes_and_lists_displayed_constant(capsys):
    status, out = _run(capsys, ["estimate", "--quantity", "distinct_frozen_pair", "--n", "20000", "--seed", "11"])
    assert status == 0
    (row,) = csv.DictReader(io.StringIO(out))
    assert row["passed"] == "true"
    assert row["candidates"].startswith("displayed=0.0794")
