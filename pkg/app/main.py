"""Command-line entry point.

Usage: python -m app.main <command> [flags]

Reports go to stdout (or --output-path), logs to stderr. Exit status is 0
when every gate passes, 1 when a gate fails, 2 on invalid usage, 3 on an
output failure and 4 on an internal invariant failure.
"""

import argparse
import hashlib
import sys
from typing import Callable, Dict, List, Optional

from app.core.config import get_settings
from app.core.decorators import log_command
from app.core.exceptions import EXIT_INTERNAL, FrozenPercolationError
from app.core.logging import clear_run_context, configure_logging, get_logger, set_run_context
from app.schemas.estimate import EstimateReport
from app.schemas.realization import RealizationDump
from app.schemas.run_config import RunConfig
from app.services.bethe_sampler import BetheSampler
from app.services.estimator_service import EVENT_QUANTITIES, EstimatorService
from app.services.replica_runner import ReplicaRunner, chunk_rng
from app.services.report_service import ReportService
from app.services.structure_service import StructureService

logger = get_logger(__name__)


def _finish(config: RunConfig, reports: List[EstimateReport]) -> int:
    reports = ReportService.apply_gates(reports, config.threshold, config.gate)
    ReportService(config.output_format, config.output_path).emit_reports(
        config.command, reports, config.seed
    )
    return ReportService.exit_status(reports)


@log_command()
def run_fixed_point(config: RunConfig) -> int:
    reports = EstimatorService.fixed_point_table(config.grid, config.steps)
    if config.samples:
        reports.append(EstimatorService.phi_ks(config.samples, config.seed))
    return _finish(config, reports)


@log_command()
def run_estimate(config: RunConfig) -> int:
    report = EstimatorService().mc_event(
        config.quantity,
        config.n,
        config.seed,
        t=config.t,
        t2=config.t2,
        sites=config.sites,
        distance=config.distance,
    )
    return _finish(config, [report])


@log_command()
def run_generation(config: RunConfig) -> int:
    estimator = EstimatorService()
    reports = [
        estimator.mc_generation_count(config.t, depth, config.n, config.seed)
        for depth in config.levels
    ]
    return _finish(config, reports)


@log_command()
def run_containment(config: RunConfig) -> int:
    report = EstimatorService().mc_event(
        "containment", config.n, config.seed, t=config.t, sites=config.sites
    )
    return _finish(config, [report])


@log_command()
def run_covariance(config: RunConfig) -> int:
    estimator = EstimatorService()
    if config.colours is None:
        reports = estimator.mc_covariance_table(config.distance, config.t, config.n, config.seed)
    else:
        c1, c2 = config.colours
        reports = [estimator.mc_covariance(config.distance, config.t, c1, c2, config.n, config.seed)]
    return _finish(config, reports)


@log_command()
def run_directed_fn(config: RunConfig) -> int:
    reports = EstimatorService().directed_bound(config.t, config.levels, config.n, config.seed)
    return _finish(config, reports)


@log_command()
def run_dump_realization(config: RunConfig) -> int:
    realization = BetheSampler.propagate(
        BetheSampler.sample_ball(config.radius, chunk_rng(config.seed, 0))
    )
    dump = RealizationDump.from_realization(
        realization, config.seed, get_settings().SCHEMA_VERSION
    )
    ReportService(config.output_format, config.output_path).emit_realization(dump)
    return 0


@log_command()
def run_structure(config: RunConfig) -> int:
    reports = StructureService.run_suite(
        config.radius, config.realizations, config.seed, runner=ReplicaRunner()
    )
    return _finish(config, reports)


HANDLERS: Dict[str, Callable[[RunConfig], int]] = {
    "fixed-point": run_fixed_point,
    "estimate": run_estimate,
    "generation": run_generation,
    "containment": run_containment,
    "covariance": run_covariance,
    "directed-fn": run_directed_fn,
    "dump-realization": run_dump_realization,
    "structure": run_structure,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment family."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="Replica count (default: DEFAULT_REPLICAS).")
    common.add_argument("--seed", type=int, default=None, help="Master seed (default: DEFAULT_SEED, else 0).")
    common.add_argument("--format", dest="output_format", choices=["csv", "json"], default=None)
    common.add_argument("--output-path", type=str, default=None, help="Write here instead of stdout.")
    common.add_argument("--threshold", type=float, default=None, help="z-score gate (default: Z_THRESHOLD).")
    common.add_argument("--no-gate", action="store_true", help="Report without judging.")

    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description="Frozen percolation on the degree-3 tree: exact sampling and oracle checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixed-point", parents=[common], help="Quadrature residuals of the freeze-time law.")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--grid", type=str, default=None, help="start:stop:step within [0.5, 1].")
    p.add_argument("--samples", type=int, default=None, help="Triples for the simulated KS check.")

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo estimate of one event probability.")
    p.add_argument("--quantity", type=str, required=True, choices=list(EVENT_QUANTITIES))
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--t2", type=float, default=None)
    p.add_argument("--sites", type=str, default=None, help="Comma-separated addresses, '' or O for the root.")
    p.add_argument("--distance", type=int, default=None)

    p = sub.add_parser("generation", parents=[common], help="Mean size of the green path-cluster at depth n.")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--levels", type=str, default=None, help="a:b or a single depth.")

    p = sub.add_parser("containment", parents=[common], help="P(a connected set is entirely green at t).")
    p.add_argument("--sites", type=str, required=True)
    p.add_argument("--t", type=float, required=True)

    p = sub.add_parser("covariance", parents=[common], help="Colour covariance of two distant sites.")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--colours", type=str, default=None, help="c1,c2 or all (default: all).")

    p = sub.add_parser("directed-fn", parents=[common], help="Root-red probability on directed trees.")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--levels", type=str, default=None, help="a:b depth range.")

    p = sub.add_parser("dump-realization", parents=[common], help="One full realization on a ball.")
    p.add_argument("--radius", type=int, default=None)

    p = sub.add_parser("structure", parents=[common], help="Structural invariant suite.")
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--realizations", type=int, default=None)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    settings = get_settings()
    values = {k: v for k, v in vars(args).items() if k != "no_gate"}
    if values.get("seed") is None:
        values["seed"] = settings.DEFAULT_SEED if settings.DEFAULT_SEED is not None else 0
    if values.get("n") is None:
        values["n"] = settings.DEFAULT_REPLICAS
    if values.get("output_format") is None:
        values["output_format"] = settings.OUTPUT_FORMAT
    if values.get("threshold") is None:
        values["threshold"] = settings.Z_THRESHOLD
    if values.get("steps") is None:
        values["steps"] = settings.QUADRATURE_STEPS
    values["gate"] = not args.no_gate
    return RunConfig.build(**values)


def _run_id(command: str, seed: int) -> str:
    return hashlib.sha256(f"{command}:{seed}".encode()).hexdigest()[:16]


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit status."""
    settings = get_settings()
    configure_logging(settings.LOG_LEVEL, settings.APP_ENV)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = _config_from_args(args)
        set_run_context(
            _run_id(config.command, config.seed),
            app=settings.APP_NAME,
            command=config.command,
            seed=config.seed,
        )
        return HANDLERS[config.command](config)
    except FrozenPercolationError as e:
        return e.exit_code
    except Exception as e:
        logger.error(
            "Unhandled exception",
            exception_type=type(e).__name__,
            exception_message=str(e),
            exc_info=True,
        )
        return EXIT_INTERNAL
    finally:
        clear_run_context()


if __name__ == "__main__":
    sys.exit(main())
