"""CSV report writer."""

import csv
import io
from typing import Dict, List, Optional

from app.integrations.writers.base import ReportWriter
from app.schemas.common import format_time
from app.schemas.estimate import EstimateReport, ReportBundle
from app.schemas.realization import RealizationDump

REPORT_COLUMNS = [
    "quantity", "t", "t2", "radius", "depth", "sites", "distance", "colours",
    "n", "mean", "stderr", "ci95_low", "ci95_high",
    "oracle", "z", "kind", "tolerance", "candidates", "passed", "seed",
]
REALIZATION_COLUMNS = ["site", "depth", "u", "z", "target", "y"]


def _number(value: Optional[float]) -> str:
    return "" if value is None else format_time(value)


def _plain(value) -> str:
    return "" if value is None else str(value)


def _candidates(candidates: Dict[str, float]) -> str:
    """One cell: ``name=value`` pairs sorted by name, joined by ``;``."""
    return ";".join(f"{name}={format_time(candidates[name])}" for name in sorted(candidates))


def _row(report: EstimateReport) -> List[str]:
    p = report.parameters
    passed = "" if report.passed is None else str(report.passed).lower()
    return [
        report.quantity,
        _number(p.t),
        _number(p.t2),
        _plain(p.radius),
        _plain(p.depth),
        _plain(p.sites),
        _plain(p.distance),
        _plain(p.colours),
        str(report.n),
        _number(report.mean),
        _number(report.stderr),
        _number(report.ci95[0]),
        _number(report.ci95[1]),
        _number(report.oracle),
        _number(report.z),
        report.kind.value,
        _number(report.tolerance),
        _candidates(report.candidates),
        passed,
        _plain(report.seed),
    ]


class CSVWriter(ReportWriter):
    """Writes one row per report with a fixed column order."""

    def render_reports(self, bundle: ReportBundle) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for report in bundle.reports:
            writer.writerow(_row(report))
        return buffer.getvalue()

    def render_realization(self, dump: RealizationDump) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REALIZATION_COLUMNS)
        writer.writerows(dump.csv_rows())
        return buffer.getvalue()

    @property
    def format_name(self) -> str:
        return "csv"
