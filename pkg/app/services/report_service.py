"""Report service for gating and emitting command results."""

import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import get_settings
from app.core.exceptions import EXIT_GATE_FAILED, StorageError
from app.core.logging import get_logger
from app.integrations.writers import ReportWriter, get_writer
from app.schemas.estimate import EstimateReport, ReportBundle, ReportKind
from app.schemas.realization import RealizationDump
from app.services.estimator_service import EstimatorService

logger = get_logger(__name__)


class ReportService:
    """Service for turning reports into output and an exit status."""

    def __init__(self, output_format: Optional[str] = None, output_path: Optional[str] = None):
        """Initialize report service.

        Args:
            output_format: "csv" or "json" (default: configured OUTPUT_FORMAT)
            output_path: File to write; stdout when None
        """
        self.writer: ReportWriter = get_writer(output_format or get_settings().OUTPUT_FORMAT)
        self.output_path = output_path

    @staticmethod
    def apply_gates(
        reports: List[EstimateReport], threshold: float, gate: bool = True
    ) -> List[EstimateReport]:
        """Set ``passed`` on every gated report; with gate off, reports are left unjudged."""
        if not gate:
            return list(reports)
        return [EstimatorService.with_verdict(r, threshold) for r in reports]

    @staticmethod
    def exit_status(reports: List[EstimateReport]) -> int:
        """0 when every gated report passed, EXIT_GATE_FAILED otherwise."""
        failed = [r.quantity for r in reports if r.kind != ReportKind.REPORT and r.passed is False]
        if failed:
            logger.warning("Gates failed", quantities=failed)
            return EXIT_GATE_FAILED
        return 0

    def emit_reports(self, command: str, reports: List[EstimateReport], seed: Optional[int]) -> None:
        bundle = ReportBundle(
            schema_version=get_settings().SCHEMA_VERSION,
            command=command,
            seed=seed,
            reports=reports,
        )
        self._write(self.writer.render_reports(bundle))
        logger.info("Reports emitted", command=command, count=len(reports), format=self.writer.format_name)

    def emit_realization(self, dump: RealizationDump) -> None:
        self._write(self.writer.render_realization(dump))
        logger.info("Realization emitted", sites=len(dump.sites), format=self.writer.format_name)

    def _write(self, text: str) -> None:
        """Write to the output path, or stdout.

        Raises:
            StorageError: If the output path cannot be written
        """
        if self.output_path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            Path(self.output_path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise StorageError("write", str(e), details={"path": self.output_path})
