"""Base report writer interface."""

from abc import ABC, abstractmethod

from app.schemas.estimate import ReportBundle
from app.schemas.realization import RealizationDump


class ReportWriter(ABC):
    """Abstract base class for report writers."""

    @abstractmethod
    def render_reports(self, bundle: ReportBundle) -> str:
        """Render the reports of one command.

        Args:
            bundle: Reports with schema version and command name

        Returns:
            Text written to stdout or the output file, byte-identical for identical input
        """
        pass

    @abstractmethod
    def render_realization(self, dump: RealizationDump) -> str:
        """Render one sampled realization."""
        pass

    @property
    @abstractmethod
    def format_name(self) -> str:
        """Name accepted by --format."""
        pass
