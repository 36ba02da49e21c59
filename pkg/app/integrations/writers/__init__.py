"""Report writers for different output formats."""

from app.integrations.writers.base import ReportWriter
from app.integrations.writers.csv_writer import CSVWriter
from app.integrations.writers.factory import get_writer
from app.integrations.writers.json_writer import JSONWriter

__all__ = [
    "ReportWriter",
    "CSVWriter",
    "JSONWriter",
    "get_writer",
]
