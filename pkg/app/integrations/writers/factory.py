"""Factory for report writers."""

from app.core.exceptions import ValidationError
from app.integrations.writers.base import ReportWriter
from app.integrations.writers.csv_writer import CSVWriter
from app.integrations.writers.json_writer import JSONWriter


def get_writer(output_format: str) -> ReportWriter:
    """Get the report writer for an output format.

    Args:
        output_format: "csv" or "json"

    Returns:
        ReportWriter instance

    Raises:
        ValidationError: If no writer handles the format
    """
    writers = [
        CSVWriter(),
        JSONWriter(),
    ]

    for writer in writers:
        if output_format.lower() == writer.format_name:
            return writer

    raise ValidationError(
        f"No writer found for format: {output_format}",
        details={"supported": [w.format_name for w in writers]},
    )
