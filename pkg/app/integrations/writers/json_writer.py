"""JSON report writer."""

import json
import math

from pydantic import BaseModel

from app.integrations.writers.base import ReportWriter
from app.schemas.estimate import ReportBundle
from app.schemas.realization import RealizationDump


def _finite_or_text(value):
    """Replace non-finite floats, which JSON cannot hold, with "inf" / "-inf"."""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {k: _finite_or_text(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_text(v) for v in value]
    return value


def _dumps(model: BaseModel) -> str:
    payload = _finite_or_text(model.model_dump(mode="python"))
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False, default=str) + "\n"


class JSONWriter(ReportWriter):
    """Writes a versioned document with keys sorted and two-space indent."""

    def render_reports(self, bundle: ReportBundle) -> str:
        return _dumps(bundle)

    def render_realization(self, dump: RealizationDump) -> str:
        return _dumps(dump)

    @property
    def format_name(self) -> str:
        return "json"
