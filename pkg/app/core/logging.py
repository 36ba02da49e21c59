"""Structured logging for command runs.

Logs go to stderr; stdout carries only the emitted reports.
"""

import logging
import math
import sys
from typing import Any, Optional

import numpy as np
import structlog
from structlog.processors import CallsiteParameter

_LEVEL_COLOURS = {
    "DEBUG": "\033[36m",
    "INFO": "\033[32m",
    "WARNING": "\033[33m",
    "ERROR": "\033[31m",
    "CRITICAL": "\033[35m",
}


def _colour_level(logger, method_name, event_dict):
    level = event_dict.get("level", "").upper()
    if level in _LEVEL_COLOURS:
        event_dict["level"] = f"{_LEVEL_COLOURS[level]}{level}\033[0m"
    return event_dict


def _short_run_id(logger, method_name, event_dict):
    if "run_id" in event_dict:
        event_dict["run_id"] = f"[run:{event_dict['run_id'][:8]}]"
    return event_dict


def _plain_numbers(logger, method_name, event_dict):
    """numpy scalars to Python numbers, infinities to "inf"."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            value = value.item()
        if isinstance(value, float) and math.isinf(value):
            value = "inf" if value > 0 else "-inf"
        event_dict[key] = value
    return event_dict


def _stderr_logger(*args: Any) -> structlog.PrintLogger:
    return structlog.PrintLogger(file=sys.stderr)


def configure_logging(log_level: str = "INFO", app_env: str = "development") -> None:
    """Configure structlog for one process.

    Args:
        log_level: DEBUG, INFO, WARNING, ERROR or CRITICAL
        app_env: ``development`` renders coloured console lines, anything
            else renders one JSON object per line
    """
    level = getattr(logging, log_level.upper())
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        _plain_numbers,
    ]

    if app_env.lower() == "development" or level == logging.DEBUG:
        processors += [
            structlog.processors.CallsiteParameterAdder(
                parameters=[CallsiteParameter.FILENAME, CallsiteParameter.LINENO]
            ),
            _colour_level,
            _short_run_id,
            structlog.dev.ConsoleRenderer(colors=True),
        ]
    else:
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=_stderr_logger,
        # sys.stderr is looked up per logger, so redirected streams are honoured
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> Any:
    """Structured logger for ``name`` (usually ``__name__``)."""
    return structlog.get_logger(name)


def set_run_context(run_id: str, **fields: Any) -> None:
    """Bind the run id, plus any run-wide fields, to every following log line.

    Args:
        run_id: Identifier of the current command run
        **fields: Extra context such as ``command`` and ``seed``
    """
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(run_id=run_id, **fields)


def get_run_id() -> Optional[str]:
    """Run id of the current command, if one is bound."""
    return structlog.contextvars.get_contextvars().get("run_id")


def clear_run_context() -> None:
    structlog.contextvars.clear_contextvars()
