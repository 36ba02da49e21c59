"""Decorators for command logging."""

import functools
import time
from typing import Callable

from app.core.logging import get_logger

logger = get_logger(__name__)


def log_command(log_level: str = "info", log_config: bool = True):
    """Decorator to log entry and exit of a CLI command handler.

    The wrapped handler receives a RunConfig as its first argument and
    returns an exit status.

    Args:
        log_level: Log level for command entry (default: "info")
        log_config: Whether to log the validated configuration (default: True)

    Example:
        @log_command()
        def run_estimate(config: RunConfig) -> int:
            ...
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(config, *args, **kwargs):
            log_data = {"handler": func.__name__, "command": config.command}
            if log_config:
                log_data["config"] = config.model_dump(mode="json", exclude_none=True)
            getattr(logger, log_level)("Command started", **log_data)

            start_time = time.perf_counter()
            status = func(config, *args, **kwargs)
            duration_ms = (time.perf_counter() - start_time) * 1000

            logger.info(
                "Command finished",
                handler=func.__name__,
                exit_status=status,
                duration_ms=round(duration_ms, 2),
            )
            return status

        return wrapper

    return decorator
