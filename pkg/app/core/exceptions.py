"""Exceptions and process exit codes."""

from typing import Any, Dict, Optional

from app.core.logging import get_logger, get_run_id

logger = get_logger(__name__)

EXIT_GATE_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


class FrozenPercolationError(Exception):
    """Base exception; logs itself when raised and knows its exit code.

    Subclasses set ``exit_code`` and, where useful, a ``prefix`` that is put in
    front of the message.
    """

    exit_code: int = EXIT_INTERNAL
    prefix: str = ""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = f"{self.prefix}{message}"
        self.details = details or {}
        self.run_id = get_run_id()
        super().__init__(self.message)

        logger.error(
            "FrozenTree exception raised",
            exception_type=type(self).__name__,
            message=self.message,
            exit_code=self.exit_code,
            details=self.details,
        )


class ValidationError(FrozenPercolationError):
    """Invalid parameters or configuration."""

    exit_code = EXIT_USAGE


class SiteAddressError(ValidationError):
    """Malformed site address, site outside the sampled patch, or disconnected site set."""

    def __init__(self, address: str, reason: str, details: Optional[Dict[str, Any]] = None):
        self.address = address
        super().__init__(f"Site '{address}': {reason}", details)


class PreconditionError(FrozenPercolationError):
    """An operation was called outside its precondition."""

    exit_code = EXIT_USAGE

    def __init__(self, operation: str, message: str, details: Optional[Dict[str, Any]] = None):
        self.operation = operation
        super().__init__(f"{operation}: {message}", details)


class PropagationError(FrozenPercolationError):
    """Freeze-time propagation read a value that was never written."""

    prefix = "Propagation failed: "


class InvariantViolation(FrozenPercolationError):
    """A structural identity of the process did not hold on a realization."""

    def __init__(self, invariant: str, message: str, details: Optional[Dict[str, Any]] = None):
        self.invariant = invariant
        super().__init__(f"Invariant '{invariant}' violated: {message}", details)


class NoOracleError(FrozenPercolationError):
    """A report was compared without an oracle value."""

    exit_code = EXIT_USAGE

    def __init__(self, quantity: str, details: Optional[Dict[str, Any]] = None):
        self.quantity = quantity
        super().__init__(f"Quantity '{quantity}' has no oracle to compare against", details)


class StorageError(FrozenPercolationError):
    """Report output could not be written."""

    exit_code = EXIT_IO

    def __init__(self, operation: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"Storage {operation} failed: {message}", details)
