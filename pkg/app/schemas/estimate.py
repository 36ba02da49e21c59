"""Estimate report schemas."""

import math
from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

from app.schemas.common import FrozenSchema

Z95 = float(norm.ppf(0.975))


class ReportKind(str, Enum):
    """How a report is gated against its oracle."""

    EQUALITY = "equality"          # |z| <= threshold
    UPPER_BOUND = "upper_bound"    # |mean| - threshold * stderr <= oracle
    LOWER_BOUND = "lower_bound"    # mean + threshold * stderr >= oracle
    TOLERANCE = "tolerance"        # |mean - oracle| <= tolerance
    REPORT = "report"              # no gate


class EstimateParameters(FrozenSchema):
    """Parameters a quantity was evaluated at; unused fields stay None."""

    t: Optional[float] = None
    t2: Optional[float] = None
    radius: Optional[int] = None
    depth: Optional[int] = None
    sites: Optional[str] = None
    distance: Optional[int] = None
    colours: Optional[str] = None


class EstimateReport(BaseModel):
    """Monte Carlo (or quadrature) estimate with its oracle and verdict."""

    model_config = ConfigDict(frozen=True)

    quantity: str = Field(..., description="Quantity identifier")
    parameters: EstimateParameters = Field(default_factory=EstimateParameters)
    n: int = Field(..., ge=0, description="Replica count (0 for deterministic values)")
    mean: float
    stderr: float = Field(..., ge=0.0)
    ci95: Tuple[float, float]
    oracle: Optional[float] = None
    z: Optional[float] = None
    kind: ReportKind = ReportKind.EQUALITY
    tolerance: Optional[float] = None
    candidates: Dict[str, float] = Field(default_factory=dict)
    passed: Optional[bool] = None
    seed: Optional[int] = None

    @classmethod
    def build(
        cls,
        quantity: str,
        mean: float,
        stderr: float,
        n: int,
        parameters: Optional[EstimateParameters] = None,
        oracle: Optional[float] = None,
        kind: ReportKind = ReportKind.EQUALITY,
        seed: Optional[int] = None,
        **extra,
    ) -> "EstimateReport":
        """Build a report, deriving the 95% interval and the z-score."""
        half_width = Z95 * stderr
        z = None
        if oracle is not None:
            if stderr > 0:
                z = (mean - oracle) / stderr
            elif mean == oracle:
                z = 0.0
            else:
                z = math.copysign(math.inf, mean - oracle)
        return cls(
            quantity=quantity,
            parameters=parameters or EstimateParameters(),
            n=n,
            mean=mean,
            stderr=stderr,
            ci95=(mean - half_width, mean + half_width),
            oracle=oracle,
            z=z,
            kind=kind,
            seed=seed,
            **extra,
        )

    @classmethod
    def from_sums(
        cls,
        quantity: str,
        total: float,
        total_sq: float,
        n: int,
        **kwargs,
    ) -> "EstimateReport":
        """Build a report from the sum and sum of squares of n replica values.

        stderr is the sample standard deviation over sqrt(n).
        """
        mean = total / n
        if n > 1:
            variance = max(total_sq - n * mean * mean, 0.0) / (n - 1)
        else:
            variance = 0.0
        return cls.build(quantity, mean, math.sqrt(variance / n), n, **kwargs)


class ReportBundle(BaseModel):
    """All reports emitted by one command."""

    schema_version: str
    command: str
    seed: Optional[int] = None
    reports: list[EstimateReport]
