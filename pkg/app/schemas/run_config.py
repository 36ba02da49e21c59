"""Per-invocation configuration, validated before any sampling."""

from typing import List, Literal, Optional, Tuple

from pydantic import Field, ValidationError as PydanticValidationError, field_validator, model_validator

from app.core.exceptions import ValidationError
from app.schemas.common import Colour, FrozenSchema
from app.utils.validators import SiteId, parse_grid, parse_int_range, parse_site_set

Command = Literal[
    "fixed-point",
    "estimate",
    "generation",
    "containment",
    "covariance",
    "directed-fn",
    "dump-realization",
    "structure",
]


class RunConfig(FrozenSchema):
    """Validated options of one CLI command."""

    command: Command
    n: int = Field(..., ge=1, description="Replica count")
    seed: int = Field(..., ge=0, description="Master seed")
    output_format: Literal["csv", "json"] = "csv"
    output_path: Optional[str] = None
    threshold: float = Field(4.0, gt=0.0, description="z-score gate")
    gate: bool = True

    # fixed-point
    steps: int = Field(100_000, ge=100, description="Quadrature steps")
    grid: List[float] = Field(default_factory=lambda: parse_grid("0.5:1.0:0.05"))
    samples: Optional[int] = Field(None, ge=1, description="Triples for the simulated KS check")

    # estimate / containment / covariance / generation / directed-fn
    quantity: Optional[str] = None
    t: Optional[float] = Field(None, ge=0.0, le=1.0)
    t2: Optional[float] = Field(None, ge=0.0, le=1.0)
    sites: Optional[List[SiteId]] = None
    levels: List[int] = Field(default_factory=lambda: [1])
    distance: Optional[int] = Field(None, ge=0)
    colours: Optional[Tuple[Colour, Colour]] = None

    # dump-realization / structure
    radius: int = Field(1, ge=1, description="Ball radius")
    realizations: int = Field(1_000, ge=1)

    @field_validator("grid", mode="before")
    @classmethod
    def parse_grid_text(cls, value):
        if isinstance(value, str):
            return parse_grid(value)
        return value

    @field_validator("grid")
    @classmethod
    def grid_in_range(cls, value: List[float]) -> List[float]:
        if not value or any(not 0.5 <= t <= 1.0 for t in value):
            raise ValueError("fixed-point grid must lie in [0.5, 1]")
        return value

    @field_validator("sites", mode="before")
    @classmethod
    def parse_sites_text(cls, value):
        if isinstance(value, str):
            return parse_site_set(value)
        return value

    @field_validator("levels", mode="before")
    @classmethod
    def parse_levels_text(cls, value):
        if isinstance(value, str):
            return parse_int_range(value)
        return value

    @field_validator("levels")
    @classmethod
    def levels_positive(cls, value: List[int]) -> List[int]:
        if not value or min(value) < 1:
            raise ValueError("levels must be at least 1")
        return value

    @field_validator("colours", mode="before")
    @classmethod
    def parse_colours_text(cls, value):
        if isinstance(value, str):
            if value.strip().lower() == "all":
                return None
            parts = [p for p in value.split(",") if p.strip()]
            if len(parts) != 2:
                raise ValueError("colours must be 'c1,c2' or 'all'")
            return tuple(Colour.parse(p) for p in parts)
        return value

    @model_validator(mode="after")
    def check_command_inputs(self) -> "RunConfig":
        if self.command in ("generation", "containment", "covariance", "directed-fn") and self.t is None:
            raise ValueError(f"{self.command} needs --t")
        if self.command == "containment" and not self.sites:
            raise ValueError("containment needs --sites")
        if self.command == "covariance" and self.distance is None:
            raise ValueError("covariance needs --distance")
        if self.command == "estimate" and not self.quantity:
            raise ValueError("estimate needs --quantity")
        return self

    @classmethod
    def build(cls, **values) -> "RunConfig":
        """Validate raw option values.

        Raises:
            ValidationError: If any option is out of range or malformed
        """
        values = {k: v for k, v in values.items() if v is not None}
        try:
            return cls(**values)
        except PydanticValidationError as e:
            errors = [
                {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
                for err in e.errors()
            ]
            raise ValidationError("Invalid run configuration", details={"errors": errors})
