"""Common schemas and utilities."""

import math
from enum import IntEnum
from typing import Union

from pydantic import BaseModel, ConfigDict

INF = math.inf


class Colour(IntEnum):
    """State of a site at a given time.

    Integer values are ordered along every trajectory: a site only ever
    moves from WHITE to GREEN to RED.
    """

    WHITE = 0
    GREEN = 1
    RED = 2

    @classmethod
    def parse(cls, value: Union[str, int, "Colour"]) -> "Colour":
        """Parse a colour from its name (case-insensitive), initial or value."""
        if isinstance(value, Colour):
            return value
        if isinstance(value, int):
            return cls(value)
        text = value.strip().upper()
        for colour in cls:
            if text in (colour.name, colour.name[0]):
                return colour
        raise ValueError(f"Unknown colour: {value}")


def format_time(value: float) -> str:
    """Serialize an extended time; INF becomes "inf"."""
    if math.isinf(value):
        return "inf"
    return repr(float(value))


class FrozenSchema(BaseModel):
    """Base for immutable schemas shared across services."""

    model_config = ConfigDict(frozen=True, extra="forbid")
