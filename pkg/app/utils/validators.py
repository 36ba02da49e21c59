"""Validation and parsing utilities for command-line values."""

import re
from typing import List, Tuple

from app.core.exceptions import SiteAddressError, ValidationError

SiteId = Tuple[int, ...]

_ADDRESS_PATTERN = re.compile(r"^(?:[012](?:\.[01])*)?$")
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_GRID_PATTERN = re.compile(rf"^({_NUMBER}):({_NUMBER}):({_NUMBER})$")
_RANGE_PATTERN = re.compile(r"^(\d+):(\d+)$")


def is_valid_address(text: str) -> bool:
    """Check if string is a valid site address.

    Args:
        text: Dot-separated child indices, "" for the root

    Returns:
        True if the first step is in {0,1,2} and every later step in {0,1}
    """
    return bool(_ADDRESS_PATTERN.match(text.strip()))


def parse_address(text: str) -> SiteId:
    """Parse "0.1" into (0, 1); "" is the root.

    Raises:
        SiteAddressError: If the address is malformed
    """
    text = text.strip()
    if not is_valid_address(text):
        raise SiteAddressError(text, "malformed address")
    if not text:
        return ()
    return tuple(int(step) for step in text.split("."))


def format_address(site: SiteId) -> str:
    """Format (0, 1) as "0.1"; the root is ""."""
    return ".".join(str(step) for step in site)


def parse_site_set(text: str) -> List[SiteId]:
    """Parse a comma-separated address list.

    The root is written as an empty item, e.g. ",0,1,2" for the root and its
    three children; a lone "" or "O" also denotes the root.
    """
    if text.strip() in ("", "O"):
        return [()]
    sites = [parse_address("" if item.strip() == "O" else item) for item in text.split(",")]
    if len(set(sites)) != len(sites):
        raise ValidationError("Site set contains duplicates", details={"sites": text})
    return sites


def parse_grid(text: str) -> List[float]:
    """Parse "a:b:h" into the inclusive grid a, a+h, ..., b.

    A single number is a one-point grid.
    """
    text = text.strip()
    match = _GRID_PATTERN.match(text)
    if match is None:
        try:
            return [float(text)]
        except ValueError:
            raise ValidationError("Grid must be 'start:stop:step' or a number", details={"grid": text})

    start, stop, step = (float(g) for g in match.groups())
    if step <= 0 or stop < start:
        raise ValidationError("Grid needs step > 0 and stop >= start", details={"grid": text})

    count = int(round((stop - start) / step))
    points = [round(start + k * step, 12) for k in range(count + 1)]
    if points[-1] < stop - 1e-9:
        points.append(stop)
    return points


def parse_int_range(text: str) -> List[int]:
    """Parse "a:b" into [a, ..., b] inclusive; a single integer is also accepted."""
    text = text.strip()
    match = _RANGE_PATTERN.match(text)
    if match is None:
        if text.isdigit():
            return [int(text)]
        raise ValidationError("Range must be 'start:stop' or an integer", details={"range": text})
    start, stop = int(match.group(1)), int(match.group(2))
    if stop < start:
        raise ValidationError("Range needs stop >= start", details={"range": text})
    return list(range(start, stop + 1))
