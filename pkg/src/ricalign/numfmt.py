"""Half-up decimal rounding for report output."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Optional


def round_half_up(value: float, places: int) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def fmt(value: Optional[float], places: int, na: str = "") -> str:
    """Fixed-point text for ``value``; ``na`` when it is missing."""
    if value is None:
        return na
    q = Decimal(1).scaleb(-places)
    out = Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP)
    if out == 0:
        out = abs(out)  # no "-0.0000"
    return f"{out:f}"


def fmt_thousands(value: Optional[float], places: int = 0, na: str = "NA") -> str:
    if value is None:
        return na
    q = Decimal(1).scaleb(-places)
    out = Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP)
    return f"{out:,.{places}f}"
