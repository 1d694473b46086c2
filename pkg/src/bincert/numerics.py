"""Numeric backends for certificate arithmetic.

exact-rational: every quantity is a Fraction and comparisons are exact.

conservative-float: quantities are first evaluated exactly as rationals
(the closed forms make that cheap at any dimension), then converted to
float rounded in the direction that keeps the certificate claim valid:
values feeding a lower bound round down, values feeding an upper bound
round up. The conversion is the only lossy step and costs at most one
ulp per emitted value, so a float-mode certificate can only be more
pessimistic than the exact one, never less.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

__all__ = [
    "AUTO_EXACT_MAX_N",
    "EXACT",
    "FLOAT",
    "FloatBracket",
    "NumericBackend",
    "bracket",
    "float_down",
    "float_up",
    "resolve_backend",
]

ExactValue = Union[int, Fraction]

EXACT_MODE = "exact-rational"
FLOAT_MODE = "conservative-float"

# Above this dimension "auto" stops insisting on rational output.
AUTO_EXACT_MAX_N = 512


@dataclass(frozen=True)
class NumericBackend:
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in (EXACT_MODE, FLOAT_MODE):
            raise ValueError(f"unknown backend mode {self.mode!r}")

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT_MODE


EXACT = NumericBackend(EXACT_MODE)
FLOAT = NumericBackend(FLOAT_MODE)


def resolve_backend(name: str, n: int) -> NumericBackend:
    """Map a CLI-style backend name to a backend; "auto" switches on dimension."""
    if name == "exact":
        return EXACT
    if name == "float":
        return FLOAT
    if name == "auto":
        return EXACT if n <= AUTO_EXACT_MAX_N else FLOAT
    raise ValueError(f"unknown backend {name!r}; expected exact, float, or auto")


def _float_nearest(x: ExactValue) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def float_down(x: ExactValue) -> float:
    """Largest float that is <= x."""
    f = _float_nearest(x)
    if math.isinf(f):
        # +inf overstates any finite rational; -inf is already a lower bound
        return sys.float_info.max if f > 0 else f
    if Fraction(f) > x:
        return math.nextafter(f, -math.inf)
    return f


def float_up(x: ExactValue) -> float:
    """Smallest float that is >= x."""
    f = _float_nearest(x)
    if math.isinf(f):
        return f if f > 0 else -sys.float_info.max
    if Fraction(f) < x:
        return math.nextafter(f, math.inf)
    return f


class FloatBracket(NamedTuple):
    """Directed float pair with lo <= exact value <= hi."""

    lo: float
    hi: float

    def contains(self, x: ExactValue) -> bool:
        return Fraction(self.lo) <= Fraction(x) <= Fraction(self.hi)


def bracket(x: ExactValue) -> FloatBracket:
    return FloatBracket(float_down(x), float_up(x))
