"""Density-ratio region calculus for bit-flip smoothing.

Fix a base point s, a shifted point s XOR delta with ||delta||_0 = k, and
let X = s XOR eps, Y = (s XOR delta) XOR eps under i.i.d. bit-flip noise
that keeps a bit with probability beta. The hypercube splits into regions

    R(m) = { z : Pr(X = z) / Pr(Y = z) = (beta / (1 - beta))^m },

with m ranging over [-n, n]. Everything downstream consumes only the
per-region masses Pr(X in R(m)), Pr(Y in R(m)) and the ratio, never point
sets, and those masses depend on delta only through its weight k, which is
what makes a single evaluation cover every delta of that weight.

A point z lands in R(m) for m = k - 2*b, where b counts the coordinates of
delta's support on which z differs from s. Summing out the n - k untouched
coordinates (their binomial weights total 1) leaves closed forms

    Pr(X in R(m)) = C(k, b) * beta^(k-b) * (1-beta)^b,
    Pr(Y in R(m)) = C(k, b) * beta^b * (1-beta)^(k-b),      b = (k - m) / 2,

zero unless |m| <= k and m has the same parity as k. The equivalent
sum-over-coincidence-counts form (weights beta^(n-(j-m)) (1-beta)^(j-m)
against the coefficients t(m, j)) is what region_size and t_coefficient
expose; exhaustive enumeration checks both against the closed forms in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, List, NamedTuple, Tuple, Union

from .bitspace import NoiseSpec
from .numerics import EXACT, FloatBracket, NumericBackend, bracket

__all__ = [
    "RegionEntry",
    "RegionIndex",
    "RegionProbabilities",
    "density_ratio",
    "exact_ranked_masses",
    "prob_x_region",
    "prob_y_region",
    "ranked_regions",
    "region_size",
    "t_coefficient",
]

BetaLike = Union[NoiseSpec, Fraction, str]

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


def _beta_fraction(beta: BetaLike) -> Fraction:
    if isinstance(beta, NoiseSpec):
        return beta.beta
    if isinstance(beta, float):
        raise TypeError("beta must be exact; pass a Fraction, a string, or a NoiseSpec")
    b = Fraction(beta)
    if not _ZERO < b < Fraction(1):
        raise ValueError(f"beta must lie strictly between 0 and 1, got {b}")
    return b


def _validate_nk(n: int, k: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    if not isinstance(k, int) or not 0 <= k <= n:
        raise ValueError(f"perturbation weight must satisfy 0 <= k <= {n}, got {k!r}")


@dataclass(frozen=True)
class RegionIndex:
    """Index m of the region where the density ratio is (beta/(1-beta))^m."""

    m: int

    def validate(self, n: int) -> None:
        if abs(self.m) > n:
            raise ValueError(f"region index {self.m} outside [-{n}, {n}]")


def region_size(n: int, k: int, w: int, v: int) -> int:
    """Number of points z at distance w from s and v from s XOR delta.

    Splitting z's disagreements between delta's support (k coordinates)
    and its complement forces (w + v - k) / 2 ones outside the support
    and (w - v + k) / 2 support coordinates siding with the shifted
    point; either count out of range means no such z exists.
    """
    _validate_nk(n, k)
    if not isinstance(w, int) or not 0 <= w <= n:
        raise ValueError(f"w must satisfy 0 <= w <= {n}, got {w!r}")
    if not isinstance(v, int) or not 0 <= v <= n:
        raise ValueError(f"v must satisfy 0 <= v <= {n}, got {v!r}")
    if (w + v - k) % 2:
        return 0
    if w + v < k:
        return 0
    outside = (w + v - k) // 2
    with_shift = (w - v + k) // 2
    if outside > n - k:
        return 0
    if with_shift < 0 or with_shift > k:
        return 0
    return comb(n - k, outside) * comb(k, with_shift)


def t_coefficient(n: int, k: int, m: int, j: int) -> int:
    """Coincidence count for the weighted sums: the number of points at
    distance j - m from s and j from the shifted point.

    Equal to region_size(n, k, j - m, j); kept as its own piecewise
    formula so the two can be checked against each other.
    """
    _validate_nk(n, k)
    if not isinstance(m, int) or abs(m) > n:
        raise ValueError(f"region index m must lie in [-{n}, {n}], got {m!r}")
    if not isinstance(j, int) or not max(0, m) <= j <= min(n, n + m):
        raise ValueError(
            f"j={j!r} outside the summation range [{max(0, m)}, {min(n, n + m)}]"
        )
    if (m + k) % 2:
        return 0
    if 2 * j - m < k:
        return 0
    outside = (2 * j - m - k) // 2
    with_shift = (k - m) // 2
    if outside > n - k:
        return 0
    if with_shift < 0 or with_shift > k:
        return 0
    return comb(n - k, outside) * comb(k, with_shift)


def density_ratio(beta: BetaLike, m: int) -> Fraction:
    """Pr(X=z) / Pr(Y=z) anywhere on R(m): (beta/(1-beta))^m, exact."""
    b = _beta_fraction(beta)
    return (b / (1 - b)) ** m


def _x_mass(k: int, beta: Fraction, m: int) -> Fraction:
    if (k - m) % 2:
        return _ZERO
    b = (k - m) // 2
    if b < 0 or b > k:
        return _ZERO
    return comb(k, b) * beta ** (k - b) * (1 - beta) ** b


def _y_mass(k: int, beta: Fraction, m: int) -> Fraction:
    # mirror of _x_mass with the exponents swapped; kept separate so the
    # symmetry prob_x(m) == prob_y(-m) stays a real check
    if (k - m) % 2:
        return _ZERO
    b = (k - m) // 2
    if b < 0 or b > k:
        return _ZERO
    return comb(k, b) * beta ** b * (1 - beta) ** (k - b)


def prob_x_region(
    n: int, k: int, beta: BetaLike, m: int, backend: NumericBackend = EXACT
) -> Union[Fraction, FloatBracket]:
    """Mass of R(m) under X = s XOR eps.

    Exact Fraction in the rational backend; a FloatBracket containing the
    exact value in the float backend.
    """
    _validate_nk(n, k)
    if not isinstance(m, int) or abs(m) > n:
        raise ValueError(f"region index m must lie in [-{n}, {n}], got {m!r}")
    val = _x_mass(k, _beta_fraction(beta), m)
    return val if backend.is_exact else bracket(val)


def prob_y_region(
    n: int, k: int, beta: BetaLike, m: int, backend: NumericBackend = EXACT
) -> Union[Fraction, FloatBracket]:
    """Mass of R(m) under Y = (s XOR delta) XOR eps."""
    _validate_nk(n, k)
    if not isinstance(m, int) or abs(m) > n:
        raise ValueError(f"region index m must lie in [-{n}, {n}], got {m!r}")
    val = _y_mass(k, _beta_fraction(beta), m)
    return val if backend.is_exact else bracket(val)


class RegionEntry(NamedTuple):
    m: int
    prob_x: Union[Fraction, FloatBracket]
    prob_y: Union[Fraction, FloatBracket]
    ratio: Union[Fraction, FloatBracket]
    empty: bool


@dataclass(frozen=True)
class RegionProbabilities:
    """Per-region masses for one (n, k, beta), in rank order.

    Entries are ordered by strictly decreasing density ratio. Regions
    with zero mass under both X and Y are retained and flagged empty so
    rank indices stay aligned with m. For beta = 1/2 every ratio is 1
    and the partition collapses to a single merged region.
    """

    n: int
    k: int
    beta: Fraction
    backend: NumericBackend
    entries: Tuple[RegionEntry, ...]

    def nonempty(self) -> Iterator[RegionEntry]:
        return (e for e in self.entries if not e.empty)


def exact_ranked_masses(
    n: int, k: int, beta: BetaLike
) -> List[Tuple[int, Fraction, Fraction]]:
    """(m, Pr(X in R(m)), Pr(Y in R(m))) in descending-ratio rank order.

    Ratios are omitted: callers that need one compute it for the few
    ranks where it is actually used, which keeps this path cheap at
    large n where (beta/(1-beta))^m grows to thousands of digits.
    """
    b = _beta_fraction(beta)
    _validate_nk(n, k)
    if b == _HALF:
        return [(0, Fraction(1), Fraction(1))]
    ms = range(n, -n - 1, -1) if b > _HALF else range(-n, n + 1)
    return [(m, _x_mass(k, b, m), _y_mass(k, b, m)) for m in ms]


def ranked_regions(
    n: int, k: int, beta: BetaLike, backend: NumericBackend = EXACT
) -> RegionProbabilities:
    """All 2n+1 regions ranked by descending density ratio.

    beta > 1/2 ranks m = n, n-1, ..., -n; beta < 1/2 reverses the order;
    beta = 1/2 yields the single merged region with unit mass and ratio 1.
    """
    b = _beta_fraction(beta)
    _validate_nk(n, k)
    base = b / (1 - b)
    entries = []
    for m, x, y in exact_ranked_masses(n, k, b):
        ratio = base ** m
        empty = x == 0 and y == 0
        if backend.is_exact:
            entries.append(RegionEntry(m, x, y, ratio, empty))
        else:
            entries.append(RegionEntry(m, bracket(x), bracket(y), bracket(ratio), empty))
    return RegionProbabilities(n, k, b, backend, tuple(entries))
