"""Simultaneous one-sided confidence bounds from Monte-Carlo label counts.

Each label's count is binomial, so one-sided Clopper-Pearson bounds are
quantiles of Beta distributions with integer shapes. Splitting the
significance level evenly across the label set makes the bounds hold
jointly by a union bound: with probability at least 1 - alpha, the true
top-label probability is at least pA_lower and every other label's
probability is at most its upper bound.

The incomplete beta lives here rather than behind a scipy import so the
quantile rounding stays under our control: every returned quantile is
nudged one float step to the conservative side (down for lower bounds,
up for upper bounds) after the inversion settles, and the final step is
refereed by the CDF evaluator itself. scipy appears only in the test
suite, as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Tuple, Union

from .bitspace import Label
from .numerics import float_down

__all__ = [
    "ConfidenceBounds",
    "LabelCounts",
    "beta_quantile",
    "regularized_incomplete_beta",
    "simultaneous_bounds",
]

_CF_MAX_ITER = 500
_CF_EPS = 1e-16
_CF_TINY = 1e-300  # keeps Lentz denominators away from exact zero
_INV_MAX_ITER = 200
_LN_PDF_FLOOR = -690.0  # exp() underflows near here; fall back to bisection
_WALK_LIMIT = 64


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz scheme."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete-beta continued fraction did not converge for "
        f"a={a}, b={b}, x={x}"
    )


def regularized_incomplete_beta(u: float, w: float, x: float) -> float:
    """I_x(u, w), the CDF of a Beta(u, w) variable at x."""
    if u <= 0 or w <= 0:
        raise ValueError(f"shape parameters must be positive, got u={u}, w={w}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(u + w)
        - math.lgamma(u)
        - math.lgamma(w)
        + u * math.log(x)
        + w * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only on one side of the mean;
    # the symmetry I_x(u,w) = 1 - I_{1-x}(w,u) covers the other
    if x < (u + 1.0) / (u + w + 2.0):
        value = front * _betacf(u, w, x) / u
    else:
        value = 1.0 - front * _betacf(w, u, 1.0 - x) / w
    return min(max(value, 0.0), 1.0)


def _ln_beta_pdf(u: float, w: float, x: float) -> float:
    return (
        math.lgamma(u + w)
        - math.lgamma(u)
        - math.lgamma(w)
        + (u - 1.0) * math.log(x)
        + (w - 1.0) * math.log1p(-x)
    )


def _invert_regularized_beta(q: float, u: float, w: float) -> Tuple[float, float]:
    """Ulp-tight bracket [lo, hi] with I(lo) <= q <= I(hi).

    A residual tolerance in q-space is not enough here: where the pdf is
    flat the root can sit thousands of ulps away from a point whose CDF
    residual already looks tiny, so iteration stops only once the bracket
    itself cannot shrink further. Newton gets there quadratically; the
    bisection fallback needs at most ~60 halvings from (0, 1).
    """
    lo, hi = 0.0, 1.0  # invariant: I(lo) <= q <= I(hi)
    x = min(max(u / (u + w), 1e-12), 1.0 - 1e-12)
    for _ in range(_INV_MAX_ITER):
        err = regularized_incomplete_beta(u, w, x) - q
        if err <= 0.0:
            lo = max(lo, x)
        if err >= 0.0:
            hi = min(hi, x)
        if hi - lo <= math.ulp(hi):
            break
        cand = None
        if 0.0 < x < 1.0 and err != 0.0:
            ln_pdf = _ln_beta_pdf(u, w, x)
            if ln_pdf >= _LN_PDF_FLOOR:
                cand = x - err * math.exp(-ln_pdf)
        if cand is None or not lo < cand < hi or cand == x:
            cand = 0.5 * (lo + hi)
            if cand == x or not lo < cand < hi:
                break
        x = cand
    return lo, hi


def _directed_finish(
    x: float, q: float, cdf: Callable[[float], float], direction: str
) -> float:
    """Walk x one float at a time until the CDF referee agrees, then one more."""
    x = min(max(x, 0.0), 1.0)
    if direction == "down":
        for _ in range(_WALK_LIMIT):
            if x <= 0.0 or cdf(x) <= q:
                break
            x = math.nextafter(x, 0.0)
        else:
            raise ArithmeticError(
                "quantile inversion could not settle on the conservative side"
            )
        return max(math.nextafter(x, -math.inf), 0.0)
    for _ in range(_WALK_LIMIT):
        if x >= 1.0 or cdf(x) >= q:
            break
        x = math.nextafter(x, 1.0)
    else:
        raise ArithmeticError(
            "quantile inversion could not settle on the conservative side"
        )
    return min(math.nextafter(x, math.inf), 1.0)


def beta_quantile(q: float, u: float, w: float, direction: str = "down") -> float:
    """Quantile of Beta(u, w) at level q, rounded in the given direction.

    direction "down" returns a float at or below the true quantile, "up"
    at or above it, judged by this module's own CDF evaluation. Shapes
    below 1 are rejected; the Clopper-Pearson construction never
    produces them and the Newton slope would be singular at the edges.
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie strictly in (0, 1), got {q}")
    if u < 1 or w < 1:
        raise ValueError(f"shape parameters must be at least 1, got u={u}, w={w}")
    if direction not in ("down", "up"):
        raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")

    if w == 1:
        # CDF is x**u
        x = math.exp(math.log(q) / u)
        cdf: Callable[[float], float] = lambda t: min(t, 1.0) ** u
    elif u == 1:
        # CDF is 1 - (1-x)**w
        x = -math.expm1(math.log1p(-q) / w)
        cdf = lambda t: -math.expm1(w * math.log1p(-t)) if t < 1.0 else 1.0
    else:
        lo, hi = _invert_regularized_beta(q, u, w)
        x = lo if direction == "down" else hi
        cdf = lambda t: regularized_incomplete_beta(u, w, t)
    return _directed_finish(x, q, cdf, direction)


LabelLike = Union[Label, int]


@dataclass(frozen=True)
class LabelCounts:
    """Dense per-label sample counts; index i is the count of Label(i).

    The tuple length fixes the label-set size |C|, including labels that
    were never observed. That size matters: the significance level is
    split across all of C, not just the labels that showed up.
    """

    counts: Tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        object.__setattr__(self, "counts", counts)
        if not counts:
            raise ValueError("label set must be nonempty")
        for i, c in enumerate(counts):
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ValueError(f"count for label {i} must be a non-negative integer")
        if sum(counts) < 1:
            raise ValueError("at least one sample is required")

    @classmethod
    def from_samples(cls, labels: Iterable[LabelLike], num_labels: int) -> "LabelCounts":
        if num_labels < 1:
            raise ValueError("num_labels must be positive")
        tally = [0] * num_labels
        for lab in labels:
            i = lab.id if isinstance(lab, Label) else int(lab)
            if not 0 <= i < num_labels:
                raise ValueError(f"label {i} outside range(0, {num_labels})")
            tally[i] += 1
        return cls(tuple(tally))

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def num_labels(self) -> int:
        return len(self.counts)

    def count(self, label: LabelLike) -> int:
        i = label.id if isinstance(label, Label) else int(label)
        return self.counts[i]

    def items(self) -> Iterator[Tuple[Label, int]]:
        for i, c in enumerate(self.counts):
            yield Label(i), c

    def top_label(self) -> Tuple[Label, bool]:
        """Most frequent label and whether the top count was tied.

        Ties break toward the smallest id; the flag lets callers abstain
        instead of trusting a coin-flip winner.
        """
        best = max(self.counts)
        idx = self.counts.index(best)
        tie = self.counts.count(best) > 1
        return Label(idx), tie


@dataclass(frozen=True)
class ConfidenceBounds:
    c_A: Label
    pA_lower: float
    pB_upper: float
    alpha: float
    num_labels: int
    tie: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.pA_lower <= 1.0:
            raise ValueError(f"pA_lower {self.pA_lower} outside [0, 1]")
        if not 0.0 <= self.pB_upper <= 1.0:
            raise ValueError(f"pB_upper {self.pB_upper} outside [0, 1]")
        # exact comparison; float subtraction could hide a 1-ulp breach
        if Fraction(self.pB_upper) > 1 - Fraction(self.pA_lower):
            raise ValueError(
                f"pB_upper {self.pB_upper} exceeds 1 - pA_lower; bounds inconsistent"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha {self.alpha} outside (0, 1)")
        if self.num_labels < 1:
            raise ValueError("num_labels must be positive")


def simultaneous_bounds(counts: LabelCounts, alpha: float) -> ConfidenceBounds:
    """Lower-bound the top label, upper-bound the best challenger.

    pA_lower is the alpha/|C| quantile of Beta(d_A, d - d_A + 1), rounded
    down. Each challenger c gets the (1 - alpha/|C|) quantile of
    Beta(d_c + 1, d - d_c), rounded up; pB_upper is the largest of those,
    clamped to 1 - pA_lower (probabilities of disjoint labels cannot sum
    past one, so the clamp is itself a valid upper bound).
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly in (0, 1), got {alpha}")
    d = counts.total
    if d < 1:
        raise ValueError("at least one sample is required")
    c = counts.num_labels
    q = alpha / c
    c_a, tie = counts.top_label()
    d_a = counts.count(c_a)
    pa = beta_quantile(q, d_a, d - d_a + 1, "down")

    uppers: List[float] = []
    for label, d_c in counts.items():
        if label == c_a:
            continue
        uppers.append(beta_quantile(1.0 - q, d_c + 1, d - d_c, "up"))
    # down-rounding the clamp keeps pB_upper <= 1 - pA_lower exactly; for
    # pA_lower >= 1/2 the subtraction is already exact
    clamp = float_down(1 - Fraction(pa))
    pb = min(max(uppers, default=0.0), clamp)
    return ConfidenceBounds(
        c_A=c_a, pA_lower=pa, pB_upper=pb, alpha=alpha, num_labels=c, tie=tie
    )
