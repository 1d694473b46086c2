"""Certificate search over the ranked regions.

Given a lower bound pA on the top-label probability and an upper bound pB
on the runner-up probability, regions A and B are a descending-ratio
prefix of X-mass exactly pA and an ascending-ratio suffix of X-mass
exactly pB. The certified perturbation size is the largest k for which
the shifted-noise mass of A still exceeds that of B:

    Pr(Y in A) = sum of Pr(Y in R_j) over fully used ranks
               + (leftover X-mass at the boundary rank) / ratio,

and symmetrically for B. Both regions are carried purely as masses and
ratios; a subregion of X-mass mu inside a region of ratio r has Y-mass
mu / r, so point sets never appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from .bitspace import Label
from .numerics import EXACT, NumericBackend, float_down, float_up
from .regions import (
    BetaLike,
    RegionProbabilities,
    _beta_fraction,
    _validate_nk,
    density_ratio,
    exact_ranked_masses,
)

__all__ = [
    "Abstain",
    "Certificate",
    "CertificationInternalError",
    "RegionSplit",
    "bound_pair",
    "build_region_split",
    "certified_perturbation_size",
    "check_radius",
]

ProbLike = Union[float, Fraction, int, str]


class CertificationInternalError(RuntimeError):
    """Region bookkeeping reached a state valid inputs cannot produce."""


def _as_prob(value: ProbLike, name: str) -> Fraction:
    # float -> Fraction is exact (binary floats are dyadic rationals), so
    # the certificate refers to the precise number the caller supplied
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class RegionSplit:
    """Boundary ranks and leftover masses for regions A and B.

    a_star is the first rank whose cumulative X-mass reaches pA;
    frac_mass_a is the part of that rank's X-mass actually used. b_star
    and frac_mass_b mirror this from the bottom of the ranking. The
    exact shifted-mass sums are precomputed here so evaluating the pair
    of bounds is a lookup regardless of backend.
    """

    regions: RegionProbabilities
    a_star: int
    b_star: int
    frac_mass_a: Fraction
    frac_mass_b: Fraction
    pa: Fraction
    pb: Fraction
    _pr_y_a: Fraction = field(repr=False)
    _pr_y_b: Fraction = field(repr=False)


def _split_masses(
    rows: List[Tuple[int, Fraction, Fraction]],
    beta: Fraction,
    pa: Fraction,
    pb: Fraction,
) -> Tuple[int, int, Fraction, Fraction, Fraction, Fraction]:
    """Core of the split: returns (a*, b*, frac_a, frac_b, PrY_A, PrY_B)."""
    a_star = None
    frac_a = Fraction(0)
    prefix_y = Fraction(0)
    cum = Fraction(0)
    for idx, (m, x, y) in enumerate(rows):
        if cum + x >= pa:
            a_star = idx
            frac_a = pa - cum
            break
        cum += x
        prefix_y += y
    if a_star is None:
        # total X-mass is exactly 1, so only pa > 1 can fall through
        raise CertificationInternalError("cumulative region mass fell short of pA")

    b_star = None
    frac_b = Fraction(0)
    suffix_y = Fraction(0)
    cum_b = Fraction(0)
    for idx in range(len(rows) - 1, -1, -1):
        m, x, y = rows[idx]
        if cum_b + x >= pb:
            b_star = idx
            frac_b = pb - cum_b
            break
        cum_b += x
        suffix_y += y
    if b_star is None:
        raise CertificationInternalError("cumulative region mass fell short of pB")

    # a leftover of zero never touches the ratio, which keeps boundary
    # ranks that happen to be empty (parity zeros) harmless
    pr_y_a = prefix_y
    if frac_a:
        pr_y_a += frac_a / density_ratio(beta, rows[a_star][0])
    pr_y_b = suffix_y
    if frac_b:
        pr_y_b += frac_b / density_ratio(beta, rows[b_star][0])
    return a_star, b_star, frac_a, frac_b, pr_y_a, pr_y_b


def _exact_rows(regions: RegionProbabilities) -> List[Tuple[int, Fraction, Fraction]]:
    if regions.backend.is_exact:
        return [(e.m, e.prob_x, e.prob_y) for e in regions.entries]
    # float entries are brackets; rank selection must not depend on
    # rounding, so recompute the masses exactly from the parameters
    return exact_ranked_masses(regions.n, regions.k, regions.beta)


def build_region_split(
    regions: RegionProbabilities, pA_lower: ProbLike, pB_upper: ProbLike
) -> RegionSplit:
    """Locate the boundary ranks for regions A and B.

    The split touches the entries only through X-masses, Y-masses and
    the boundary ratios, so the subregions never exist as point sets.
    """
    pa = _as_prob(pA_lower, "pA_lower")
    pb = _as_prob(pB_upper, "pB_upper")
    if pb > pa:
        raise ValueError(f"pB_upper={pb} exceeds pA_lower={pa}; no certificate exists")
    rows = _exact_rows(regions)
    a_star, b_star, frac_a, frac_b, pr_y_a, pr_y_b = _split_masses(
        rows, regions.beta, pa, pb
    )
    return RegionSplit(
        regions=regions,
        a_star=a_star,
        b_star=b_star,
        frac_mass_a=frac_a,
        frac_mass_b=frac_b,
        pa=pa,
        pb=pb,
        _pr_y_a=pr_y_a,
        _pr_y_b=pr_y_b,
    )


def bound_pair(
    split: RegionSplit, backend: Optional[NumericBackend] = None
) -> Tuple[Union[Fraction, float], Union[Fraction, float]]:
    """(Pr(Y in A), Pr(Y in B)) for the split.

    Exact backend returns Fractions. Float backend rounds Pr(Y in A)
    down and Pr(Y in B) up, so the comparison downstream can only lose
    certificates, never invent them.
    """
    if backend is None:
        backend = split.regions.backend
    if backend.is_exact:
        return split._pr_y_a, split._pr_y_b
    return float_down(split._pr_y_a), float_up(split._pr_y_b)


def _bound_pair_exact(
    n: int, k: int, beta: Fraction, pa: Fraction, pb: Fraction
) -> Tuple[Fraction, Fraction]:
    rows = exact_ranked_masses(n, k, beta)
    _, _, _, _, pr_y_a, pr_y_b = _split_masses(rows, beta, pa, pb)
    return pr_y_a, pr_y_b


def check_radius(
    n: int,
    k: int,
    beta: BetaLike,
    pA_lower: ProbLike,
    pB_upper: ProbLike,
    backend: NumericBackend = EXACT,
) -> bool:
    """True iff the prediction provably survives every perturbation of weight k.

    One evaluation suffices because the region masses depend on delta
    only through k. For beta = 1/2 the merged region makes the result
    pA_lower > pB_upper for every k.
    """
    b = _beta_fraction(beta)
    _validate_nk(n, k)
    pa = _as_prob(pA_lower, "pA_lower")
    pb = _as_prob(pB_upper, "pB_upper")
    if pb > pa:
        return False
    pr_y_a, pr_y_b = _bound_pair_exact(n, k, b, pa, pb)
    if backend.is_exact:
        return pr_y_a > pr_y_b
    return float_down(pr_y_a) > float_up(pr_y_b)


@dataclass(frozen=True)
class Abstain:
    """First-class refusal to certify; not an error.

    Monte-Carlo bounds routinely fail to separate the top label, and the
    harness needs to count those outcomes rather than crash on them.
    """

    reason: str
    label: Optional[Label] = None
    pA_lower: Optional[float] = None
    pB_upper: Optional[float] = None
    n: Optional[int] = None
    alpha: Optional[float] = None
    d: Optional[int] = None
    seed: Any = None
    tie: bool = False

    def to_record(self) -> Dict[str, Any]:
        return {
            "outcome": "abstain",
            "reason": self.reason,
            "label": None if self.label is None else self.label.id,
            "pA_lower": self.pA_lower,
            "pB_upper": self.pB_upper,
            "n": self.n,
            "alpha": self.alpha,
            "d": self.d,
            "seed": _seed_record(self.seed),
            "tie": self.tie,
        }


@dataclass(frozen=True)
class Certificate:
    """A certified perturbation size with everything needed to replay it."""

    label: Optional[Label]
    k_certified: int
    n: int
    beta: Fraction
    pA_lower: ProbLike
    pB_upper: ProbLike
    backend_mode: str
    saturated: bool
    scan_monotone: bool
    scanned_max: int
    alpha: Optional[float] = None
    d: Optional[int] = None
    seed: Any = None
    tie: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.k_certified <= self.n:
            raise ValueError(
                f"certified size {self.k_certified} outside [0, {self.n}]"
            )
        if not Fraction(self.pA_lower) > Fraction(self.pB_upper):
            raise ValueError("a certificate requires pA_lower > pB_upper")

    def to_record(self) -> Dict[str, Any]:
        return {
            "outcome": "certificate",
            "label": None if self.label is None else self.label.id,
            "k_certified": self.k_certified,
            "n": self.n,
            "beta": str(self.beta),
            "pA_lower": float(self.pA_lower),
            "pB_upper": float(self.pB_upper),
            "backend": self.backend_mode,
            "saturated": self.saturated,
            "scan_monotone": self.scan_monotone,
            "scanned_max": self.scanned_max,
            "alpha": self.alpha,
            "d": self.d,
            "seed": _seed_record(self.seed),
            "tie": self.tie,
        }


def _seed_record(seed: Any) -> Any:
    if isinstance(seed, tuple):
        return list(seed)
    return seed


def certified_perturbation_size(
    n: int,
    beta: BetaLike,
    pA_lower: ProbLike,
    pB_upper: ProbLike,
    backend: NumericBackend = EXACT,
    label: Optional[Label] = None,
    full_scan: bool = False,
) -> Union[Certificate, Abstain]:
    """Largest k certified by an ascending scan from k = 0.

    The scan stops at the first failing k (K is one less), or saturates
    at K = n. Binary search is deliberately avoided: nothing guarantees
    the per-k check is monotone, so the scan records whether it looked
    monotone instead of assuming it. With full_scan=True the scan keeps
    evaluating past the first failure up to n to make that flag an
    observation over the whole range rather than a prefix.
    """
    b = _beta_fraction(beta)
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    pa = _as_prob(pA_lower, "pA_lower")
    pb = _as_prob(pB_upper, "pB_upper")
    if pa <= pb:
        return Abstain(
            reason="lower bound on the top label does not exceed the runner-up upper bound",
            label=label,
            pA_lower=float(pa),
            pB_upper=float(pb),
            n=n,
        )

    def make(k: int, saturated: bool, monotone: bool, scanned: int) -> Certificate:
        return Certificate(
            label=label,
            k_certified=k,
            n=n,
            beta=b,
            pA_lower=pA_lower,
            pB_upper=pB_upper,
            backend_mode=backend.mode,
            saturated=saturated,
            scan_monotone=monotone,
            scanned_max=scanned,
        )

    # whole-space region A, or a ratio-free partition: the per-k check is
    # constant and true, so the scan would just walk to n
    if (pa == 1 and pb == 0) or b == Fraction(1, 2):
        return make(n, True, True, 0)

    results: List[bool] = [True]  # k = 0 reduces to pa > pb, established above
    first_failure: Optional[int] = None
    for k in range(1, n + 1):
        ok = check_radius(n, k, b, pa, pb, backend)
        results.append(ok)
        if not ok and first_failure is None:
            first_failure = k
            if not full_scan:
                break

    scanned = len(results) - 1
    monotone = True
    seen_failure = False
    for ok in results:
        if not ok:
            seen_failure = True
        elif seen_failure:
            monotone = False
            break

    if first_failure is None:
        return make(n, True, monotone, scanned)
    return make(first_failure - 1, False, monotone, scanned)
