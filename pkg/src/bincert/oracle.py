"""Ground truth by exhaustive enumeration at small dimension.

Everything in this module is deliberately naive: probabilities come from
walking all 2^n points and adding exact rationals. No closed form from
the region calculus is used here; those formulas are checked against
this module, never the other way around.

Besides raw enumeration there are two verification tools. One compares
the exact smoothed behavior of a concrete classifier against the region
bounds the certifier relies on. The other builds the worst-case
classifier that meets given (pA, pB) constraints while concentrating its
top label on the high-ratio regions and the runner-up on the low-ratio
ones; that classifier witnesses that the certified size cannot be
improved. The worst case is represented distributionally, as exact
masses assigned to ranked regions, because the defining subregions are
constrained only in mass and a pointwise realization may not exist for
a given mass split.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .bitspace import FlipMask, Label, NoiseSpec, StructureVector
from .regions import BetaLike, _beta_fraction, _validate_nk
from .smoothing import BaseClassifier

__all__ = [
    "ExactDistribution",
    "MAX_ENUM_N",
    "MAX_VERIFY_N",
    "RegionBoundsReport",
    "WorstCaseClassifier",
    "WorstCaseConstructionError",
    "WorstCaseSegment",
    "build_worst_case",
    "enumerate_region_probs",
    "exact_smoothed_distribution",
    "verify_region_bounds",
]

MAX_ENUM_N = 20  # 2^20 points; enumeration beyond this is a bug, not a wish
MAX_VERIFY_N = 16

_CLASSIFY_CHUNK = 2048

PointLike = Union[StructureVector, int]


def _point_bits(z: PointLike) -> int:
    return z if isinstance(z, int) else z.bits


def _check_enum_n(n: int, cap: int = MAX_ENUM_N) -> None:
    if n > cap:
        raise ValueError(f"exhaustive enumeration capped at n={cap}, got n={n}")


def _weight_powers(n: int, beta: Fraction) -> Tuple[Fraction, ...]:
    # powers[w] = beta^(n-w) * (1-beta)^w, the chance of flipping exactly
    # a given set of w coordinates
    flip = 1 - beta
    return tuple(beta ** (n - w) * flip**w for w in range(n + 1))


@dataclass(frozen=True)
class ExactDistribution:
    """Point probabilities of the noise law around s and its shifted twin.

    The shift is the perturbation applied to s; a zero-weight shift makes
    both laws coincide. Probabilities are computed per point from the
    Hamming distance to the relevant center, never materialized in bulk.
    """

    s: StructureVector
    beta: Fraction
    shift: FlipMask
    _powers: Tuple[Fraction, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.shift.n != self.s.n:
            raise ValueError("shift and center have different dimensions")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie strictly in (0, 1), got {self.beta}")
        object.__setattr__(self, "_powers", _weight_powers(self.s.n, self.beta))

    @classmethod
    def from_center(
        cls,
        s: StructureVector,
        beta: BetaLike,
        shift: Optional[FlipMask] = None,
    ) -> "ExactDistribution":
        b = _beta_fraction(beta)
        if shift is None:
            shift = FlipMask(0, s.n)
        return cls(s=s, beta=b, shift=shift)

    @property
    def n(self) -> int:
        return self.s.n

    def pr_x(self, z: PointLike) -> Fraction:
        return self._powers[(_point_bits(z) ^ self.s.bits).bit_count()]

    def pr_y(self, z: PointLike) -> Fraction:
        return self._powers[(_point_bits(z) ^ self.s.bits ^ self.shift.bits).bit_count()]

    def ratio_exponent(self, z: PointLike) -> int:
        """m with Pr(X=z)/Pr(Y=z) = (beta/(1-beta))^m: shifted distance minus plain."""
        bits = _point_bits(z)
        w = (bits ^ self.s.bits).bit_count()
        v = (bits ^ self.s.bits ^ self.shift.bits).bit_count()
        return v - w


def enumerate_region_probs(
    n: int,
    k: int,
    beta: BetaLike,
    s: Optional[StructureVector] = None,
    delta: Optional[FlipMask] = None,
) -> Dict[int, Tuple[Fraction, Fraction]]:
    """Exact (Pr(X in R(m)), Pr(Y in R(m))) for every populated m, by counting.

    Defaults: s = all zeros, delta = the first k coordinates. Any delta of
    weight k gives identical masses; passing one explicitly is how that
    invariance gets tested.
    """
    b = _beta_fraction(beta)
    _validate_nk(n, k)
    _check_enum_n(n)
    if s is None:
        s = StructureVector(0, n)
    if delta is None:
        delta = FlipMask((1 << k) - 1, n)
    if s.n != n or delta.n != n:
        raise ValueError("s and delta must have dimension n")
    if delta.weight != k:
        raise ValueError(f"delta has weight {delta.weight}, expected k={k}")

    xc = s.bits
    yc = s.bits ^ delta.bits
    # bucket pure point counts by (m, w); exact arithmetic happens once
    # per bucket instead of once per point
    buckets: Dict[int, List[int]] = {}
    for z in range(1 << n):
        w = (z ^ xc).bit_count()
        v = (z ^ yc).bit_count()
        m = v - w
        per_w = buckets.get(m)
        if per_w is None:
            per_w = [0] * (n + 1)
            buckets[m] = per_w
        per_w[w] += 1

    powers = _weight_powers(n, b)
    out: Dict[int, Tuple[Fraction, Fraction]] = {}
    for m, per_w in sorted(buckets.items()):
        x_mass = Fraction(0)
        y_mass = Fraction(0)
        for w, cnt in enumerate(per_w):
            if cnt:
                x_mass += cnt * powers[w]
                y_mass += cnt * powers[w + m]
        out[m] = (x_mass, y_mass)
    return out


def _label_all(base: BaseClassifier, n: int) -> List[int]:
    """Label ids for every point of {0,1}^n, indexed by the packed integer."""
    num_labels = base.label_count
    if num_labels < 1:
        raise ValueError("base classifier must expose a positive label_count")
    labels: List[int] = []
    total = 1 << n
    for lo in range(0, total, _CLASSIFY_CHUNK):
        hi = min(lo + _CLASSIFY_CHUNK, total)
        batch = [StructureVector(z, n) for z in range(lo, hi)]
        got = base.classify(batch)
        if len(got) != hi - lo:
            raise ValueError(
                f"classifier returned {len(got)} labels for {hi - lo} inputs"
            )
        for lab in got:
            i = lab.id if isinstance(lab, Label) else int(lab)
            if not 0 <= i < num_labels:
                raise ValueError(f"label {i} outside range(0, {num_labels})")
            labels.append(i)
    return labels


def exact_smoothed_distribution(
    base: BaseClassifier,
    s: StructureVector,
    spec: NoiseSpec,
    shift: Optional[FlipMask] = None,
) -> Tuple[Fraction, ...]:
    """Exact per-label probabilities of the smoothed classifier at s.

    With a shift this is the smoothed law at the perturbed input instead;
    the classifier is still evaluated on every point either way.
    """
    _check_enum_n(s.n)
    labels = _label_all(base, s.n)
    dist = ExactDistribution.from_center(s, spec.beta, shift)
    acc = [Fraction(0) for _ in range(base.label_count)]
    for z, lab in enumerate(labels):
        acc[lab] += dist.pr_y(z) if shift is not None else dist.pr_x(z)
    return tuple(acc)


# --- ranked-region helpers (enumeration-backed, no closed forms) ---


def _ranked_buckets(
    n: int, k: int, beta: Fraction
) -> List[Tuple[Fraction, Fraction, Fraction]]:
    """Populated regions as (ratio, x_mass, y_mass), descending ratio.

    Equal ratios merge into one rank; that only happens at beta = 1/2,
    where every region collapses to ratio 1.
    """
    probs = enumerate_region_probs(n, k, beta)
    base_ratio = beta / (1 - beta)
    keyed = sorted(probs.items(), key=lambda mv: mv[0], reverse=base_ratio > 1)
    rows: List[Tuple[Fraction, Fraction, Fraction]] = []
    for m, (x, y) in keyed:
        ratio = base_ratio**m
        if rows and rows[-1][0] == ratio:
            prev = rows[-1]
            rows[-1] = (ratio, prev[1] + x, prev[2] + y)
        else:
            rows.append((ratio, x, y))
    return rows


def _take_from_top(
    rows: Sequence[Tuple[Fraction, Fraction, Fraction]], amount: Fraction
) -> Tuple[List[Tuple[Fraction, Fraction]], Fraction]:
    """Carve `amount` of X-mass off the high-ratio end; returns (pieces, Y-mass)."""
    pieces: List[Tuple[Fraction, Fraction]] = []
    y_total = Fraction(0)
    left = amount
    for ratio, x, _y in rows:
        if left <= 0:
            break
        take = min(left, x)
        if take > 0:
            pieces.append((ratio, take))
            y_total += take / ratio
            left -= take
    if left > 0:
        raise ValueError(f"regions hold total mass 1; cannot take {amount}")
    return pieces, y_total


def _take_from_bottom(
    rows: Sequence[Tuple[Fraction, Fraction, Fraction]], amount: Fraction
) -> Tuple[List[Tuple[Fraction, Fraction]], Fraction]:
    pieces, y_total = _take_from_top(list(reversed(rows)), amount)
    return pieces, y_total


def region_pair_masses(
    n: int, k: int, beta: BetaLike, pA_lower, pB_upper
) -> Tuple[Fraction, Fraction]:
    """(Pr(Y in A), Pr(Y in B)) from enumeration-backed regions.

    A holds the top pA_lower of X-mass by density ratio, B the bottom
    pB_upper. The two may overlap in the middle ranks; each is carved
    independently, which is all the bound arguments need.
    """
    b = _beta_fraction(beta)
    rows = _ranked_buckets(n, k, b)
    pa = Fraction(pA_lower)
    pb = Fraction(pB_upper)
    if not 0 <= pa <= 1 or not 0 <= pb <= 1:
        raise ValueError("bounds must lie in [0, 1]")
    _, y_a = _take_from_top(rows, pa)
    _, y_b = _take_from_bottom(rows, pb)
    return y_a, y_b


@dataclass(frozen=True)
class RegionBoundsReport:
    """Exact comparison of a concrete classifier against the region bounds.

    lower_ok: shifted probability of the top label is at least Pr(Y in A).
    upper_ok: shifted probability of the challenger is at most Pr(Y in B).
    When the supplied bounds are not consistent with the classifier's
    exact behavior at s, precondition_met is False and the inequalities
    are reported as vacuous rather than failed.
    """

    precondition_met: bool
    reason: Optional[str]
    k: int
    c_a: Label
    c_b: Label
    exact_pa: Fraction
    exact_pb: Fraction
    pa_bound: Fraction
    pb_bound: Fraction
    pr_y_label_a: Fraction
    pr_y_label_b: Fraction
    pr_y_region_a: Fraction
    pr_y_region_b: Fraction
    lower_ok: bool
    upper_ok: bool


def verify_region_bounds(
    base: BaseClassifier,
    s: StructureVector,
    delta: FlipMask,
    pA_lower,
    pB_upper,
    spec: NoiseSpec,
) -> RegionBoundsReport:
    """Check the two region-mass inequalities against exact enumeration."""
    n = s.n
    _check_enum_n(n, MAX_VERIFY_N)
    if delta.n != n:
        raise ValueError("delta dimension does not match s")
    pa = Fraction(pA_lower)
    pb = Fraction(pB_upper)
    if not 0 <= pa <= 1 or not 0 <= pb <= 1:
        raise ValueError("bounds must lie in [0, 1]")

    labels = _label_all(base, n)
    dist = ExactDistribution.from_center(s, spec.beta, delta)
    x_probs = [Fraction(0) for _ in range(base.label_count)]
    y_probs = [Fraction(0) for _ in range(base.label_count)]
    for z, lab in enumerate(labels):
        x_probs[lab] += dist.pr_x(z)
        y_probs[lab] += dist.pr_y(z)

    order = sorted(range(len(x_probs)), key=lambda i: (-x_probs[i], i))
    c_a = order[0]
    c_b = c_a if len(order) == 1 else order[1]
    exact_pa = x_probs[c_a]
    exact_pb = x_probs[c_b] if c_b != c_a else Fraction(0)

    k = delta.weight
    y_region_a, y_region_b = region_pair_masses(n, k, spec.beta, pa, pb)

    if exact_pa < pa or exact_pb > pb:
        return RegionBoundsReport(
            precondition_met=False,
            reason="bounds are not consistent with the exact label probabilities at s",
            k=k,
            c_a=Label(c_a),
            c_b=Label(c_b),
            exact_pa=exact_pa,
            exact_pb=exact_pb,
            pa_bound=pa,
            pb_bound=pb,
            pr_y_label_a=y_probs[c_a],
            pr_y_label_b=y_probs[c_b] if c_b != c_a else Fraction(0),
            pr_y_region_a=y_region_a,
            pr_y_region_b=y_region_b,
            lower_ok=True,
            upper_ok=True,
        )

    pr_y_label_a = y_probs[c_a]
    pr_y_label_b = y_probs[c_b] if c_b != c_a else Fraction(0)
    return RegionBoundsReport(
        precondition_met=True,
        reason=None,
        k=k,
        c_a=Label(c_a),
        c_b=Label(c_b),
        exact_pa=exact_pa,
        exact_pb=exact_pb,
        pa_bound=pa,
        pb_bound=pb,
        pr_y_label_a=pr_y_label_a,
        pr_y_label_b=pr_y_label_b,
        pr_y_region_a=y_region_a,
        pr_y_region_b=y_region_b,
        lower_ok=pr_y_label_a >= y_region_a,
        upper_ok=pr_y_label_b <= y_region_b,
    )


class WorstCaseConstructionError(ValueError):
    """The requested (pA, pB, |C|) admits no consistent worst case."""


@dataclass(frozen=True)
class WorstCaseSegment:
    ratio: Fraction
    x_mass: Fraction
    label: Label

    @property
    def y_mass(self) -> Fraction:
        return self.x_mass / self.ratio


@dataclass(frozen=True)
class WorstCaseClassifier:
    """Distributional classifier meeting the bounds as badly as possible.

    The top label takes exactly pa of X-mass from the highest-ratio
    regions, the runner-up exactly pb from the lowest, and whatever is
    left in the middle goes to the remaining labels in chunks of at most
    pb each. High-ratio mass is cheap under the shifted law, so this
    assignment minimizes the top label's shifted probability while
    staying consistent with everything the certifier was told.
    """

    n: int
    k: int
    beta: Fraction
    num_labels: int
    pa: Fraction
    pb: Fraction
    c_a: Label
    c_b: Label
    segments: Tuple[WorstCaseSegment, ...]

    def __post_init__(self) -> None:
        total = sum((seg.x_mass for seg in self.segments), Fraction(0))
        if total != 1:
            raise ValueError(f"segment X-masses sum to {total}, expected 1")
        dist = self.x_distribution()
        if dist[self.c_a.id] != self.pa:
            raise ValueError("top label X-mass does not equal pa")
        if self.num_labels > 1 and dist[self.c_b.id] != self.pb:
            raise ValueError("runner-up X-mass does not equal pb")
        for i, mass in enumerate(dist):
            if i not in (self.c_a.id, self.c_b.id) and mass > self.pb:
                raise ValueError(f"label {i} X-mass {mass} exceeds pb={self.pb}")

    def x_distribution(self) -> Tuple[Fraction, ...]:
        acc = [Fraction(0) for _ in range(self.num_labels)]
        for seg in self.segments:
            acc[seg.label.id] += seg.x_mass
        return tuple(acc)

    def y_distribution(self) -> Tuple[Fraction, ...]:
        acc = [Fraction(0) for _ in range(self.num_labels)]
        for seg in self.segments:
            acc[seg.label.id] += seg.y_mass
        return tuple(acc)

    def shifted_winner(self) -> Tuple[Label, bool]:
        """Winning label under the shifted law and whether it was tied."""
        dist = self.y_distribution()
        best = max(dist)
        idx = dist.index(best)
        tie = sum(1 for v in dist if v == best) > 1
        return Label(idx), tie


def build_worst_case(
    n: int,
    k: int,
    beta: BetaLike,
    pA_lower,
    pB_upper,
    num_labels: int,
) -> WorstCaseClassifier:
    """Construct the worst classifier consistent with the given bounds.

    Existence needs three side conditions, each checked and named on
    failure: pa >= pb, pa + pb <= 1, and pa + (|C|-1) * pb >= 1 (the
    middle mass must fit under the per-label cap pb).
    """
    b = _beta_fraction(beta)
    _validate_nk(n, k)
    _check_enum_n(n, MAX_VERIFY_N)
    pa = Fraction(pA_lower)
    pb = Fraction(pB_upper)
    if not 0 <= pb <= pa <= 1:
        raise WorstCaseConstructionError(
            f"need 0 <= pB <= pA <= 1, got pA={pa}, pB={pb}"
        )
    if pa + pb > 1:
        raise WorstCaseConstructionError(
            f"pA + pB = {pa + pb} exceeds 1; the two regions cannot coexist"
        )
    if num_labels < 2:
        raise WorstCaseConstructionError("construction needs at least two labels")
    if pa + (num_labels - 1) * pb < 1:
        raise WorstCaseConstructionError(
            f"pA + (|C|-1)*pB = {pa + (num_labels - 1) * pb} falls short of 1; "
            f"the middle mass cannot fit under the per-label cap"
        )

    rows = _ranked_buckets(n, k, b)
    c_a = Label(0)
    c_b = Label(1)
    segments: List[WorstCaseSegment] = []

    top_pieces, _ = _take_from_top(rows, pa)
    for ratio, mass in top_pieces:
        segments.append(WorstCaseSegment(ratio=ratio, x_mass=mass, label=c_a))
    bottom_pieces, _ = _take_from_bottom(rows, pb)
    for ratio, mass in bottom_pieces:
        segments.append(WorstCaseSegment(ratio=ratio, x_mass=mass, label=c_b))

    # middle leftovers, rank order, chunked at pb per filler label
    remaining: List[Tuple[Fraction, Fraction]] = []
    taken_by_ratio: Dict[Fraction, Fraction] = {}
    for ratio, mass in top_pieces + bottom_pieces:
        taken_by_ratio[ratio] = taken_by_ratio.get(ratio, Fraction(0)) + mass
    for ratio, x, _y in rows:
        left = x - taken_by_ratio.get(ratio, Fraction(0))
        if left < 0:
            raise WorstCaseConstructionError(
                "regions A and B overlap; pA + pB must not exceed 1"
            )
        if left > 0:
            remaining.append((ratio, left))

    filler = 2
    filler_room = pb
    for ratio, left in remaining:
        while left > 0:
            if filler >= num_labels:
                raise WorstCaseConstructionError(
                    "ran out of labels for the middle mass; per-label cap too small"
                )
            if filler_room == 0:
                filler += 1
                filler_room = pb
                continue
            take = min(left, filler_room)
            segments.append(
                WorstCaseSegment(ratio=ratio, x_mass=take, label=Label(filler))
            )
            left -= take
            filler_room -= take

    return WorstCaseClassifier(
        n=n,
        k=k,
        beta=b,
        num_labels=num_labels,
        pa=pa,
        pb=pb,
        c_a=c_a,
        c_b=c_b,
        segments=tuple(segments),
    )
