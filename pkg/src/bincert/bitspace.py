"""Binary-vector algebra and bit-flip noise sampling.

Vectors over {0,1}^n are stored packed in a single Python int (bit i of
the int is coordinate i), so XOR and Hamming distance are word-parallel
regardless of n. Noise draws are exact: the per-bit flip probability is
kept as a rational p/q and a bit flips iff a uniform draw from
{0, ..., q-1} lands below p, so no float parsing can shift the
distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Tuple, Union

import numpy as np

__all__ = [
    "DimensionMismatch",
    "FlipMask",
    "Label",
    "NoiseSpec",
    "StructureVector",
    "hamming",
    "noise_stream",
    "sample_noise",
    "xor_apply",
]

# Generator.integers needs the bound to fit a uint64 with headroom.
_MAX_SAMPLABLE_DENOMINATOR = 1 << 62

SeedLike = Union[int, Tuple[int, ...]]


class DimensionMismatch(ValueError):
    """Two vectors of different dimension were combined."""


def _validate_bits(bits: int, n: int, kind: str) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"{kind}: dimension must be a positive integer, got {n!r}")
    if not isinstance(bits, int) or isinstance(bits, bool) or bits < 0:
        raise ValueError(f"{kind}: bit pattern must be a non-negative integer")
    if bits >> n:
        raise ValueError(f"{kind}: bit pattern has bits set beyond dimension {n}")


def _iter_bit_indices(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class StructureVector:
    """A point of {0,1}^n. Bit i of ``bits`` is coordinate i."""

    bits: int
    n: int

    def __post_init__(self) -> None:
        _validate_bits(self.bits, self.n, "StructureVector")

    @classmethod
    def from_bits(cls, values: Iterable[int]) -> "StructureVector":
        bits = 0
        n = 0
        for i, v in enumerate(values):
            if v not in (0, 1):
                raise ValueError(f"coordinate {i} is {v!r}, expected 0 or 1")
            bits |= v << i
            n = i + 1
        if n == 0:
            raise ValueError("cannot build a zero-dimensional vector")
        return cls(bits, n)

    @classmethod
    def from_string(cls, text: str) -> "StructureVector":
        """Parse a string like "0101"; character i is coordinate i."""
        if not text:
            raise ValueError("empty bit string")
        if any(ch not in "01" for ch in text):
            raise ValueError(f"bit string may contain only 0 and 1: {text!r}")
        return cls(int(text[::-1], 2), len(text))

    def to_string(self) -> str:
        return format(self.bits, f"0{self.n}b")[::-1]

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"coordinate {i} outside [0, {self.n})")
        return (self.bits >> i) & 1

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def support(self) -> Iterator[int]:
        """Indices of the 1-bits, ascending."""
        return _iter_bit_indices(self.bits)


@dataclass(frozen=True)
class FlipMask:
    """A set of coordinates to toggle, with its size cached.

    Serves both as an adversarial perturbation and as a noise draw; the
    two differ only in where the mask comes from.
    """

    bits: int
    n: int
    weight: int = field(init=False)

    def __post_init__(self) -> None:
        _validate_bits(self.bits, self.n, "FlipMask")
        object.__setattr__(self, "weight", self.bits.bit_count())

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "FlipMask":
        bits = 0
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"flip index {i} outside [0, {n})")
            bits |= 1 << i
        return cls(bits, n)

    @classmethod
    def from_string(cls, text: str) -> "FlipMask":
        vec = StructureVector.from_string(text)
        return cls(vec.bits, vec.n)

    def to_string(self) -> str:
        return format(self.bits, f"0{self.n}b")[::-1]

    def support(self) -> Iterator[int]:
        return _iter_bit_indices(self.bits)


@dataclass(frozen=True, order=True)
class Label:
    """Class label, an index into the label set."""

    id: int

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 0:
            raise ValueError(f"label id must be a non-negative integer, got {self.id!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Bit-preservation probability beta, kept as an exact rational.

    Each noise bit is 0 with probability beta and 1 with probability
    1 - beta, independently per coordinate. Floats are rejected on
    purpose: pass a Fraction or a decimal string so that 0.7 means
    exactly 7/10.
    """

    beta: Fraction

    def __post_init__(self) -> None:
        if isinstance(self.beta, float):
            raise TypeError(
                "beta must be a Fraction or a string; float would smuggle in "
                "binary rounding (use NoiseSpec.from_string('0.7'))"
            )
        beta = Fraction(self.beta)
        if not Fraction(0) < beta < Fraction(1):
            raise ValueError(f"beta must lie strictly between 0 and 1, got {beta}")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_string(cls, text: str) -> "NoiseSpec":
        """Accepts decimal strings ("0.7") and ratios ("7/10"), both exact."""
        try:
            beta = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse beta from {text!r}") from exc
        return cls(beta)

    @property
    def flip_prob(self) -> Fraction:
        return 1 - self.beta

    @property
    def ratio_base(self) -> Fraction:
        """beta / (1 - beta), the base of every density ratio."""
        return self.beta / (1 - self.beta)


def xor_apply(s: StructureVector, mask: FlipMask) -> StructureVector:
    """Toggle the masked coordinates of s."""
    if s.n != mask.n:
        raise DimensionMismatch(f"vector has dimension {s.n}, mask has {mask.n}")
    return StructureVector(s.bits ^ mask.bits, s.n)


def hamming(a: StructureVector, b: StructureVector) -> int:
    """Number of coordinates on which a and b differ."""
    if a.n != b.n:
        raise DimensionMismatch(f"dimensions differ: {a.n} vs {b.n}")
    return (a.bits ^ b.bits).bit_count()


def noise_stream(seed: SeedLike, index: int) -> np.random.Generator:
    """Independent generator for sample `index`.

    Streams are keyed by (seed..., index), so replaying a run gives the
    same draw for the same index no matter how samples are scheduled
    across threads or batches.
    """
    key = seed if isinstance(seed, tuple) else (seed,)
    # SeedSequence drops trailing zero entropy words, so (42,) and
    # (42, 0) would otherwise feed identical pools; the length prefix
    # keeps differently shaped keys apart.
    ss = np.random.SeedSequence(entropy=(len(key), index) + key)
    return np.random.Generator(np.random.PCG64(ss))


def sample_noise(spec: NoiseSpec, n: int, rng: np.random.Generator) -> FlipMask:
    """One noise mask: each bit set independently with probability 1 - beta."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    p = spec.flip_prob
    num, den = p.numerator, p.denominator
    if den > _MAX_SAMPLABLE_DENOMINATOR:
        raise ValueError(
            f"flip probability denominator {den} too large for exact sampling"
        )
    draws = rng.integers(0, den, size=n, dtype=np.uint64)
    flips = draws < np.uint64(num)
    packed = np.packbits(flips, bitorder="little")
    return FlipMask(int.from_bytes(packed.tobytes(), "little"), n)
