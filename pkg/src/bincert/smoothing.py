"""Monte-Carlo smoothing pipeline over a black-box base classifier.

The smoothed classifier's label probabilities are estimated by drawing d
noise masks, classifying the d corrupted inputs in batches, and counting
labels. Each sample's noise comes from its own substream keyed by
(seed, sample index), so the counts are bit-identical however the work
is batched or parallelized, and any single sample can be replayed in
isolation.

Base classifiers must be deterministic functions of their input. The
confidence machinery attributes all randomness in f(s xor noise) to the
noise; a classifier that flips coins internally would silently break
that accounting.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Protocol, Sequence, Tuple, Union, runtime_checkable

from .bitspace import FlipMask, Label, NoiseSpec, StructureVector, noise_stream, sample_noise, xor_apply
from .bounds import LabelCounts, simultaneous_bounds
from .certify import Abstain, Certificate
from .certify import certified_perturbation_size as _certified_size
from .numerics import EXACT, NumericBackend

__all__ = [
    "BaseClassifier",
    "ClassifierBatchError",
    "SmoothingRun",
    "certify_example",
    "smoothed_predict",
    "smoothing_run",
]

DEFAULT_BATCH_SIZE = 128

SeedLike = Union[int, Tuple[int, ...]]


@runtime_checkable
class BaseClassifier(Protocol):
    """Anything that labels batches of structure vectors.

    label_count is the size of the label set C, which also fixes how the
    significance level gets divided downstream.
    """

    label_count: int

    def classify(self, batch: Sequence[StructureVector]) -> Sequence[Label]:
        ...


class ClassifierBatchError(RuntimeError):
    """Base classifier failed; carries the sample index range of the batch."""

    def __init__(self, first_index: int, last_index: int, detail: str) -> None:
        super().__init__(
            f"base classifier failed on samples {first_index}..{last_index}: {detail}"
        )
        self.first_index = first_index
        self.last_index = last_index


@dataclass(frozen=True)
class SmoothingRun:
    s: StructureVector
    spec: NoiseSpec
    d: int
    seed: SeedLike
    counts: LabelCounts
    elapsed: float

    def __post_init__(self) -> None:
        if self.counts.total != self.d:
            raise ValueError(
                f"counts total {self.counts.total} does not match d={self.d}"
            )


def _sample_input(
    s: StructureVector, spec: NoiseSpec, seed: SeedLike, index: int
) -> StructureVector:
    rng = noise_stream(seed, index)
    mask: FlipMask = sample_noise(spec, s.n, rng)
    return xor_apply(s, mask)


def smoothing_run(
    base: BaseClassifier,
    s: StructureVector,
    spec: NoiseSpec,
    d: int,
    seed: SeedLike = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> SmoothingRun:
    """Classify d independently corrupted copies of s and tally the labels."""
    if d < 1:
        raise ValueError(f"sample count must be at least 1, got {d}")
    if batch_size < 1:
        raise ValueError(f"batch size must be at least 1, got {batch_size}")
    num_labels = base.label_count
    if num_labels < 1:
        raise ValueError("base classifier must expose a positive label_count")

    tally = [0] * num_labels
    start = time.perf_counter()
    for lo in range(0, d, batch_size):
        hi = min(lo + batch_size, d)
        inputs = [_sample_input(s, spec, seed, j) for j in range(lo, hi)]
        try:
            labels = base.classify(inputs)
        except Exception as exc:
            raise ClassifierBatchError(lo, hi - 1, repr(exc)) from exc
        if len(labels) != len(inputs):
            raise ClassifierBatchError(
                lo, hi - 1, f"returned {len(labels)} labels for {len(inputs)} inputs"
            )
        for lab in labels:
            i = lab.id if isinstance(lab, Label) else int(lab)
            if not 0 <= i < num_labels:
                raise ClassifierBatchError(
                    lo, hi - 1, f"label {i} outside range(0, {num_labels})"
                )
            tally[i] += 1
    elapsed = time.perf_counter() - start
    return SmoothingRun(
        s=s, spec=spec, d=d, seed=seed, counts=LabelCounts(tuple(tally)), elapsed=elapsed
    )


def smoothed_predict(
    base: BaseClassifier,
    s: StructureVector,
    spec: NoiseSpec,
    d: int,
    seed: SeedLike = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> Tuple[Label, LabelCounts]:
    """Most frequent label over d noisy evaluations, with the full counts.

    Ties break toward the smallest label id; counts.top_label() exposes
    whether that happened.
    """
    run = smoothing_run(base, s, spec, d, seed=seed, batch_size=batch_size)
    label, _tie = run.counts.top_label()
    return label, run.counts


def certify_example(
    base: BaseClassifier,
    s: StructureVector,
    spec: NoiseSpec,
    d: int,
    alpha: float,
    backend: NumericBackend = EXACT,
    seed: SeedLike = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    full_scan: bool = False,
) -> Union[Certificate, Abstain]:
    """End-to-end pipeline: sample, bound, then search for the certified size.

    The returned record carries (alpha, d, seed) so the exact run can be
    replayed later, and the tie flag from the count stage so a caller
    can discount wins the sampling could not distinguish.
    """
    run = smoothing_run(base, s, spec, d, seed=seed, batch_size=batch_size)
    bnds = simultaneous_bounds(run.counts, alpha)
    outcome = _certified_size(
        s.n,
        spec.beta,
        bnds.pA_lower,
        bnds.pB_upper,
        backend=backend,
        label=bnds.c_A,
        full_scan=full_scan,
    )
    if isinstance(outcome, Abstain):
        return replace(
            outcome, alpha=float(alpha), d=d, seed=seed, tie=bnds.tie, label=bnds.c_A
        )
    return replace(outcome, alpha=float(alpha), d=d, seed=seed, tie=bnds.tie)
