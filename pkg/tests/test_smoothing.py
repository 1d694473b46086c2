"""Monte-Carlo smoothing: determinism, convergence, and the full pipeline."""

import math
from fractions import Fraction

import pytest

from bincert.bitspace import Label, NoiseSpec, StructureVector
from bincert.certify import Abstain, Certificate
from bincert.classifiers import Constant, DegreeThreshold, Parity
from bincert.numerics import EXACT
from bincert.oracle import exact_smoothed_distribution
from bincert.smoothing import (
    ClassifierBatchError,
    certify_example,
    smoothed_predict,
    smoothing_run,
)

B7 = Fraction(7, 10)
SPEC = NoiseSpec(B7)


class FaultyClassifier:
    label_count = 2

    def classify(self, batch):
        return [Label(7) for _ in batch]  # out of range on purpose


def test_same_seed_reproduces_counts_exactly():
    s = StructureVector.from_string("1101001010")
    a = smoothing_run(Parity(), s, SPEC, d=500, seed=9)
    b = smoothing_run(Parity(), s, SPEC, d=500, seed=9)
    assert a.counts == b.counts


def test_different_seeds_differ():
    s = StructureVector.from_string("1101001010")
    a = smoothing_run(Parity(), s, SPEC, d=500, seed=9)
    b = smoothing_run(Parity(), s, SPEC, d=500, seed=10)
    assert a.counts != b.counts  # 2^-500-ish chance of a false failure


def test_counts_do_not_depend_on_batch_geometry():
    s = StructureVector.from_string("110100101001")
    a = smoothing_run(Parity(), s, SPEC, d=257, seed=4, batch_size=1)
    b = smoothing_run(Parity(), s, SPEC, d=257, seed=4, batch_size=64)
    c = smoothing_run(Parity(), s, SPEC, d=257, seed=4, batch_size=257)
    assert a.counts == b.counts == c.counts


def test_tuple_seeds_are_accepted():
    s = StructureVector.from_string("1111")
    a = smoothing_run(Constant(0), s, SPEC, d=64, seed=(3, 17))
    assert a.counts.counts == (64, 0)
    assert a.seed == (3, 17)


def test_constant_classifier_is_unanimous():
    s = StructureVector.from_string("0101")
    label, counts = smoothed_predict(Constant(1), s, SPEC, d=200, seed=0)
    assert label == Label(1)
    assert counts.counts == (0, 200)


def test_empirical_rate_tracks_the_exact_distribution():
    # parity under noise has an exact closed-form distribution; the
    # empirical frequency must sit within 4 sigma of it
    n, d = 6, 4000
    s = StructureVector.from_string("110100")
    dist = exact_smoothed_distribution(Parity(), s, SPEC)
    run = smoothing_run(Parity(), s, SPEC, d=d, seed=12)
    for c in range(2):
        p = float(dist[c])
        sigma = math.sqrt(p * (1 - p) / d)
        assert abs(run.counts.counts[c] / d - p) <= 4 * sigma


def test_out_of_range_label_is_reported_with_batch_position():
    s = StructureVector.from_string("0101")
    with pytest.raises(ClassifierBatchError) as info:
        smoothing_run(FaultyClassifier(), s, SPEC, d=10, seed=0)
    assert info.value.first_index == 0


def test_invalid_sample_count_rejected():
    s = StructureVector.from_string("0101")
    with pytest.raises(ValueError):
        smoothing_run(Parity(), s, SPEC, d=0, seed=0)


class TestCertifyExample:
    def test_unanimous_classifier_certifies(self):
        s = StructureVector.from_string("01011100")
        out = certify_example(Constant(0), s, SPEC, d=2000, alpha=0.001, seed=1)
        assert isinstance(out, Certificate)
        assert out.label == Label(0)
        assert out.k_certified >= 1
        assert out.alpha == 0.001
        assert out.d == 2000

    def test_coin_flip_classifier_abstains(self):
        # parity of the noise mask itself is a fair coin at beta=1/2
        s = StructureVector.from_string("0101110001")
        spec_half = NoiseSpec(Fraction(1, 2))
        out = certify_example(Parity(), s, spec_half, d=400, alpha=0.001, seed=3)
        assert isinstance(out, Abstain)
        assert out.label is not None
        assert out.d == 400

    def test_outcome_records_are_replayable(self):
        s = StructureVector.from_string("01011100")
        a = certify_example(
            DegreeThreshold(3), s, SPEC, d=500, alpha=0.01, seed=(8, 2)
        )
        b = certify_example(
            DegreeThreshold(3), s, SPEC, d=500, alpha=0.01, seed=(8, 2)
        )
        assert a.to_record() == b.to_record()
        assert a.to_record()["seed"] == [8, 2]

    def test_backend_recorded(self):
        s = StructureVector.from_string("01011100")
        out = certify_example(
            Constant(0), s, SPEC, d=300, alpha=0.01, seed=0, backend=EXACT
        )
        assert out.to_record()["backend"] == "exact-rational"
