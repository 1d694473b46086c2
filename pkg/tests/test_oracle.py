"""Brute-force enumeration against the closed-form engine.

These tests are the independence layer: every quantity the engine
derives analytically is recomputed here by walking all 2^n points.
"""

from fractions import Fraction

import numpy as np
import pytest

from bincert.bitspace import FlipMask, Label, NoiseSpec, StructureVector
from bincert.certify import (
    bound_pair,
    build_region_split,
    certified_perturbation_size,
    check_radius,
)
from bincert.oracle import (
    ExactDistribution,
    WorstCaseConstructionError,
    build_worst_case,
    enumerate_region_probs,
    exact_smoothed_distribution,
    region_pair_masses,
    verify_region_bounds,
)
from bincert.regions import prob_x_region, prob_y_region, ranked_regions

from conftest import random_table_classifier

B7 = Fraction(7, 10)


class TestExactDistribution:
    def test_point_masses_normalize(self):
        s = StructureVector.from_string("1011")
        dist = ExactDistribution.from_center(s, B7)
        assert sum(dist.pr_x(StructureVector(z, 4)) for z in range(16)) == 1

    def test_center_takes_the_keep_mass(self):
        s = StructureVector.from_string("1011")
        dist = ExactDistribution.from_center(s, B7)
        assert dist.pr_x(s) == B7**4

    def test_ratio_exponent_counts_distance_difference(self):
        s = StructureVector.from_string("0000")
        delta = FlipMask.from_string("1100")
        dist = ExactDistribution.from_center(s, B7, shift=delta)
        z = StructureVector.from_string("1000")
        # distance 1 from s, distance 1 from the shifted center
        assert dist.ratio_exponent(z) == 0


class TestEnumerateRegionProbs:
    @pytest.mark.parametrize("beta", [Fraction(3, 5), B7, Fraction(1, 3)])
    def test_matches_closed_forms_everywhere(self, beta):
        for n in range(1, 9):
            for k in range(n + 1):
                table = enumerate_region_probs(n, k, beta)
                for m in range(-n, n + 1):
                    x, y = table.get(m, (Fraction(0), Fraction(0)))
                    assert x == prob_x_region(n, k, beta, m), (n, k, m)
                    assert y == prob_y_region(n, k, beta, m), (n, k, m)

    def test_normalizes(self):
        table = enumerate_region_probs(7, 4, B7)
        assert sum(x for x, _ in table.values()) == 1
        assert sum(y for _, y in table.values()) == 1

    def test_invariant_to_the_choice_of_delta(self):
        n, k = 8, 3
        canonical = enumerate_region_probs(n, k, B7)
        rng = np.random.default_rng(11)
        for _ in range(5):
            support = rng.choice(n, size=k, replace=False)
            delta = FlipMask.from_indices(sorted(int(i) for i in support), n)
            s_bits = int(rng.integers(1 << n))
            moved = enumerate_region_probs(
                n, k, B7, s=StructureVector(s_bits, n), delta=delta
            )
            assert moved == canonical

    def test_rejects_weight_mismatch(self):
        with pytest.raises(ValueError):
            enumerate_region_probs(
                5, 2, B7, delta=FlipMask.from_indices([0, 1, 2], 5)
            )

    def test_rejects_oversized_dimension(self):
        with pytest.raises(ValueError):
            enumerate_region_probs(21, 1, B7)


class TestExactSmoothedDistribution:
    def test_constant_classifier(self):
        from bincert.classifiers import Constant

        s = StructureVector.from_string("010101")
        dist = exact_smoothed_distribution(Constant(1), s, NoiseSpec(B7))
        assert dist == (Fraction(0), Fraction(1))

    def test_parity_has_a_closed_form(self):
        # Pr[parity(s xor eps) = parity(s)] = (1 + (2 beta - 1)^n) / 2
        from bincert.classifiers import Parity

        n = 6
        s = StructureVector.from_string("110100")
        dist = exact_smoothed_distribution(Parity(), s, NoiseSpec(B7))
        stay = (1 + (2 * B7 - 1) ** n) / 2
        parity_of_s = s.weight & 1
        assert dist[parity_of_s] == stay
        assert sum(dist) == 1

    def test_shift_moves_the_center(self):
        from bincert.classifiers import FirstBit

        s = StructureVector.from_string("0000")
        delta = FlipMask.from_string("1000")
        spec = NoiseSpec(B7)
        shifted = exact_smoothed_distribution(FirstBit(), s, spec, shift=delta)
        # center now has bit 0 set, so label 1 carries the keep probability
        assert shifted[1] == B7


class TestRegionPairMasses:
    @pytest.mark.parametrize("beta", [Fraction(3, 5), B7, Fraction(1, 2)])
    def test_agrees_with_the_engine_split(self, beta):
        bounds_grid = [
            (Fraction(1), Fraction(0)),
            (Fraction(9, 10), Fraction(1, 10)),
            (Fraction(3, 5), Fraction(2, 5)),
            (Fraction(1, 2), Fraction(1, 4)),
        ]
        for n in range(1, 7):
            for k in range(n + 1):
                regs = ranked_regions(n, k, beta)
                for pa, pb in bounds_grid:
                    want_a, want_b = region_pair_masses(n, k, beta, pa, pb)
                    got_a, got_b = bound_pair(build_region_split(regs, pa, pb))
                    assert want_a == got_a, (n, k, pa, pb)
                    assert want_b == got_b, (n, k, pa, pb)

    def test_permissive_about_inverted_bounds(self):
        # the oracle side computes masses for any pair, even ones the
        # engine rejects, so probing stays possible
        pr_a, pr_b = region_pair_masses(4, 2, B7, Fraction(1, 10), Fraction(9, 10))
        assert pr_a >= 0 and pr_b >= 0


class TestVerifyRegionBounds:
    def test_random_classifiers_never_violate_the_bounds(self):
        n, spec = 8, NoiseSpec(B7)
        s = StructureVector(0b10110101, n)
        delta = FlipMask.from_indices([1, 4, 6], n)
        rng = np.random.default_rng(23)
        for trial in range(40):
            base = random_table_classifier(n, int(rng.integers(2, 5)), trial)
            dist = exact_smoothed_distribution(base, s, spec)
            order = sorted(range(len(dist)), key=lambda c: (-dist[c], c))
            pa_true, pb_true = dist[order[0]], dist[order[1]]
            report = verify_region_bounds(
                base,
                s,
                delta,
                pa_true * Fraction(9, 10),
                min(Fraction(1), pb_true * Fraction(11, 10) + Fraction(1, 1000)),
                spec,
            )
            assert report.precondition_met, report.reason
            assert report.lower_ok and report.upper_ok, trial

    def test_reports_vacuous_when_bounds_do_not_hold(self):
        from bincert.classifiers import Constant

        s = StructureVector(0, 4)
        report = verify_region_bounds(
            Constant(0),
            s,
            FlipMask.from_indices([0], 4),
            Fraction(1),
            Fraction(0),
            NoiseSpec(B7),
        )
        # constant classifier: pa_true = 1 >= 1 holds, pb_true = 0 <= 0 holds
        assert report.precondition_met
        report2 = verify_region_bounds(
            Constant(0),
            s,
            FlipMask.from_indices([0], 4),
            Fraction(1),
            Fraction(0) - Fraction(0),
            NoiseSpec(B7),
        )
        assert report2.precondition_met


class TestWorstCase:
    def test_masses_meet_the_construction_targets(self):
        pa, pb = Fraction(3, 5), Fraction(3, 10)
        wc = build_worst_case(6, 2, B7, pa, pb, num_labels=3)
        x_dist = wc.x_distribution()
        assert sum(x_dist) == 1
        assert x_dist[wc.c_a.id] == pa
        assert x_dist[wc.c_b.id] == pb
        for c, mass in enumerate(x_dist):
            if c not in (wc.c_a.id, wc.c_b.id):
                assert mass <= pb

    def test_extremal_shifted_masses_match_the_engine(self):
        # the construction realizes the Neyman-Pearson optimum: its
        # shifted masses for c_a and c_b equal the engine's bound pair
        pa, pb = Fraction(3, 5), Fraction(3, 10)
        n, k = 6, 2
        wc = build_worst_case(n, k, B7, pa, pb, num_labels=3)
        y_dist = wc.y_distribution()
        pr_a, pr_b = bound_pair(build_region_split(ranked_regions(n, k, B7), pa, pb))
        assert y_dist[wc.c_a.id] == pr_a
        assert y_dist[wc.c_b.id] == pr_b

    def test_flip_point_matches_the_certificate(self):
        pa, pb = Fraction(3, 5), Fraction(3, 10)
        n = 8
        cert = certified_perturbation_size(n, B7, pa, pb)
        for k in range(1, n + 1):
            wc = build_worst_case(n, k, B7, pa, pb, num_labels=3)
            winner, tie = wc.shifted_winner()
            flipped = tie or winner != wc.c_a
            assert flipped == (k > cert.k_certified), k

    def test_side_conditions_each_have_a_named_error(self):
        with pytest.raises(WorstCaseConstructionError, match="pB <= pA"):
            build_worst_case(4, 1, B7, Fraction(1, 5), Fraction(2, 5), 2)
        with pytest.raises(WorstCaseConstructionError, match="exceeds 1"):
            build_worst_case(4, 1, B7, Fraction(4, 5), Fraction(2, 5), 2)
        with pytest.raises(WorstCaseConstructionError, match="falls short"):
            build_worst_case(4, 1, B7, Fraction(2, 5), Fraction(1, 5), 2)

    def test_binary_needs_complementary_bounds(self):
        wc = build_worst_case(5, 2, B7, Fraction(7, 10), Fraction(3, 10), 2)
        assert wc.x_distribution() == (Fraction(7, 10), Fraction(3, 10))

    def test_rejects_single_label(self):
        with pytest.raises(WorstCaseConstructionError):
            build_worst_case(4, 1, B7, Fraction(1), Fraction(0), 1)
