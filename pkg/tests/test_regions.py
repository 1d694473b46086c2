"""Region masses: closed forms against their literal counting routes.

Every identity here has two genuinely different derivations on its two
sides: the collapsed product formula versus the weighted sum over
coincidence counts, and both versus raw popcount enumeration.
"""

from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bincert.numerics import EXACT, FLOAT, FloatBracket
from bincert.regions import (
    density_ratio,
    exact_ranked_masses,
    prob_x_region,
    prob_y_region,
    ranked_regions,
    region_size,
    t_coefficient,
)

BETAS = [Fraction(3, 5), Fraction(7, 10), Fraction(4, 5), Fraction(1, 3)]


def _enumerated_pair_counts(n, k):
    """Raw counts of points by (distance to s, distance to s xor delta).

    Uses s = 0 and delta = the first k coordinates; the counting route
    under test never sees these choices, only n and k.
    """
    delta = (1 << k) - 1
    counts = {}
    for z in range(1 << n):
        w = z.bit_count()
        v = (z ^ delta).bit_count()
        counts[(w, v)] = counts.get((w, v), 0) + 1
    return counts


@pytest.mark.parametrize("n", [3, 5, 6])
def test_region_size_matches_enumeration(n):
    for k in range(n + 1):
        counts = _enumerated_pair_counts(n, k)
        for w in range(n + 1):
            for v in range(n + 1):
                assert region_size(n, k, w, v) == counts.get((w, v), 0)


@pytest.mark.parametrize("n", [4, 7])
def test_t_coefficient_equals_region_size(n):
    # same quantity through an independently coded piecewise formula
    for k in range(n + 1):
        for m in range(-n, n + 1):
            for j in range(max(0, m), min(n, n + m) + 1):
                assert t_coefficient(n, k, m, j) == region_size(n, k, j - m, j)


def _mass_by_weighted_sum(n, k, beta, m, law):
    """Literal route: sum point probabilities over the coincidence counts.

    A point counted by t(m, j) sits at distance j - m from s and j from
    the shifted center, so its probability is beta^(n-w) (1-beta)^w with
    w = j - m under X and w = j under Y.
    """
    total = Fraction(0)
    for j in range(max(0, m), min(n, n + m) + 1):
        t = t_coefficient(n, k, m, j)
        if not t:
            continue
        w = (j - m) if law == "x" else j
        total += t * beta ** (n - w) * (1 - beta) ** w
    return total


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_closed_form_equals_weighted_sum(n, beta):
    for k in range(n + 1):
        for m in range(-n, n + 1):
            assert prob_x_region(n, k, beta, m) == _mass_by_weighted_sum(
                n, k, beta, m, "x"
            )
            assert prob_y_region(n, k, beta, m) == _mass_by_weighted_sum(
                n, k, beta, m, "y"
            )


@pytest.mark.parametrize("beta", BETAS)
def test_masses_normalize(beta):
    for n in (1, 4, 9):
        for k in range(n + 1):
            assert sum(prob_x_region(n, k, beta, m) for m in range(-n, n + 1)) == 1
            assert sum(prob_y_region(n, k, beta, m) for m in range(-n, n + 1)) == 1


@pytest.mark.parametrize("beta", BETAS)
def test_ratio_identity_on_nonempty_regions(beta):
    n = 7
    for k in range(n + 1):
        for m in range(-n, n + 1):
            y = prob_y_region(n, k, beta, m)
            if y == 0:
                continue
            assert prob_x_region(n, k, beta, m) / y == density_ratio(beta, m)


def test_x_y_mirror_symmetry():
    n, beta = 6, Fraction(7, 10)
    for k in range(n + 1):
        for m in range(-n, n + 1):
            assert prob_x_region(n, k, beta, m) == prob_y_region(n, k, beta, -m)


def test_region_is_empty_iff_parity_or_range_excludes_it():
    n, k, beta = 8, 5, Fraction(3, 5)
    for m in range(-n, n + 1):
        expected_empty = abs(m) > k or (k - m) % 2 == 1
        mass = prob_x_region(n, k, beta, m) + prob_y_region(n, k, beta, m)
        assert (mass == 0) == expected_empty


def test_mass_values_are_binomial_products():
    # spot-check one region against hand arithmetic: n=6, k=4, m=0 -> b=2
    beta = Fraction(7, 10)
    expected = comb(4, 2) * beta**2 * (1 - beta) ** 2
    assert prob_x_region(6, 4, beta, 0) == expected
    assert prob_y_region(6, 4, beta, 0) == expected


def test_ranked_regions_orders_by_strictly_descending_ratio():
    regs = ranked_regions(5, 3, Fraction(7, 10))
    ratios = [e.ratio for e in regs.entries]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert [e.m for e in regs.entries] == list(range(5, -6, -1))


def test_ranked_regions_reverses_for_beta_below_half():
    regs = ranked_regions(4, 2, Fraction(1, 3))
    assert [e.m for e in regs.entries] == list(range(-4, 5))
    ratios = [e.ratio for e in regs.entries]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_half_beta_collapses_to_one_region():
    assert exact_ranked_masses(5, 3, Fraction(1, 2)) == [
        (0, Fraction(1), Fraction(1))
    ]
    regs = ranked_regions(5, 3, Fraction(1, 2))
    assert len(regs.entries) == 1
    assert regs.entries[0].ratio == 1


def test_exact_ranked_masses_agree_with_region_probs():
    n, k, beta = 6, 4, Fraction(4, 5)
    for m, x, y in exact_ranked_masses(n, k, beta):
        assert x == prob_x_region(n, k, beta, m)
        assert y == prob_y_region(n, k, beta, m)


def test_float_backend_brackets_contain_exact_masses():
    n, k, beta = 10, 6, Fraction(7, 10)
    for m in range(-n, n + 1):
        exact = prob_x_region(n, k, beta, m)
        br = prob_x_region(n, k, beta, m, backend=FLOAT)
        assert isinstance(br, FloatBracket)
        assert br.contains(exact)
        assert 0 <= br.hi - br.lo <= 2 * 2.3e-16 * max(br.hi, 1e-300)


def test_beta_validation():
    with pytest.raises(TypeError):
        prob_x_region(4, 2, 0.7, 0)  # float beta misstates the model
    with pytest.raises(ValueError):
        prob_x_region(4, 2, Fraction(1), 0)
    with pytest.raises(ValueError):
        prob_x_region(4, 2, Fraction(0), 0)


def test_nk_validation():
    beta = Fraction(7, 10)
    with pytest.raises(ValueError):
        prob_x_region(0, 0, beta, 0)
    with pytest.raises(ValueError):
        prob_x_region(4, 5, beta, 0)
    with pytest.raises(ValueError):
        prob_x_region(4, 2, beta, 5)  # |m| > n


@given(
    n=st.integers(min_value=1, max_value=12),
    k_frac=st.fractions(min_value=0, max_value=1),
    num=st.integers(min_value=1, max_value=99),
)
@settings(max_examples=60, deadline=None)
def test_normalization_and_ratio_identity_properties(n, k_frac, num):
    beta = Fraction(num, 100)
    k = round(k_frac * n)
    rows = exact_ranked_masses(n, k, beta)
    assert sum(x for _, x, _ in rows) == 1
    assert sum(y for _, _, y in rows) == 1
    for m, x, y in rows:
        if y:
            assert x / y == density_ratio(beta, m)
