"""Tests for monofit.dist1d.

Oracles used here are deliberately independent of the implementation:
brute-force enumeration over all assignment couplings for W1/W2, a dense
grid for the sup defining the generalized inverse, and closed-form CDF
areas for tabulated distances.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from monofit.dist1d import (
    EmpiricalMeasure,
    MonotoneStepFn,
    TabulatedDistribution,
    empirical_moment,
    generalized_inverse,
    pushforward,
    quantile,
    w1_cdf_area,
    w1_empirical,
    w1_tabulated,
    w2_empirical,
)


def coupling_oracle(a, b, power):
    """Min over all n! assignment couplings of the mean p-th power cost."""
    n = len(a)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        cost = sum(abs(a[i] - b[perm[i]]) ** power for i in range(n)) / n
        best = min(best, cost)
    return best


def sup_oracle(m, x, grid):
    """Evaluate sup{t : m(t) <= x} on a dense grid."""
    vals = m(grid)
    mask = vals <= x
    return float(grid[mask].max()) if mask.any() else 0.0


samples = st.lists(
    st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=64,
)


class TestEmpiricalMeasure:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            EmpiricalMeasure([1.0, 0.0])

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ValueError):
            EmpiricalMeasure([])
        with pytest.raises(ValueError):
            EmpiricalMeasure([0.0, np.inf])

    def test_from_sample_sorts(self):
        m = EmpiricalMeasure.from_sample([3.0, 1.0, 2.0])
        assert m.atoms.tolist() == [1.0, 2.0, 3.0]

    def test_quantile_levels_pick_atoms(self):
        # level u in ((i-1)/n, i/n] must return atoms[i], 1-based
        m = EmpiricalMeasure([10.0, 20.0, 30.0, 40.0])
        assert m.quantile(0.25) == 10.0
        assert m.quantile(0.2500001) == 20.0
        assert m.quantile(1.0) == 40.0
        with pytest.raises(ValueError):
            m.quantile(0.0)


class TestMonotoneStepFn:
    def test_validation(self):
        with pytest.raises(ValueError):
            MonotoneStepFn([0.5, 0.5], [0.0, 1.0])
        with pytest.raises(ValueError):
            MonotoneStepFn([0.2, 0.8], [1.0, 0.0])
        with pytest.raises(ValueError):
            MonotoneStepFn([0.2, 1.5], [0.0, 1.0])

    def test_left_continuous_evaluation(self):
        m = MonotoneStepFn([0.5, 1.0], [0.0, 1.0])
        assert m(0.0) == 0.0
        assert m(0.5) == 0.0  # value holds on (0, 0.5] inclusive at the knot
        assert m(0.5000001) == 1.0
        assert m(1.0) == 1.0

    def test_extends_past_last_knot(self):
        m = MonotoneStepFn([0.2, 0.4], [1.0, 2.0])
        assert m(0.9) == 2.0

    def test_domain_error(self):
        m = MonotoneStepFn([0.5], [0.0])
        with pytest.raises(ValueError):
            m(1.5)


class TestGeneralizedInverse:
    def test_identity_like_step(self):
        knots = np.linspace(1e-4, 1.0, 10000)
        m = MonotoneStepFn(knots, knots)
        assert abs(generalized_inverse(m, 0.5) - 0.5) <= 2e-4

    def test_empty_set_gives_zero(self):
        m = MonotoneStepFn([0.5, 1.0], [1.0, 2.0])
        assert generalized_inverse(m, 0.5) == 0.0

    def test_half_step(self):
        m = MonotoneStepFn([0.5, 1.0], [0.0, 1.0])
        assert generalized_inverse(m, 0.0) == 0.5

    def test_all_values_below_gives_one(self):
        m = MonotoneStepFn([0.3, 0.7], [-1.0, 0.0])
        assert generalized_inverse(m, 5.0) == 1.0

    def test_against_dense_grid_oracle(self):
        rng = np.random.default_rng(7)
        grid = np.linspace(0.0, 1.0, 40001)
        for _ in range(30):
            k = rng.integers(1, 8)
            knots = np.sort(rng.random(k))
            knots = np.unique(np.maximum(knots, 1e-6))
            values = np.sort(rng.normal(size=knots.size))
            m = MonotoneStepFn(knots, values)
            for x in rng.normal(size=6):
                got = generalized_inverse(m, x)
                want = sup_oracle(m, x, grid)
                assert abs(got - want) <= 1.0 / 40000 + 1e-12

    def test_level_set_equivalence(self):
        # m(t) <= x iff t <= m^{-1}(x), for t != 0
        rng = np.random.default_rng(11)
        for _ in range(40):
            k = int(rng.integers(1, 6))
            knots = np.unique(np.maximum(np.sort(rng.random(k)), 1e-6))
            values = np.sort(rng.normal(size=knots.size))
            m = MonotoneStepFn(knots, values)
            ts = rng.uniform(1e-9, 1.0, size=8)
            for x in np.concatenate([rng.normal(size=4), values]):
                inv = generalized_inverse(m, x)
                for t in ts:
                    assert (m(t) <= x) == (t <= inv)


class TestW1Empirical:
    def test_two_point_example(self):
        a = EmpiricalMeasure([0.0, 1.0])
        b = EmpiricalMeasure([0.0, 2.0])
        assert w1_empirical(a, b) == 0.5
        assert w1_empirical(a, b) == pytest.approx(coupling_oracle([0, 1], [0, 2], 1))

    def test_identity_of_indiscernibles(self):
        a = EmpiricalMeasure([0.1, 0.4, 2.0])
        assert w1_empirical(a, a) == 0.0

    def test_translation(self):
        rng = np.random.default_rng(0)
        a = EmpiricalMeasure.from_sample(rng.normal(size=17))
        b = EmpiricalMeasure(a.atoms + 3.25)
        assert w1_empirical(a, b) == pytest.approx(3.25, abs=1e-12)

    def test_coupling_oracle_small_n(self):
        rng = np.random.default_rng(3)
        for n in (2, 3, 4, 5, 6):
            for _ in range(5):
                x = rng.normal(size=n)
                y = rng.normal(size=n)
                a = EmpiricalMeasure.from_sample(x)
                b = EmpiricalMeasure.from_sample(y)
                assert w1_empirical(a, b) == pytest.approx(
                    coupling_oracle(list(x), list(y), 1), abs=1e-12
                )

    @given(samples, samples)
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_nonnegativity(self, xs, ys):
        a = EmpiricalMeasure.from_sample(xs)
        b = EmpiricalMeasure.from_sample(ys)
        assert w1_empirical(a, b) >= 0.0
        assert w1_empirical(a, b) == w1_empirical(b, a)

    @given(samples, samples, samples)
    @settings(max_examples=60, deadline=None)
    def test_triangle_inequality(self, xs, ys, zs):
        n = min(len(xs), len(ys), len(zs))
        a = EmpiricalMeasure.from_sample(xs[:n])
        b = EmpiricalMeasure.from_sample(ys[:n])
        c = EmpiricalMeasure.from_sample(zs[:n])
        assert w1_empirical(a, c) <= w1_empirical(a, b) + w1_empirical(b, c) + 1e-12
        assert w2_empirical(a, c) <= w2_empirical(a, b) + w2_empirical(b, c) + 1e-12


class TestW1CdfArea:
    def test_matches_sorted_form_on_equal_sizes(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(1, 65))
            a = EmpiricalMeasure.from_sample(rng.normal(size=n) * 10)
            b = EmpiricalMeasure.from_sample(rng.normal(size=n) * 10)
            assert abs(w1_empirical(a, b) - w1_cdf_area(a, b)) < 1e-9

    def test_unequal_sizes_closed_form(self):
        # {0} vs {0, 1}: area of |F_a - F_b| is 1/2 over [0, 1]
        a = EmpiricalMeasure([0.0])
        b = EmpiricalMeasure([0.0, 1.0])
        assert w1_empirical(a, b) == pytest.approx(0.5)

    def test_dispatches_on_unequal_sizes(self):
        a = EmpiricalMeasure([0.0, 0.0, 3.0])
        b = EmpiricalMeasure([1.0])
        # mass 2/3 moves from 0 to 1, mass 1/3 from 3 to 1
        assert w1_empirical(a, b) == pytest.approx(2.0 / 3.0 + 2.0 / 3.0)


class TestW2Empirical:
    def test_two_point_example(self):
        a = EmpiricalMeasure([0.0, 1.0])
        b = EmpiricalMeasure([0.0, 2.0])
        assert w2_empirical(a, b) == pytest.approx(math.sqrt(0.5))
        oracle = math.sqrt(coupling_oracle([0, 1], [0, 2], 2))
        assert w2_empirical(a, b) == pytest.approx(oracle)

    def test_zero_and_singletons(self):
        a = EmpiricalMeasure([1.0, 2.0])
        assert w2_empirical(a, a) == 0.0
        assert w2_empirical(EmpiricalMeasure([3.0]), EmpiricalMeasure([-1.0])) == 4.0

    def test_size_mismatch_raises(self):
        with pytest.raises(ValueError):
            w2_empirical(EmpiricalMeasure([0.0]), EmpiricalMeasure([0.0, 1.0]))

    def test_coupling_oracle_small_n(self):
        rng = np.random.default_rng(9)
        for n in (2, 3, 4, 5, 6):
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            a = EmpiricalMeasure.from_sample(x)
            b = EmpiricalMeasure.from_sample(y)
            oracle = math.sqrt(coupling_oracle(list(x), list(y), 2))
            assert w2_empirical(a, b) == pytest.approx(oracle, abs=1e-12)

    @given(samples, samples)
    @settings(max_examples=60, deadline=None)
    def test_dominates_w1(self, xs, ys):
        n = min(len(xs), len(ys))
        a = EmpiricalMeasure.from_sample(xs[:n])
        b = EmpiricalMeasure.from_sample(ys[:n])
        assert w2_empirical(a, b) >= w1_empirical(a, b) - 1e-12


class TestTabulatedDistribution:
    def test_degenerate_grid_rejected(self):
        with pytest.raises(ValueError):
            TabulatedDistribution(1.0, 1.0, [0.0, 1.0])

    def test_coverage_check(self):
        with pytest.raises(ValueError):
            TabulatedDistribution(0.0, 1.0, [0.3, 0.9, 1.0])
        with pytest.raises(ValueError):
            TabulatedDistribution(0.0, 1.0, [0.0, 0.5, 0.95])

    def test_monotone_check(self):
        with pytest.raises(ValueError):
            TabulatedDistribution(0.0, 1.0, [0.0, 0.6, 0.5, 1.0])


class TestW1Tabulated:
    def test_identical(self):
        d = TabulatedDistribution.from_callable(lambda x: np.clip(x, 0, 1), -1.0, 2.0, 1024)
        assert w1_tabulated(d, d) == 0.0

    def test_mean_shift_gaussians(self):
        lo, hi, pts = -8.0, 8.3, 2**14
        base = TabulatedDistribution.from_callable(norm.cdf, lo, hi, pts)
        for shift in (0.01, 0.1, 0.3):
            other = TabulatedDistribution.from_callable(
                lambda x, s=shift: norm.cdf(x - s), lo, hi, pts
            )
            assert w1_tabulated(base, other) == pytest.approx(shift, abs=1e-3)

    def test_uniforms_closed_form(self):
        # area between the U[0,1] and U[0,2] CDFs is exactly 1/2
        u1 = TabulatedDistribution.from_callable(lambda x: np.clip(x, 0, 1), -1.0, 3.0, 4097)
        u2 = TabulatedDistribution.from_callable(lambda x: np.clip(x / 2, 0, 1), -1.0, 3.0, 4097)
        assert w1_tabulated(u1, u2) == pytest.approx(0.5, abs=1e-6)

    def test_disjoint_grids(self):
        # point mass near 0 vs point mass near 5, tabulated on disjoint grids
        steep = lambda c: (lambda x: np.clip((x - c) * 1e4, 0.0, 1.0))
        a = TabulatedDistribution.from_callable(steep(0.0), -1.0, 1.0, 4097)
        b = TabulatedDistribution.from_callable(steep(5.0), 4.0, 6.0, 4097)
        assert w1_tabulated(a, b) == pytest.approx(5.0, abs=1e-3)


class TestQuantile:
    def test_uniform(self):
        d = TabulatedDistribution.from_callable(lambda x: np.clip(x, 0, 1), -0.5, 1.5, 2049)
        assert quantile(d, 0.25) == pytest.approx(0.25, abs=1e-3)

    def test_normal_median(self):
        d = TabulatedDistribution.from_callable(norm.cdf, -8.0, 8.0, 2**13)
        assert quantile(d, 0.5) == pytest.approx(0.0, abs=1e-2)

    def test_jump_cdf(self):
        def cdf(x):
            return np.where(x < 1.0, 0.2 * np.clip(x, 0, None), 0.8 + 0.2 * np.clip(x - 1, 0, 1))

        d = TabulatedDistribution(-0.5, 2.0, cdf(np.linspace(-0.5, 2.0, 2001)))
        step = 2.5 / 2000
        assert abs(quantile(d, 0.5) - 1.0) <= step + 1e-12

    def test_rejects_out_of_range(self):
        d = TabulatedDistribution.from_callable(lambda x: np.clip(x, 0, 1), -0.5, 1.5, 64)
        for u in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                quantile(d, u)

    def test_monotone_in_level(self):
        d = TabulatedDistribution.from_callable(norm.cdf, -8.0, 8.0, 4097)
        us = np.linspace(0.01, 0.99, 200)
        qs = quantile(d, us)
        assert np.all(np.diff(qs) >= 0)


class TestPushforward:
    def test_identity_and_constant(self):
        xs = EmpiricalMeasure([0.1, 0.4, 0.9])
        ident = MonotoneStepFn(np.linspace(1e-6, 1, 5000), np.linspace(1e-6, 1, 5000))
        out = pushforward(lambda x: x, xs)
        assert np.allclose(out.atoms, xs.atoms)
        out2 = pushforward(lambda x: np.full_like(x, 2.0), xs)
        assert out2.atoms.tolist() == [2.0, 2.0, 2.0]
        out3 = pushforward(ident, xs)
        assert np.allclose(out3.atoms, xs.atoms, atol=1e-3)

    def test_doubling_map(self):
        xs = EmpiricalMeasure([0.1, 0.4])
        out = pushforward(lambda x: 2 * x, xs)
        assert out.atoms.tolist() == [0.2, 0.8]


class TestEmpiricalMoment:
    def test_examples(self):
        assert empirical_moment(EmpiricalMeasure([-1.0, 1.0]), 2) == 1.0
        assert empirical_moment(EmpiricalMeasure([0.0]), 3.7) == 0.0
        assert empirical_moment(EmpiricalMeasure([2.0]), 3) == 8.0

    def test_rejects_nonpositive_order(self):
        with pytest.raises(ValueError):
            empirical_moment(EmpiricalMeasure([1.0]), 0.0)


class TestConvolutionContraction:
    def test_common_noise_contracts(self):
        # adding one common noise draw to the i-th sorted atoms of both
        # measures is a coupling of the convolved pair, so the distance
        # cannot grow beyond Monte-Carlo slack
        rng = np.random.default_rng(21)
        n = 80
        for _ in range(100):
            a = np.sort(rng.normal(size=n) * rng.uniform(0.5, 3))
            b = np.sort(rng.normal(loc=rng.uniform(-2, 2), size=n))
            eps = rng.normal(size=n)
            base = w1_empirical(EmpiricalMeasure(a), EmpiricalMeasure(b))
            noisy = w1_empirical(
                EmpiricalMeasure.from_sample(a + eps), EmpiricalMeasure.from_sample(b + eps)
            )
            assert noisy <= base + 3.0 / math.sqrt(n)
