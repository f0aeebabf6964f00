"""Tests for the charfn-inversion CDF estimator and its bandwidth rule.

The key oracle: at sigma = 0 the estimator collapses to kernel smoothing of
the empirical measure, and the kernel whose Fourier transform is
(1 - t^2)^3 on [-1, 1] has the closed form

    K(x) = (3 / sqrt(pi)) (2 / x)^{7/2} J_{7/2}(x),      K(0) = 16 / (35 pi),

with J the Bessel function of the first kind.  That gives an independent
check of the entire frequency-domain pipeline (ECF, kernel weights,
quadrature, Fourier inversion) to quadrature accuracy.
"""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from monofit.deconv import (
    DEFAULT_FREQ_POINTS,
    BandwidthRule,
    GridSpec,
    auto_grid,
    deconvolve_cdf,
    isotonize_cdf,
    select_bandwidth,
)
from monofit.deconv import _ecf, _fourier_at
from monofit.dist1d import EmpiricalMeasure, TabulatedDistribution, quantile, w1_tabulated
from monofit.synth import NoiseSpec, rng_stream

NOISE = NoiseSpec()


def kernel_oracle(x):
    """Closed-form smoothing kernel; vectorized, stable through x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-8
    out[small] = 16.0 / (35.0 * math.pi)
    xs = x[~small]
    out[~small] = (3.0 / math.sqrt(math.pi)) * (2.0 / np.abs(xs)) ** 3.5 * jv(3.5, np.abs(xs))
    return out


def smoothed_empirical_oracle(ys, h, grid):
    """Kernel-smoothed empirical CDF computed straight from the closed form."""
    xs = grid.xs
    dens = kernel_oracle((xs[:, None] - ys.atoms[None, :]) / h).mean(axis=1) / h
    from scipy.integrate import cumulative_trapezoid

    return TabulatedDistribution(grid.lo, grid.hi, isotonize_cdf(cumulative_trapezoid(dens, dx=grid.step, initial=0.0)))


class TestBandwidthRule:
    def test_default_constants_valid(self):
        rule = BandwidthRule()
        assert rule.C_const == 0.1 and rule.eta == 0.2

    @pytest.mark.parametrize("c", [0.0, -0.1, 0.5, 0.7])
    def test_c_const_range(self, c):
        with pytest.raises(ValueError):
            BandwidthRule(C_const=c)

    def test_eta_floor(self):
        # with C = 0.1 the floor is 0.1 / 0.8 = 0.125
        with pytest.raises(ValueError):
            BandwidthRule(C_const=0.1, eta=0.125)
        BandwidthRule(C_const=0.1, eta=0.1251)


class TestSelectBandwidth:
    def test_below_root_branch(self):
        for n in (100, 10**4, 10**6):
            sig = 0.5 / math.sqrt(n)
            assert select_bandwidth(n, sig, NOISE) == 1.0 / math.sqrt(n)
        assert select_bandwidth(10**4, 0.0, NOISE) == 0.01

    def test_boundary_goes_to_noise_branch(self):
        n = 10**4
        sig = 1.0 / math.sqrt(n)
        h = select_bandwidth(n, sig, NOISE)
        inner = n * sig * sig * math.log(n)
        expected = sig * (0.1 * NOISE.gamma2 * math.log(inner)) ** -0.5
        assert h == pytest.approx(expected, rel=1e-12)
        assert h != 1.0 / math.sqrt(n)

    def test_frozen_anchor(self):
        # n = 10^4, sigma = 0.5, default constants
        h = select_bandwidth(10**4, 0.5, NOISE)
        assert h == pytest.approx(0.3527715834582116, abs=1e-12)
        closed = 0.5 * (0.2 * math.log(2500.0 * math.log(10**4))) ** -0.5
        assert h == pytest.approx(closed, rel=1e-12)

    def test_fallback_warns(self):
        # n = 2, sigma = n^{-1/2}: inner log is negative
        with pytest.warns(RuntimeWarning):
            h = select_bandwidth(2, 2**-0.5, NOISE)
        assert h == 1.0 / math.sqrt(2)

    def test_clamped_to_one(self):
        assert select_bandwidth(100, 2.0, NOISE) == 1.0

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            select_bandwidth(1, 0.1, NOISE)
        with pytest.raises(ValueError):
            select_bandwidth(100, -0.1, NOISE)

    def test_noise_amplification_bounded(self):
        # the integrand divides by the noise charfn at |t| <= 1/h; the rule
        # keeps the worst-case amplification exp(sigma^2 / (2 h^2)) tame:
        # exactly (n sigma^2 log n)^{C gamma2 / 2} in the noise branch
        # (unless clamped), at most e^{1/2} below the root-n floor.
        for n in (100, 1000, 10**4, 10**5, 10**6):
            root = 1.0 / math.sqrt(n)
            for sig in (1e-4, 0.3 * root, 0.999 * root, root, 3.0 * root, 0.05, 0.2, 0.5, 1.0):
                h = select_bandwidth(n, sig, NOISE)
                assert 0.0 < h <= 1.0
                amp = math.exp(sig * sig / (2.0 * h * h))
                if sig < root:
                    assert amp <= math.exp(0.5) * (1 + 1e-12)
                elif h < 1.0:
                    inner = n * sig * sig * math.log(n)
                    assert amp == pytest.approx(inner**0.1, rel=1e-9)


class TestGridSpec:
    def test_fields_and_grid(self):
        g = GridSpec(-2.0, 6.0, 16)
        xs = g.xs
        assert xs[0] == -2.0 and xs[-1] == 6.0 and xs.size == 16
        assert g.step == pytest.approx(8.0 / 15.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(1.0, 1.0, 16)
        with pytest.raises(ValueError):
            GridSpec(0.0, 1.0, 12)  # not a power of two
        with pytest.raises(ValueError):
            GridSpec(0.0, 1.0, 1)

    def test_auto_grid_pad(self):
        ys = EmpiricalMeasure(np.array([-1.0, 0.0, 3.0]))
        g = auto_grid(ys, 0.5)
        pad = 6.0 * 1.5 + 2.0
        assert g.lo == -1.0 - pad and g.hi == 3.0 + pad
        assert g.points == 2**14


class TestIsotonize:
    def test_hand_case(self):
        out = isotonize_cdf([0.1, 0.05, 0.5, 1.2])
        assert np.allclose(out, [0.1, 0.1, 0.5, 1.0])

    def test_invalid(self):
        with pytest.raises(ValueError):
            isotonize_cdf([])
        with pytest.raises(ValueError):
            isotonize_cdf([[0.0, 1.0]])

    @given(st.lists(st.floats(-0.5, 1.5), min_size=1, max_size=40))
    def test_output_is_cdf_table(self, raw):
        out = isotonize_cdf(raw)
        assert np.all(np.diff(out) >= 0)
        assert out[0] >= 0.0 and out[-1] <= 1.0

    @given(st.lists(st.floats(-0.5, 1.5), min_size=1, max_size=40))
    def test_idempotent(self, raw):
        once = isotonize_cdf(raw)
        assert np.array_equal(isotonize_cdf(once), once)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40))
    def test_valid_cdf_fixed(self, vals):
        cdf = np.sort(np.asarray(vals))
        assert np.array_equal(isotonize_cdf(cdf), cdf)


class TestFrequencyHelpers:
    def test_ecf_matches_direct(self):
        rng = rng_stream(5, "ecf")
        ys = rng.normal(size=37)
        ts = np.linspace(-8.0, 8.0, 129)
        direct = np.exp(1j * ts[:, None] * ys[None, :]).mean(axis=1)
        assert np.max(np.abs(_ecf(ys, ts) - direct)) < 1e-10

    def test_fourier_matches_direct(self):
        rng = rng_stream(6, "czt")
        g = rng.normal(size=64) + 1j * rng.normal(size=64)
        ts = np.linspace(-3.0, 3.0, 64)
        xs = np.linspace(-1.5, 2.5, 33)
        direct = (g[None, :] * np.exp(-1j * ts[None, :] * xs[:, None])).sum(axis=1)
        assert np.max(np.abs(_fourier_at(g, ts, xs) - direct)) < 1e-9


class TestDeconvolveCdf:
    def test_sigma_zero_matches_kernel_oracle(self):
        rng = rng_stream(11, "oracle")
        ys = EmpiricalMeasure.from_sample(rng.normal(0.0, 1.0, 40))
        h = 0.25
        grid = auto_grid(ys, 0.0, points=2**13)
        est = deconvolve_cdf(ys, NOISE, 0.0, h, grid)
        oracle = smoothed_empirical_oracle(ys, h, grid)
        assert w1_tabulated(est, oracle) < 1e-6
        assert np.max(np.abs(est.cdf - oracle.cdf)) < 1e-6

    def test_point_mass_recenters(self):
        # all observations equal: the estimate is one kernel bump at that point
        ys = EmpiricalMeasure(np.full(5, 0.7))
        grid = auto_grid(ys, 0.0, points=2**13)
        est = deconvolve_cdf(ys, NOISE, 0.0, 0.2, grid)
        assert abs(quantile(est, 0.5) - 0.7) < 2.0 * 0.2

    def test_smoothing_displacement_order_h(self):
        # sigma = 0: the estimate is the empirical measure smoothed at scale
        # h, so W1(est, empirical) stays a small multiple of h.
        for rep in range(50):
            rng = rng_stream(77, "ratio", rep)
            ys = EmpiricalMeasure.from_sample(rng.normal(0.0, 1.0, 60))
            h = 0.05 + 0.3 * rng.random()
            grid = auto_grid(ys, 0.0, points=2**13)
            est = deconvolve_cdf(ys, NOISE, 0.0, h, grid)
            emp = TabulatedDistribution.from_callable(ys.cdf, grid.lo, grid.hi, grid.points)
            assert w1_tabulated(est, emp) < 1.5 * h

    def test_quadrature_resolution_converged(self):
        rng = rng_stream(12, "freq")
        ys = EmpiricalMeasure.from_sample(rng.normal(0.0, 1.0, 200) + 0.3 * rng.random(200))
        grid = auto_grid(ys, 0.3, points=2**13)
        h = select_bandwidth(200, 0.3, NOISE)
        coarse = deconvolve_cdf(ys, NOISE, 0.3, h, grid, freq_points=DEFAULT_FREQ_POINTS)
        fine = deconvolve_cdf(ys, NOISE, 0.3, h, grid, freq_points=2 * DEFAULT_FREQ_POINTS)
        assert w1_tabulated(coarse, fine) < 1e-3

    def test_risk_shrinks_with_n(self):
        # identity signal (Uniform[0,1]) under sigma = 0.5 noise: mean W1 to
        # the truth drops as n grows by an order of magnitude.
        truth = None
        sig = 0.5
        means = []
        for n in (300, 3000):
            h = select_bandwidth(n, sig, NOISE)
            vals = []
            for rep in range(8):
                rng = rng_stream(13, "risk", n, rep)
                ys = EmpiricalMeasure.from_sample(rng.random(n) + sig * rng.standard_normal(n))
                grid = auto_grid(ys, sig, points=2**13)
                est = deconvolve_cdf(ys, NOISE, sig, h, grid)
                truth = TabulatedDistribution.from_callable(
                    lambda x: np.clip(x, 0.0, 1.0), grid.lo, grid.hi, grid.points
                )
                vals.append(w1_tabulated(est, truth))
            means.append(np.mean(vals))
        assert means[1] < means[0]

    def test_output_is_valid_table(self):
        rng = rng_stream(14, "valid")
        ys = EmpiricalMeasure.from_sample(rng.random(100))
        grid = auto_grid(ys, 0.1)
        est = deconvolve_cdf(ys, NOISE, 0.1, 0.3, grid)
        assert isinstance(est, TabulatedDistribution)
        assert np.all(np.diff(est.cdf) >= 0)
        assert est.cdf[0] == 0.0 and est.cdf[-1] >= 0.99

    def test_rejects_narrow_grid(self):
        ys = EmpiricalMeasure(np.array([0.0, 1.0]))
        with pytest.raises(ValueError, match="grid too narrow"):
            deconvolve_cdf(ys, NOISE, 0.0, 0.3, GridSpec(-3.0, 4.0, 2**10))

    def test_rejects_bad_bandwidth_and_sigma(self):
        ys = EmpiricalMeasure(np.array([0.0, 1.0]))
        grid = auto_grid(ys, 0.0)
        with pytest.raises(ValueError):
            deconvolve_cdf(ys, NOISE, 0.0, 0.0, grid)
        with pytest.raises(ValueError):
            deconvolve_cdf(ys, NOISE, 0.0, 1.5, grid)
        with pytest.raises(ValueError):
            deconvolve_cdf(ys, NOISE, -0.2, 0.5, grid)
