"""CDF estimation for a signal observed through additive supersmooth noise.

The estimator inverts the empirical characteristic function of the
observations: with ``phi_Y`` the empirical charfn, ``K*`` a smooth kernel
transform supported on [-1, 1], and ``mu_eps`` the (known) noise charfn at
scale sigma, the density estimate is

    f(x) = (1/2pi) Int e^{-itx} K*(h t) phi_Y(t) / mu_eps(t) dt .

Because ``K*`` vanishes outside [-1, 1], truncating the integral to
|t| <= 1/h is exact.  The CDF is the running integral of f, projected onto
valid CDFs by :func:`isotonize_cdf`.

The bandwidth ``h`` follows a two-regime rule in (n, sigma): below the
root-n noise floor smoothing at scale n^{-1/2} suffices; above it the
bandwidth balances the noise amplification exp(sigma^2 t^2 / 2) against the
sample size.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import czt

from .dist1d import TabulatedDistribution
from .synth import noise_charfn

__all__ = [
    "BandwidthRule",
    "GridSpec",
    "select_bandwidth",
    "deconvolve_cdf",
    "isotonize_cdf",
    "auto_grid",
]

DEFAULT_FREQ_POINTS = 2**12


@dataclass(frozen=True)
class BandwidthRule:
    """Free constants of the bandwidth rule.

    ``C_const`` must stay below 1/2 and ``eta`` must exceed
    C_const / (1 - 2 C_const); the defaults (0.1, 0.2) satisfy this with
    room to spare.
    """

    C_const: float = 0.1
    eta: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.C_const < 0.5:
            raise ValueError("C_const must lie in (0, 1/2)")
        if self.eta <= self.C_const / (1.0 - 2.0 * self.C_const):
            raise ValueError("eta must exceed C_const / (1 - 2 C_const)")


@dataclass(frozen=True)
class GridSpec:
    """Uniform evaluation grid: ``points`` values spanning [lo, hi]."""

    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("grid needs lo < hi")
        p = int(self.points)
        if p < 2 or p & (p - 1) != 0:
            raise ValueError("points must be a power of two >= 2")
        object.__setattr__(self, "points", p)

    @property
    def xs(self):
        return np.linspace(self.lo, self.hi, self.points)

    @property
    def step(self):
        return (self.hi - self.lo) / (self.points - 1)


def select_bandwidth(n, sigma, noise, rule=None):
    """Regime-dependent bandwidth in (0, 1].

    sigma >= n^{-1/2}:  h = sigma * (C gamma2 log(n sigma^2 log n))^{-1/beta}
    sigma <  n^{-1/2}:  h = n^{-1/2}

    The boundary sigma = n^{-1/2} belongs to the first branch.  If the inner
    logarithm comes out nonpositive (tiny n), the rule falls back to
    n^{-1/2} and warns.
    """
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2")
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rule = BandwidthRule() if rule is None else rule
    root = 1.0 / math.sqrt(n)
    if sigma < root:
        return root
    inner = n * sigma * sigma * math.log(n)
    scale = rule.C_const * noise.gamma2 * math.log(inner)
    if scale <= 0.0:
        warnings.warn(
            "bandwidth log term nonpositive at n=%d sigma=%g; falling back to n^(-1/2)"
            % (n, sigma),
            RuntimeWarning,
        )
        return root
    h = sigma * scale ** (-1.0 / noise.beta)
    return float(min(h, 1.0))


def _ecf(ys, ts):
    """Empirical characteristic function (1/n) sum exp(i t y_k) on a uniform t-grid.

    Uses the geometric recurrence exp(i t_j y) = exp(i t_0 y) * exp(i dt y)^j,
    which costs one complex multiply per (j, k) instead of one exp.
    """
    dt = ts[1] - ts[0]
    acc = np.exp(1j * ts[0] * ys)
    base = np.exp(1j * dt * ys)
    out = np.empty(ts.size, dtype=complex)
    for j in range(ts.size):
        out[j] = acc.mean()
        acc *= base
    return out


def _fourier_at(g, ts, xs):
    """S(x_m) = sum_j g_j exp(-i t_j x_m) for uniform ts and xs, via Bluestein."""
    dt = ts[1] - ts[0]
    dx = xs[1] - xs[0]
    out = czt(g, m=xs.size, w=np.exp(-1j * dt * dx), a=np.exp(1j * dt * xs[0]))
    out *= np.exp(-1j * ts[0] * xs)
    return out


def isotonize_cdf(raw):
    """Project a raw CDF table onto valid CDFs: running max, then clip to [0, 1].

    Idempotent; leaves any already-valid CDF unchanged.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("need a nonempty 1-d sequence")
    return np.clip(np.maximum.accumulate(raw), 0.0, 1.0)


def auto_grid(ys, sigma, points=2**14):
    """Grid covering the sample with the required coverage pad plus slack.

    The deconvolution estimator demands the observed range padded by at
    least 6 (1 + sigma) on each side; two extra units absorb kernel tails.
    """
    pad = 6.0 * (1.0 + float(sigma)) + 2.0
    return GridSpec(float(ys.atoms[0]) - pad, float(ys.atoms[-1]) + pad, points)


def deconvolve_cdf(ys, noise, sigma, h, grid, freq_points=DEFAULT_FREQ_POINTS):
    """Estimate the CDF of the latent signal behind ``ys``.

    Parameters
    ----------
    ys : EmpiricalMeasure
        Observed sample of Y = Z + sigma * delta.
    noise : NoiseSpec
    sigma : float
        Known noise scale; sigma = 0 reduces the estimator to a
        kernel-smoothed empirical CDF.
    h : float
        Bandwidth in (0, 1]; see :func:`select_bandwidth`.
    grid : GridSpec
        Output grid.  Must cover the observed y-range padded by
        6 (1 + sigma) on both sides, otherwise the tabulated CDF would
        truncate real mass.
    freq_points : int
        Trapezoid points for the frequency integral over [-1/h, 1/h].

    Returns
    -------
    TabulatedDistribution
    """
    if not 0.0 < h <= 1.0:
        raise ValueError("bandwidth must lie in (0, 1]")
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    pad = 6.0 * (1.0 + sigma)
    if grid.lo > ys.atoms[0] - pad or grid.hi < ys.atoms[-1] + pad:
        raise ValueError(
            "grid too narrow: need [%g, %g] to cover the y-range padded by %g"
            % (ys.atoms[0] - pad, ys.atoms[-1] + pad, pad)
        )
    ts = np.linspace(-1.0 / h, 1.0 / h, int(freq_points))
    u = h * ts
    kstar = (1.0 - u * u) ** 3  # vanishes at the truncation edges
    phi = _ecf(ys.atoms, ts)
    g = kstar * phi / noise_charfn(noise, sigma * ts)
    weights = np.full(ts.size, ts[1] - ts[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    xs = grid.xs
    dens = _fourier_at(g * weights, ts, xs).real / (2.0 * math.pi)
    cdf = isotonize_cdf(cumulative_trapezoid(dens, dx=grid.step, initial=0.0))
    return TabulatedDistribution(grid.lo, grid.hi, cdf)
