"""Monte-Carlo experiment harness: occupancy-product study, risks, rate sweeps.

Three layers:

- :func:`conjecture_sweep` estimates E prod_{j : n_j > 0} (1 - C e^{-c log n / n_j})^2
  over multinomial occupancy vectors (n balls in n equiprobable cells) on a
  log-spaced n-grid, averaging many replications and sharing each drawn
  occupancy vector across all C values;
- :func:`risk_empirical` / :func:`risk_population` measure how far a fitted
  step function sits from the generating link, in sample or in law;
- :func:`rate_sweep` runs generate-fit-measure replications across an
  n-grid with a noise scale tied to n by a :class:`SigmaRule`, emitting one
  :class:`RiskRecord` per measurement so empirical rates can be read off by
  :func:`fit_loglog_slope`.

Everything is deterministic given the seed: replication r of size n draws
from the stream keyed by (seed, purpose, n, r), so parallel and serial
sweeps return identical tables.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .deconv import auto_grid, deconvolve_cdf, select_bandwidth
from .dist1d import EmpiricalMeasure, TabulatedDistribution, w1_tabulated
from .regress import FitConfig, fit_shuffled, fit_unlinked
from .synth import LinkSpec, NoiseSpec, derive_seed, identity_link, link_cdf, rng_stream, sample_dataset

__all__ = [
    "DEFAULT_SEED",
    "ConjectureConfig",
    "ConjectureRow",
    "RiskRecord",
    "SigmaRule",
    "parse_sigma_rule",
    "conjecture_product",
    "conjecture_sweep",
    "risk_empirical",
    "risk_population",
    "rate_sweep",
    "fit_loglog_slope",
]

DEFAULT_SEED = 1729

# exponents pinning the noise-regime presets of parse_sigma_rule
REGIME_ETA = 0.2
REGIME_BETA = 2.0

DEFAULT_C_LIST = (1.0, 2.0, 5.0, 10.0, 100.0, 200.0, 500.0, 1000.0)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class ConjectureConfig:
    """Protocol of the occupancy-product study.

    ``grid_points`` sample sizes equally spaced in log10 between ``n_min``
    and ``n_max`` (rounded to integers, deduplicated), ``reps`` occupancy
    draws per size, every C in ``C_list`` evaluated on each draw.
    """

    n_min: int = 100
    n_max: int = 1_000_000
    grid_points: int = 30
    reps: int = 500
    c: float = 20.0
    C_list: tuple = DEFAULT_C_LIST
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.grid_points < 1:
            raise ValueError("need at least one grid point")
        if self.reps < 1:
            raise ValueError("need at least one replication")
        if self.c <= 0:
            raise ValueError("c must be positive")
        C_list = tuple(float(C) for C in self.C_list)
        if not C_list or any(C <= 0 for C in C_list):
            raise ValueError("C_list must be nonempty with positive entries")
        object.__setattr__(self, "C_list", C_list)

    @property
    def n_grid(self):
        exps = np.linspace(math.log10(self.n_min), math.log10(self.n_max), self.grid_points)
        return np.unique(np.round(10.0**exps).astype(np.int64))


@dataclass(frozen=True)
class ConjectureRow:
    """Per-(n, C) summary of the occupancy-product study."""

    n: int
    C: float
    mean: float
    stderr: float


_PROBLEMS = ("shuffled", "unlinked", "deconv")
_RISK_KINDS = ("empirical_L1", "population_L1", "W1_measure")
_COMPATIBLE = {
    "shuffled": ("empirical_L1", "population_L1"),
    "unlinked": ("empirical_L1", "population_L1"),
    "deconv": ("W1_measure",),
}


@dataclass(frozen=True)
class RiskRecord:
    """One measurement: which problem, at what size and noise, which loss."""

    problem: str
    n: int
    sigma: float
    seed: int
    risk_kind: str
    value: float

    def __post_init__(self):
        if self.problem not in _PROBLEMS:
            raise ValueError("unknown problem: %r" % (self.problem,))
        if self.risk_kind not in _RISK_KINDS:
            raise ValueError("unknown risk kind: %r" % (self.risk_kind,))
        if self.risk_kind not in _COMPATIBLE[self.problem]:
            raise ValueError("risk kind %r incompatible with problem %r" % (self.risk_kind, self.problem))
        if not self.value >= 0:
            raise ValueError("risk value must be nonnegative")


def conjecture_product(counts, n, C, c):
    """prod over occupied cells j of (1 - C exp(-c log(n) / n_j))^2.

    Evaluated in log space over the distinct occupancy values (cells with
    equal n_j contribute identical factors), with an exact zero
    short-circuit so no log(0) is ever taken.  Empty cells contribute no
    factor.  Natural log throughout.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need n >= 1")
    counts = np.asarray(counts)
    if counts.size and (np.any(counts < 0) or int(counts.sum()) != n):
        raise ValueError("counts must be nonnegative and sum to n")
    occ, mult = np.unique(counts[counts > 0], return_counts=True)
    if occ.size == 0:
        return 1.0
    factors = 1.0 - C * np.exp(-c * math.log(n) / occ)
    if np.any(factors == 0.0):
        return 0.0
    return float(math.exp(2.0 * float(np.sum(mult * np.log(np.abs(factors))))))


def _occupancy_counts(rng, n):
    """Multinomial(n; 1/n, ..., 1/n) by binning n uniforms into n cells."""
    idx = np.minimum((rng.random(n) * n).astype(np.int64), n - 1)
    return np.bincount(idx, minlength=n)


def _sweep_chunk(args):
    """Products for replications [lo, hi) at one n; one row per rep."""
    seed, n, lo, hi, C_list, c = args
    out = np.empty((hi - lo, len(C_list)))
    for r in range(lo, hi):
        counts = _occupancy_counts(rng_stream(seed, "conjecture", n, r), n)
        for k, C in enumerate(C_list):
            out[r - lo, k] = conjecture_product(counts, n, C, c)
    return out


def conjecture_sweep(cfg, workers=None):
    """Mean and standard error of the occupancy product per (n, C).

    Replications are independent streams keyed by (seed, n, rep), so the
    result is identical whether chunks run serially (``workers`` None or 1)
    or on a process pool — the chunks are reassembled in replication order
    before the means are taken.
    """
    tasks = []
    spans = []
    for n in cfg.n_grid:
        n = int(n)
        chunks = max(1, min(cfg.reps, (workers or 1) * 2))
        bounds = np.linspace(0, cfg.reps, chunks + 1).astype(int)
        first = len(tasks)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi > lo:
                tasks.append((cfg.seed, n, int(lo), int(hi), cfg.C_list, cfg.c))
        spans.append((n, first, len(tasks)))
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_chunk, tasks))
    else:
        results = [_sweep_chunk(t) for t in tasks]
    rows = []
    for n, first, last in spans:
        values = np.vstack(results[first:last])  # reps x |C_list|
        means = values.mean(axis=0)
        if cfg.reps > 1:
            stderrs = values.std(axis=0, ddof=1) / math.sqrt(cfg.reps)
        else:
            stderrs = np.zeros(len(cfg.C_list))
        for k, C in enumerate(cfg.C_list):
            rows.append(ConjectureRow(n=n, C=float(C), mean=float(means[k]), stderr=float(stderrs[k])))
    return rows


def risk_empirical(mhat, m0, xs):
    """(1/n) sum |mhat(x_i) - m0(x_i)| over the design points."""
    xs = np.asarray(xs, dtype=float)
    return float(np.mean(np.abs(mhat(xs) - m0(xs))))


def _design_breakpoints(mhat, m0):
    pts = [np.array([0.0, 1.0]), np.asarray(mhat.knots)]
    if isinstance(m0, LinkSpec):
        if m0.kind == "step":
            k = len(m0.levels)
            pts.append(np.arange(1, k) / k)
        elif m0.kind == "unbounded_tail":
            # geometric refinement toward the singular origin
            pts.append(m0.cut * 0.5 ** np.arange(0, 51))
    edges = np.unique(np.concatenate(pts))
    return edges[(edges >= 0.0) & (edges <= 1.0)]


def risk_population(mhat, m0, mu_x=None):
    """integral of |mhat - m0| against the design law on [0, 1].

    ``mu_x`` is the design density as a callable (None means Uniform[0,1]).
    The integral is split at the knots of ``mhat``, the discontinuities of
    ``m0``, and the sign change of mhat - m0 inside each piece (located by
    root bracketing), then each smooth piece gets 64-point Gauss-Legendre.
    """
    edges = _design_breakpoints(mhat, m0)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a < 1e-15:
            continue
        v = float(mhat(b))  # constant on (a, b]
        xa = a + 1e-12 * (b - a)
        fa = float(m0(xa)) - v
        fb = float(m0(b)) - v
        if fa * fb < 0.0:
            xc = brentq(lambda x: float(m0(x)) - v, xa, b, xtol=1e-15, rtol=1e-14)
            panels = ((a, xc), (xc, b))
        else:
            panels = ((a, b),)
        for p_lo, p_hi in panels:
            half = 0.5 * (p_hi - p_lo)
            if half <= 0.0:
                continue
            xs = half * _GL_NODES + 0.5 * (p_lo + p_hi)
            vals = np.abs(v - np.asarray(m0(xs), dtype=float))
            if mu_x is not None:
                vals = vals * np.asarray(mu_x(xs), dtype=float)
            total += half * float(np.dot(_GL_WEIGHTS, vals))
    return total


_PRESETS = ("below-root", "root-log-small", "root-log-large", "intermediate", "fixed")


@dataclass(frozen=True)
class SigmaRule:
    """Noise scale as a function of n: a constant, a power, or a regime preset.

    Presets pin sigma_n inside one of the five ranges that partition the
    noise scales (with eta = 0.2, beta = 2):

    - ``below-root``      0.1 n^{-0.6}             in (0, n^{-1/2}]
    - ``root-log-small``  n^{-1/2} (log n)^{0.1}   in (n^{-1/2}, n^{-1/2} (log n)^{0.2}]
    - ``root-log-large``  n^{-1/2} (log n)^{0.35}  in (n^{-1/2} (log n)^{0.2}, n^{-1/2} (log n)^{0.5}]
    - ``intermediate``    n^{-0.4} (log n)^{0.25}  in (n^{-1/2} (log n)^{0.5}, n^{-0.3}]
    - ``fixed``           0.5                      in (n^{-0.3}, 1]

    each placed at the geometric mean of its range endpoints (rows 2-4) or
    at a fixed representative (rows 1 and 5).
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            if self.param <= 0:
                raise ValueError("constant sigma must be positive")
        elif self.kind == "power":
            if self.param <= 0:
                raise ValueError("power exponent must be positive")
        elif self.kind not in _PRESETS:
            raise ValueError("unknown sigma rule: %r" % (self.kind,))

    def sigma(self, n):
        n = int(n)
        if self.kind == "constant":
            return self.param
        if self.kind == "power":
            return float(n) ** -self.param
        log_n = math.log(n)
        root = n**-0.5
        if self.kind == "below-root":
            return 0.1 * n**-0.6
        if self.kind == "root-log-small":
            return root * log_n**(REGIME_ETA / 2.0)
        if self.kind == "root-log-large":
            return root * log_n**((REGIME_ETA + 1.0 / REGIME_BETA) / 2.0)
        if self.kind == "intermediate":
            return math.sqrt(root * log_n**(1.0 / REGIME_BETA) * n**(-0.5 + REGIME_ETA))
        return 0.5

    def range_at(self, n):
        """(lo, hi] bounds of the preset's regime; None for parametric rules."""
        if self.kind in ("constant", "power"):
            return None
        n = int(n)
        log_n = math.log(n)
        root = n**-0.5
        if self.kind == "below-root":
            return (0.0, root)
        if self.kind == "root-log-small":
            return (root, root * log_n**REGIME_ETA)
        if self.kind == "root-log-large":
            return (root * log_n**REGIME_ETA, root * log_n**(1.0 / REGIME_BETA))
        if self.kind == "intermediate":
            return (root * log_n**(1.0 / REGIME_BETA), n**(-0.5 + REGIME_ETA))
        return (n**(-0.5 + REGIME_ETA), 1.0)

    def check(self, n):
        """Raise if the preset's sigma falls outside its own regime at n."""
        bounds = self.range_at(n)
        if bounds is None:
            return
        lo, hi = bounds
        s = self.sigma(n)
        if not lo < s <= hi:
            raise ValueError(
                "preset %r out of regime at n=%d: sigma=%g not in (%g, %g]" % (self.kind, n, s, lo, hi)
            )


def parse_sigma_rule(text):
    """Parse 'constant:s', 'power:k', or one of the preset names."""
    text = text.strip()
    if ":" in text:
        kind, _, arg = text.partition(":")
        kind = kind.strip()
        if kind not in ("constant", "power"):
            raise ValueError("unknown sigma rule: %r" % (text,))
        try:
            param = float(arg)
        except ValueError:
            raise ValueError("bad numeric argument in sigma rule: %r" % (text,))
        return SigmaRule(kind, param)
    return SigmaRule(text)


def _measure_risks(problem, ds, link, noise, kinds):
    out = {}
    if problem == "deconv":
        ys = EmpiricalMeasure.from_sample(ds.y)
        h = select_bandwidth(ds.n, ds.sigma, noise)
        grid = auto_grid(ys, ds.sigma)
        est = deconvolve_cdf(ys, noise, ds.sigma, h, grid)
        truth = TabulatedDistribution.from_callable(lambda z: link_cdf(link, z), grid.lo, grid.hi, grid.points)
        out["W1_measure"] = w1_tabulated(est, truth)
        return out
    if problem == "shuffled":
        mhat = fit_shuffled(ds.x_ordered, ds.y, ds.sigma, FitConfig("shuffled"))
    else:
        mhat = fit_unlinked(ds.x_ordered, ds.y, noise, ds.sigma, FitConfig("unlinked"))
    for kind in kinds:
        if kind == "empirical_L1":
            out[kind] = risk_empirical(mhat, link, ds.x_ordered)
        else:
            out[kind] = risk_population(mhat, link)
    return out


def rate_sweep(problem, n_grid, sigma_rule, reps, seed, link=None, noise=None, risk_kinds=None):
    """Generate-fit-measure replications across an n-grid.

    One :class:`RiskRecord` per (n, replication, risk kind); each
    replication reruns exactly from its recorded seed.  ``sigma_rule`` may
    be a :class:`SigmaRule` or a string for :func:`parse_sigma_rule`;
    presets are range-checked at every grid size.
    """
    if problem not in _PROBLEMS:
        raise ValueError("unknown problem: %r" % (problem,))
    if isinstance(sigma_rule, str):
        sigma_rule = parse_sigma_rule(sigma_rule)
    link = identity_link() if link is None else link
    noise = NoiseSpec() if noise is None else noise
    kinds = tuple(risk_kinds) if risk_kinds else _COMPATIBLE[problem][:1]
    for kind in kinds:
        if kind not in _COMPATIBLE[problem]:
            raise ValueError("risk kind %r incompatible with problem %r" % (kind, problem))
    records = []
    for n in n_grid:
        n = int(n)
        sigma_rule.check(n)
        sig = sigma_rule.sigma(n)
        for rep in range(int(reps)):
            child = derive_seed(seed, problem, n, rep)
            ds = sample_dataset(problem, n, link, noise, sig, seed=child)
            risks = _measure_risks(problem, ds, link, noise, kinds)
            for kind in kinds:
                records.append(
                    RiskRecord(problem=problem, n=n, sigma=sig, seed=child, risk_kind=kind, value=risks[kind])
                )
    return records


def fit_loglog_slope(points):
    """Least-squares slope of log(value) against log(n).

    Returns (slope, intercept, r_squared).  Needs at least two distinct n;
    values must be positive for the logs to exist.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if any(v <= 0 for _, v in pts):
        raise ValueError("values must be positive")
    ns = np.array([n for n, _ in pts])
    if np.unique(ns).size < 2:
        raise ValueError("need at least two distinct n")
    lx = np.log(ns)
    ly = np.log(np.array([v for _, v in pts]))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), float(r2)
