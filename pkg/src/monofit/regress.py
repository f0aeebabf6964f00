"""Minimum-contrast monotone link estimators for shuffled and unlinked data.

Both estimators fit a nondecreasing step function to the covariate order
statistics and differ only in where the fitted values come from:

- shuffled (:func:`fit_shuffled`): the pairing between x and y is lost but
  both sides come from the same units.  Sorting y and assigning it to
  sorted x is the monotone rearrangement — the exact minimizer of the
  squared-Wasserstein contrast between the fitted-value measure and the
  observed y-measure.

- unlinked (:func:`fit_unlinked`): x and y are disjoint samples and y is
  observed through additive noise.  The latent y-distribution is first
  recovered by :func:`monofit.deconv.deconvolve_cdf`; the fitted value on
  the i-th mass cell is its mid-cell quantile, the L1-optimal single atom
  for that cell.

Fitted values are then projected onto the moment ball
(1/n) sum |v_i|^{a+2} <= M / c_X (:func:`project_moment`) and extended to a
left-continuous step function on [0, 1] (:func:`extend_piecewise`).
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .deconv import DEFAULT_FREQ_POINTS, auto_grid, deconvolve_cdf, select_bandwidth
from .dist1d import EmpiricalMeasure, MonotoneStepFn, quantile

__all__ = [
    "FitConfig",
    "fit_shuffled",
    "fit_unlinked",
    "project_moment",
    "extend_piecewise",
    "stepfn_to_csv",
    "stepfn_from_csv",
]

_ETA_MODES = ("shuffled", "unlinked")

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class FitConfig:
    """Constraint set and slack schedule of the minimum-contrast fits.

    ``M`` bounds the (a+2)-th moment of the link under the design measure
    and ``c_X`` is the known lower bound on the design density, so the
    fitted values must satisfy (1/n) sum |v_i|^{a+2} <= M / c_X.
    ``eta_mode`` selects the contrast slack: sigma^2 for shuffled fits,
    n^{-1/2} for unlinked ones.
    """

    eta_mode: str
    M: float = 10.0
    a: float = 1.0
    c_X: float = 1.0

    def __post_init__(self):
        if self.eta_mode not in _ETA_MODES:
            raise ValueError("eta_mode must be one of %s" % (_ETA_MODES,))
        for name in ("M", "a", "c_X"):
            if getattr(self, name) <= 0:
                raise ValueError("%s must be positive" % name)

    @property
    def moment_order(self):
        return self.a + 2.0

    @property
    def moment_bound(self):
        return self.M / self.c_X

    def eta(self, n, sigma):
        """Contrast slack for a fit at sample size n and noise scale sigma."""
        if self.eta_mode == "shuffled":
            return float(sigma) ** 2
        return 1.0 / math.sqrt(int(n))


def project_moment(values, bound, p):
    """Project nondecreasing values onto {(1/n) sum |v_i|^p <= bound}.

    Values already inside the ball are returned unchanged.  Otherwise the
    values are winsorized symmetrically: clipped to [-tau, tau] with the
    threshold tau chosen by bisection so the clipped moment meets the bound
    (within 1e-12 relative).  Clipping both tails equally keeps the sequence
    nondecreasing.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 1:
        raise ValueError("values must be a nonempty 1-d sequence")
    if np.any(np.diff(values) < 0):
        raise ValueError("values must be nondecreasing")
    p = float(p)
    if p <= 0:
        raise ValueError("moment order must be positive")
    bound = float(bound)
    if bound < 0:
        raise ValueError("moment bound must be nonnegative")

    def moment(tau):
        return float(np.mean(np.minimum(np.abs(values), tau) ** p))

    if float(np.mean(np.abs(values) ** p)) <= bound:
        return values.copy()
    if bound == 0.0:
        return np.zeros_like(values)
    lo = 0.0  # always feasible
    hi = float(np.max(np.abs(values)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if moment(mid) <= bound:
            lo = mid
        else:
            hi = mid
    return np.clip(values, -lo, lo)


def extend_piecewise(x_ordered, values):
    """Step function equal to ``values[i]`` on ``(x_(i-1), x_(i)]``.

    Below the first order statistic the first value holds, beyond the last
    one the last value holds.  Duplicate x-values are rejected: they happen
    with probability zero under any continuous design and would make the
    assignment ambiguous.
    """
    x = np.asarray(x_ordered, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape:
        raise ValueError("x_ordered and values must have equal length")
    if x.ndim != 1 or x.size < 1:
        raise ValueError("need at least one knot")
    if np.any(np.diff(x) <= 0):
        raise ValueError("duplicate or unsorted knots")
    return MonotoneStepFn(x, v)


def fit_shuffled(x_ordered, y, sigma, cfg, full_output=False):
    """Monotone fit when the x-y pairing is hidden by an unknown permutation.

    The fitted values are sorted(y) assigned to the covariate order
    statistics — the exact minimizer of the W2 contrast over monotone
    assignments — projected onto the moment ball of ``cfg``.

    With ``full_output=True`` returns ``(fit, info)`` where info records the
    slack eta = sigma^2 and whether the projection activated.
    """
    if cfg.eta_mode != "shuffled":
        raise ValueError("cfg.eta_mode must be 'shuffled' for fit_shuffled")
    x = np.asarray(x_ordered, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x_ordered and y must have equal length")
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    raw = np.sort(y, kind="stable")
    vals = project_moment(raw, cfg.moment_bound, cfg.moment_order)
    fit = extend_piecewise(x, vals)
    if not full_output:
        return fit
    info = {"eta": cfg.eta(x.size, sigma), "projected": not np.array_equal(vals, raw)}
    return fit, info


def fit_unlinked(x, y, noise, sigma, cfg, grid=None, rule=None, freq_points=DEFAULT_FREQ_POINTS, full_output=False):
    """Monotone fit when x and y are disjoint samples and y is noisy.

    Pipeline: deconvolve the y-sample into a latent CDF estimate, read off
    its mid-cell quantiles v_i = quantile((2i - 1) / (2n)) as fitted values
    on the x order statistics, project onto the moment ball, extend.

    ``grid`` defaults to :func:`monofit.deconv.auto_grid` on the y-sample;
    ``rule`` is the bandwidth rule (defaults inside
    :func:`monofit.deconv.select_bandwidth`).
    """
    if cfg.eta_mode != "unlinked":
        raise ValueError("cfg.eta_mode must be 'unlinked' for fit_unlinked")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal sample sizes")
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("covariates must lie in [0, 1]")
    n = x.size
    ys = EmpiricalMeasure.from_sample(y)
    h = select_bandwidth(n, sigma, noise, rule)
    if grid is None:
        grid = auto_grid(ys, sigma)
    mu = deconvolve_cdf(ys, noise, sigma, h, grid, freq_points)
    levels = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    raw = np.maximum.accumulate(quantile(mu, levels))
    vals = project_moment(raw, cfg.moment_bound, cfg.moment_order)
    fit = extend_piecewise(np.sort(x, kind="stable"), vals)
    if not full_output:
        return fit
    info = {
        "eta": cfg.eta(n, sigma),
        "projected": not np.array_equal(vals, raw),
        "h": h,
        "grid": grid,
    }
    return fit, info


def stepfn_to_csv(m, path, n, sigma, eta, projected):
    """Write a fitted step function as CSV with a metadata preamble.

    Four comment lines record the fit context (sample size, noise scale,
    contrast slack, whether the moment projection activated), then a
    (knot, value) table.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# n=%d\n" % int(n))
        fh.write("# sigma=%s\n" % (_FLOAT_FMT % float(sigma)))
        fh.write("# eta=%s\n" % (_FLOAT_FMT % float(eta)))
        fh.write("# projected=%d\n" % (1 if projected else 0))
        writer = csv.writer(fh)
        writer.writerow(["knot", "value"])
        for k, v in zip(m.knots, m.values):
            writer.writerow([_FLOAT_FMT % k, _FLOAT_FMT % v])


def stepfn_from_csv(path):
    """Read a step function written by :func:`stepfn_to_csv`.

    Returns (MonotoneStepFn, metadata dict with keys n, sigma, eta,
    projected).
    """
    meta = {}
    knots = []
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
            else:
                rows.append(line)
        reader = csv.reader(rows)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["knot", "value"]:
            raise ValueError("%s: expected header knot,value" % (path,))
        for row in reader:
            if not row:
                continue
            knots.append(float(row[0]))
            values.append(float(row[1]))
    for key in ("n", "sigma", "eta", "projected"):
        if key not in meta:
            raise ValueError("%s: missing metadata line %r" % (path, key))
    out = {
        "n": int(meta["n"]),
        "sigma": float(meta["sigma"]),
        "eta": float(meta["eta"]),
        "projected": bool(int(meta["projected"])),
    }
    return MonotoneStepFn(np.asarray(knots), np.asarray(values)), out
