"""Synthetic data generation: link catalog, noise model, observation schemes.

The observation model throughout is ``Y = m0(X) + sigma * delta`` with
``X ~ Uniform[0, 1]`` and ``delta`` centered with unit variance.  Three
schemes expose different parts of a draw:

- ``shuffled``: one sample of pairs, but the y side is returned in an order
  independent of x (uniformly permuted);
- ``unlinked``: the x sample and the y sample come from disjoint draws of
  equal size;
- ``deconv``: only the y sample is exposed.

All randomness flows through :func:`rng_stream`, which derives independent,
platform-stable generators from ``(seed, purpose tags)``.  Generation is a
pure function of its arguments: the same seed gives bit-identical output.
"""

import csv
import zlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseSpec",
    "LinkSpec",
    "Dataset",
    "rng_stream",
    "derive_seed",
    "noise_charfn",
    "sample_noise",
    "eval_link",
    "link_cdf",
    "identity_link",
    "affine_link",
    "cube_link",
    "step_link",
    "unbounded_tail_link",
    "link_catalog",
    "sample_dataset",
    "dataset_to_csv",
    "dataset_from_csv",
]

_FLOAT_FMT = "%.17g"


def _seed_words(seed, *tags):
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for tag in tags:
        if isinstance(tag, str):
            words.append(zlib.crc32(tag.encode("utf-8")))
        else:
            words.append(int(tag) & 0xFFFFFFFFFFFFFFFF)
    return words


def rng_stream(seed, *tags):
    """Dedicated generator for one purpose: key = (seed, tags).

    Tags may be strings (hashed with crc32, stable across platforms) or
    integers.  Streams with different keys are statistically independent.
    """
    return np.random.default_rng(np.random.SeedSequence(_seed_words(seed, *tags)))


def derive_seed(seed, *tags):
    """Collapse (seed, tags) into a single 64-bit child seed."""
    ss = np.random.SeedSequence(_seed_words(seed, *tags))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class NoiseSpec:
    """Supersmooth noise family: charfn decaying like exp(-|t|^beta / gamma).

    Only the Gaussian member is implemented; it pins beta = 2 and gamma2 = 2
    since exp(-t^2/2) = exp(-|t|^2 / 2).  The remaining fields keep the decay
    envelope explicit so other supersmooth families can slot in later.
    """

    family: str = "gaussian"
    beta: float = 2.0
    gamma1: float = 2.0
    gamma2: float = 2.0
    c1: float = 1.0
    c2: float = 1.0
    beta_tilde: float = 0.0

    def __post_init__(self):
        if self.family != "gaussian":
            raise ValueError("unsupported noise family: %r" % (self.family,))
        if self.beta != 2.0 or self.gamma2 != 2.0:
            raise ValueError("gaussian noise fixes beta = 2 and gamma2 = 2")
        for name in ("gamma1", "c1", "c2"):
            if getattr(self, name) <= 0:
                raise ValueError("%s must be positive" % name)


def noise_charfn(spec, t):
    """Characteristic function of the noise at t; real and positive, 1 at 0."""
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * t_arr * t_arr)
    return out if np.ndim(t) else float(out)


def sample_noise(spec, n, rng):
    """Draw n centered unit-variance noise values."""
    return rng.standard_normal(n)


_LINK_KINDS = ("identity", "affine", "cube", "step", "unbounded_tail")


@dataclass(frozen=True)
class LinkSpec:
    """A nondecreasing, left-continuous link on [0, 1] from a small catalog.

    kind / parameters:

    - ``identity``        m(x) = x
    - ``affine``          m(x) = slope * x + offset, slope >= 0
    - ``cube``            m(x) = x ** 3
    - ``step``            levels[i] on ((i-1)/k, i/k]; levels[0] on [0, 1/k]
    - ``unbounded_tail``  -(x * log^{1+eps}(1/x))^{-1/(a+2)} on (0, cut],
                          0 on (cut, 1], with cut = tail_scale / n_tail.
                          Unbounded below near the origin (the origin itself
                          maps to -inf, a probability-zero input under any
                          continuous design), yet its (a+2)-moment under
                          Uniform[0, 1] stays finite.
    """

    kind: str
    slope: float = 1.0
    offset: float = 0.0
    levels: tuple = ()
    eps: float = 0.5
    a: float = 1.0
    tail_scale: float = 0.5
    n_tail: int = 0

    def __post_init__(self):
        if self.kind not in _LINK_KINDS:
            raise ValueError("unknown link kind: %r" % (self.kind,))
        if self.kind == "affine" and self.slope < 0:
            raise ValueError("affine link needs slope >= 0")
        if self.kind == "step":
            levels = tuple(float(v) for v in self.levels)
            if not levels:
                raise ValueError("step link needs at least one level")
            if any(b < a for a, b in zip(levels, levels[1:])):
                raise ValueError("step levels must be nondecreasing")
            object.__setattr__(self, "levels", levels)
        if self.kind == "unbounded_tail":
            if self.eps <= 0 or self.a <= 0 or self.tail_scale <= 0:
                raise ValueError("unbounded_tail needs eps, a, tail_scale > 0")
            if self.n_tail < 1:
                raise ValueError("unbounded_tail needs the sample size n_tail >= 1")
            if not self.tail_scale / self.n_tail < 1.0:
                raise ValueError("tail cutoff tail_scale / n_tail must stay below 1")

    def __call__(self, x):
        return eval_link(self, x)

    @property
    def cut(self):
        """Tail cutoff of the unbounded_tail link."""
        return self.tail_scale / self.n_tail


def identity_link():
    return LinkSpec("identity")


def affine_link(slope, offset):
    return LinkSpec("affine", slope=float(slope), offset=float(offset))


def cube_link():
    return LinkSpec("cube")


def step_link(levels):
    return LinkSpec("step", levels=tuple(levels))


def unbounded_tail_link(eps, a, tail_scale, n):
    return LinkSpec("unbounded_tail", eps=float(eps), a=float(a), tail_scale=float(tail_scale), n_tail=int(n))


def link_catalog(n):
    """The default links exercised by tests and sweeps, keyed by name.

    ``n`` fixes the cutoff of the unbounded-tail member.
    """
    return {
        "identity": identity_link(),
        "affine": affine_link(2.0, -0.5),
        "cube": cube_link(),
        "step": step_link((-1.0, -0.25, 0.25, 1.0)),
        "unbounded_tail": unbounded_tail_link(0.5, 1.0, 0.5, n),
    }


def eval_link(spec, x):
    """Evaluate a catalog link at x in [0, 1]; nondecreasing in x."""
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("link domain is [0, 1]")
    if spec.kind == "identity":
        out = x_arr.copy()
    elif spec.kind == "affine":
        out = spec.slope * x_arr + spec.offset
    elif spec.kind == "cube":
        out = x_arr**3
    elif spec.kind == "step":
        k = len(spec.levels)
        cells = np.arange(1, k + 1) / k
        idx = np.minimum(np.searchsorted(cells, x_arr, side="left"), k - 1)
        out = np.asarray(spec.levels, dtype=float)[idx]
    else:
        cut = spec.cut
        out = np.zeros_like(x_arr)
        inside = (x_arr > 0.0) & (x_arr <= cut)
        xi = x_arr[inside]
        out[inside] = -((xi * np.log(1.0 / xi) ** (1.0 + spec.eps)) ** (-1.0 / (spec.a + 2.0)))
        out[x_arr == 0.0] = -np.inf
    return out if np.ndim(x) else float(out)


def link_cdf(spec, z):
    """CDF of m(X) for X ~ Uniform[0, 1]: Leb{x : m(x) <= z}."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if spec.kind == "identity":
        out = np.clip(z_arr, 0.0, 1.0)
    elif spec.kind == "affine":
        if spec.slope == 0.0:
            out = (z_arr >= spec.offset).astype(float)
        else:
            out = np.clip((z_arr - spec.offset) / spec.slope, 0.0, 1.0)
    elif spec.kind == "cube":
        out = np.clip(np.cbrt(z_arr), 0.0, 1.0)
    elif spec.kind == "step":
        levels = np.asarray(spec.levels, dtype=float)
        out = np.searchsorted(levels, z_arr, side="right") / levels.size
    else:
        out = _unbounded_tail_cdf(spec, z_arr)
    return out if np.ndim(z) else float(out[0])


def _unbounded_tail_cdf(spec, z_arr):
    from scipy.optimize import brentq

    cut = spec.cut
    # x * log^{1+eps}(1/x) must be increasing on (0, cut] for inversion
    if cut >= np.exp(-(1.0 + spec.eps)):
        raise ValueError("tail cutoff too large to invert the tail profile")
    p = spec.a + 2.0

    def profile(x):
        return x * np.log(1.0 / x) ** (1.0 + spec.eps)

    g_cut = profile(cut) ** (-1.0 / p)
    out = np.empty_like(z_arr)
    for i, z in enumerate(z_arr):
        if z >= 0.0:
            out[i] = 1.0
        elif -z <= g_cut:
            # tail values below cut are all <= z already
            out[i] = cut
        else:
            target = (-z) ** (-p)
            lo = cut
            while profile(lo) > target and lo > 1e-300:
                lo *= 0.5
            out[i] = brentq(lambda x: profile(x) - target, lo, cut, xtol=1e-15, rtol=1e-14)
    return out


_MODES = ("shuffled", "unlinked", "deconv")


@dataclass(frozen=True)
class Dataset:
    """One simulated draw of an observation scheme.

    ``x_ordered`` is the sorted covariate sample (None in deconv mode);
    ``y`` is the response sample in exposure order.  ``truth`` may be None
    for datasets loaded from disk, where the generating link is unknown.
    """

    mode: str
    x_ordered: np.ndarray
    y: np.ndarray
    sigma: float
    seed: int
    truth: LinkSpec

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError("unknown mode: %r" % (self.mode,))
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.size < 1:
            raise ValueError("y must be a nonempty 1-d sequence")
        object.__setattr__(self, "y", y)
        if self.mode == "deconv":
            if self.x_ordered is not None:
                raise ValueError("deconv mode carries no covariates")
        else:
            x = np.asarray(self.x_ordered, dtype=float)
            if x.shape != y.shape:
                raise ValueError("x and y must have equal length")
            if np.any(np.diff(x) < 0):
                raise ValueError("x_ordered must be sorted")
            if np.any((x < 0.0) | (x > 1.0)):
                raise ValueError("covariates must lie in [0, 1]")
            object.__setattr__(self, "x_ordered", x)
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    @property
    def n(self):
        return self.y.size


def sample_dataset(mode, n, link, noise, sigma, seed):
    """Draw one dataset; bit-reproducible in (mode, n, link, noise, sigma, seed).

    Stream usage by mode:

    - shuffled: "x" for the covariate draw, "noise" for delta, "perm" for
      the hiding permutation (x and y come from the same units);
    - unlinked: "x" for the observed covariates, "latent" for the hidden
      covariates behind y, "noise" for delta (disjoint draws);
    - deconv: "latent" and "noise" only.
    """
    if mode not in _MODES:
        raise ValueError("unknown mode: %r" % (mode,))
    n = int(n)
    if n < 1:
        raise ValueError("need n >= 1")
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if mode == "shuffled":
        x = np.sort(rng_stream(seed, "x").random(n), kind="stable")
        delta = sample_noise(noise, n, rng_stream(seed, "noise"))
        y_linked = eval_link(link, x) + sigma * delta
        y = y_linked[rng_stream(seed, "perm").permutation(n)]
        return Dataset("shuffled", x, y, sigma, int(seed), link)
    if mode == "unlinked":
        x = np.sort(rng_stream(seed, "x").random(n), kind="stable")
        x_latent = rng_stream(seed, "latent").random(n)
        delta = sample_noise(noise, n, rng_stream(seed, "noise"))
        y = eval_link(link, x_latent) + sigma * delta
        return Dataset("unlinked", x, y, sigma, int(seed), link)
    x_latent = rng_stream(seed, "latent").random(n)
    delta = sample_noise(noise, n, rng_stream(seed, "noise"))
    y = eval_link(link, x_latent) + sigma * delta
    return Dataset("deconv", None, y, sigma, int(seed), link)


def dataset_to_csv(ds, path):
    """Write a dataset as CSV with columns mode, index, x, y."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "index", "x", "y"])
        for i in range(ds.n):
            x_cell = "" if ds.mode == "deconv" else _FLOAT_FMT % ds.x_ordered[i]
            writer.writerow([ds.mode, str(i), x_cell, _FLOAT_FMT % ds.y[i]])


def dataset_from_csv(path, sigma=0.0, seed=0):
    """Read a dataset written by :func:`dataset_to_csv`.

    The file stores neither sigma nor seed nor the generating link, so sigma
    and seed are supplied by the caller and truth is left as None.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["mode", "index", "x", "y"]:
            raise ValueError("%s: expected header mode,index,x,y" % (path,))
        modes = set()
        xs = []
        ys = []
        for row in reader:
            if not row:
                continue
            mode, _idx, x_cell, y_cell = row
            modes.add(mode)
            if x_cell != "":
                xs.append(float(x_cell))
            ys.append(float(y_cell))
    if len(modes) != 1:
        raise ValueError("%s: expected a single mode, found %s" % (path, sorted(modes)))
    mode = modes.pop()
    if mode == "deconv":
        return Dataset("deconv", None, np.asarray(ys), float(sigma), int(seed), None)
    if len(xs) != len(ys):
        raise ValueError("%s: x column incomplete for mode %s" % (path, mode))
    return Dataset(mode, np.asarray(xs), np.asarray(ys), float(sigma), int(seed), None)
