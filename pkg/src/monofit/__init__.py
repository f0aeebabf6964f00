"""Monotone link estimation from shuffled or unlinked one-dimensional samples.

The package groups six pieces:

- :mod:`monofit.dist1d` -- empirical measures, tabulated CDFs, monotone step
  functions, generalized inverses, and Wasserstein distances W1/W2.
- :mod:`monofit.synth` -- synthetic data generation: a catalog of monotone
  links, a supersmooth noise model, and the three observation schemes
  (shuffled, unlinked, deconv).
- :mod:`monofit.deconv` -- CDF estimation for a signal observed through
  additive noise, by Fourier inversion with a regime-dependent bandwidth.
- :mod:`monofit.regress` -- the two minimum-contrast link estimators
  (W2 contrast for shuffled data, W1 contrast against the deconvolved
  measure for unlinked data).
- :mod:`monofit.experiments` -- Monte-Carlo harness: occupancy-product
  sweeps, risk evaluation, and rate sweeps with reproducible seeding.
- :mod:`monofit.cli` -- the ``monofit`` command line front end.
"""

from .dist1d import (
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

__version__ = "0.1.0"

__all__ = [
    "EmpiricalMeasure",
    "MonotoneStepFn",
    "TabulatedDistribution",
    "empirical_moment",
    "generalized_inverse",
    "pushforward",
    "quantile",
    "w1_cdf_area",
    "w1_empirical",
    "w1_tabulated",
    "w2_empirical",
    "__version__",
]
