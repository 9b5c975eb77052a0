"""Synthetic, exactly calibrated classifier outputs under controlled prior shift.

Observations are symbols from a finite alphabet of size ``M``.  Class ``k``
emits symbol ``m`` with probability ``likelihood[k, m]``, and the emitted
"classifier output" is the exact train-time posterior ``p(c | m)``.  Because
everything is discrete, Bayes-optimal quantities are computable by enumeration.

Random numbers come only from ``numpy.random.Generator(PCG64(seed)).random``,
i.e. doubles ``(next_uint64 >> 11) * 2**-53``; categorical draws use inverse
CDF lookup on a sequential cumulative sum, flat Dirichlet draws normalize
``-log(1 - u)`` exponentials.  Any implementation of PCG64 with numpy's
SeedSequence seeding reproduces the same datasets.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import _frozen, validate_prior
from .errors import BadSeparability, DimensionMismatch

PRIOR_FAMILIES = ("uniform", "exp", "linear")
DEFAULT_RATES = {"uniform": 0.0, "exp": math.log(100.0), "linear": 1.0}


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def prior_from_family(family, n_classes, rate=None):
    """Deterministic prior shapes.

    * ``uniform``: all classes equal.
    * ``exp``: ``p_k ~ exp(-rate * k / (K - 1))``, so ``exp(rate)`` is the ratio
      between the first and the last class; a negative rate makes it increasing.
    * ``linear``: ``p_k ~ max(1 - rate * k / K, 0)`` (truncated at zero); a
      negative rate makes it increasing.
    """
    if family not in PRIOR_FAMILIES:
        raise ValueError(f"unknown prior family {family!r}; choose from {PRIOR_FAMILIES}")
    rate = DEFAULT_RATES[family] if rate is None else float(rate)
    k = np.arange(n_classes, dtype=np.float64)
    if family == "uniform":
        w = np.ones(n_classes)
    elif family == "exp":
        w = np.exp(-rate * k / (n_classes - 1))
    else:
        w = np.maximum(1.0 - rate * k / n_classes, 0.0)
        if rate < 0:
            w = 1.0 - rate * k / n_classes
    if not w.sum() > 0:
        raise ValueError(f"{family} prior with rate {rate} has no mass")
    return validate_prior(w / w.sum())


def concentrated_prior(n_classes, support_fraction=0.1, mass=0.99):
    """Put ``mass`` uniformly on the first ``ceil(support_fraction * K)`` classes
    and spread the rest uniformly over the others."""
    m = max(1, int(np.ceil(support_fraction * n_classes)))
    if m >= n_classes:
        return validate_prior(np.full(n_classes, 1.0 / n_classes))
    p = np.full(n_classes, (1.0 - mass) / (n_classes - m))
    p[:m] = mass / m
    return validate_prior(p / p.sum())


def _categorical(u, probs):
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, len(probs) - 1)


def _flat_dirichlet(u):
    e = -np.log1p(-u)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class SyntheticModel:
    likelihood: np.ndarray  # K x M, row-stochastic
    train_prior: np.ndarray
    seed: int

    @property
    def n_classes(self):
        return self.likelihood.shape[0]

    @property
    def n_symbols(self):
        return self.likelihood.shape[1]

    def posterior_table(self, prior=None):
        """``table[m, k] = p(c_k | m)`` under ``prior`` (default: training prior)."""
        prior = self.train_prior if prior is None else np.asarray(prior, dtype=np.float64)
        joint = self.likelihood.T * prior
        return joint / joint.sum(axis=1, keepdims=True)


def make_model(n_classes, n_symbols, separability, seed, train_prior_family="uniform",
               train_rate=None):
    """Build a random discrete observation model.

    Class ``k`` puts probability ``separability`` on symbol ``k`` and spreads
    ``1 - separability`` over the other ``M - 1`` symbols with weights from a
    flat Dirichlet draw.
    """
    if not 0 < separability <= 1:
        raise BadSeparability(f"separability must lie in (0, 1], got {separability!r}")
    if n_classes < 2:
        raise DimensionMismatch("need at least 2 classes")
    if n_symbols < n_classes:
        raise DimensionMismatch(f"need at least as many symbols ({n_symbols}) as classes ({n_classes})")
    rng = _rng(seed)
    table = np.zeros((n_classes, n_symbols))
    for k in range(n_classes):
        others = np.array([m for m in range(n_symbols) if m != k], dtype=np.int64)
        table[k, others] = (1.0 - separability) * _flat_dirichlet(rng.random(others.size))
        table[k, k] = separability
    prior = prior_from_family(train_prior_family, n_classes, train_rate)
    return SyntheticModel(_frozen(table), prior, int(seed))


def sample_testset(model, test_prior, n_samples, seed, outlier_fraction=0.0):
    """Draw ``n_samples`` labelled posterior rows under ``test_prior``.

    For each sample the generator consumes, in bulk and in this order, one
    uniform for the label, one for the symbol and one for the outlier decision;
    outlier rows then take ``K`` more uniforms each (row-major).  An outlier's
    posterior row is a flat Dirichlet draw unrelated to its label.

    :return: ``(posteriors, labels)``.
    """
    q = validate_prior(test_prior)
    if q.shape[0] != model.n_classes:
        raise DimensionMismatch(f"test prior has {q.shape[0]} classes, model {model.n_classes}")
    if not 0 <= outlier_fraction <= 1:
        raise ValueError(f"outlier fraction must lie in [0, 1], got {outlier_fraction!r}")
    rng = _rng(seed)
    u_label = rng.random(n_samples)
    u_symbol = rng.random(n_samples)
    u_outlier = rng.random(n_samples)

    labels = _categorical(u_label, q)
    cdfs = np.cumsum(model.likelihood, axis=1)
    symbols = np.empty(n_samples, dtype=np.int64)
    for k in range(model.n_classes):
        sel = labels == k
        symbols[sel] = np.minimum(
            np.searchsorted(cdfs[k], u_symbol[sel] * cdfs[k, -1], side="right"),
            model.n_symbols - 1,
        )
    posteriors = model.posterior_table()[symbols]
    outliers = np.nonzero(u_outlier < outlier_fraction)[0]
    if outliers.size:
        posteriors[outliers] = _flat_dirichlet(rng.random((outliers.size, model.n_classes)))
    return _frozen(posteriors), _frozen(labels.astype(np.int64))


def bayes_optimal_accuracy(model, test_prior):
    """Expected top-1 accuracy of the classifier corrected with the true test
    prior: ``sum_m max_k likelihood[k, m] * test_prior[k]``."""
    q = np.asarray(test_prior, dtype=np.float64)
    return float(np.sum(np.max(model.likelihood * q[:, None], axis=0)))
