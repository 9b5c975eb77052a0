"""Accuracy, per-class error rates and prior estimates from labels or
marginalized predictions."""

import math
from dataclasses import dataclass

import numpy as np

from .core import _frozen, validate_prior
from .correction import predict_top1
from .errors import DimensionMismatch, EmptyInput


def _check_pair(posteriors, labels):
    post = np.asarray(posteriors)
    y = np.asarray(labels, dtype=np.int64)
    if post.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{post.shape[0]} posterior rows but {y.shape[0]} labels")
    if y.size and (y.min() < 0 or y.max() >= post.shape[1]):
        raise DimensionMismatch(f"labels must lie in [0, {post.shape[1]})")
    return post, y


def top1_accuracy(posteriors, labels):
    post, y = _check_pair(posteriors, labels)
    if y.size == 0:
        raise EmptyInput("accuracy of an empty set is undefined")
    return int(np.count_nonzero(predict_top1(post) == y)) / y.size


def marginalized_prior(posteriors):
    """Column means of the posterior matrix."""
    post = np.asarray(posteriors, dtype=np.float64)
    if post.ndim != 2 or post.shape[0] == 0:
        raise EmptyInput("need at least one posterior row")
    p = np.add.reduce(post, axis=0) / post.shape[0]
    return validate_prior(p / math.fsum(p))


def empirical_prior(labels, n_classes):
    """Relative class frequencies ``N_k / N``."""
    y = np.asarray(labels, dtype=np.int64)
    if y.size == 0:
        raise EmptyInput("no labels")
    if y.min() < 0 or y.max() >= n_classes:
        raise DimensionMismatch(f"labels must lie in [0, {n_classes})")
    return validate_prior(np.bincount(y, minlength=n_classes) / y.size)


@dataclass
class ClassErrors:
    """Per-class error table; classes without samples hold NaN in both rates."""

    counts: np.ndarray
    errors: np.ndarray  # misclassified samples per class
    expected: np.ndarray
    empirical: np.ndarray

    @property
    def present(self):
        return self.counts > 0


def per_class_errors(posteriors, labels):
    """Expected error ``mean(1 - p(c_k | x))`` and empirical error
    ``mean(argmax != k)`` over the samples labelled ``k``."""
    post, y = _check_pair(posteriors, labels)
    k = post.shape[1]
    counts = np.bincount(y, minlength=k)
    wrong = np.bincount(y, weights=predict_top1(post) != y, minlength=k)
    missing = np.bincount(y, weights=1.0 - post[np.arange(y.size), y], minlength=k)
    with np.errstate(invalid="ignore", divide="ignore"):
        expected = np.where(counts > 0, missing / counts, np.nan)
        empirical = np.where(counts > 0, wrong / counts, np.nan)
    return ClassErrors(
        _frozen(counts.astype(np.int64)),
        _frozen(wrong.astype(np.int64)),
        _frozen(expected),
        _frozen(empirical),
    )
