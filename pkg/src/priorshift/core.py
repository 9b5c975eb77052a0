"""Validated containers for priors, posteriors, ratios, labels and traces.

Priors, posteriors, ratios and labels are plain float64 / int64 numpy arrays
that have been checked and frozen (``writeable=False``).  Functions in the rest
of the package accept any array-like and validate on entry.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMatrix,
    NegativeEntry,
    RowSumOutOfTolerance,
    SumNotOne,
    TooFewClasses,
)

PRIOR_SUM_TOL = 1e-9
ROW_SUM_TOL = 1e-6
#: Denominator floor for training priors; classes with no training mass should
#: be dropped upstream rather than relying on this clamp.
EPS_PRIOR = 1e-12


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def validate_prior(values):
    """Check that ``values`` is a point of the probability simplex.

    Values are returned as a read-only float64 array and are never
    renormalized.

    :raises TooFewClasses: fewer than two entries.
    :raises NegativeEntry: an entry is negative (or NaN).
    :raises SumNotOne: the entries do not sum to 1 within 1e-9.
    """
    p = np.array(values, dtype=np.float64).reshape(-1)
    if p.shape[0] < 2:
        raise TooFewClasses(f"a prior needs at least 2 classes, got {p.shape[0]}")
    bad = np.nonzero(~(p >= 0))[0]
    if bad.size:
        k = int(bad[0])
        raise NegativeEntry(f"prior entry {k} is {p[k]!r}")
    total = math.fsum(p)
    if not abs(total - 1.0) <= PRIOR_SUM_TOL:
        raise SumNotOne(total)
    return _frozen(p)


def validate_posteriors(matrix):
    """Check a grid of posterior rows and renormalize each row by its sum.

    Rows may deviate from unit sum by up to 1e-6 (float32 dumps); they are then
    divided by their exact sum.  A row whose exact sum is already within
    ``K`` machine epsilons of 1 is left bit-for-bit as given: dividing by such
    a sum only moves rounding noise around, and keeping it makes reading a
    matrix written by this package an exact identity.

    :raises EmptyMatrix: no rows or no columns.
    :raises NegativeEntry: a negative or non-finite entry, reported as (i, k).
    :raises RowSumOutOfTolerance: a row sum off by more than 1e-6.
    """
    try:
        m = np.array(matrix, dtype=np.float64)
    except ValueError as exc:
        raise DimensionMismatch(f"posterior grid is not rectangular: {exc}") from None
    if m.ndim == 1 and m.size:
        m = m[None, :]
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise EmptyMatrix(f"posterior matrix has shape {m.shape}")
    bad = np.argwhere(~((m >= 0) & np.isfinite(m)))
    if bad.size:
        i, k = (int(x) for x in bad[0])
        err = NegativeEntry(f"posterior entry ({i}, {k}) is {m[i, k]!r}")
        err.row, err.col = i, k
        raise err
    sums = np.array([math.fsum(row) for row in m])
    off = np.nonzero(~(np.abs(sums - 1.0) <= ROW_SUM_TOL))[0]
    if off.size:
        i = int(off[0])
        raise RowSumOutOfTolerance(i, float(sums[i]))
    needs = np.abs(sums - 1.0) > m.shape[1] * np.finfo(np.float64).eps
    if needs.any():
        m[needs] /= sums[needs, None]
    return _frozen(m)


def validate_labels(labels, n_classes=None):
    """Return labels as a read-only int64 array, checking ``0 <= y < K``."""
    y = np.asarray(labels)
    if y.size == 0:
        return _frozen(np.zeros(0, dtype=np.int64))
    if not np.issubdtype(y.dtype, np.integer):
        yf = np.asarray(y, dtype=np.float64)
        if not np.all(yf == np.round(yf)):
            raise DimensionMismatch("labels must be integers")
        y = yf
    y = y.astype(np.int64).reshape(-1)
    if (y < 0).any():
        raise NegativeEntry(f"label {int(y[y < 0][0])} is negative")
    if n_classes is not None and (y >= n_classes).any():
        raise DimensionMismatch(
            f"label {int(y[y >= n_classes][0])} out of range for {n_classes} classes"
        )
    return _frozen(y)


def compute_ratios(posteriors, train_prior):
    """Return ``a[i, k] = posterior[i, k] / max(train_prior[k], 1e-12)``."""
    post = np.asarray(posteriors, dtype=np.float64)
    prior = np.asarray(train_prior, dtype=np.float64)
    if post.ndim != 2 or post.shape[1] != prior.shape[0]:
        raise DimensionMismatch(
            f"posteriors have {post.shape[-1]} columns, train prior has "
            f"{prior.shape[0]} classes"
        )
    return _frozen(post / np.maximum(prior, EPS_PRIOR))


def max_abs_change(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


@dataclass
class EstimationTrace:
    """Per-iteration record of an estimator run.

    ``objective`` and ``max_change`` hold one value per iteration (iteration 0
    is the initial estimate, whose ``max_change`` is NaN).  Full estimates are
    kept for every iteration when ``store_all`` was requested, otherwise for
    every 10th iteration plus the last one; ``estimate_iterations`` says which.
    """

    objective_name: str
    objective: np.ndarray
    max_change: np.ndarray
    estimate_iterations: np.ndarray
    estimates: np.ndarray
    termination: str = "max-iterations"
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return np.arange(self.objective.shape[0])

    @property
    def n_iterations(self):
        """Number of update steps performed."""
        return int(self.objective.shape[0] - 1)

    @property
    def final_objective(self):
        return float(self.objective[-1])

    @property
    def final_estimate(self):
        return self.estimates[-1]

    def estimate_at(self, iteration):
        hit = np.nonzero(self.estimate_iterations == iteration)[0]
        if not hit.size:
            raise KeyError(f"estimate for iteration {iteration} was not stored")
        return self.estimates[hit[0]]

    def is_monotone(self, tol=1e-12):
        """True if the objective never drops by more than ``tol`` in one step."""
        obj = self.objective
        with np.errstate(invalid="ignore"):
            steps = np.diff(obj)
        steps = np.where(np.isneginf(obj[:-1]), np.inf, steps)
        return bool(np.all(steps >= -tol))


class TraceRecorder:
    """Accumulates iterations into an :class:`EstimationTrace`."""

    def __init__(self, objective_name, store_all=False, every=10):
        self.objective_name = objective_name
        self.store_all = store_all
        self.every = every
        self._objective = []
        self._change = []
        self._est_it = []
        self._est = []
        self._last = None

    def record(self, estimate, objective, change):
        it = len(self._objective)
        self._objective.append(objective)
        self._change.append(change)
        if self.store_all or it % self.every == 0:
            self._est_it.append(it)
            self._est.append(np.array(estimate))
            self._last = None
        else:
            self._last = (it, np.array(estimate))

    def finish(self, termination, **meta):
        est_it, est = list(self._est_it), list(self._est)
        if self._last is not None:
            est_it.append(self._last[0])
            est.append(self._last[1])
        return EstimationTrace(
            objective_name=self.objective_name,
            objective=np.array(self._objective, dtype=np.float64),
            max_change=np.array(self._change, dtype=np.float64),
            estimate_iterations=np.array(est_it, dtype=np.int64),
            estimates=np.array(est, dtype=np.float64),
            termination=termination,
            meta=meta,
        )
