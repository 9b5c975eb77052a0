"""Posterior re-weighting for new class priors and hard predictions."""

import numpy as np

from . import _kernels
from .core import EPS_PRIOR, _frozen
from .errors import DegenerateRow, DimensionMismatch

UNDERFLOW = 1e-300


def prior_ratio(train_prior, test_prior):
    train = np.asarray(train_prior, dtype=np.float64)
    test = np.asarray(test_prior, dtype=np.float64)
    if train.shape != test.shape:
        raise DimensionMismatch(
            f"train prior has {train.shape[0]} classes, test prior {test.shape[0]}"
        )
    return test / np.maximum(train, EPS_PRIOR)


def adjust_posteriors(posteriors, train_prior, test_prior):
    """Re-weight each posterior row by ``test_prior / train_prior`` and renormalize.

    When both priors are identical the input is returned unchanged.

    :raises DegenerateRow: a row's weighted sum is below 1e-300, i.e. the test
        prior puts no mass where that row has support.
    """
    post = np.asarray(posteriors, dtype=np.float64)
    w = prior_ratio(train_prior, test_prior)
    if post.ndim != 2 or post.shape[1] != w.shape[0]:
        raise DimensionMismatch(
            f"posteriors have {post.shape[-1]} columns, priors have {w.shape[0]} classes"
        )
    if np.all(w == 1.0) or np.array_equal(train_prior, test_prior):
        return _frozen(post.copy())
    out, sums = _kernels.reweight_rows(np.ascontiguousarray(post), w)
    bad = np.nonzero(~(sums >= UNDERFLOW))[0]
    if bad.size:
        raise DegenerateRow(int(bad[0]))
    return _frozen(out)


def predict_top1(posteriors):
    """Row-wise argmax; ties go to the lowest class index."""
    return _frozen(np.argmax(np.asarray(posteriors), axis=1).astype(np.int64))
