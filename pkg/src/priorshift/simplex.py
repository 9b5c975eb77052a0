"""Euclidean projection onto the probability simplex and distances between
probability vectors."""

import math

import numpy as np

from . import _kernels
from .errors import AbsoluteContinuityViolation, DimensionMismatch, NonFiniteInput

# A point whose entries are nonnegative and sum to 1 up to a few ulps is already
# on the simplex; returning it untouched makes projection exactly idempotent.
_ON_SIMPLEX_TOL = 4 * np.finfo(np.float64).eps


def project_to_simplex(point):
    """Return the nearest point (in Euclidean distance) of the unit simplex.

    Sort-based exact method: sort descending, find the largest ``j`` with
    ``u_j + (1 - sum(u_1..u_j)) / j > 0``, shift everything by the resulting
    threshold and clip at zero.  The input is first shifted so its maximum is
    0, which makes the result exactly invariant to adding a constant to every
    coordinate whenever that addition is itself exact.
    """
    v = np.array(point, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("cannot project a point with non-finite entries")
    if v.shape[0] == 0:
        raise DimensionMismatch("cannot project an empty vector")
    if v.min() >= 0 and abs(math.fsum(v) - 1.0) <= _ON_SIMPLEX_TOL:
        return v
    z = _kernels.simplex_shift(v)
    return z / math.fsum(z)


def _pair(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionMismatch(f"distributions have shapes {p.shape} and {q.shape}")
    return p, q


def hellinger(p, q):
    """Hellinger distance ``||sqrt(p) - sqrt(q)|| / sqrt(2)``, in [0, 1]."""
    p, q = _pair(p, q)
    d = np.sqrt(p) - np.sqrt(q)
    return min(math.sqrt(math.fsum(d * d) / 2.0), 1.0)


def kl_divergence(p, q):
    """``KL(p || q) = sum p log(p / q)`` with ``0 log 0 = 0``.

    :raises AbsoluteContinuityViolation: some ``q_k = 0`` while ``p_k > 0``.
    """
    p, q = _pair(p, q)
    support = p > 0
    if np.any(q[support] == 0):
        k = int(np.nonzero(support & (q == 0))[0][0])
        raise AbsoluteContinuityViolation(f"q[{k}] = 0 but p[{k}] = {p[k]!r}")
    ps, qs = p[support], q[support]
    return max(math.fsum(ps * np.log(ps / qs)), 0.0)
