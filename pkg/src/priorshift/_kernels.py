"""Hot inner loops, in two interchangeable implementations.

The numba path is used when numba imports and ``PRIORSHIFT_DISABLE_NUMBA`` is
unset (or ``0``).  Both paths perform the same floating point operations in the
same order, so results are bitwise identical whichever one runs.  In particular:

* sums over classes run sequentially from class 0 upward,
* sums over rows run sequentially from row 0 downward,
* no fused multiply-add and no fastmath reassociation.

Logarithms are left to the callers (numpy), because libm and numpy's SIMD
``log`` are allowed to differ in the last ulp.  ``exact_sum`` returns the
correctly rounded sum of its input, which is unique, so ``math.fsum`` and the
compiled version agree bit for bit.
"""

import math
import os

import numpy as np

__all__ = [
    "BACKEND",
    "row_dot",
    "em_step",
    "likelihood_gradient",
    "reweight_rows",
    "simplex_shift",
    "exact_sum",
]


def _numba_requested():
    flag = os.environ.get("PRIORSHIFT_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# pure numpy


def _row_dot_np(a, w):
    n, k = a.shape
    out = np.zeros(n)
    for j in range(k):
        out += a[:, j] * w[j]
    return out


# Zero row sums produce inf/nan silently, as in the compiled versions; callers
# check the returned row sums.
_quiet = np.errstate(divide="ignore", invalid="ignore")


@_quiet
def _em_step_np(a, p):
    s = _row_dot_np(a, p)
    resp = (a * p) * (1.0 / s)[:, None]
    return np.add.reduce(resp, axis=0) / a.shape[0], s


@_quiet
def _likelihood_gradient_np(a, p):
    s = _row_dot_np(a, p)
    return np.add.reduce(a * (1.0 / s)[:, None], axis=0), s


@_quiet
def _reweight_rows_np(post, w):
    s = _row_dot_np(post, w)
    return (post * w) * (1.0 / s)[:, None], s


def _simplex_shift_np(v):
    w = v - v.max()
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.shape[0] + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0)[0][-1]
    tau = (1.0 - css[rho]) / (rho + 1)
    return np.maximum(w + tau, 0.0)


def _exact_sum_np(x):
    return math.fsum(x.tolist())


# ---------------------------------------------------------------------------
# numba

HAVE_NUMBA = False
if _numba_requested():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass
    else:
        HAVE_NUMBA = True

if HAVE_NUMBA:
    _opts = dict(cache=True, fastmath=False, nogil=True, error_model="numpy")

    @njit(**_opts)
    def _row_dot_nb(a, w):
        n, k = a.shape
        out = np.zeros(n)
        for i in range(n):
            acc = 0.0
            for j in range(k):
                acc += a[i, j] * w[j]
            out[i] = acc
        return out

    @njit(**_opts)
    def _em_step_nb(a, p):
        n, k = a.shape
        s = _row_dot_nb(a, p)
        acc = np.zeros(k)
        for i in range(n):
            r = 1.0 / s[i]
            for j in range(k):
                acc[j] += (a[i, j] * p[j]) * r
        return acc / n, s

    @njit(**_opts)
    def _likelihood_gradient_nb(a, p):
        n, k = a.shape
        s = _row_dot_nb(a, p)
        acc = np.zeros(k)
        for i in range(n):
            r = 1.0 / s[i]
            for j in range(k):
                acc[j] += a[i, j] * r
        return acc, s

    @njit(**_opts)
    def _reweight_rows_nb(post, w):
        n, k = post.shape
        s = _row_dot_nb(post, w)
        out = np.empty((n, k))
        for i in range(n):
            r = 1.0 / s[i]
            for j in range(k):
                out[i, j] = (post[i, j] * w[j]) * r
        return out, s

    @njit(**_opts)
    def _simplex_shift_nb(v):
        k = v.shape[0]
        w = v - v.max()
        u = np.sort(w)[::-1]
        css = 0.0
        css_rho = 0.0
        rho = 1
        for j in range(k):
            css += u[j]
            if u[j] + (1.0 - css) / (j + 1) > 0:
                rho = j + 1
                css_rho = css
        tau = (1.0 - css_rho) / rho
        out = np.empty(k)
        for j in range(k):
            out[j] = max(w[j] + tau, 0.0)
        return out

    @njit(**_opts)
    def _exact_sum_nb(x):
        # Shewchuk's non-overlapping partials followed by the half-even
        # correction, the same algorithm as CPython's math.fsum (finite input).
        partials = np.empty(128)
        n = 0
        for idx in range(x.shape[0]):
            v = x[idx]
            i = 0
            for j in range(n):
                y = partials[j]
                if abs(v) < abs(y):
                    v, y = y, v
                hi = v + y
                lo = y - (hi - v)
                if lo != 0.0:
                    partials[i] = lo
                    i += 1
                v = hi
            partials[i] = v
            n = i + 1
        if n == 0:
            return 0.0
        n -= 1
        hi = partials[n]
        lo = 0.0
        while n > 0:
            v = hi
            n -= 1
            y = partials[n]
            hi = v + y
            lo = y - (hi - v)
            if lo != 0.0:
                break
        if n > 0 and ((lo < 0.0 and partials[n - 1] < 0.0) or (lo > 0.0 and partials[n - 1] > 0.0)):
            y = lo * 2.0
            v = hi + y
            if y == v - hi:
                hi = v
        return hi

    BACKEND = "numba"
    row_dot = _row_dot_nb
    em_step = _em_step_nb
    likelihood_gradient = _likelihood_gradient_nb
    reweight_rows = _reweight_rows_nb
    simplex_shift = _simplex_shift_nb
    exact_sum = _exact_sum_nb
else:
    BACKEND = "numpy"
    row_dot = _row_dot_np
    em_step = _em_step_np
    likelihood_gradient = _likelihood_gradient_np
    reweight_rows = _reweight_rows_np
    simplex_shift = _simplex_shift_np
    exact_sum = _exact_sum_np


NUMPY_KERNELS = {
    "row_dot": _row_dot_np,
    "em_step": _em_step_np,
    "likelihood_gradient": _likelihood_gradient_np,
    "reweight_rows": _reweight_rows_np,
    "simplex_shift": _simplex_shift_np,
    "exact_sum": _exact_sum_np,
}

NUMBA_KERNELS = (
    {
        "row_dot": _row_dot_nb,
        "em_step": _em_step_nb,
        "likelihood_gradient": _likelihood_gradient_nb,
        "reweight_rows": _reweight_rows_nb,
        "simplex_shift": _simplex_shift_nb,
        "exact_sum": _exact_sum_nb,
    }
    if HAVE_NUMBA
    else {}
)
