import os
import subprocess
import sys

import numpy as np
import pytest

from priorshift import _kernels

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")

SHAPES = [(1, 2), (7, 3), (500, 10), (64, 257), (3000, 40)]


def _random_case(rng, n, k):
    a = rng.random((n, k)) * rng.choice([1.0, 10.0, 100.0])
    p = rng.random(k)
    return a, p / p.sum()


def _assert_same(x, y):
    if isinstance(x, tuple):
        for u, v in zip(x, y):
            _assert_same(u, v)
    else:
        assert np.array_equal(x, y), np.max(np.abs(x - y))


@pytest.mark.parametrize("name", ["row_dot", "em_step", "likelihood_gradient", "reweight_rows"])
@pytest.mark.parametrize("shape", SHAPES)
def test_matrix_kernels_bitwise_equal(name, shape, rng):
    a, p = _random_case(rng, *shape)
    _assert_same(_kernels.NUMPY_KERNELS[name](a, p), _kernels.NUMBA_KERNELS[name](a, p))


@pytest.mark.parametrize("k", [2, 3, 10, 1000])
def test_simplex_shift_bitwise_equal(k, rng):
    for _ in range(20):
        v = rng.normal(size=k) * rng.choice([0.01, 1.0, 50.0])
        _assert_same(
            _kernels.NUMPY_KERNELS["simplex_shift"](v), _kernels.NUMBA_KERNELS["simplex_shift"](v)
        )


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, PRIORSHIFT_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import priorshift; print(priorshift.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
