import math

import numpy as np
import pytest

from priorshift.core import compute_ratios
from priorshift.synthesis import make_model, prior_from_family, sample_testset


def shifted_instance(seed, n_classes=10, n_samples=5000, separability=0.7,
                     outliers=0.0, test_prior=None):
    """Synthetic instance: decreasing exponential training prior (100x
    imbalance), increasing exponential test prior unless one is given."""
    model = make_model(n_classes, 2 * n_classes, separability, seed, "exp", math.log(100))
    if test_prior is None:
        test_prior = prior_from_family("exp", n_classes, -math.log(100))
    post, labels = sample_testset(model, test_prior, n_samples, 1000 + seed, outliers)
    return model, np.asarray(test_prior), post, labels, compute_ratios(post, model.train_prior)


@pytest.fixture
def instance():
    return shifted_instance(0, n_samples=2000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Every EM run anywhere in the suite is checked for monotone log-likelihood.
import priorshift
import priorshift.estimation as _estimation

EM_RUNS = {"count": 0}
_original_em = _estimation.estimate_em


def _checked_em(*args, **kwargs):
    estimate, trace = _original_em(*args, **kwargs)
    EM_RUNS["count"] += 1
    steps = np.diff(trace.objective)
    assert trace.is_monotone(1e-12), f"EM log-likelihood dropped by {-steps.min():.3g}"
    return estimate, trace


_estimation.estimate_em = _checked_em
priorshift.estimate_em = _checked_em


# Acceptance verdicts, printed as one line per criterion at the end of the run.
VERDICTS = {}


def record_verdict(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
