"""Sequential prior adaptation: each row is adjusted with a prior estimated only
from the rows that arrived before it."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import _frozen, compute_ratios, validate_prior
from .correction import adjust_posteriors
from .estimation import EstimatorConfig, estimate_prior
from .errors import ConfigError

DEFAULT_REFIT_EVERY = 10

#: Weight of the uniform distribution mixed into a warm-start point.  EM can
#: never move mass back onto a coordinate that has underflowed to zero, and
#: early refits on a handful of rows drive many coordinates there.
WARM_START_MIX = 1e-3


@dataclass
class OnlineResult:
    adjusted: np.ndarray
    #: Row index at which each snapshot became active (0 for the training prior).
    snapshot_rows: np.ndarray
    snapshots: np.ndarray

    @property
    def final_estimate(self):
        return self.snapshots[-1]


def online_adapt(posteriors, train_prior, config=None, refit_every=DEFAULT_REFIT_EVERY,
                 warm_start=True):
    """Adjust rows in arrival order.

    The running estimate starts at ``train_prior``.  Before row ``j`` (0-based)
    is emitted, if ``j > 0`` and ``j % refit_every == 0``, the estimator is
    refit on rows ``0 .. j-1``, warm-started from the previous estimate unless
    ``warm_start`` is false or ``config.initial_estimate`` is set.  The warm
    start is the previous estimate mixed with a ``WARM_START_MIX`` share of the
    uniform distribution.  Row ``j`` is
    then adjusted with the current estimate as the test prior.
    """
    config = config or EstimatorConfig()
    if int(refit_every) != refit_every or refit_every < 1:
        raise ConfigError(f"refit_every must be a positive integer, got {refit_every!r}")
    post = np.asarray(posteriors, dtype=np.float64)
    train = validate_prior(train_prior)
    ratios = compute_ratios(post, train)

    current = train
    out = np.empty_like(post)
    rows, snaps = [0], [np.array(train)]
    for j in range(post.shape[0]):
        if j > 0 and j % refit_every == 0:
            cfg = config
            if warm_start and config.initial_estimate is None:
                start = (1 - WARM_START_MIX) * current + WARM_START_MIX / current.size
                cfg = replace(config, initial_estimate=start / math.fsum(start))
            current, _ = estimate_prior(ratios[:j], cfg, train)
            rows.append(j)
            snaps.append(np.array(current))
        out[j] = adjust_posteriors(post[j:j + 1], train, current)[0]
    return OnlineResult(
        _frozen(out), np.array(rows, dtype=np.int64), np.array(snaps, dtype=np.float64)
    )
