"""Estimation of unknown test-time class priors from unlabeled posteriors.

All estimators work on the ratio matrix ``a[i, k] = p(c_k | x_i) / p(c_k)``
(see :func:`priorshift.core.compute_ratios`) and maximize

    l(P) = sum_i log sum_k P_k a[i, k]

over the probability simplex, optionally plus a symmetric Dirichlet log-density
``(alpha - 1) sum_k log P_k``.  Three solvers are provided:

* ``em``: the classical expectation-maximization fixed point iteration,
* ``pga-mle``: projected gradient ascent on ``l``,
* ``pga-map``: projected gradient ascent on the Dirichlet-regularized objective.

None of them attempts a global search; when the maximizer is not unique the
result is whatever the solver reaches from its initialization.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import TraceRecorder, _frozen, compute_ratios, max_abs_change
from .errors import ConfigError, DimensionMismatch, NonFiniteGradient, SplitTooSmall
from .simplex import project_to_simplex

_MAX_HALVINGS = 60

#: Floor applied to ``P_k`` inside the Dirichlet gradient term ``(alpha-1)/P_k``.
MAP_GRADIENT_FLOOR = 1e-12


class Method(str, enum.Enum):
    EM = "em"
    PGA_MLE = "pga-mle"
    PGA_MAP = "pga-map"


@dataclass(frozen=True)
class EstimatorConfig:
    """Solver settings.

    ``learning_rate=None`` selects the default step for the problem size (see
    :func:`default_learning_rate`).  ``initial_estimate=None`` starts from the
    training prior passed to the estimator.
    """

    method: Method = Method.EM
    alpha: float | None = None
    learning_rate: float | None = None
    max_iterations: int = 1000
    tol: float = 1e-8
    initial_estimate: np.ndarray | None = None
    store_all: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise ConfigError(f"unknown method {self.method!r}") from None
        if self.method is Method.PGA_MAP:
            if self.alpha is None:
                raise ConfigError("pga-map needs a Dirichlet concentration alpha")
            if not self.alpha >= 1:
                raise ConfigError(f"alpha must be >= 1, got {self.alpha!r}")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol!r}")

    @property
    def dirichlet_alpha(self):
        return self.alpha if self.method is Method.PGA_MAP else 1.0


def _as_ratios(ratios):
    a = np.ascontiguousarray(ratios, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"ratio matrix must be 2-D, got shape {a.shape}")
    return a


def _check_estimate(a, estimate):
    p = np.ascontiguousarray(estimate, dtype=np.float64)
    if p.shape != (a.shape[1],):
        raise DimensionMismatch(f"estimate has shape {p.shape}, ratios have {a.shape[1]} classes")
    return p


def _sum_log(s, p=None):
    # The log terms are summed with correct rounding: a pairwise sum of N logs
    # carries ~log2(N) * eps * sum|log s| of noise, enough to fake a decrease
    # of the objective between two nearly identical estimates.
    # With ``p`` given the value is taken at p / sum(p), since rounding drift
    # of sum(p) away from 1 would otherwise shift it by N * drift.
    if s.size and not np.all(s > 0):
        return -math.inf
    total = _kernels.exact_sum(np.log(s))
    if p is not None:
        total -= s.size * math.log(math.fsum(p))
    return total


def _log_increment(a, s_old, p_new, p_old):
    """``l(p_new) - l(p_old)``, both taken at the normalized points, or None
    when some row sum at ``p_old`` is not positive.

    Row changes are formed as ``a @ (p_new - p_old)``: the coordinate
    differences are exact for nearby points, so the increment stays accurate
    even far below the resolution of ``l``.  Differencing rounded row sums
    instead would leave errors of ``N`` ulps on data with repeated rows.
    """
    if not np.all(s_old > 0):
        return None
    rel = _kernels.row_dot(a, p_new - p_old) / s_old
    if not np.all(rel > -1):
        return None
    drift = math.log1p(math.fsum([*p_new, -1.0])) - math.log1p(math.fsum([*p_old, -1.0]))
    return _kernels.exact_sum(np.log1p(rel)) - s_old.size * drift


def _dirichlet_term(p, alpha):
    if alpha == 1:
        return 0.0
    if np.any(p <= 0):
        return -math.inf
    return (alpha - 1) * math.fsum(np.log(p))


def log_likelihood(ratios, estimate):
    """``sum_i log sum_k P_k a[i, k]``; ``-inf`` if some row gets zero mass.

    The estimate is used as given, so the function can also be probed off the
    simplex (e.g. by finite differences).
    """
    a = _as_ratios(ratios)
    p = _check_estimate(a, estimate)
    return _sum_log(_kernels.row_dot(a, p))


def log_posterior_objective(ratios, estimate, alpha):
    """Log-likelihood plus ``(alpha - 1) sum_k log P_k``.

    The Dirichlet normalizer is omitted since it does not depend on ``P``.
    """
    if not alpha >= 1:
        raise ConfigError(f"alpha must be >= 1, got {alpha!r}")
    a = _as_ratios(ratios)
    p = _check_estimate(a, estimate)
    return _sum_log(_kernels.row_dot(a, p)) + _dirichlet_term(p, alpha)


def log_likelihood_gradient(ratios, estimate):
    a = _as_ratios(ratios)
    g, _ = _kernels.likelihood_gradient(a, _check_estimate(a, estimate))
    return g


def log_posterior_gradient(ratios, estimate, alpha):
    """Gradient of :func:`log_posterior_objective`, with ``P_k`` floored at 1e-12
    inside the Dirichlet term."""
    a = _as_ratios(ratios)
    p = _check_estimate(a, estimate)
    g, _ = _kernels.likelihood_gradient(a, p)
    if alpha != 1:
        g = g + (alpha - 1) / np.maximum(p, MAP_GRADIENT_FLOOR)
    return g


def default_learning_rate(n_rows, config=None):
    """Constant step ``0.1 / N``; gradient entries grow linearly with ``N``."""
    return 0.1 / max(n_rows, 1)


def _initial(a, config, train_prior):
    init = config.initial_estimate if config.initial_estimate is not None else train_prior
    if init is None:
        raise ConfigError("no initial estimate: pass a training prior or set initial_estimate")
    return _check_estimate(a, np.array(init, dtype=np.float64))


def estimate_em(ratios, config=None, train_prior=None):
    """Expectation-maximization for the test prior.

    E-step: responsibilities ``P_k a[i, k] / sum_j P_j a[i, j]``; M-step: their
    column means.  Stops once the largest coordinate change drops below
    ``config.tol`` or after ``config.max_iterations`` steps.

    The traced log-likelihood is evaluated directly at the start and then
    advanced by accurately computed per-step increments.  A direct sum of N
    logarithms carries rounding noise of about ``sqrt(N)`` ulps, which near
    convergence exceeds the true increments and makes the trace jitter by one
    ulp of ``l`` in either direction.

    :return: ``(estimate, trace)``; the trace objective is the log-likelihood.
    """
    config = config or EstimatorConfig()
    a = _as_ratios(ratios)
    p = _initial(a, config, train_prior)
    rec = TraceRecorder("log_likelihood", store_all=config.store_all)

    new_p, s = _kernels.em_step(a, p)
    if s.size and not np.all(s > 0):
        row = int(np.nonzero(~(s > 0))[0][0])
        raise ConfigError(f"initial estimate gives zero likelihood to row {row}")
    obj = _sum_log(s, p)
    rec.record(p, obj, math.nan)
    termination = "max-iterations"
    for _ in range(config.max_iterations):
        new_p = new_p / math.fsum(new_p)
        change = max_abs_change(new_p, p)
        s_old, p_old, p = s, p, new_p
        new_p, s = _kernels.em_step(a, p)
        step = _log_increment(a, s_old, p, p_old)
        obj = _sum_log(s, p) if step is None or not math.isfinite(obj) else obj + step
        rec.record(p, obj, change)
        if change < config.tol:
            termination = "converged"
            break
    return _frozen(p), rec.finish(termination, method=Method.EM.value)


def _ascent_tolerance(obj):
    # Objective noise from rounding grows with its magnitude.
    return 1e-12 * max(1.0, abs(obj))


def estimate_pga(ratios, config, train_prior=None):
    """Projected gradient ascent: ``P <- project(P + lr * grad)``.

    For ``pga-map`` the gradient gains ``(alpha - 1) / P_k``, with ``P_k``
    floored at 1e-12 so that steps from the simplex boundary stay finite.

    The step size stays constant, except that a step which lowers the objective
    is discarded and the step size halved for the rest of the run.  Without
    this, a fixed step oscillates between simplex faces whenever some optimal
    coordinate is small (the curvature there grows like ``1 / P_k**2``).

    :raises NonFiniteGradient: the gradient overflowed or some row lost all
        mass at the current estimate.
    """
    if config.method not in (Method.PGA_MLE, Method.PGA_MAP):
        raise ConfigError(f"estimate_pga cannot run method {config.method.value!r}")
    a = _as_ratios(ratios)
    p = _initial(a, config, train_prior)
    alpha = config.dirichlet_alpha
    lr = config.learning_rate or default_learning_rate(a.shape[0], config)
    name = "log_likelihood" if alpha == 1 else "log_posterior_unnormalized"
    rec = TraceRecorder(name, store_all=config.store_all)

    def evaluate(point):
        g, s = _kernels.likelihood_gradient(a, point)
        return g, _sum_log(s, point) + _dirichlet_term(point, alpha)

    g, obj = evaluate(p)
    rec.record(p, obj, math.nan)
    halvings = 0
    termination = "max-iterations"
    for it in range(1, config.max_iterations + 1):
        if alpha != 1:
            g = g + (alpha - 1) / np.maximum(p, MAP_GRADIENT_FLOOR)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(
                f"non-finite gradient at iteration {it} (learning rate {lr!r})"
            )
        while True:
            new_p = project_to_simplex(p + lr * g)
            new_g, new_obj = evaluate(new_p)
            if new_obj >= obj - _ascent_tolerance(obj) or halvings >= _MAX_HALVINGS:
                break
            lr *= 0.5
            halvings += 1
        if new_obj < obj - _ascent_tolerance(obj):
            termination = "stalled"
            break
        change = max_abs_change(new_p, p)
        p, g, obj = new_p, new_g, new_obj
        rec.record(p, obj, change)
        if change < config.tol:
            termination = "converged"
            break
    return _frozen(p), rec.finish(
        termination, method=config.method.value, learning_rate=lr, halvings=halvings
    )


def estimate_prior(ratios, config, train_prior=None):
    """Run the solver selected by ``config.method``."""
    if config.method is Method.EM:
        return estimate_em(ratios, config, train_prior)
    return estimate_pga(ratios, config, train_prior)


def fit_prior(posteriors, train_prior, config=None):
    """Convenience wrapper: build ratios and estimate, starting from ``train_prior``."""
    config = config or EstimatorConfig()
    return estimate_prior(compute_ratios(posteriors, train_prior), config, train_prior)


@dataclass
class SplitDiagnostic:
    """Likelihood traces on the optimization half and the held-out half.

    Objectives are log-likelihoods divided by the row count of their part.
    """

    optimization: object
    validation: object
    optimization_rows: np.ndarray
    validation_rows: np.ndarray


def split_rows(n_rows, split_fraction, seed):
    """Random partition of ``range(n_rows)`` into (optimization, validation) rows.

    Rows are ordered by one uniform draw each from ``numpy`` PCG64 seeded with
    ``seed``; the first ``round(split_fraction * n_rows)`` go to optimization.
    """
    if not 0 < split_fraction < 1:
        raise ConfigError(f"split fraction must lie in (0, 1), got {split_fraction!r}")
    keys = np.random.Generator(np.random.PCG64(seed)).random(n_rows)
    order = np.argsort(keys, kind="stable")
    n_opt = int(round(split_fraction * n_rows))
    if n_opt == 0 or n_opt == n_rows:
        raise SplitTooSmall(
            f"split fraction {split_fraction} leaves an empty part of {n_rows} rows"
        )
    return np.sort(order[:n_opt]), np.sort(order[n_opt:])


def split_likelihood_diagnostic(ratios, config, split_fraction, seed, train_prior=None):
    """Fit on a random part of the rows, tracking likelihood on both parts."""
    a = _as_ratios(ratios)
    opt_rows, val_rows = split_rows(a.shape[0], split_fraction, seed)
    a_opt = np.ascontiguousarray(a[opt_rows])
    a_val = np.ascontiguousarray(a[val_rows])
    _, trace = estimate_prior(a_opt, replace(config, store_all=True), train_prior)

    def rescore(part):
        n = part.shape[0]
        obj = np.array([_sum_log(_kernels.row_dot(part, p), p) / n for p in trace.estimates])
        return replace(trace, objective_name="mean_log_likelihood", objective=obj)

    return SplitDiagnostic(rescore(a_opt), rescore(a_val), opt_rows, val_rows)
