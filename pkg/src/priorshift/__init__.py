"""Class-prior shift adaptation for probabilistic classifiers."""

from ._kernels import BACKEND
from .core import (
    EstimationTrace,
    compute_ratios,
    validate_labels,
    validate_posteriors,
    validate_prior,
)
from .correction import adjust_posteriors, predict_top1
from .errors import *  # noqa: F401,F403
from .estimation import (
    EstimatorConfig,
    Method,
    estimate_em,
    estimate_pga,
    estimate_prior,
    fit_prior,
    log_likelihood,
    log_posterior_objective,
    split_likelihood_diagnostic,
)
from .evaluation import (
    empirical_prior,
    marginalized_prior,
    per_class_errors,
    top1_accuracy,
)
from .online import online_adapt
from .simplex import hellinger, kl_divergence, project_to_simplex
from .synthesis import (
    bayes_optimal_accuracy,
    concentrated_prior,
    make_model,
    prior_from_family,
    sample_testset,
)

__version__ = "0.1.0"
