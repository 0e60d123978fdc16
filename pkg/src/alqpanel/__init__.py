"""Bayesian quantile regression for longitudinal count data.

Counts are jittered to a continuous scale, mapped to a latent log scale, and
modeled with an asymmetric-Laplace working likelihood whose normal-exponential
mixture makes every full conditional standard: a blocked Gibbs sampler draws
lasso-shrunk fixed effects, Gaussian per-subject random effects, and the
mixture latents.  Estimates are averaged over M independent jitter replicates
with pooled variances.
"""
from .diagnostics import ModelComparison, compute_dic, compute_nll, export_trace, kde_density
from .distributions import (
    GigHalfParams,
    RngStream,
    ald_logpdf,
    sample_gamma,
    sample_gaussian_from_precision,
    sample_gig_half,
    sample_inverse_gamma,
    sample_uniform01,
)
from .estimator import (
    CoefficientSummary,
    PosteriorSummary,
    average_jitter_fit,
    credible_interval,
    pooled_variance,
)
from .exceptions import ChainError, DataError, NumericError, ParameterError
from .gibbs import ChainOutput, GibbsConfig, run_chain
from .jitter import JitteredLatent, jitter_counts, latent_transform, predict_count_quantile
from .model import (
    ChainState,
    MixtureConstants,
    PanelDataset,
    PriorConfig,
    QuantileSpec,
    SubjectBlock,
    check_loss,
    mixture_constants,
    validate_dataset,
)
from .simgen import ProgabideRecord, SimTruth, gen_study1, gen_study2, progabide_covariates

__version__ = "0.1.0"

__all__ = [
    "ChainError",
    "ChainOutput",
    "ChainState",
    "CoefficientSummary",
    "DataError",
    "GibbsConfig",
    "GigHalfParams",
    "JitteredLatent",
    "MixtureConstants",
    "ModelComparison",
    "NumericError",
    "PanelDataset",
    "ParameterError",
    "PosteriorSummary",
    "PriorConfig",
    "ProgabideRecord",
    "QuantileSpec",
    "RngStream",
    "SimTruth",
    "SubjectBlock",
    "ald_logpdf",
    "average_jitter_fit",
    "check_loss",
    "compute_dic",
    "compute_nll",
    "credible_interval",
    "export_trace",
    "gen_study1",
    "gen_study2",
    "jitter_counts",
    "kde_density",
    "latent_transform",
    "mixture_constants",
    "pooled_variance",
    "predict_count_quantile",
    "progabide_covariates",
    "run_chain",
    "sample_gamma",
    "sample_gaussian_from_precision",
    "sample_gig_half",
    "sample_inverse_gamma",
    "sample_uniform01",
    "validate_dataset",
]
