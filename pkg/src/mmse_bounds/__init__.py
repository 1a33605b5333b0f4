"""Bounds on weighted MMSE sums over KL-divergence balls of priors.

Given J additive-Gaussian-noise channels Y_j = X + N_j with weights
lambda_j and a Gaussian reference prior N(mu_0, Sigma_0), this package
computes tight upper and lower bounds on sum_j lambda_j mmse_j(P_X) over
all priors P_X within KL divergence epsilon of the reference, along with
per-channel local bounds, LMMSE and Bayesian Cramer-Rao baselines,
analytic prior families, and a Monte Carlo verification oracle.
"""

from .baselines import cramer_rao_lower, lmmse_upper
from .exceptions import (
    BracketFailure,
    ConfigError,
    DegenerateSample,
    DegenerateWeights,
    DimensionMismatch,
    FisherUndefined,
    LostPositiveDefiniteness,
    NegativeRadius,
    NoConvergence,
    NonPositiveWeight,
    NonSymmetric,
    NotPositiveDefinite,
    ProblemValidationError,
    SingularReference,
    SingularSum,
)
from .gaussian import (
    LinearEstimator,
    MmseSummary,
    kl_same_mean_gaussians,
    linear_estimate,
    linear_estimator_mse,
    mmse_matrix,
    mmse_trace,
    weight_matrix,
    weighted_mmse_sum,
)
from .mc import McEstimate, mc_kl, mc_mmse, mc_weighted_sum
from .priors import (
    Gaussian,
    GeneralizedGaussian,
    PriorMoments,
    PriorSpec,
    UniformBall,
    gaussian_log_density,
    gen_gauss_covariance,
    gen_gauss_epsilon,
    gen_gauss_fisher,
    log_density,
    moment_match,
    prior_moments,
    sample_prior,
    uniform_ball_epsilon,
    uniform_ball_moments,
)
from .problem import (
    Channel,
    ChannelEnsemble,
    DivergenceBall,
    GaussianReference,
    Problem,
    load_config,
    problem_from_config,
    save_config,
    validate_problem,
)
from .solver import (
    BoundResult,
    Direction,
    SolverOptions,
    kl_gap,
    local_bound,
    local_bounds_weighted,
    opt_covariance_residual,
    sigma_of_alpha,
    solve_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "BracketFailure",
    "Channel",
    "ChannelEnsemble",
    "ConfigError",
    "DegenerateSample",
    "DegenerateWeights",
    "DimensionMismatch",
    "Direction",
    "DivergenceBall",
    "FisherUndefined",
    "Gaussian",
    "GaussianReference",
    "GeneralizedGaussian",
    "LinearEstimator",
    "LostPositiveDefiniteness",
    "McEstimate",
    "MmseSummary",
    "NegativeRadius",
    "NoConvergence",
    "NonPositiveWeight",
    "NonSymmetric",
    "NotPositiveDefinite",
    "PriorMoments",
    "PriorSpec",
    "Problem",
    "ProblemValidationError",
    "SingularReference",
    "SingularSum",
    "SolverOptions",
    "UniformBall",
    "cramer_rao_lower",
    "gaussian_log_density",
    "gen_gauss_covariance",
    "gen_gauss_epsilon",
    "gen_gauss_fisher",
    "kl_gap",
    "kl_same_mean_gaussians",
    "linear_estimate",
    "linear_estimator_mse",
    "lmmse_upper",
    "load_config",
    "local_bound",
    "local_bounds_weighted",
    "log_density",
    "mc_kl",
    "mc_mmse",
    "mc_weighted_sum",
    "mmse_matrix",
    "mmse_trace",
    "moment_match",
    "opt_covariance_residual",
    "prior_moments",
    "problem_from_config",
    "sample_prior",
    "save_config",
    "sigma_of_alpha",
    "solve_bound",
    "uniform_ball_epsilon",
    "uniform_ball_moments",
    "validate_problem",
    "weight_matrix",
    "weighted_mmse_sum",
]
