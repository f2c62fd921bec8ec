"""Quantifying how much a Bayesian prior moves the posterior.

The package measures prior impact as the Wasserstein (transport) distance
between the posteriors two priors produce on the same data, brackets that
distance with kernel-weighted sandwich bounds, and offers two companion
measures (posterior neutrality at the MLE; a signed effective-sample-size
scale). Non-conjugate applications are served by an adaptive random-walk
sampler, and a seeded simulation harness reproduces grid studies and
demonstration fits end to end.
"""

from .bounds import (
    BinomialComparison,
    BoundsReport,
    DensityRatio,
    Method,
    Monotonicity,
    PoissonGammaResult,
    beta_ratio,
    binomial_bounds,
    conjugate_prior_ratio,
    gamma_ratio,
    inverse_gamma_ratio,
    normal_ig_bounds,
    poisson_gamma_exact,
    stein_kernel,
    theorem1_bounds,
)
from .datasets import (
    SKEWED_DEMO_SEED,
    BioassayData,
    bioassay,
    half_sample_mode,
    skewed_demo_sample,
)
from .distributions import (
    Beta,
    Binomial,
    Cauchy,
    Distribution,
    Family,
    Gamma,
    InverseGamma,
    Normal,
    Poisson,
    SkewNormal,
    StudentT,
    Uniform,
)
from .errors import (
    CapacityError,
    DivergenceError,
    ImproperPosteriorError,
    IntegrationError,
    NumericError,
    PriorImpactError,
    SamplerError,
    ValidationError,
)
from .experiments import (
    ExperimentKind,
    ExperimentResult,
    ExperimentSpec,
    default_spec,
    parse_experiment_file,
    parse_prior,
    run_experiment,
)
from .impact import (
    BootstrapResult,
    ImpactReport,
    MopessReport,
    NeutralityResult,
    WimConfig,
    bootstrap_wim,
    mle,
    mopess,
    neutrality,
    wim,
    with_companions,
)
from .mcmc import (
    LogisticFit,
    McmcConfig,
    McmcDiagnostics,
    SkewNormalFit,
    fit_logistic,
    fit_skew_normal,
    run_mcmc,
)
from .posterior import (
    BayesModel,
    BinomialLikelihood,
    LogisticLikelihood,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    Posterior,
    PriorKind,
    PriorSpec,
    SkewNormalLikelihood,
    conjugate_update,
    custom_prior,
    flat_plane_prior,
    flat_prior,
    improper_beta_prior,
    improper_gamma_prior,
    improper_inverse_gamma_prior,
    jeffreys_variance_prior,
    log_posterior_unnorm,
    posterior_predictive_sample,
    proper_prior,
)
from .transport import (
    EmpiricalMeasure,
    TransportPlan,
    subsampled_wp,
    truncated_support,
    w1_cdf,
    w1_cdf_detailed,
    w1_empirical_1d,
    w1_quantile,
    wp_empirical,
    wp_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distances
    "wim",
    "WimConfig",
    "ImpactReport",
    "neutrality",
    "NeutralityResult",
    "mopess",
    "MopessReport",
    "bootstrap_wim",
    "BootstrapResult",
    "with_companions",
    "mle",
    # bounds
    "theorem1_bounds",
    "BoundsReport",
    "DensityRatio",
    "Method",
    "Monotonicity",
    "stein_kernel",
    "conjugate_prior_ratio",
    "gamma_ratio",
    "beta_ratio",
    "inverse_gamma_ratio",
    "poisson_gamma_exact",
    "PoissonGammaResult",
    "binomial_bounds",
    "BinomialComparison",
    "normal_ig_bounds",
    # transport
    "EmpiricalMeasure",
    "TransportPlan",
    "w1_cdf",
    "w1_cdf_detailed",
    "w1_quantile",
    "wp_quantile",
    "w1_empirical_1d",
    "wp_empirical",
    "subsampled_wp",
    "truncated_support",
    # models and posteriors
    "BayesModel",
    "Posterior",
    "PriorSpec",
    "PriorKind",
    "conjugate_update",
    "log_posterior_unnorm",
    "posterior_predictive_sample",
    "proper_prior",
    "improper_gamma_prior",
    "improper_beta_prior",
    "improper_inverse_gamma_prior",
    "flat_prior",
    "flat_plane_prior",
    "jeffreys_variance_prior",
    "custom_prior",
    "PoissonLikelihood",
    "BinomialLikelihood",
    "NormalVarianceLikelihood",
    "SkewNormalLikelihood",
    "LogisticLikelihood",
    # distributions
    "Distribution",
    "Family",
    "Gamma",
    "Beta",
    "Normal",
    "InverseGamma",
    "StudentT",
    "SkewNormal",
    "Cauchy",
    "Poisson",
    "Binomial",
    "Uniform",
    # sampling
    "run_mcmc",
    "McmcConfig",
    "McmcDiagnostics",
    "fit_skew_normal",
    "SkewNormalFit",
    "fit_logistic",
    "LogisticFit",
    # experiments
    "ExperimentKind",
    "ExperimentSpec",
    "ExperimentResult",
    "default_spec",
    "parse_experiment_file",
    "parse_prior",
    "run_experiment",
    # data
    "bioassay",
    "SKEWED_DEMO_SEED",
    "BioassayData",
    "skewed_demo_sample",
    "half_sample_mode",
    # errors
    "PriorImpactError",
    "ValidationError",
    "NumericError",
    "ImproperPosteriorError",
    "IntegrationError",
    "DivergenceError",
    "SamplerError",
    "CapacityError",
]
