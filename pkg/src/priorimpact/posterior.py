"""Posterior construction: conjugate updates, generic log-densities, predictive draws.

Three conjugate likelihood/prior pairs produce analytic posteriors (Poisson +
gamma, binomial + beta, normal-with-known-mean + inverse-gamma on the
variance); everything else is exposed as an unnormalized log-posterior for the
MCMC module. Improper priors are carried as pseudo-parameter pairs; propriety
is checked only on the posterior, so e.g. a flat or Jeffreys prior is fine as
long as the data make the update proper.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .distributions import Beta, Distribution, Family, Gamma, InverseGamma
from .errors import ImproperPosteriorError, ValidationError
from .transport import EmpiricalMeasure

__all__ = [
    "PriorKind",
    "PriorSpec",
    "proper_prior",
    "improper_gamma_prior",
    "improper_beta_prior",
    "improper_inverse_gamma_prior",
    "flat_prior",
    "jeffreys_variance_prior",
    "flat_plane_prior",
    "custom_prior",
    "PoissonLikelihood",
    "BinomialLikelihood",
    "NormalVarianceLikelihood",
    "SkewNormalLikelihood",
    "LogisticLikelihood",
    "BayesModel",
    "Posterior",
    "conjugate_update",
    "log_posterior_unnorm",
    "posterior_predictive_sample",
]


# ---------- prior specification ----------


class PriorKind(enum.Enum):
    PROPER = "proper"
    IMPROPER_GAMMA = "improper-gamma"
    IMPROPER_BETA = "improper-beta"
    IMPROPER_IG = "improper-inverse-gamma"
    FLAT = "flat"
    JEFFREYS_VARIANCE = "jeffreys-variance"
    FLAT_PLANE_2D = "flat-plane"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PriorSpec:
    """A prior: a proper distribution, an improper pseudo-parameter pair, or a tag.

    Improper kinds store (a, b) pseudo-parameters whose meaning mirrors the
    matching proper family; the flat prior is contextual (resolved against the
    likelihood during a conjugate update).
    """

    kind: PriorKind
    distribution: Optional[Distribution] = None
    a: Optional[float] = None
    b: Optional[float] = None
    log_density: Optional[Callable[..., float]] = None

    def __post_init__(self):
        k = self.kind
        if k is PriorKind.PROPER:
            if self.distribution is None:
                raise ValidationError("proper prior requires a distribution")
        elif k in (PriorKind.IMPROPER_GAMMA, PriorKind.IMPROPER_BETA, PriorKind.IMPROPER_IG):
            if self.a is None or self.b is None:
                raise ValidationError(f"{k.value} prior requires pseudo-parameters (a, b)")
            if k is not PriorKind.IMPROPER_IG and (self.a < 0 or self.b < 0):
                raise ValidationError(f"{k.value} pseudo-parameters must be >= 0")
        elif k is PriorKind.CUSTOM:
            if self.log_density is None:
                raise ValidationError("custom prior requires a log-density function")

    @property
    def label(self) -> str:
        if self.kind is PriorKind.PROPER:
            return repr(self.distribution)
        if self.kind in (PriorKind.IMPROPER_GAMMA, PriorKind.IMPROPER_BETA, PriorKind.IMPROPER_IG):
            base = {
                PriorKind.IMPROPER_GAMMA: "gamma",
                PriorKind.IMPROPER_BETA: "beta",
                PriorKind.IMPROPER_IG: "inverse-gamma",
            }[self.kind]
            return f"{base}({self.a:g},{self.b:g})[improper]"
        return self.kind.value


def proper_prior(distribution: Distribution) -> PriorSpec:
    return PriorSpec(PriorKind.PROPER, distribution=distribution)


def improper_gamma_prior(a: float, b: float) -> PriorSpec:
    """Gamma-shaped prior density ~ x^(a-1) e^(-b x), b = 0 (or a = 0) allowed."""
    return PriorSpec(PriorKind.IMPROPER_GAMMA, a=float(a), b=float(b))


def improper_beta_prior(a: float, b: float) -> PriorSpec:
    """Beta-shaped prior density ~ x^(a-1)(1-x)^(b-1); (0,0) is the Haldane prior."""
    return PriorSpec(PriorKind.IMPROPER_BETA, a=float(a), b=float(b))


def improper_inverse_gamma_prior(a: float, b: float) -> PriorSpec:
    """Inverse-gamma-shaped prior density ~ x^(-a-1) e^(-b/x); limits allowed."""
    return PriorSpec(PriorKind.IMPROPER_IG, a=float(a), b=float(b))


def flat_prior() -> PriorSpec:
    """Constant prior density; its support follows the likelihood's parameter."""
    return PriorSpec(PriorKind.FLAT)


def jeffreys_variance_prior() -> PriorSpec:
    """p(v) ~ 1/v on a variance parameter (inverse-gamma (0,0) limit)."""
    return PriorSpec(PriorKind.JEFFREYS_VARIANCE)


def flat_plane_prior() -> PriorSpec:
    """Constant density on a 2-D regression parameter plane."""
    return PriorSpec(PriorKind.FLAT_PLANE_2D)


def custom_prior(log_density: Callable[..., float]) -> PriorSpec:
    return PriorSpec(PriorKind.CUSTOM, log_density=log_density)


# ---------- likelihood descriptors ----------


@dataclass(frozen=True)
class PoissonLikelihood:
    """IID Poisson counts with unknown rate."""


@dataclass(frozen=True)
class BinomialLikelihood:
    """Binomial success counts with a common, known number of trials."""

    trials: int

    def __post_init__(self):
        if self.trials < 1 or self.trials != int(self.trials):
            raise ValidationError(f"trials must be an integer >= 1, got {self.trials}")


@dataclass(frozen=True)
class NormalVarianceLikelihood:
    """IID normal observations with known mean and unknown variance."""

    mean: float


@dataclass(frozen=True)
class SkewNormalLikelihood:
    """IID skew-normal observations; parameter vector (loc, log scale, shape)."""


@dataclass(frozen=True)
class LogisticLikelihood:
    """Binomial dose-response with logit link; parameter vector (intercept, slope)."""

    doses: Tuple[float, ...]
    trials: Tuple[int, ...]

    def __post_init__(self):
        doses = tuple(float(d) for d in self.doses)
        trials = tuple(int(t) for t in self.trials)
        if len(doses) != len(trials) or len(doses) < 2:
            raise ValidationError("need >= 2 dose groups with matching trial counts")
        if len(set(doses)) < 2:
            raise ValidationError("need >= 2 distinct doses")
        if any(t < 1 for t in trials):
            raise ValidationError("every trial count must be >= 1")
        object.__setattr__(self, "doses", doses)
        object.__setattr__(self, "trials", trials)


Likelihood = Any  # one of the descriptor classes above


# ---------- model and posterior ----------


def _as_counts(data: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError(f"{what}: data must be a non-empty 1-D sequence")
    if np.any(arr < 0) or np.any(arr != np.floor(arr)):
        raise ValidationError(f"{what}: data must be nonnegative integers")
    return arr


@dataclass(frozen=True)
class BayesModel:
    """Likelihood + prior + observed data: the unit of posterior construction."""

    likelihood: Likelihood
    data: Tuple[float, ...]
    prior: PriorSpec

    def __post_init__(self):
        data = tuple(float(x) for x in self.data)
        if len(data) < 1:
            raise ValidationError("data must contain at least one observation")
        if not all(math.isfinite(x) for x in data):
            raise ValidationError("data must be finite")
        lik = self.likelihood
        if isinstance(lik, PoissonLikelihood):
            _as_counts(data, "poisson")
        elif isinstance(lik, BinomialLikelihood):
            counts = _as_counts(data, "binomial")
            if np.any(counts > lik.trials):
                raise ValidationError("binomial successes cannot exceed trials")
        elif isinstance(lik, LogisticLikelihood):
            counts = _as_counts(data, "logistic")
            if len(data) != len(lik.doses):
                raise ValidationError("logistic: one success count per dose group")
            if np.any(counts > np.asarray(lik.trials)):
                raise ValidationError("logistic successes cannot exceed trials")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class Posterior:
    """Either an analytic distribution or an empirical draw cloud."""

    distribution: Optional[Distribution] = None
    draws: Optional[EmpiricalMeasure] = None
    provenance: str = ""
    diagnostics: Any = None

    def __post_init__(self):
        if (self.distribution is None) == (self.draws is None):
            raise ValidationError("posterior must be analytic XOR sampled")
        if self.draws is not None:
            if self.diagnostics is None:
                raise ValidationError("sampled posterior requires sampler diagnostics")
            if self.draws.size < 1000:
                raise ValidationError(
                    f"sampled posterior needs >= 1000 draws, got {self.draws.size}"
                )

    @property
    def is_analytic(self) -> bool:
        return self.distribution is not None

    @property
    def dim(self) -> int:
        return 1 if self.is_analytic else self.draws.dim


# ---------- conjugate updates ----------


def _pseudo_params(prior: PriorSpec, likelihood: Likelihood) -> Tuple[float, float]:
    """Resolve a prior to conjugate pseudo-parameters for the given likelihood."""
    k = prior.kind
    if isinstance(likelihood, PoissonLikelihood):
        if k is PriorKind.PROPER and prior.distribution.family is Family.GAMMA:
            return prior.distribution.params
        if k is PriorKind.IMPROPER_GAMMA:
            return (prior.a, prior.b)
        if k is PriorKind.FLAT:  # constant density on the positive half line
            return (1.0, 0.0)
    elif isinstance(likelihood, BinomialLikelihood):
        if k is PriorKind.PROPER and prior.distribution.family is Family.BETA:
            return prior.distribution.params
        if k is PriorKind.IMPROPER_BETA:
            return (prior.a, prior.b)
        if k is PriorKind.FLAT:  # uniform on (0,1)
            return (1.0, 1.0)
    elif isinstance(likelihood, NormalVarianceLikelihood):
        if k is PriorKind.PROPER and prior.distribution.family is Family.INVERSE_GAMMA:
            return prior.distribution.params
        if k is PriorKind.IMPROPER_IG:
            return (prior.a, prior.b)
        if k is PriorKind.JEFFREYS_VARIANCE:  # p(v) ~ 1/v
            return (0.0, 0.0)
        if k is PriorKind.FLAT:  # p(v) ~ 1 is the shape -1 limit
            return (-1.0, 0.0)
    raise ValidationError(
        f"unsupported likelihood/prior pair: {type(likelihood).__name__} with {prior.label}"
    )


def conjugate_update(model: BayesModel) -> Posterior:
    """Analytic posterior for the three conjugate pairs; raises if improper."""
    lik = model.likelihood
    data = np.asarray(model.data, dtype=float)
    a0, b0 = _pseudo_params(model.prior, lik)
    n = data.size

    if isinstance(lik, PoissonLikelihood):
        a_post, b_post = a0 + data.sum(), b0 + n
        if a_post <= 0 or b_post <= 0:
            raise ImproperPosteriorError(
                f"poisson posterior gamma({a_post:g},{b_post:g}) is improper"
            )
        dist = Gamma(a_post, b_post)
    elif isinstance(lik, BinomialLikelihood):
        successes = data.sum()
        failures = lik.trials * n - successes
        a_post, b_post = a0 + successes, b0 + failures
        if a_post <= 0 or b_post <= 0:
            raise ImproperPosteriorError(
                f"binomial posterior beta({a_post:g},{b_post:g}) is improper"
            )
        dist = Beta(a_post, b_post)
    elif isinstance(lik, NormalVarianceLikelihood):
        s = float(np.sum((data - lik.mean) ** 2))
        a_post, b_post = a0 + 0.5 * n, b0 + 0.5 * s
        if a_post <= 0 or b_post <= 0:
            raise ImproperPosteriorError(
                f"variance posterior inverse-gamma({a_post:g},{b_post:g}) is improper"
            )
        dist = InverseGamma(a_post, b_post)
    else:
        raise ValidationError(
            f"no analytic posterior for likelihood {type(lik).__name__}"
        )
    return Posterior(
        distribution=dist,
        provenance=f"{type(lik).__name__}+{model.prior.label}|n={n}",
    )


# ---------- generic unnormalized log-posterior ----------


def _log_prior_scalar(prior: PriorSpec, theta: float, positive: bool) -> float:
    """Log prior density (unnormalized) for a scalar parameter."""
    k = prior.kind
    if k is PriorKind.PROPER:
        return float(prior.distribution.logpdf(theta))
    if k is PriorKind.IMPROPER_GAMMA:
        if theta <= 0:
            return -math.inf
        return (prior.a - 1.0) * math.log(theta) - prior.b * theta
    if k is PriorKind.IMPROPER_BETA:
        if not 0.0 < theta < 1.0:
            return -math.inf
        return (prior.a - 1.0) * math.log(theta) + (prior.b - 1.0) * math.log1p(-theta)
    if k is PriorKind.IMPROPER_IG:
        if theta <= 0:
            return -math.inf
        return (-prior.a - 1.0) * math.log(theta) - prior.b / theta
    if k is PriorKind.JEFFREYS_VARIANCE:
        return -math.log(theta) if theta > 0 else -math.inf
    if k is PriorKind.FLAT:
        return 0.0 if (theta > 0 or not positive) else -math.inf
    if k is PriorKind.CUSTOM:
        return float(prior.log_density(theta))
    raise ValidationError(f"prior kind {k} has no scalar density")


def log_posterior_unnorm(model: BayesModel, theta) -> float:
    """log prior + log likelihood, up to the normalizing constant; -inf off-support."""
    lik = model.likelihood
    data = np.asarray(model.data, dtype=float)

    if isinstance(lik, PoissonLikelihood):
        t = float(np.atleast_1d(theta)[0])
        lp = _log_prior_scalar(model.prior, t, positive=True)
        if not math.isfinite(lp) or t <= 0:
            return -math.inf
        loglik = float(
            data.sum() * math.log(t) - data.size * t - special.gammaln(data + 1.0).sum()
        )
        return lp + loglik

    if isinstance(lik, BinomialLikelihood):
        t = float(np.atleast_1d(theta)[0])
        if not 0.0 < t < 1.0:
            return -math.inf
        lp = _log_prior_scalar(model.prior, t, positive=True)
        if not math.isfinite(lp):
            return -math.inf
        m = lik.trials
        log_choose = (
            special.gammaln(m + 1.0)
            - special.gammaln(data + 1.0)
            - special.gammaln(m - data + 1.0)
        ).sum()
        loglik = float(
            log_choose + data.sum() * math.log(t) + (m * data.size - data.sum()) * math.log1p(-t)
        )
        return lp + loglik

    if isinstance(lik, NormalVarianceLikelihood):
        v = float(np.atleast_1d(theta)[0])
        if v <= 0:
            return -math.inf
        lp = _log_prior_scalar(model.prior, v, positive=True)
        if not math.isfinite(lp):
            return -math.inf
        s = float(np.sum((data - lik.mean) ** 2))
        n = data.size
        loglik = -0.5 * n * math.log(2.0 * math.pi * v) - 0.5 * s / v
        return lp + loglik

    if isinstance(lik, SkewNormalLikelihood):
        mu, log_sigma, alpha = (float(v) for v in np.atleast_1d(theta))
        # flat priors on location and log-scale; model.prior applies to the shape
        lp = _log_prior_scalar(model.prior, alpha, positive=False)
        if not math.isfinite(lp):
            return -math.inf
        sigma = math.exp(log_sigma)
        z = (data - mu) / sigma
        loglik = float(
            data.size * (math.log(2.0) - log_sigma)
            + np.sum(-0.5 * z * z - 0.5 * math.log(2.0 * math.pi))
            + special.log_ndtr(alpha * z).sum()
        )
        return lp + loglik

    if isinstance(lik, LogisticLikelihood):
        b0, b1 = (float(v) for v in np.atleast_1d(theta))
        if model.prior.kind is PriorKind.FLAT_PLANE_2D:
            lp = 0.0
        elif model.prior.kind is PriorKind.CUSTOM:
            lp = float(model.prior.log_density(b0, b1))
        else:
            raise ValidationError(
                f"logistic model expects a flat-plane or custom prior, got {model.prior.label}"
            )
        if not math.isfinite(lp):
            return -math.inf
        doses = np.asarray(lik.doses)
        trials = np.asarray(lik.trials, dtype=float)
        eta = b0 + b1 * doses
        log_choose = (
            special.gammaln(trials + 1.0)
            - special.gammaln(data + 1.0)
            - special.gammaln(trials - data + 1.0)
        ).sum()
        loglik = float(
            log_choose
            + np.sum(data * special.log_expit(eta) + (trials - data) * special.log_expit(-eta))
        )
        return lp + loglik

    raise ValidationError(f"unknown likelihood {type(lik).__name__}")


# ---------- posterior predictive ----------


def posterior_predictive_sample(
    post: Posterior, model: BayesModel, m: int, rng: np.random.Generator
) -> np.ndarray:
    """m predictive observations, redrawing the parameter for each (composition)."""
    if m < 0:
        raise ValidationError(f"predictive sample size must be >= 0, got {m}")
    if not post.is_analytic:
        raise ValidationError("posterior predictive requires an analytic posterior")
    if m == 0:
        return np.empty(0, dtype=float)
    lik = model.likelihood
    thetas = post.distribution.sample(rng, m)
    if isinstance(lik, PoissonLikelihood):
        return rng.poisson(thetas).astype(float)
    if isinstance(lik, BinomialLikelihood):
        return rng.binomial(lik.trials, thetas).astype(float)
    if isinstance(lik, NormalVarianceLikelihood):
        return rng.normal(lik.mean, np.sqrt(thetas))
    raise ValidationError(
        f"posterior predictive not defined for {type(lik).__name__}"
    )
