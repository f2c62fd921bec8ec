"""Adaptive random-walk Metropolis sampling for the non-conjugate models.

Per-coordinate Gaussian proposals whose step sizes are tuned during
burn-in only (Robbins–Monro on the log step size toward a target
acceptance rate), so the post-burn-in chain leaves the target law
invariant. Multiple chains with independent child seeds feed split-chain
convergence diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .distributions import Cauchy
from .errors import DivergenceError, SamplerError, ValidationError
from .impact import mle
from .posterior import (
    BayesModel,
    LogisticLikelihood,
    Posterior,
    PriorSpec,
    SkewNormalLikelihood,
    custom_prior,
    flat_plane_prior,
    log_posterior_unnorm,
)
from .transport import EmpiricalMeasure

__all__ = [
    "McmcConfig",
    "McmcDiagnostics",
    "run_mcmc",
    "SkewNormalFit",
    "fit_skew_normal",
    "LogisticFit",
    "fit_logistic",
]

SLOPE_DEGENERACY_EPS = 1e-12  # |slope| below this has no finite dose-response midpoint


@dataclass(frozen=True)
class McmcConfig:
    """Chain-length and adaptation settings."""

    chains: int = 4
    iterations: int = 20_000
    burn_in: int = 10_000
    thin: int = 5
    target_acceptance: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.chains < 2:
            raise ValidationError(f"need >= 2 chains for split diagnostics, got {self.chains}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValidationError(
                f"burn_in must satisfy 0 <= burn_in < iterations, got {self.burn_in}/{self.iterations}"
            )
        if self.thin < 1:
            raise ValidationError(f"thin must be >= 1, got {self.thin}")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValidationError(
                f"target_acceptance must be in (0,1), got {self.target_acceptance}"
            )

    @property
    def retained_per_chain(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))


@dataclass(frozen=True)
class McmcDiagnostics:
    """Per-chain acceptance and per-coordinate convergence summaries."""

    acceptance_rates: Tuple[float, ...]
    r_hat: Tuple[float, ...]
    ess: Tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not 0.0 < a < 1.0 for a in self.acceptance_rates):
            raise SamplerError(
                f"acceptance rates must lie strictly in (0,1), got {self.acceptance_rates!r}"
            )
        if any(r < 1.0 - 1e-3 for r in self.r_hat):
            raise SamplerError(f"split convergence ratio below 1: {self.r_hat!r}")


def _split_rhat(chains_arr: np.ndarray) -> np.ndarray:
    """Split-chain potential-scale-reduction factor per coordinate."""
    n_chains, n, dim = chains_arr.shape
    half = n // 2
    splits = np.concatenate(
        [chains_arr[:, :half, :], chains_arr[:, half : 2 * half, :]], axis=0
    )  # (2 chains, half, dim)
    means = splits.mean(axis=1)
    within = splits.var(axis=1, ddof=1).mean(axis=0)
    between = half * means.var(axis=0, ddof=1)
    if np.any(within <= 0.0):
        raise SamplerError("a split half-chain is constant; the sampler never moved")
    var_hat = (half - 1) / half * within + between / half
    # The ratio can dip below 1 when the split means agree more closely
    # than within-split noise (its floor is sqrt((half-1)/half)); that is
    # evidence of convergence, not failure, so it is reported as 1.
    return np.maximum(np.sqrt(var_hat / within), 1.0)


def _ess(chains_arr: np.ndarray) -> np.ndarray:
    """Effective sample size per coordinate (initial monotone positive sequence)."""
    n_chains, n, dim = chains_arr.shape
    out = np.empty(dim)
    for j in range(dim):
        x = chains_arr[:, :, j]
        centered = x - x.mean(axis=1, keepdims=True)
        # per-chain autocovariance via FFT
        size = 2 ** int(np.ceil(np.log2(2 * n)))
        f = np.fft.rfft(centered, n=size, axis=1)
        acov = np.fft.irfft(f * np.conj(f), n=size, axis=1)[:, :n].real / n
        mean_acov = acov.mean(axis=0)
        chain_var = acov[:, 0].mean() * n / (n - 1)
        between = x.mean(axis=1).var(ddof=1) if n_chains > 1 else 0.0
        var_hat = (n - 1) / n * chain_var + between
        if var_hat <= 0:
            out[j] = float(n_chains * n)
            continue
        rho = 1.0 - (chain_var - mean_acov) / var_hat
        # Geyer pairing: sum successive pairs while positive and decreasing
        tau = 1.0
        prev_pair = math.inf
        t = 1
        while t + 1 < n:
            pair = rho[t] + rho[t + 1]
            if pair <= 0.0:
                break
            pair = min(pair, prev_pair)
            tau += 2.0 * pair
            prev_pair = pair
            t += 2
        out[j] = n_chains * n / tau
    return out


def _jittered_start(
    log_target: Callable[[np.ndarray], float],
    init: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, float]:
    scale = 0.1 * (1.0 + np.abs(init))
    for _ in range(100):
        candidate = init + rng.normal(size=init.size) * scale
        lp = float(log_target(candidate))
        if math.isfinite(lp):
            return candidate, lp
    return init.copy(), float(log_target(init))


def run_mcmc(
    log_target: Callable[[np.ndarray], float],
    init: Sequence[float],
    cfg: Optional[McmcConfig] = None,
    rng: Union[np.random.SeedSequence, int, None] = None,
) -> Tuple[EmpiricalMeasure, McmcDiagnostics]:
    """Sample a log-density with per-coordinate adaptive random-walk Metropolis.

    Step sizes adapt only during burn-in; retained draws are thinned and
    pooled across chains in chain order. Deterministic given the seed.
    Raises a sampler error when every chain's post-burn-in acceptance
    rate collapses below 1%.
    """
    cfg = cfg if cfg is not None else McmcConfig()
    start = np.atleast_1d(np.asarray(init, dtype=float))
    if start.ndim != 1:
        raise ValidationError("init must be a flat parameter vector")
    dim = start.size
    lp0 = float(log_target(start))
    if not math.isfinite(lp0):
        raise ValidationError(f"log target must be finite at init, got {lp0!r}")

    if isinstance(rng, np.random.SeedSequence):
        root = rng
    elif rng is None:
        root = np.random.SeedSequence(cfg.seed)
    else:
        root = np.random.SeedSequence(int(rng))
    children = root.spawn(cfg.chains)

    keep = cfg.retained_per_chain
    all_draws = np.empty((cfg.chains, keep, dim))
    acceptance = np.empty(cfg.chains)

    for c, child in enumerate(children):
        gen = np.random.default_rng(child)
        x, lp = _jittered_start(log_target, start, gen)
        log_step = np.zeros(dim)
        accepted = 0
        proposed = 0
        k = 0
        for it in range(cfg.iterations):
            sampling = it >= cfg.burn_in
            for j in range(dim):
                prop = x.copy()
                prop[j] += gen.normal() * math.exp(log_step[j])
                lp_prop = float(log_target(prop))
                log_ratio = lp_prop - lp
                accept_prob = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
                if gen.random() < accept_prob:
                    x, lp = prop, lp_prop
                    if sampling:
                        accepted += 1
                if sampling:
                    proposed += 1
                else:
                    gain = 1.0 / (it + 1) ** 0.6
                    log_step[j] += gain * (accept_prob - cfg.target_acceptance)
            if sampling and (it - cfg.burn_in) % cfg.thin == 0:
                all_draws[c, k] = x
                k += 1
        acceptance[c] = accepted / proposed

    if np.all(acceptance < 0.01):
        raise SamplerError(
            "all chains stuck: post-burn-in acceptance rates "
            f"{np.round(acceptance, 5).tolist()} are below 1%",
            diagnostics={"acceptance_rates": tuple(acceptance)},
        )

    diagnostics = McmcDiagnostics(
        acceptance_rates=tuple(float(a) for a in acceptance),
        r_hat=tuple(float(r) for r in _split_rhat(all_draws)),
        ess=tuple(float(e) for e in _ess(all_draws)),
    )
    pooled = all_draws.reshape(cfg.chains * keep, dim)
    cloud = EmpiricalMeasure(pooled[:, 0] if dim == 1 else pooled)
    return cloud, diagnostics


# ---------- skew-normal shape fit ----------


@dataclass(frozen=True)
class SkewNormalFit:
    """Sampled posteriors from the three-parameter skew-normal fit."""

    shape_posterior: Posterior  # marginal of the shape parameter
    joint_posterior: Posterior  # (location, log scale, shape)
    diagnostics: McmcDiagnostics


def fit_skew_normal(
    data: Sequence[float],
    skewness_prior: PriorSpec,
    cfg: Optional[McmcConfig] = None,
    rng: Union[np.random.SeedSequence, int, None] = None,
) -> SkewNormalFit:
    """Posterior of a skew-normal model's parameters under a chosen shape prior.

    Location and log scale carry flat priors; the given prior applies to
    the shape parameter only. Returns the shape marginal alongside the
    full three-parameter cloud.
    """
    data = tuple(float(v) for v in data)
    if len(data) < 3:
        raise ValidationError(f"need at least 3 observations, got {len(data)}")
    model = BayesModel(SkewNormalLikelihood(), data, skewness_prior)
    arr = np.asarray(data)
    sd = float(arr.std())
    if sd <= 0:
        raise ValidationError("data must not be constant")
    init = np.array([float(arr.mean()), math.log(sd), 0.0])
    cloud, diag = run_mcmc(lambda t: log_posterior_unnorm(model, t), init, cfg, rng)
    tag = f"mcmc-skew-normal|prior={skewness_prior.label}|n={len(data)}"
    joint = Posterior(draws=cloud, provenance=tag, diagnostics=diag)
    shape_cloud = EmpiricalMeasure(cloud.points[:, 2])
    marginal = Posterior(draws=shape_cloud, provenance=tag + "|marginal=shape", diagnostics=diag)
    return SkewNormalFit(shape_posterior=marginal, joint_posterior=joint, diagnostics=diag)


# ---------- logistic dose-response fit ----------


@dataclass(frozen=True)
class LogisticFit:
    """Sampled joint posterior of (intercept, slope) plus the derived
    median-effective-dose cloud on the original dose scale."""

    joint_posterior: Posterior
    ld50_posterior: Posterior
    excluded: int  # draws dropped because the slope was numerically zero
    mle_standardized: np.ndarray
    dose_mean: float
    dose_scale: float  # 2 x the population sd of the doses
    diagnostics: McmcDiagnostics


def fit_logistic(
    doses: Sequence[float],
    trials: Sequence[int],
    successes: Sequence[int],
    slope_prior_scale: Optional[float] = 2.5,
    cfg: Optional[McmcConfig] = None,
    rng: Union[np.random.SeedSequence, int, None] = None,
) -> LogisticFit:
    """Fit a logit dose-response model on standardized doses.

    Doses are centered and scaled to sd 1/2 before fitting. The
    intercept prior is Cauchy(0, 10); the slope prior is Cauchy(0,
    slope_prior_scale), or the whole plane is flat when the scale is
    None. The median-effective-dose cloud (-intercept/slope, mapped back
    to the original dose scale) excludes numerically-zero slopes and
    reports how many were dropped.
    """
    doses = np.asarray(doses, dtype=float)
    if doses.ndim != 1 or np.unique(doses).size < 2:
        raise ValidationError("need >= 2 distinct doses")
    mean = float(doses.mean())
    sd = float(doses.std())  # population sd: the scaling rule's denominator
    scale = 2.0 * sd
    z = (doses - mean) / scale

    if slope_prior_scale is None:
        prior = flat_plane_prior()
    else:
        if slope_prior_scale <= 0:
            raise ValidationError(f"slope prior scale must be positive, got {slope_prior_scale}")
        intercept_prior = Cauchy(0.0, 10.0)
        slope_prior = Cauchy(0.0, float(slope_prior_scale))

        def log_prior(intercept: float, slope: float) -> float:
            return float(intercept_prior.logpdf(intercept)) + float(
                slope_prior.logpdf(slope)
            )

        prior = custom_prior(log_prior)

    lik = LogisticLikelihood(doses=tuple(z), trials=tuple(int(t) for t in trials))
    model = BayesModel(lik, tuple(float(s) for s in successes), prior)
    try:
        estimate = np.asarray(mle(model), dtype=float)
    except DivergenceError:
        estimate = np.zeros(2)
    cloud, diag = run_mcmc(lambda t: log_posterior_unnorm(model, t), estimate, cfg, rng)

    label = "flat-plane" if slope_prior_scale is None else f"cauchy(0,{slope_prior_scale:g})"
    tag = f"mcmc-logistic|slope-prior={label}|doses={doses.size}"
    joint = Posterior(draws=cloud, provenance=tag, diagnostics=diag)

    intercepts = cloud.points[:, 0]
    slopes = cloud.points[:, 1]
    ok = np.abs(slopes) >= SLOPE_DEGENERACY_EPS
    excluded = int(np.size(ok) - np.count_nonzero(ok))
    if np.count_nonzero(ok) < 1000:
        raise SamplerError(
            f"only {np.count_nonzero(ok)} draws have a usable slope; cannot form the dose cloud"
        )
    ld50 = mean + scale * (-intercepts[ok] / slopes[ok])
    ld50_post = Posterior(
        draws=EmpiricalMeasure(ld50), provenance=tag + "|derived=ld50", diagnostics=diag
    )
    return LogisticFit(
        joint_posterior=joint,
        ld50_posterior=ld50_post,
        excluded=excluded,
        mle_standardized=estimate,
        dose_mean=mean,
        dose_scale=scale,
        diagnostics=diag,
    )
