"""The three prior-impact measures and bootstrap uncertainty for the first.

- the posterior transport distance between two priors' posteriors (the
  headline impact measure), with analytic and empirical routes;
- neutrality: posterior mass strictly below the maximum-likelihood
  estimate;
- a signed effective-sample-size measure: how many predictive
  observations a baseline prior needs before its posterior matches the
  prior of interest's (positive when the prior of interest is the more
  impactful one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from .bounds import BoundsReport
from .errors import (
    DivergenceError,
    ImproperPosteriorError,
    NumericError,
    ValidationError,
)
from .posterior import (
    BayesModel,
    BinomialLikelihood,
    LogisticLikelihood,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    Posterior,
    PriorSpec,
    SkewNormalLikelihood,
    conjugate_update,
    posterior_predictive_sample,
)
from .transport import (
    DEFAULT_CELL_CAP,
    EmpiricalMeasure,
    subsampled_wp,
    truncated_support,
    w1_cdf_detailed,
    w1_empirical_1d,
    wp_empirical,
    wp_quantile,
)

__all__ = [
    "WimConfig",
    "ImpactReport",
    "MopessReport",
    "NeutralityResult",
    "BootstrapResult",
    "wim",
    "mle",
    "neutrality",
    "mopess",
    "bootstrap_wim",
]


@dataclass(frozen=True)
class WimConfig:
    """Sampling and routing knobs for the transport-distance estimate."""

    draws: int = 10_000
    seed: int = 0
    order: float = 1.0
    tol: float = 1e-8
    force_empirical: bool = False
    subsample_size: int = 2000
    subsample_repeats: int = 10
    se_splits: int = 10
    cell_cap: int = DEFAULT_CELL_CAP

    def __post_init__(self) -> None:
        if self.draws < 4:
            raise ValidationError(f"draws must be >= 4, got {self.draws}")
        if self.order < 1:
            raise ValidationError(f"order must be >= 1, got {self.order}")
        if self.tol <= 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.subsample_size < 1 or self.subsample_repeats < 1:
            raise ValidationError("subsample size and repeats must be >= 1")
        if self.se_splits < 2:
            raise ValidationError(f"se_splits must be >= 2, got {self.se_splits}")


@dataclass(frozen=True)
class MopessReport:
    """Signed effective-sample-size summary over replicates."""

    mopess: float
    opess_draws: Tuple[int, ...]
    quantile_band: Tuple[float, float]
    L: int
    reps: int

    def __post_init__(self) -> None:
        if len(self.opess_draws) != self.reps or self.reps < 1:
            raise ValidationError("opess_draws length must equal reps >= 1")
        if any(d == 0 or abs(d) > self.L for d in self.opess_draws):
            raise ValidationError(
                f"every signed draw must satisfy 1 <= |draw| <= L={self.L}"
            )
        mean = float(np.mean(self.opess_draws))
        if abs(mean - self.mopess) > 1e-9:
            raise ValidationError(
                f"mopess {self.mopess!r} is not the mean of the draws ({mean!r})"
            )
        if not self.quantile_band[0] <= self.quantile_band[1]:
            raise ValidationError(f"invalid quantile band {self.quantile_band!r}")


@dataclass(frozen=True)
class ImpactReport:
    """Transport distance plus optional companion measures for one comparison."""

    wim: float
    wim_se: Optional[float] = None
    neutrality: Optional[Tuple[float, float]] = None
    mopess: Optional[MopessReport] = None
    bounds: Optional[BoundsReport] = None
    config: Mapping[str, Any] = field(default_factory=dict)
    exact_gap: Optional[float] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.wim) or self.wim < -1e-15:
            raise NumericError(f"distance must be finite and nonnegative, got {self.wim!r}")
        object.__setattr__(self, "wim", max(0.0, float(self.wim)))
        if self.neutrality is not None:
            lo, hi = min(self.neutrality), max(self.neutrality)
            if lo < 0.0 or hi > 1.0:
                raise ValidationError(f"neutrality values must be in [0,1], got {self.neutrality!r}")
        if self.bounds is not None and self.bounds.exact is not None:
            object.__setattr__(self, "exact_gap", abs(self.wim - self.bounds.exact))


class NeutralityResult(NamedTuple):
    """Posterior mass below the MLE; degenerate marks a boundary/vacuous case."""

    value: float
    degenerate: bool


class BootstrapResult(NamedTuple):
    """Resampled distance values (replicate order) with summary quantiles."""

    values: Tuple[float, ...]
    median: float
    interval: Tuple[float, float]
    excluded: int
    requested: int


# ---------- the transport-distance measure ----------


def _config_echo(cfg: WimConfig, method: str) -> Mapping[str, Any]:
    return {
        "draws": cfg.draws,
        "seed": cfg.seed,
        "order": cfg.order,
        "method": method,
    }


def _cloud(post: Posterior, draws: int, rng: np.random.Generator) -> EmpiricalMeasure:
    if post.is_analytic:
        return EmpiricalMeasure(post.distribution.sample(rng, draws))
    return post.draws


def _powered_mean_distance(x: np.ndarray, y: np.ndarray, order: float) -> float:
    return float(np.mean(np.abs(x - y) ** order)) ** (1.0 / order)


def _paired_half_se(
    powered: np.ndarray, order: float, splits: int, rng: np.random.Generator
) -> float:
    """SE of the full estimate from half-sample re-estimates of paired residuals.

    Halves are drawn without replacement, so the finite-population factor
    (1 - 1/2) already scales the half-sample variance down to the full
    estimate's sampling variance; the spread of the re-estimates is used
    as-is, with no further correction.
    """
    n = powered.size
    half = n // 2
    vals = np.empty(splits)
    for t in range(splits):
        idx = rng.choice(n, size=half, replace=False)
        vals[t] = float(np.mean(powered[idx])) ** (1.0 / order)
    return float(np.std(vals, ddof=1))


def _independent_half_se(
    a: EmpiricalMeasure,
    b: EmpiricalMeasure,
    cfg: WimConfig,
    rng: np.random.Generator,
    use_assignment: bool,
) -> float:
    vals = np.empty(cfg.se_splits)
    ha, hb = a.size // 2, b.size // 2
    for t in range(cfg.se_splits):
        ia = np.sort(rng.choice(a.size, size=ha, replace=False))
        ib = np.sort(rng.choice(b.size, size=hb, replace=False))
        sub_a = EmpiricalMeasure(a.points[ia])
        sub_b = EmpiricalMeasure(b.points[ib])
        if use_assignment:
            vals[t] = wp_empirical(cfg.order, sub_a, sub_b, cell_cap=cfg.cell_cap)[0]
        else:
            vals[t] = w1_empirical_1d(sub_a, sub_b)
    # Without-replacement halves: spread already matches the full estimate's
    # sampling deviation (see _paired_half_se), so no further scaling.
    return float(np.std(vals, ddof=1))


def wim(post1: Posterior, post2: Posterior, cfg: Optional[WimConfig] = None) -> ImpactReport:
    """Transport distance between two posteriors over the same parameter.

    Two analytic posteriors are compared deterministically by CDF (order
    1) or quantile quadrature; otherwise an empirical route is used with
    a Monte-Carlo standard error. With ``force_empirical`` two analytic
    posteriors are compared on a shared stream of uniform levels pushed
    through both quantile functions, which couples the draws and removes
    most of the Monte-Carlo noise. Deterministic given ``cfg.seed``.
    """
    cfg = cfg if cfg is not None else WimConfig()
    if post1.dim != post2.dim:
        raise ValidationError(f"dimension mismatch: {post1.dim} vs {post2.dim}")
    dim = post1.dim
    both_analytic = post1.is_analytic and post2.is_analytic

    if both_analytic and not cfg.force_empirical:
        d1, d2 = post1.distribution, post2.distribution
        if cfg.order == 1.0:
            lo, hi, tail = truncated_support(d1.quantile_fn(), d2.quantile_fn())
            value, _err = w1_cdf_detailed(
                d1.cdf_fn(), d2.cdf_fn(), (lo, hi), tol=cfg.tol, tail_bound=tail
            )
            return ImpactReport(wim=value, config=_config_echo(cfg, "analytic-cdf"))
        value = wp_quantile(cfg.order, d1.quantile_fn(), d2.quantile_fn(), tol=cfg.tol)
        return ImpactReport(wim=value, config=_config_echo(cfg, "analytic-quantile"))

    rng = np.random.default_rng(cfg.seed)

    if both_analytic:
        u = rng.random(cfg.draws)
        x = np.asarray(post1.distribution.quantile_fn()(u), dtype=float)
        y = np.asarray(post2.distribution.quantile_fn()(u), dtype=float)
        powered = np.abs(x - y) ** cfg.order
        value = float(powered.mean()) ** (1.0 / cfg.order)
        se = _paired_half_se(powered, cfg.order, cfg.se_splits, rng)
        return ImpactReport(wim=value, wim_se=se, config=_config_echo(cfg, "empirical-coupled"))

    cloud1 = _cloud(post1, cfg.draws, rng)
    cloud2 = _cloud(post2, cfg.draws, rng)

    if dim == 1:
        if cfg.order == 1.0:
            value = w1_empirical_1d(cloud1, cloud2)
            se = _independent_half_se(cloud1, cloud2, cfg, rng, use_assignment=False)
            return ImpactReport(wim=value, wim_se=se, config=_config_echo(cfg, "empirical-sorted"))
        if cloud1.size != cloud2.size:
            raise ValidationError(
                "order != 1 on the 1-D empirical route requires equal cloud sizes"
            )
        powered = np.abs(cloud1.sorted_1d - cloud2.sorted_1d) ** cfg.order
        value = float(powered.mean()) ** (1.0 / cfg.order)
        se = _paired_half_se(powered, cfg.order, cfg.se_splits, rng)
        return ImpactReport(wim=value, wim_se=se, config=_config_echo(cfg, "empirical-sorted"))

    if cloud1.size * cloud2.size <= cfg.cell_cap:
        value, _plan = wp_empirical(cfg.order, cloud1, cloud2, cell_cap=cfg.cell_cap)
        se = _independent_half_se(cloud1, cloud2, cfg, rng, use_assignment=True)
        return ImpactReport(
            wim=value, wim_se=se, config=_config_echo(cfg, "empirical-assignment")
        )
    value, sd = subsampled_wp(
        cloud1, cloud2, cfg.order, cfg.subsample_size, cfg.subsample_repeats, rng,
        cell_cap=cfg.cell_cap,
    )
    se = sd / math.sqrt(cfg.subsample_repeats)
    return ImpactReport(
        wim=value, wim_se=se, config=_config_echo(cfg, "empirical-subsampled")
    )


# ---------- maximum likelihood ----------


def _logistic_mle(lik: LogisticLikelihood, data: Sequence[float]) -> np.ndarray:
    doses = np.asarray(lik.doses, dtype=float)
    trials = np.asarray(lik.trials, dtype=float)
    y = np.asarray(data, dtype=float)
    design = np.column_stack([np.ones_like(doses), doses])
    beta = np.zeros(2)
    for _ in range(200):
        prob = expit(design @ beta)
        grad = design.T @ (y - trials * prob)
        weights = trials * prob * (1.0 - prob)
        hess = design.T @ (design * weights[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise DivergenceError(
                "logistic Newton iteration hit a singular information matrix "
                "(complete separation?)"
            ) from exc
        beta = beta + step
        if not np.all(np.isfinite(beta)) or np.max(np.abs(beta)) > 1e8:
            raise DivergenceError(
                "logistic Newton iteration diverged (separated data has no finite optimum)"
            )
        if np.max(np.abs(grad)) < 1e-10 and np.max(np.abs(step)) < 1e-10:
            return beta
    raise DivergenceError("logistic Newton iteration did not converge in 200 steps")


def mle(model: BayesModel) -> Union[float, np.ndarray]:
    """Maximum-likelihood estimate of the model's parameter."""
    lik = model.likelihood
    data = np.asarray(model.data, dtype=float)
    if isinstance(lik, PoissonLikelihood):
        return float(data.mean())
    if isinstance(lik, BinomialLikelihood):
        return float(data.sum() / (lik.trials * data.size))
    if isinstance(lik, NormalVarianceLikelihood):
        return float(np.sum((data - lik.mean) ** 2) / data.size)
    if isinstance(lik, LogisticLikelihood):
        return _logistic_mle(lik, model.data)
    if isinstance(lik, SkewNormalLikelihood):
        raise ValidationError(
            "maximum likelihood is not supported for the skew-normal model: "
            "the shape estimate need not be finite"
        )
    raise ValidationError(f"no MLE rule for likelihood {type(lik).__name__}")


# ---------- neutrality ----------


def neutrality(post: Posterior, mle_value: float) -> NeutralityResult:
    """Posterior probability strictly below the MLE, with a degeneracy flag.

    A result of 0.5 marks a prior whose posterior is median-centered on
    the data's estimate. The flag is set when the MLE sits on (or
    outside) the boundary of the posterior's support, where the measure
    stops being informative.
    """
    if post.dim != 1:
        raise ValidationError("neutrality is defined for scalar posteriors only")
    if not math.isfinite(mle_value):
        raise ValidationError(f"MLE must be finite, got {mle_value!r}")
    if post.is_analytic:
        lo, hi = post.distribution.support
        value = float(np.clip(post.distribution.cdf(mle_value), 0.0, 1.0))
        degenerate = not (lo < mle_value < hi) or value in (0.0, 1.0)
        return NeutralityResult(value=value, degenerate=degenerate)
    draws = post.draws.as_1d()
    value = float(np.mean(draws < mle_value))
    return NeutralityResult(value=value, degenerate=value in (0.0, 1.0))


# ---------- signed effective-sample-size measure ----------


def _signed_argmin(
    d_first: np.ndarray, d_second: np.ndarray, rng: np.random.Generator
) -> int:
    """Signed 1-based argmin over both distance sets.

    Positive when the first set attains the overall minimum. Ties across
    the sets break toward the smaller augmentation count; a tie at the
    same count and value is resolved by a fair coin. Discrete data make
    such exact collisions common (two integer streams reproduce the same
    augmented posterior), and any deterministic preference there would
    push the identical-prior mean away from zero.
    """
    m1 = int(np.argmin(d_first))
    m2 = int(np.argmin(d_second))
    v1, v2 = d_first[m1], d_second[m2]
    if v1 < v2:
        return m1 + 1
    if v2 < v1:
        return -(m2 + 1)
    if m1 < m2:
        return m1 + 1
    if m2 < m1:
        return -(m2 + 1)
    return m1 + 1 if rng.random() < 0.5 else -(m2 + 1)


def mopess(
    likelihood,
    data: Sequence[float],
    prior_interest: PriorSpec,
    prior_base: PriorSpec,
    L: Optional[int] = None,
    reps: int = 100,
    rng: Union[np.random.Generator, int, None] = 0,
    tol: float = 1e-8,
) -> MopessReport:
    """Mean signed augmentation count at which the other prior's posterior
    gets closest, over predictive replicates.

    Per replicate, two independent cumulative streams of predictive
    observations are drawn under the prior of interest. One stream
    augments the baseline-prior posterior (compared against the
    prior-of-interest posterior on the original data); the other
    augments the prior-of-interest posterior (compared against the
    baseline posterior). Distances are order-2 quantile quadratures. The
    replicate's value is the signed count minimizing over both sets —
    positive ⇒ the prior of interest is the more impactful one.
    """
    data = tuple(float(v) for v in data)
    n = len(data)
    cap = 2 * n if L is None else int(L)
    if cap < 1:
        raise ValidationError(f"L must be >= 1, got {cap}")
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    model_interest = BayesModel(likelihood, data, prior_interest)
    model_base = BayesModel(likelihood, data, prior_base)
    post_interest = conjugate_update(model_interest)
    post_base = conjugate_update(model_base)
    qf_interest = post_interest.distribution.quantile_fn()
    qf_base = post_base.distribution.quantile_fn()

    draws = np.empty(reps, dtype=int)
    d_first = np.empty(cap)
    d_second = np.empty(cap)
    for r in range(reps):
        try:
            stream_a = posterior_predictive_sample(post_interest, model_interest, cap, gen)
            stream_b = posterior_predictive_sample(post_interest, model_interest, cap, gen)
            for m in range(1, cap + 1):
                aug_base = conjugate_update(
                    BayesModel(likelihood, data + tuple(stream_a[:m]), prior_base)
                )
                d_first[m - 1] = wp_quantile(
                    2.0, qf_interest, aug_base.distribution.quantile_fn(), tol=tol
                )
                aug_interest = conjugate_update(
                    BayesModel(likelihood, data + tuple(stream_b[:m]), prior_interest)
                )
                d_second[m - 1] = wp_quantile(
                    2.0, qf_base, aug_interest.distribution.quantile_fn(), tol=tol
                )
        except ImproperPosteriorError as exc:
            raise ImproperPosteriorError(f"replicate {r}: {exc}") from exc
        draws[r] = _signed_argmin(d_first, d_second, gen)

    band = (
        float(np.quantile(draws, 0.05)),
        float(np.quantile(draws, 0.95)),
    )
    return MopessReport(
        mopess=float(draws.mean()),
        opess_draws=tuple(int(d) for d in draws),
        quantile_band=band,
        L=cap,
        reps=reps,
    )


# ---------- bootstrap uncertainty ----------


def bootstrap_wim(
    data: Sequence[float],
    likelihood,
    prior1: PriorSpec,
    prior2: PriorSpec,
    B: int = 250,
    rng: Union[np.random.Generator, int, None] = 0,
    cfg: Optional[WimConfig] = None,
    update=conjugate_update,
) -> BootstrapResult:
    """Distance recomputed over B with-replacement resamples of the data.

    Resamples whose posterior is improper are excluded and counted.
    ``update`` maps a model to its posterior (conjugate by default; a
    sampler-backed callable slots in for non-conjugate models).
    """
    data = tuple(float(v) for v in data)
    n = len(data)
    if n < 2:
        raise ValidationError(f"bootstrap needs n >= 2 observations, got {n}")
    if B < 1:
        raise ValidationError(f"B must be >= 1, got {B}")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    arr = np.asarray(data, dtype=float)

    values = []
    excluded = 0
    for _ in range(B):
        resample = tuple(arr[gen.integers(0, n, size=n)])
        try:
            p1 = update(BayesModel(likelihood, resample, prior1))
            p2 = update(BayesModel(likelihood, resample, prior2))
            values.append(wim(p1, p2, cfg).wim)
        except ImproperPosteriorError:
            excluded += 1
    if not values:
        raise NumericError(f"all {B} resamples produced improper posteriors")
    arr_v = np.asarray(values)
    return BootstrapResult(
        values=tuple(float(v) for v in values),
        median=float(np.median(arr_v)),
        interval=(float(np.quantile(arr_v, 0.025)), float(np.quantile(arr_v, 0.975))),
        excluded=excluded,
        requested=B,
    )


def with_companions(
    report: ImpactReport,
    neutrality_pair: Optional[Tuple[float, float]] = None,
    mopess_report: Optional[MopessReport] = None,
    bounds: Optional[BoundsReport] = None,
) -> ImpactReport:
    """Attach optional companion measures to a distance report."""
    return replace(
        report,
        neutrality=neutrality_pair if neutrality_pair is not None else report.neutrality,
        mopess=mopess_report if mopess_report is not None else report.mopess,
        bounds=bounds if bounds is not None else report.bounds,
    )
