"""Analytic bounds on the transport distance between two posteriors.

Given one posterior and the density ratio of a second prior to the first,
kernel-weighted expectations yield a lower and an upper bound on the
1-Wasserstein distance between the two posteriors; when the ratio is
monotone the upper bound is attained exactly. Closed forms are provided
for the conjugate Poisson, binomial, and normal-variance comparisons.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .distributions import Distribution, Family
from .errors import (
    DivergenceError,
    ImproperPosteriorError,
    IntegrationError,
    NumericError,
    ValidationError,
)
from .posterior import (
    BinomialLikelihood,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    Posterior,
    PriorSpec,
    _pseudo_params,
)
from .transport import TAIL_EPSILON

__all__ = [
    "Method",
    "Monotonicity",
    "BoundsReport",
    "DensityRatio",
    "gamma_ratio",
    "beta_ratio",
    "inverse_gamma_ratio",
    "conjugate_prior_ratio",
    "stein_kernel",
    "theorem1_bounds",
    "PoissonGammaResult",
    "poisson_gamma_exact",
    "BinomialComparison",
    "binomial_bounds",
    "normal_ig_bounds",
]

_QUAD_LIMIT = 200
_GRID_POINTS = 1001


class Method(enum.Enum):
    """How a bound pair was produced."""

    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"


class Monotonicity(enum.Enum):
    """Declared direction of a density ratio; UNKNOWN disables exactness."""

    INCREASING = "increasing"
    DECREASING = "decreasing"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class BoundsReport:
    """Lower/upper bounds on the posterior transport distance.

    ``exact`` is populated (with the upper bound's value) only when the
    comparison is known to attain the upper bound exactly.
    """

    lower: float
    upper: float
    exact: Optional[float] = None
    method: Method = Method.CLOSED_FORM

    def __post_init__(self) -> None:
        for name in ("lower", "upper"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise NumericError(f"bound '{name}' is not finite: {v!r}")
            if v < -1e-15:
                raise NumericError(f"bound '{name}' is negative: {v!r}")
        object.__setattr__(self, "lower", max(0.0, float(self.lower)))
        object.__setattr__(self, "upper", max(0.0, float(self.upper)))
        if self.lower > self.upper + 1e-12:
            raise NumericError(
                f"lower bound {self.lower!r} exceeds upper bound {self.upper!r}"
            )
        if self.exact is not None:
            if not (self.lower - 1e-9 <= self.exact <= self.upper + 1e-9):
                raise NumericError(
                    f"exact value {self.exact!r} lies outside "
                    f"[{self.lower!r}, {self.upper!r}]"
                )


@dataclass(frozen=True)
class DensityRatio:
    """Pointwise ratio of a second density to a first, with its derivative.

    ``ratio`` may be unnormalized: any constant factor cancels in the
    bound computation. ``support`` is the interval where the second
    density lives (assumed nested in the first's). ``monotone`` is the
    caller's declaration; it is re-verified on a grid before exactness
    is claimed.
    """

    ratio: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    monotone: Monotonicity = Monotonicity.UNKNOWN

    def __post_init__(self) -> None:
        lo, hi = self.support
        if not lo < hi:
            raise ValidationError(f"ratio support must satisfy lo < hi, got {self.support!r}")
        if not callable(self.ratio) or not callable(self.derivative):
            raise ValidationError("ratio and derivative must be callables")


# ---------- density-ratio builders for the conjugate families ----------


def gamma_ratio(shape1: float, rate1: float, shape2: float, rate2: float) -> DensityRatio:
    """Ratio of two (possibly unnormalized) gamma-form densities on (0, inf).

    Densities ~ t^(shape-1) exp(-rate t); improper corner cases such as
    shape = 1, rate = 0 (flat on the positive half-line) are admitted.
    """
    d_shape = float(shape2) - float(shape1)
    d_rate = float(rate2) - float(rate1)

    def ratio(t):
        t = np.asarray(t, dtype=float)
        return t**d_shape * np.exp(-d_rate * t)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        return t ** (d_shape - 1.0) * np.exp(-d_rate * t) * (d_shape - d_rate * t)

    if d_shape >= 0.0 and d_rate <= 0.0:
        mono = Monotonicity.INCREASING
    elif d_shape <= 0.0 and d_rate >= 0.0:
        mono = Monotonicity.DECREASING
    else:
        mono = Monotonicity.UNKNOWN
    return DensityRatio(ratio, derivative, (0.0, math.inf), mono)


def beta_ratio(alpha1: float, beta1: float, alpha2: float, beta2: float) -> DensityRatio:
    """Ratio of two beta-form densities ~ t^(alpha-1) (1-t)^(beta-1) on (0, 1)."""
    da = float(alpha2) - float(alpha1)
    db = float(beta2) - float(beta1)

    def ratio(t):
        t = np.asarray(t, dtype=float)
        return t**da * (1.0 - t) ** db

    def derivative(t):
        t = np.asarray(t, dtype=float)
        return t ** (da - 1.0) * (1.0 - t) ** (db - 1.0) * (da * (1.0 - t) - db * t)

    if da >= 0.0 and db <= 0.0:
        mono = Monotonicity.INCREASING
    elif da <= 0.0 and db >= 0.0:
        mono = Monotonicity.DECREASING
    else:
        mono = Monotonicity.UNKNOWN
    return DensityRatio(ratio, derivative, (0.0, 1.0), mono)


def inverse_gamma_ratio(
    shape1: float, scale1: float, shape2: float, scale2: float
) -> DensityRatio:
    """Ratio of two inverse-gamma-form densities ~ t^(-shape-1) exp(-scale/t)."""
    d_shape = float(shape2) - float(shape1)
    d_scale = float(scale2) - float(scale1)

    def ratio(t):
        t = np.asarray(t, dtype=float)
        return t ** (-d_shape) * np.exp(-d_scale / t)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        return t ** (-d_shape - 2.0) * np.exp(-d_scale / t) * (d_scale - d_shape * t)

    if d_shape <= 0.0 and d_scale >= 0.0:
        mono = Monotonicity.INCREASING
    elif d_shape >= 0.0 and d_scale <= 0.0:
        mono = Monotonicity.DECREASING
    else:
        mono = Monotonicity.UNKNOWN
    return DensityRatio(ratio, derivative, (0.0, math.inf), mono)


def conjugate_prior_ratio(prior1: PriorSpec, prior2: PriorSpec, likelihood) -> DensityRatio:
    """Density ratio prior2/prior1 for a conjugate likelihood.

    Uses the same pseudo-parameter mapping as the conjugate posterior
    update, so improper reference priors are handled uniformly. Because
    both posteriors share the likelihood, this prior ratio equals the
    posterior ratio up to a constant, which cancels in the bounds.
    """
    a1, b1 = _pseudo_params(prior1, likelihood)
    a2, b2 = _pseudo_params(prior2, likelihood)
    if isinstance(likelihood, PoissonLikelihood):
        return gamma_ratio(a1, b1, a2, b2)
    if isinstance(likelihood, BinomialLikelihood):
        return beta_ratio(a1, b1, a2, b2)
    if isinstance(likelihood, NormalVarianceLikelihood):
        return inverse_gamma_ratio(a1, b1, a2, b2)
    raise ValidationError(
        f"no conjugate density ratio for likelihood {type(likelihood).__name__}"
    )


# ---------- the variance-like kernel ----------


def _closed_kernel(dist: Distribution) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    fam, p = dist.family, dist.params
    if fam is Family.GAMMA:
        _, rate = p
        return lambda t: np.asarray(t, dtype=float) / rate
    if fam is Family.BETA:
        a, b = p
        return lambda t: (lambda u: u * (1.0 - u) / (a + b))(np.asarray(t, dtype=float))
    if fam is Family.INVERSE_GAMMA:
        shape, _ = p
        if shape <= 1.0:
            raise ValidationError(
                f"inverse-gamma kernel requires shape > 1 for a finite mean, got {shape}"
            )
        return lambda t: np.asarray(t, dtype=float) ** 2 / (shape - 1.0)
    if fam is Family.NORMAL:
        _, sd = p
        var = sd * sd

        def const(t):
            t = np.asarray(t, dtype=float)
            return np.full(t.shape, var) if t.ndim else var

        return const
    return None


def _quad_kernel(
    pdf: Callable[[float], float], mean: float, support: Tuple[float, float]
) -> Callable[[float], float]:
    lo, hi = support

    def kernel(theta: float) -> float:
        p = float(pdf(theta))
        if not math.isfinite(p) or p <= 0.0:
            raise NumericError(f"pdf underflow at theta={theta!r}")
        # Integrate on whichever side of theta keeps the integrand
        # single-signed; the two sides agree because the full integral
        # of (mean - y) against the pdf is zero.
        if theta <= mean:
            val, _ = integrate.quad(
                lambda y: (mean - y) * pdf(y), lo, theta, limit=_QUAD_LIMIT
            )
        else:
            val, _ = integrate.quad(
                lambda y: (y - mean) * pdf(y), theta, hi, limit=_QUAD_LIMIT
            )
        return val / p

    return kernel


def _kernel_fn(dist: Distribution) -> Callable:
    closed = _closed_kernel(dist)
    if closed is not None:
        return closed
    return _quad_kernel(dist.pdf_fn(), dist.mean, dist.support)


def stein_kernel(target, theta: float) -> float:
    """Variance-like weight of a distribution at a point.

    Defined as the integral of (mean - y) against the density from the
    lower support endpoint up to ``theta``, divided by the density at
    ``theta``. Nonnegative, and it vanishes toward the support
    boundaries. ``target`` may be an analytic posterior, a distribution,
    or a ``(pdf, mean, support)`` triple.
    """
    if isinstance(target, Posterior):
        if not target.is_analytic:
            raise ValidationError("kernel evaluation requires an analytic posterior")
        dist = target.distribution
    elif isinstance(target, Distribution):
        dist = target
    else:
        try:
            pdf, mean, support = target
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                "target must be a Posterior, a Distribution, or a (pdf, mean, support) triple"
            ) from exc
        lo, hi = support
        if not lo < theta < hi:
            raise ValidationError(
                f"theta={theta!r} is not interior to the support {tuple(support)!r}"
            )
        if not math.isfinite(mean):
            raise ValidationError(f"mean must be finite, got {mean!r}")
        return float(_quad_kernel(pdf, float(mean), (float(lo), float(hi)))(theta))

    lo, hi = dist.support
    if not lo < theta < hi:
        raise ValidationError(
            f"theta={theta!r} is not interior to the support {(lo, hi)!r}"
        )
    if not math.isfinite(dist.mean):
        raise ValidationError("kernel evaluation requires a finite mean")
    return float(np.asarray(_kernel_fn(dist)(theta), dtype=float))


# ---------- kernel-weighted expectation bounds ----------


def _eval_grid(f: Callable, grid: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(grid), dtype=float)
        if out.shape == grid.shape:
            return out
    except Exception:
        pass
    return np.asarray([float(f(t)) for t in grid], dtype=float)


def _expectation(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    breaks: Sequence[float],
    name: str,
) -> float:
    pts = [b for b in breaks if lo < b < hi] or None
    out = integrate.quad(
        f, lo, hi, points=pts, epsabs=tol, epsrel=1e-9, limit=_QUAD_LIMIT, full_output=1
    )
    value = out[0]
    if len(out) > 3:
        raise IntegrationError(
            f"quadrature for the {name} did not converge: {out[3]}",
            achieved_tolerance=float(out[1]),
        )
    if not math.isfinite(value):
        raise DivergenceError(f"the {name} is not finite")
    return float(value)


def theorem1_bounds(
    p1: Union[Posterior, Distribution], ratio: DensityRatio, tol: float = 1e-8
) -> BoundsReport:
    """Kernel-weighted expectation bounds on the posterior transport distance.

    With expectations taken under the first posterior, the distance lies
    between ``|E[kernel * ratio']| / E[ratio]`` and
    ``E[kernel * |ratio'|] / E[ratio]``; when the ratio is monotone on
    the integration window the upper bound is exact and the report's
    ``exact`` field carries it.
    """
    if isinstance(p1, Posterior):
        if not p1.is_analytic:
            raise ValidationError("bounds require an analytic first posterior")
        dist = p1.distribution
    elif isinstance(p1, Distribution):
        dist = p1
    else:
        raise ValidationError(f"p1 must be a Posterior or Distribution, got {type(p1).__name__}")

    qf = dist.quantile_fn()
    lo = max(float(ratio.support[0]), float(qf(TAIL_EPSILON)))
    hi = min(float(ratio.support[1]), float(qf(1.0 - TAIL_EPSILON)))
    if not lo < hi:
        raise ValidationError(
            "empty integration window: ratio support does not overlap the posterior bulk"
        )

    # Rescale the (possibly unnormalized) ratio by its value at the
    # posterior median so the three integrals stay in floating range;
    # the scale cancels in both bound quotients.
    ref = float(qf(0.5))
    if not lo < ref < hi:
        ref = 0.5 * (lo + hi)
    scale = float(ratio.ratio(ref))
    if not (math.isfinite(scale) and scale > 0.0):
        scale = 1.0

    grid = np.linspace(lo, hi, _GRID_POINTS)
    ratio_grid = _eval_grid(ratio.ratio, grid)
    deriv_grid = _eval_grid(ratio.derivative, grid)
    if not np.all(np.isfinite(ratio_grid)) or np.any(ratio_grid <= 0.0):
        bad = grid[~(np.isfinite(ratio_grid) & (ratio_grid > 0.0))][:3]
        raise NumericError(
            f"density ratio must be finite and positive on the window; offending points {bad!r}"
        )
    if not np.all(np.isfinite(deriv_grid)):
        bad = grid[~np.isfinite(deriv_grid)][:3]
        raise NumericError(f"ratio derivative is not finite at {bad!r}")

    sign_grid = np.sign(deriv_grid)
    change = np.nonzero(np.diff(sign_grid) != 0)[0]
    breaks = sorted({0.5 * (grid[i] + grid[i + 1]) for i in change})[:20]

    pdf = dist.pdf_fn()
    kernel = _kernel_fn(dist)
    rho = ratio.ratio
    drho = ratio.derivative

    mass = _expectation(
        lambda t: float(rho(t)) / scale * float(pdf(t)),
        lo,
        hi,
        tol,
        (),
        "density-ratio expectation",
    )
    if mass <= 0.0:
        raise DivergenceError("the density-ratio expectation is not positive")
    signed = _expectation(
        lambda t: float(kernel(t)) * float(drho(t)) / scale * float(pdf(t)),
        lo,
        hi,
        tol,
        breaks,
        "signed kernel-weighted expectation",
    )
    absolute = _expectation(
        lambda t: float(kernel(t)) * abs(float(drho(t))) / scale * float(pdf(t)),
        lo,
        hi,
        tol,
        breaks,
        "absolute kernel-weighted expectation",
    )

    lower = abs(signed) / mass
    upper = max(0.0, absolute) / mass

    exact = None
    if ratio.monotone in (Monotonicity.INCREASING, Monotonicity.DECREASING):
        slack = 1e-12 * max(1.0, float(np.max(np.abs(deriv_grid))))
        if ratio.monotone is Monotonicity.INCREASING:
            verified = bool(np.all(deriv_grid >= -slack))
        else:
            verified = bool(np.all(deriv_grid <= slack))
        if verified:
            exact = upper
        else:
            warnings.warn(
                "declared monotone density ratio changes sign on the verification "
                "grid; exactness claim dropped",
                RuntimeWarning,
                stacklevel=2,
            )
    return BoundsReport(lower=lower, upper=upper, exact=exact, method=Method.QUADRATURE)


# ---------- closed forms for the conjugate comparisons ----------


class PoissonGammaResult(NamedTuple):
    """Distance value plus whether the closed form is guaranteed exact."""

    value: float
    guaranteed_exact: bool


def poisson_gamma_exact(
    shape1: float,
    rate1: float,
    shape2: float,
    rate2: float,
    n: int,
    total: float,
) -> PoissonGammaResult:
    """Closed-form posterior distance for two gamma priors on a Poisson mean.

    Exactness is guaranteed when one prior's shape is strictly larger
    while its rate is strictly smaller (or vice versa); outside that
    regime the same value is returned flagged as an approximation.
    """
    n = _check_count(n, "n")
    if total < 0:
        raise ValidationError(f"total event count must be >= 0, got {total!r}")
    if n + rate1 <= 0 or n + rate2 <= 0:
        raise ValidationError(
            f"posterior rates must be positive: n+rate1={n + rate1!r}, n+rate2={n + rate2!r}"
        )
    if shape1 + total <= 0 or shape2 + total <= 0:
        raise ImproperPosteriorError(
            f"posterior shapes must be positive: {shape1 + total!r}, {shape2 + total!r}"
        )
    value = abs(
        shape2 - shape1 - (rate2 - rate1) * (shape2 + total) / (n + rate2)
    ) / (n + rate1)
    guaranteed = (shape1 < shape2 and rate1 > rate2) or (
        shape1 > shape2 and rate1 < rate2
    )
    return PoissonGammaResult(value=float(value), guaranteed_exact=guaranteed)


class BinomialComparison(enum.Enum):
    """Which reference-versus-uniform binomial comparison to bound."""

    BETA_VS_UNIFORM = "beta-vs-uniform"
    JEFFREYS_VS_UNIFORM = "jeffreys-vs-uniform"
    HALDANE_VS_UNIFORM = "haldane-vs-uniform"


def _check_count(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}")
    return int(value)


def binomial_bounds(
    variant: BinomialComparison,
    n: int,
    x: int,
    *,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
) -> BoundsReport:
    """Closed-form distance bounds for a binomial posterior comparison.

    All variants compare a reference prior's posterior to the flat
    prior's posterior after observing ``x`` successes in ``n`` trials.
    ``alpha``/``beta`` are required only for BETA_VS_UNIFORM.
    """
    n = _check_count(n, "n")
    x = _check_count(x, "x")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if x > n:
        raise ValidationError(f"x must satisfy 0 <= x <= n, got x={x}, n={n}")

    if variant is BinomialComparison.BETA_VS_UNIFORM:
        if alpha is None or beta is None:
            raise ValidationError("BETA_VS_UNIFORM requires alpha and beta")
        if alpha <= 0 or beta <= 0:
            raise ValidationError(
                f"beta prior parameters must be positive, got alpha={alpha!r}, beta={beta!r}"
            )
        denom = n + alpha + beta
        lower = abs(
            (x + 1.0) / (n + 2.0) * (alpha + beta - 2.0) / denom - (alpha - 1.0) / denom
        )
        upper = (
            abs(alpha - 1.0) + (x + alpha) / denom * (abs(beta - 1.0) - abs(alpha - 1.0))
        ) / (n + 2.0)
        exact = upper if (alpha - 1.0) * (beta - 1.0) <= 0.0 else None
        return BoundsReport(lower=lower, upper=upper, exact=exact, method=Method.CLOSED_FORM)

    if variant is BinomialComparison.JEFFREYS_VS_UNIFORM:
        if alpha is not None or beta is not None:
            raise ValidationError(f"{variant.value} takes no alpha/beta parameters")
        lower = abs(n / 2.0 - x) / ((n + 2.0) * (n + 1.0))
        upper = (
            math.sqrt((x + 0.5) * (n - x + 0.5) / ((n + 2.0) * (n + 1.0) ** 2))
            + abs((x + 0.5) / (n + 1.0) - 0.5)
        ) / (n + 2.0)
        return BoundsReport(lower=lower, upper=upper, exact=None, method=Method.CLOSED_FORM)

    if variant is BinomialComparison.HALDANE_VS_UNIFORM:
        if alpha is not None or beta is not None:
            raise ValidationError(f"{variant.value} takes no alpha/beta parameters")
        if x in (0, n):
            raise ImproperPosteriorError(
                f"boundary data x={x} of n={n} leaves the zero-pseudocount posterior improper"
            )
        lower = 2.0 * abs(n / 2.0 - x) / (n * (n + 2.0))
        upper = (
            2.0
            / (n + 2.0)
            * (math.sqrt(x * (n - x) / (n**2 * (n + 1.0))) + abs(x / n - 0.5))
        )
        return BoundsReport(lower=lower, upper=upper, exact=None, method=Method.CLOSED_FORM)

    raise ValidationError(f"unknown binomial comparison variant: {variant!r}")


def normal_ig_bounds(shape: float, scale: float, n: int, sq_dev_sum: float) -> BoundsReport:
    """Closed-form bounds for an inverse-gamma prior versus the reciprocal
    reference prior on a normal variance with known mean.

    ``sq_dev_sum`` is the sum of squared deviations of the data from the
    known mean. Requires n >= 3 and shape > 1 - n/2 so both posterior
    means exist; the printed forms assume nonnegative hyperparameters.
    """
    n = _check_count(n, "n")
    if n < 3:
        raise ValidationError(f"n must be >= 3 so the reference posterior has a mean, got {n}")
    if sq_dev_sum < 0:
        raise ValidationError(f"sq_dev_sum must be >= 0, got {sq_dev_sum!r}")
    if shape < 0 or scale < 0:
        raise ValidationError(
            f"hyperparameters must be >= 0, got shape={shape!r}, scale={scale!r}"
        )
    half_n = n / 2.0
    if half_n + shape - 1.0 <= 0:
        raise ValidationError(
            f"n/2 + shape - 1 must be positive, got {half_n + shape - 1.0!r}"
        )
    denom = (half_n + shape - 1.0) * (half_n - 1.0)
    lower = abs(shape / 2.0 * sq_dev_sum - (half_n - 1.0) * scale) / denom
    upper = (
        shape / 2.0 * sq_dev_sum + n * scale / 2.0 + scale * (2.0 * shape - 1.0)
    ) / denom
    exact = upper if (scale == 0.0 or shape == 0.0) else None
    return BoundsReport(lower=lower, upper=upper, exact=exact, method=Method.CLOSED_FORM)
