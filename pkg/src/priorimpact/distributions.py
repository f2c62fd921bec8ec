"""Analytic univariate distributions: density, CDF, quantile, seeded sampling.

Each distribution is an immutable (family, params) value. Numerical work for
the standard families is delegated to scipy.stats behind this surface; means
and supports are analytic formulas because downstream bound computations rely
on them exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Tuple

import numpy as np
from scipy import special, stats

from .errors import ValidationError

__all__ = [
    "Family",
    "Distribution",
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
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class Family(enum.Enum):
    GAMMA = "gamma"
    BETA = "beta"
    NORMAL = "normal"
    INVERSE_GAMMA = "inverse-gamma"
    STUDENT_T = "student-t"
    SKEW_NORMAL = "skew-normal"
    CAUCHY = "cauchy"
    POISSON = "poisson"
    BINOMIAL = "binomial"
    UNIFORM = "uniform"


_DISCRETE = frozenset({Family.POISSON, Family.BINOMIAL})

# parameter arity and human-readable parameter names per family
_PARAM_NAMES = {
    Family.GAMMA: ("shape", "rate"),
    Family.BETA: ("alpha", "beta"),
    Family.NORMAL: ("loc", "scale"),
    Family.INVERSE_GAMMA: ("shape", "scale"),
    Family.STUDENT_T: ("loc", "scale", "df"),
    Family.SKEW_NORMAL: ("loc", "scale", "shape"),
    Family.CAUCHY: ("loc", "scale"),
    Family.POISSON: ("rate",),
    Family.BINOMIAL: ("trials", "prob"),
    Family.UNIFORM: ("lo", "hi"),
}


@dataclass(frozen=True)
class Distribution:
    """An analytic univariate distribution identified by family + parameters."""

    family: Family
    params: Tuple[float, ...]

    def __post_init__(self):
        if self.family not in _PARAM_NAMES:
            raise ValidationError(f"unknown family: {self.family!r}")
        names = _PARAM_NAMES[self.family]
        params = tuple(float(p) for p in self.params)
        if len(params) != len(names):
            raise ValidationError(
                f"{self.family.value} takes {len(names)} parameters "
                f"{names}, got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise ValidationError(f"{self.family.value} parameters must be finite: {params}")
        object.__setattr__(self, "params", params)
        self._validate()

    # ---------- validation ----------

    def _require(self, ok: bool, message: str) -> None:
        if not ok:
            raise ValidationError(f"{self.family.value}{self.params}: {message}")

    def _validate(self) -> None:
        f, p = self.family, self.params
        if f is Family.GAMMA:
            self._require(p[0] > 0 and p[1] > 0, "shape and rate must be > 0")
        elif f is Family.BETA:
            self._require(p[0] > 0 and p[1] > 0, "alpha and beta must be > 0")
        elif f is Family.NORMAL:
            self._require(p[1] > 0, "scale must be > 0")
        elif f is Family.INVERSE_GAMMA:
            self._require(p[0] > 0 and p[1] > 0, "shape and scale must be > 0")
        elif f is Family.STUDENT_T:
            self._require(p[1] > 0 and p[2] > 0, "scale and df must be > 0")
        elif f is Family.SKEW_NORMAL:
            self._require(p[1] > 0, "scale must be > 0")
        elif f is Family.CAUCHY:
            self._require(p[1] > 0, "scale must be > 0")
        elif f is Family.POISSON:
            self._require(p[0] > 0, "rate must be > 0")
        elif f is Family.BINOMIAL:
            self._require(p[0] >= 1 and p[0] == int(p[0]), "trials must be an integer >= 1")
            self._require(0.0 < p[1] < 1.0, "success probability must be in (0, 1)")
        elif f is Family.UNIFORM:
            self._require(p[0] < p[1], "lo must be < hi")

    # ---------- scipy backend ----------

    @cached_property
    def _frozen(self):
        f, p = self.family, self.params
        if f is Family.GAMMA:
            return stats.gamma(p[0], scale=1.0 / p[1])
        if f is Family.BETA:
            return stats.beta(p[0], p[1])
        if f is Family.NORMAL:
            return stats.norm(loc=p[0], scale=p[1])
        if f is Family.INVERSE_GAMMA:
            return stats.invgamma(p[0], scale=p[1])
        if f is Family.STUDENT_T:
            return stats.t(df=p[2], loc=p[0], scale=p[1])
        if f is Family.SKEW_NORMAL:
            return stats.skewnorm(p[2], loc=p[0], scale=p[1])
        if f is Family.CAUCHY:
            return stats.cauchy(loc=p[0], scale=p[1])
        if f is Family.POISSON:
            return stats.poisson(p[0])
        if f is Family.BINOMIAL:
            return stats.binom(int(p[0]), p[1])
        if f is Family.UNIFORM:
            return stats.uniform(loc=p[0], scale=p[1] - p[0])
        raise ValidationError(f"unknown family: {f!r}")

    # ---------- core API ----------

    @property
    def is_discrete(self) -> bool:
        return self.family in _DISCRETE

    @property
    def support(self) -> Tuple[float, float]:
        f, p = self.family, self.params
        if f in (Family.GAMMA, Family.INVERSE_GAMMA):
            return (0.0, math.inf)
        if f is Family.BETA:
            return (0.0, 1.0)
        if f is Family.POISSON:
            return (0.0, math.inf)
        if f is Family.BINOMIAL:
            return (0.0, float(int(p[0])))
        if f is Family.UNIFORM:
            return (p[0], p[1])
        return (-math.inf, math.inf)

    @property
    def mean(self) -> float:
        """Analytic mean; raises where the family's mean does not exist."""
        f, p = self.family, self.params
        if f is Family.GAMMA:
            return p[0] / p[1]
        if f is Family.BETA:
            return p[0] / (p[0] + p[1])
        if f is Family.NORMAL:
            return p[0]
        if f is Family.INVERSE_GAMMA:
            if p[0] <= 1.0:
                raise ValidationError(f"inverse-gamma mean requires shape > 1, got {p[0]}")
            return p[1] / (p[0] - 1.0)
        if f is Family.STUDENT_T:
            if p[2] <= 1.0:
                raise ValidationError(f"student-t mean requires df > 1, got {p[2]}")
            return p[0]
        if f is Family.SKEW_NORMAL:
            loc, scale, shape = p
            delta = shape / math.sqrt(1.0 + shape * shape)
            return loc + scale * delta * _SQRT_2_OVER_PI
        if f is Family.CAUCHY:
            raise ValidationError("cauchy has no mean")
        if f is Family.POISSON:
            return p[0]
        if f is Family.BINOMIAL:
            return p[0] * p[1]
        if f is Family.UNIFORM:
            return 0.5 * (p[0] + p[1])
        raise ValidationError(f"unknown family: {f!r}")

    def pdf(self, x):
        """Density (or probability mass for discrete families); 0 outside support."""
        if self.family is Family.SKEW_NORMAL:
            loc, scale, shape = self.params
            z = (np.asarray(x, dtype=float) - loc) / scale
            # 2/sigma * phi(z) * Phi(shape * z)
            return 2.0 / scale * stats.norm.pdf(z) * stats.norm.cdf(shape * z)
        if self.is_discrete:
            return self._frozen.pmf(x)
        return self._frozen.pdf(x)

    def logpdf(self, x):
        if self.family is Family.SKEW_NORMAL:
            loc, scale, shape = self.params
            z = (np.asarray(x, dtype=float) - loc) / scale
            return (
                math.log(2.0)
                - math.log(scale)
                + stats.norm.logpdf(z)
                + stats.norm.logcdf(shape * z)
            )
        if self.is_discrete:
            return self._frozen.logpmf(x)
        return self._frozen.logpdf(x)

    def cdf(self, x):
        return self._frozen.cdf(x)

    def quantile(self, u):
        """Generalized inverse CDF; u must lie strictly inside (0, 1)."""
        u_arr = np.asarray(u, dtype=float)
        if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
            raise ValidationError(f"quantile level must be in (0, 1), got {u!r}")
        q = self._frozen.ppf(u_arr)
        return float(q) if np.isscalar(u) or u_arr.ndim == 0 else q

    def sample(self, rng: np.random.Generator, n: int):
        """n seeded draws; deterministic for a given generator state."""
        if n < 1:
            raise ValidationError(f"sample size must be >= 1, got {n}")
        return np.asarray(self._frozen.rvs(size=int(n), random_state=rng), dtype=float)

    def quantile_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized quantile evaluator for hot loops.

        Returns a callable mapping levels in (0, 1) to quantiles without
        per-call validation overhead; use :meth:`quantile` for checked access.
        """
        fam, p = self.family, self.params
        if fam is Family.GAMMA:
            shape, rate = p
            return lambda u: special.gammaincinv(shape, u) / rate
        if fam is Family.BETA:
            a, b = p
            return lambda u: special.betaincinv(a, b, u)
        if fam is Family.INVERSE_GAMMA:
            shape, scale = p
            return lambda u: scale / special.gammainccinv(shape, u)
        if fam is Family.NORMAL:
            mean, sd = p
            return lambda u: mean + sd * special.ndtri(u)
        if fam is Family.UNIFORM:
            lo, hi = p
            return lambda u: lo + (hi - lo) * np.asarray(u, dtype=float)
        return self._frozen.ppf

    def pdf_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized density evaluator for hot loops (interior points only)."""
        fam, p = self.family, self.params
        if fam is Family.GAMMA:
            shape, rate = p
            log_norm = shape * math.log(rate) - special.gammaln(shape)
            return lambda x: np.exp(
                (shape - 1.0) * np.log(x) - rate * np.asarray(x, dtype=float) + log_norm
            )
        if fam is Family.BETA:
            a, b = p
            log_norm = -special.betaln(a, b)
            return lambda x: np.exp(
                (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-np.asarray(x, dtype=float)) + log_norm
            )
        if fam is Family.INVERSE_GAMMA:
            shape, scale = p
            log_norm = shape * math.log(scale) - special.gammaln(shape)
            return lambda x: np.exp(
                (-shape - 1.0) * np.log(x) - scale / np.asarray(x, dtype=float) + log_norm
            )
        if fam is Family.NORMAL:
            mean, sd = p
            norm = 1.0 / (sd * math.sqrt(2.0 * math.pi))
            return lambda x: norm * np.exp(-0.5 * ((np.asarray(x, dtype=float) - mean) / sd) ** 2)
        return self._frozen.pdf

    def cdf_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized CDF evaluator for hot loops (counterpart of quantile_fn)."""
        fam, p = self.family, self.params
        if fam is Family.GAMMA:
            shape, rate = p
            return lambda x: special.gammainc(shape, rate * np.asarray(x, dtype=float))
        if fam is Family.BETA:
            a, b = p
            return lambda x: special.betainc(a, b, np.asarray(x, dtype=float))
        if fam is Family.INVERSE_GAMMA:
            shape, scale = p
            return lambda x: special.gammaincc(shape, scale / np.asarray(x, dtype=float))
        if fam is Family.NORMAL:
            mean, sd = p
            return lambda x: special.ndtr((np.asarray(x, dtype=float) - mean) / sd)
        return self._frozen.cdf

    def __repr__(self) -> str:  # compact, e.g. Gamma(shape=2.5, rate=2.5)
        names = _PARAM_NAMES[self.family]
        inner = ", ".join(f"{k}={v:g}" for k, v in zip(names, self.params))
        return f"{self.family.value}({inner})"


# ---------- factories ----------


def Gamma(shape: float, rate: float) -> Distribution:
    """Gamma with shape/rate parameterization (density ~ x^(shape-1) e^(-rate x))."""
    return Distribution(Family.GAMMA, (shape, rate))


def Beta(alpha: float, beta: float) -> Distribution:
    return Distribution(Family.BETA, (alpha, beta))


def Normal(loc: float, scale: float) -> Distribution:
    return Distribution(Family.NORMAL, (loc, scale))


def InverseGamma(shape: float, scale: float) -> Distribution:
    """Inverse-gamma: density ~ x^(-shape-1) e^(-scale/x) on x > 0."""
    return Distribution(Family.INVERSE_GAMMA, (shape, scale))


def StudentT(loc: float, scale: float, df: float) -> Distribution:
    return Distribution(Family.STUDENT_T, (loc, scale, df))


def SkewNormal(loc: float, scale: float, shape: float) -> Distribution:
    """Skew-normal: density (2/scale) phi(z) Phi(shape z), z = (x-loc)/scale."""
    return Distribution(Family.SKEW_NORMAL, (loc, scale, shape))


def Cauchy(loc: float, scale: float) -> Distribution:
    return Distribution(Family.CAUCHY, (loc, scale))


def Poisson(rate: float) -> Distribution:
    return Distribution(Family.POISSON, (rate,))


def Binomial(trials: int, prob: float) -> Distribution:
    return Distribution(Family.BINOMIAL, (trials, prob))


def Uniform(lo: float, hi: float) -> Distribution:
    return Distribution(Family.UNIFORM, (lo, hi))
