"""Simulation harness: seeded grid studies and demonstration runs.

The harness turns an :class:`ExperimentSpec` into a deterministic table of
rows. Grid experiments sweep (prior pair) x (true parameter) x (sample size)
cells with many replicates; demonstration experiments fit the two sampler
models once and compare posteriors pairwise.

Reproducibility contract: every cell derives its generator from
``SeedSequence(root_seed, spawn_key=(grid_index, replicate))``, so results
are independent of execution order and worker count, and a rerun with the
same spec is byte-identical.
"""

from __future__ import annotations

import concurrent.futures
import io
import json
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bounds import (
    BoundsReport,
    Method,
    Monotonicity,
    binomial_bounds,
    BinomialComparison,
    conjugate_prior_ratio,
    normal_ig_bounds,
    poisson_gamma_exact,
    theorem1_bounds,
)
from .datasets import bioassay, skewed_demo_sample
from .distributions import Beta, Cauchy, Gamma, InverseGamma, Normal, SkewNormal, StudentT, Uniform
from .errors import PriorImpactError, ValidationError
from .impact import WimConfig, mle, mopess, neutrality, wim
from .mcmc import McmcConfig, fit_logistic, fit_skew_normal
from .posterior import (
    BayesModel,
    BinomialLikelihood,
    EmpiricalMeasure,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    Posterior,
    PriorSpec,
    _pseudo_params,
    conjugate_update,
    flat_plane_prior,
    flat_prior,
    improper_beta_prior,
    improper_gamma_prior,
    improper_inverse_gamma_prior,
    jeffreys_variance_prior,
    proper_prior,
)

__all__ = [
    "ExperimentKind",
    "ExperimentSpec",
    "ExperimentResult",
    "default_spec",
    "parse_prior",
    "parse_experiment_file",
    "child_seed",
    "run_experiment",
    "write_rows_csv",
    "rows_to_csv",
    "rows_to_json",
    "ROW_COLUMNS",
    "DEMO_COLUMNS",
    "CLOUD_COLUMNS",
    "SCHEMA_COMMENT",
    "SKEW_DEMO_PRIORS",
    "BIOASSAY_PRIOR_SETTINGS",
]


# ---------- prior mini-grammar ----------

_PRIOR_TAGS = {
    "flat": flat_prior,
    "flat-plane": flat_plane_prior,
    "jeffreys-var": jeffreys_variance_prior,
    "haldane": lambda: improper_beta_prior(0.0, 0.0),
}


def _prior_numbers(text: str, parts: Sequence[str], arity: int) -> Tuple[float, ...]:
    if len(parts) != arity:
        raise ValidationError(
            f"prior spec {text!r}: expected {arity} numeric parameters, got {len(parts)}"
        )
    out = []
    for raw in parts:
        try:
            out.append(float(raw))
        except ValueError:
            raise ValidationError(f"prior spec {text!r}: {raw!r} is not a number") from None
    return tuple(out)


def parse_prior(text: str) -> PriorSpec:
    """Parse a ``family:param:...:param`` prior expression.

    Families: ``flat``, ``flat-plane``, ``jeffreys-var``, ``haldane``,
    ``gamma:shape:rate``, ``beta:a:b``, ``ig:shape:scale``,
    ``normal:loc:sd``, ``uniform:lo:hi``, ``cauchy:loc:scale``,
    ``t:loc:scale:df``, ``skewnormal:loc:scale:shape``. Gamma/beta/ig
    parameters at zero denote the matching improper limit.
    """
    cleaned = text.strip().lower()
    if not cleaned:
        raise ValidationError("prior spec is empty")
    if cleaned in _PRIOR_TAGS:
        return _PRIOR_TAGS[cleaned]()
    head, *parts = cleaned.split(":")
    if head == "gamma":
        a, b = _prior_numbers(text, parts, 2)
        return proper_prior(Gamma(a, b)) if a > 0 and b > 0 else improper_gamma_prior(a, b)
    if head == "beta":
        a, b = _prior_numbers(text, parts, 2)
        return proper_prior(Beta(a, b)) if a > 0 and b > 0 else improper_beta_prior(a, b)
    if head in ("ig", "inverse-gamma"):
        a, b = _prior_numbers(text, parts, 2)
        if a > 0 and b > 0:
            return proper_prior(InverseGamma(a, b))
        return improper_inverse_gamma_prior(a, b)
    if head == "normal":
        loc, sd = _prior_numbers(text, parts, 2)
        return proper_prior(Normal(loc, sd))
    if head == "uniform":
        lo, hi = _prior_numbers(text, parts, 2)
        return proper_prior(Uniform(lo, hi))
    if head == "cauchy":
        loc, scale = _prior_numbers(text, parts, 2)
        return proper_prior(Cauchy(loc, scale))
    if head == "t":
        loc, scale, df = _prior_numbers(text, parts, 3)
        return proper_prior(StudentT(loc, scale, df))
    if head == "skewnormal":
        loc, scale, shape = _prior_numbers(text, parts, 3)
        return proper_prior(SkewNormal(loc, scale, shape))
    raise ValidationError(f"prior spec {text!r}: unknown family {head!r}")


# ---------- experiment specification ----------


class ExperimentKind(Enum):
    POISSON_GRID = "PoissonGrid"
    BINOMIAL_GRID = "BinomialGrid"
    NORMAL_GRID = "NormalGrid"
    MOPESS_GRID = "MopessGrid"
    SKEW_NORMAL_DEMO = "SkewNormalDemo"
    BIOASSAY_DEMO = "BioassayDemo"


_GRID_KINDS = frozenset(
    {
        ExperimentKind.POISSON_GRID,
        ExperimentKind.BINOMIAL_GRID,
        ExperimentKind.NORMAL_GRID,
        ExperimentKind.MOPESS_GRID,
    }
)


def _kind_from_name(name: str) -> ExperimentKind:
    norm = re.sub(r"[-_\s]", "", name).lower()
    for kind in ExperimentKind:
        if re.sub(r"[-_\s]", "", kind.value).lower() == norm:
            return kind
    known = ", ".join(k.value for k in ExperimentKind)
    raise ValidationError(f"unknown experiment {name!r}; known: {known}")


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully-determined simulation request (grid, scale, and seeding)."""

    experiment: ExperimentKind
    theta_values: Tuple[float, ...] = ()
    n_values: Tuple[int, ...] = ()
    prior_pairs: Tuple[Tuple[str, str], ...] = ()
    replicates: int = 100
    posterior_draws: int = 5000
    root_seed: int = 0
    mopess_reps: int = 50
    mopess_cap: Optional[int] = None
    workers: int = 1
    paper_scale: bool = False

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValidationError(f"replicates must be >= 1, got {self.replicates}")
        if self.posterior_draws < 4:
            raise ValidationError(f"posterior_draws must be >= 4, got {self.posterior_draws}")
        if self.root_seed < 0:
            raise ValidationError(f"root_seed must be >= 0, got {self.root_seed}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        if self.mopess_reps < 1:
            raise ValidationError(f"mopess_reps must be >= 1, got {self.mopess_reps}")
        if self.mopess_cap is not None and self.mopess_cap < 1:
            raise ValidationError(f"mopess_cap must be >= 1, got {self.mopess_cap}")
        kind = self.experiment
        if kind in _GRID_KINDS:
            if not (self.theta_values and self.n_values and self.prior_pairs):
                raise ValidationError(
                    f"{kind.value} needs theta_values, n_values and prior_pairs"
                )
            for pair in self.prior_pairs:
                if len(pair) != 2:
                    raise ValidationError(f"prior pair must have two entries, got {pair!r}")
                parse_prior(pair[0])
                parse_prior(pair[1])
            for theta in self.theta_values:
                if kind is ExperimentKind.BINOMIAL_GRID:
                    if not 0.0 < theta < 1.0:
                        raise ValidationError(
                            f"binomial success probabilities must be in (0,1), got {theta}"
                        )
                elif theta <= 0.0:
                    raise ValidationError(f"true parameter values must be positive, got {theta}")
            floor = 3 if kind is ExperimentKind.NORMAL_GRID else 1
            for n in self.n_values:
                if n < floor or n != int(n):
                    raise ValidationError(f"sample sizes must be integers >= {floor}, got {n}")
        else:
            if self.theta_values or self.n_values or self.prior_pairs:
                raise ValidationError(
                    f"{kind.value} takes no grid values; its data and priors are fixed"
                )


_THIRD = 1.0 / 3.0
_SQRT5 = math.sqrt(5.0)

SKEW_DEMO_PRIORS: Tuple[str, ...] = (
    "flat",
    f"t:0:{math.pi ** 2 / 4!r}:0.5",
    "t:0:0.5:2",
    "t:0:0.92:1",
    f"normal:0:{_SQRT5!r}",
    f"skewnormal:0:{_SQRT5!r}:2",
)

BIOASSAY_PRIOR_SETTINGS: Tuple[Tuple[str, Optional[float]], ...] = (
    ("flat-plane", None),
    ("cauchy:0:2.5", 2.5),
    ("cauchy:0:5", 5.0),
    ("cauchy:0:10", 10.0),
)


def _poisson_default_pairs() -> Tuple[Tuple[str, str], ...]:
    pairs = []
    for a2 in (0.5, 1.5, 2.5, 3.5, 4.5):
        for b2 in (0.5, 1.5, 3.5, 4.5):
            pairs.append(("gamma:2.5:2.5", f"gamma:{a2}:{b2}"))
    return tuple(pairs)


def default_spec(
    kind: Union[ExperimentKind, str], paper_scale: bool = False, **overrides
) -> ExperimentSpec:
    """The standard grid/scale for an experiment, with optional overrides."""
    if isinstance(kind, str):
        kind = _kind_from_name(kind)
    base: Dict[str, object] = {
        "experiment": kind,
        "replicates": 1000 if paper_scale else 100,
        "posterior_draws": 10_000 if paper_scale else 5000,
        "paper_scale": paper_scale,
    }
    if kind is ExperimentKind.POISSON_GRID:
        base.update(
            theta_values=(1.0, 5.0, 20.0, 50.0),
            n_values=(10,),
            prior_pairs=_poisson_default_pairs(),
        )
    elif kind is ExperimentKind.BINOMIAL_GRID:
        base.update(
            theta_values=tuple(round(0.05 * i, 2) for i in range(1, 20)),
            n_values=(10, 50, 100, 200),
            prior_pairs=(
                (f"beta:{_THIRD!r}:{_THIRD!r}", "flat"),
                ("beta:0.5:0.5", "flat"),
                ("beta:0:0", "flat"),
            ),
        )
    elif kind is ExperimentKind.NORMAL_GRID:
        base.update(
            theta_values=(0.5, 1.0, 10.0, 100.0),
            n_values=(10, 50),
            prior_pairs=(
                ("ig:1:0", "jeffreys-var"),
                ("ig:1:1", "jeffreys-var"),
                ("ig:0.5:0.5", "jeffreys-var"),
                (f"ig:{_THIRD!r}:{_THIRD!r}", "jeffreys-var"),
            ),
        )
    elif kind is ExperimentKind.MOPESS_GRID:
        base.update(
            theta_values=(5.0,),
            n_values=(10,),
            prior_pairs=(("gamma:1:5", "flat"), ("gamma:2.5:2.5", "flat")),
            replicates=100 if paper_scale else 20,
            mopess_reps=100 if paper_scale else 50,
        )
    else:
        base["replicates"] = 1
    base.update(overrides)
    return ExperimentSpec(**base)  # type: ignore[arg-type]


# ---------- experiment files ----------

_LIST_SPLIT = re.compile(r"[,\s]+")


def _parse_scalar(key: str, value: str, line_no: int):
    try:
        if key in ("replicates", "posterior_draws", "root_seed", "mopess_reps", "workers"):
            return int(value)
        if key == "mopess_cap":
            return None if value.lower() in ("", "none") else int(value)
        if key == "paper_scale":
            if value.lower() in ("true", "yes", "1"):
                return True
            if value.lower() in ("false", "no", "0"):
                return False
            raise ValueError(value)
    except ValueError:
        raise ValidationError(f"line {line_no}: bad value {value!r} for {key}") from None
    raise AssertionError(key)


def parse_experiment_file(
    source: Union[str, Iterable[str]], paper_scale_override: Optional[bool] = None
) -> ExperimentSpec:
    """Parse a ``key = value`` experiment file into a spec.

    Lines starting with ``#`` (and blank lines) are skipped. Keys:
    ``experiment`` (required), ``theta_values``, ``n_values`` (comma- or
    space-separated lists), ``prior_pairs`` (pairs separated by ``;``,
    the two priors of a pair separated by ``|``), ``replicates``,
    ``posterior_draws``, ``root_seed``, ``mopess_reps``, ``mopess_cap``,
    ``workers``, ``paper_scale``. Unset keys take the experiment's
    defaults. ``source`` is file text or an iterable of lines.
    ``paper_scale_override``, when given, wins over the file's value.
    """
    lines = source.splitlines() if isinstance(source, str) else list(source)
    kind: Optional[ExperimentKind] = None
    overrides: Dict[str, object] = {}
    paper_scale = False
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {line_no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key == "out":
            key = "output"  # accepted and ignored here; the CLI owns file paths
        if key == "experiment":
            kind = _kind_from_name(value)
        elif key in ("theta_values", "n_values"):
            items = [s for s in _LIST_SPLIT.split(value) if s]
            if not items:
                raise ValidationError(f"line {line_no}: {key} must list at least one value")
            try:
                overrides[key] = (
                    tuple(float(s) for s in items)
                    if key == "theta_values"
                    else tuple(int(s) for s in items)
                )
            except ValueError:
                raise ValidationError(f"line {line_no}: bad number in {key}: {value!r}") from None
        elif key == "prior_pairs":
            pairs = []
            for chunk in value.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                halves = [h.strip() for h in chunk.split("|")]
                if len(halves) != 2 or not all(halves):
                    raise ValidationError(
                        f"line {line_no}: each prior pair must be 'prior | prior', got {chunk!r}"
                    )
                pairs.append((halves[0], halves[1]))
            if not pairs:
                raise ValidationError(f"line {line_no}: prior_pairs lists no pairs")
            overrides[key] = tuple(pairs)
        elif key in ("replicates", "posterior_draws", "root_seed", "mopess_reps",
                     "mopess_cap", "workers", "paper_scale"):
            parsed = _parse_scalar(key, value, line_no)
            if key == "paper_scale":
                paper_scale = bool(parsed)
            else:
                overrides[key] = parsed
        elif key == "output":
            continue
        else:
            raise ValidationError(f"line {line_no}: unknown key {key!r}")
    if kind is None:
        raise ValidationError("experiment file never sets 'experiment'")
    if paper_scale_override is not None:
        paper_scale = paper_scale_override
    return default_spec(kind, paper_scale=paper_scale, **overrides)


# ---------- seeding ----------


def child_seed(root: int, grid_index: int, replicate: int) -> Tuple[np.random.SeedSequence, int]:
    """Per-cell seed sequence plus a stable integer identifier for reports."""
    ss = np.random.SeedSequence(root, spawn_key=(grid_index, replicate))
    ident = int(ss.generate_state(1, np.uint64)[0])
    return ss, ident


# ---------- output tables ----------

SCHEMA_COMMENT = "# priorimpact-csv v1"

ROW_COLUMNS: Tuple[str, ...] = (
    "experiment",
    "theta",
    "n",
    "prior1",
    "prior2",
    "replicate",
    "seed",
    "wim",
    "lower",
    "upper",
    "exact",
    "neutrality1",
    "neutrality2",
    "mopess",
    "error",
)

DEMO_COLUMNS: Tuple[str, ...] = (
    "experiment",
    "quantity",
    "prior1",
    "prior2",
    "replicate",
    "seed",
    "wim",
    "wim_se",
    "error",
)

CLOUD_COLUMNS: Tuple[str, ...] = ("prior", "coordinate", "draw", "value")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _needs_quoting(text: str) -> bool:
    return any(ch in text for ch in (",", '"', "\n", "\r"))


def _csv_line(cells: Sequence[str]) -> str:
    out = []
    for cell in cells:
        if _needs_quoting(cell):
            cell = '"' + cell.replace('"', '""') + '"'
        out.append(cell)
    return ",".join(out)


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Serialize rows to the versioned CSV schema (17 significant digits)."""
    buf = io.StringIO()
    buf.write(SCHEMA_COMMENT + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(_csv_line([_format_cell(row.get(c)) for c in columns]) + "\n")
    return buf.getvalue()


def write_rows_csv(path: str, rows: Sequence[dict], columns: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows, columns))


def rows_to_json(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Serialize rows to a JSON array of objects, in column order."""
    shaped = [{c: row.get(c) for c in columns} for row in rows]
    return json.dumps(shaped, indent=2, allow_nan=False) + "\n"


# ---------- grid cells ----------


def _fast_conjugate_bounds(
    prior1: PriorSpec, prior2: PriorSpec, likelihood, post1: Posterior, post2: Posterior
) -> BoundsReport:
    """Kernel-weighted sandwich bounds, via the closed collapse when the
    conjugate density ratio is provably monotone (lower = upper = the
    posterior-mean gap), else by quadrature."""
    ratio = conjugate_prior_ratio(prior1, prior2, likelihood)
    if ratio.monotone is not Monotonicity.UNKNOWN:
        value = abs(post1.distribution.mean - post2.distribution.mean)
        return BoundsReport(lower=value, upper=value, exact=value, method=Method.CLOSED_FORM)
    return theorem1_bounds(post1, ratio)


def _neutrality_pair(post1: Posterior, post2: Posterior, mle_value: float) -> Tuple[float, float]:
    return (neutrality(post1, mle_value).value, neutrality(post2, mle_value).value)


def _base_row(kind: ExperimentKind, theta, n, pair, replicate: int, ident: int) -> dict:
    return {
        "experiment": kind.value,
        "theta": float(theta),
        "n": int(n),
        "prior1": pair[0],
        "prior2": pair[1],
        "replicate": replicate,
        "seed": ident,
        "error": "",
    }


def _binomial_variant(prior1: PriorSpec, prior2: PriorSpec, pair) -> Tuple[BinomialComparison, dict]:
    from .posterior import PriorKind

    if prior2.kind is not PriorKind.FLAT:
        raise ValidationError(
            f"binomial grid pairs compare a beta-family prior against 'flat', got {pair[1]!r}"
        )
    params = _pseudo_params(prior1, BinomialLikelihood(trials=1))
    if params == (0.5, 0.5):
        return BinomialComparison.JEFFREYS_VS_UNIFORM, {}
    if params == (0.0, 0.0):
        return BinomialComparison.HALDANE_VS_UNIFORM, {}
    return BinomialComparison.BETA_VS_UNIFORM, {"alpha": params[0], "beta": params[1]}


def _grid_cell(
    kind_name: str,
    pair: Tuple[str, str],
    theta: float,
    n: int,
    draws: int,
    mopess_reps: int,
    mopess_cap: Optional[int],
    root: int,
    grid_index: int,
    replicate: int,
) -> dict:
    kind = ExperimentKind(kind_name)
    ss, ident = child_seed(root, grid_index, replicate)
    rng = np.random.default_rng(ss)
    row = _base_row(kind, theta, n, pair, replicate, ident)
    prior1, prior2 = parse_prior(pair[0]), parse_prior(pair[1])
    wcfg = WimConfig(draws=draws, seed=ident, force_empirical=True)
    try:
        if kind is ExperimentKind.POISSON_GRID or kind is ExperimentKind.MOPESS_GRID:
            data = tuple(int(v) for v in rng.poisson(theta, n))
            lik = PoissonLikelihood()
            post1 = conjugate_update(BayesModel(lik, data, prior1))
            post2 = conjugate_update(BayesModel(lik, data, prior2))
            report = wim(post1, post2, wcfg)
            bounds = _fast_conjugate_bounds(prior1, prior2, lik, post1, post2)
            a1, b1 = _pseudo_params(prior1, lik)
            a2, b2 = _pseudo_params(prior2, lik)
            exact = poisson_gamma_exact(a1, b1, a2, b2, n, sum(data)).value
            mle_value = float(mle(BayesModel(lik, data, prior1)))
            row["neutrality1"], row["neutrality2"] = _neutrality_pair(post1, post2, mle_value)
            row.update(wim=report.wim, lower=bounds.lower, upper=bounds.upper, exact=exact)
            if kind is ExperimentKind.MOPESS_GRID:
                mop = mopess(
                    lik, data, prior1, prior2, L=mopess_cap, reps=mopess_reps, rng=rng
                )
                row["mopess"] = mop.mopess
        elif kind is ExperimentKind.BINOMIAL_GRID:
            x = int(rng.binomial(n, theta))
            lik = BinomialLikelihood(trials=n)
            variant, extra = _binomial_variant(prior1, prior2, pair)
            data = (x,)
            post1 = conjugate_update(BayesModel(lik, data, prior1))
            post2 = conjugate_update(BayesModel(lik, data, prior2))
            report = wim(post1, post2, wcfg)
            bounds = binomial_bounds(variant, n, x, **extra)
            mle_value = float(mle(BayesModel(lik, data, prior1)))
            row["neutrality1"], row["neutrality2"] = _neutrality_pair(post1, post2, mle_value)
            row.update(
                wim=report.wim, lower=bounds.lower, upper=bounds.upper, exact=bounds.exact
            )
        elif kind is ExperimentKind.NORMAL_GRID:
            data = tuple(float(v) for v in rng.normal(0.0, math.sqrt(theta), n))
            lik = NormalVarianceLikelihood(mean=0.0)
            sq_dev_sum = float(sum(v * v for v in data))
            post1 = conjugate_update(BayesModel(lik, data, prior1))
            post2 = conjugate_update(BayesModel(lik, data, prior2))
            report = wim(post1, post2, wcfg)
            shape, scale = _pseudo_params(prior1, lik)
            bounds = normal_ig_bounds(shape, scale, n, sq_dev_sum)
            mle_value = float(mle(BayesModel(lik, data, prior1)))
            row["neutrality1"], row["neutrality2"] = _neutrality_pair(post1, post2, mle_value)
            row.update(
                wim=report.wim, lower=bounds.lower, upper=bounds.upper, exact=bounds.exact
            )
        else:  # pragma: no cover - guarded by run_experiment dispatch
            raise ValidationError(f"{kind.value} has no grid cells")
    except PriorImpactError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _grid_tasks(spec: ExperimentSpec) -> List[tuple]:
    tasks = []
    grid_index = 0
    for pair in spec.prior_pairs:
        for theta in spec.theta_values:
            for n in spec.n_values:
                for replicate in range(spec.replicates):
                    tasks.append(
                        (
                            spec.experiment.value,
                            pair,
                            float(theta),
                            int(n),
                            spec.posterior_draws,
                            spec.mopess_reps,
                            spec.mopess_cap,
                            spec.root_seed,
                            grid_index,
                            replicate,
                        )
                    )
                grid_index += 1
    return tasks


def _run_grid(spec: ExperimentSpec) -> List[dict]:
    tasks = _grid_tasks(spec)
    if spec.workers == 1:
        return [_grid_cell(*task) for task in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers) as pool:
        chunk = max(1, len(tasks) // (spec.workers * 8))
        return list(pool.map(_star_cell, tasks, chunksize=chunk))


def _star_cell(task: tuple) -> dict:
    return _grid_cell(*task)


# ---------- demonstration runs ----------


def _mcmc_schedule(spec: ExperimentSpec, chains: int = 4) -> McmcConfig:
    if spec.paper_scale:
        return McmcConfig(chains=chains, seed=spec.root_seed)
    return McmcConfig(
        chains=chains, iterations=2500, burn_in=1000, thin=3, seed=spec.root_seed
    )


def _marginal_posterior(parent: Posterior, column: int, what: str) -> Posterior:
    pts = parent.draws.points[:, column]
    return Posterior(
        draws=EmpiricalMeasure(pts),
        provenance=f"{parent.provenance}|marginal={what}",
        diagnostics=parent.diagnostics,
    )


def _cloud_rows(prior_label: str, coordinates: Sequence[str], points: np.ndarray) -> List[dict]:
    rows = []
    for j, coord in enumerate(coordinates):
        col = points[:, j] if points.ndim == 2 else points
        rows.extend(
            {"prior": prior_label, "coordinate": coord, "draw": i, "value": float(v)}
            for i, v in enumerate(col)
        )
    return rows


def _run_skew_normal_demo(spec: ExperimentSpec) -> Tuple[List[dict], List[dict]]:
    data = skewed_demo_sample()
    mcfg = _mcmc_schedule(spec)
    fits = []
    for i, prior_text in enumerate(SKEW_DEMO_PRIORS):
        ss, _ = child_seed(spec.root_seed, i, 0)
        fits.append(fit_skew_normal(data, parse_prior(prior_text), mcfg, rng=ss))
    rows: List[dict] = []
    pair_index = 0
    for i in range(len(SKEW_DEMO_PRIORS)):
        for j in range(i + 1, len(SKEW_DEMO_PRIORS)):
            _, ident = child_seed(spec.root_seed, 100 + pair_index, 0)
            pair_index += 1
            report = wim(
                fits[i].shape_posterior,
                fits[j].shape_posterior,
                WimConfig(draws=spec.posterior_draws, seed=ident),
            )
            rows.append(
                {
                    "experiment": spec.experiment.value,
                    "quantity": "shape",
                    "prior1": SKEW_DEMO_PRIORS[i],
                    "prior2": SKEW_DEMO_PRIORS[j],
                    "replicate": 0,
                    "seed": ident,
                    "wim": report.wim,
                    "wim_se": report.wim_se,
                    "error": "",
                }
            )
    clouds: List[dict] = []
    for prior_text, fit in zip(SKEW_DEMO_PRIORS, fits):
        clouds.extend(
            _cloud_rows(
                prior_text,
                ("location", "log_scale", "shape"),
                fit.joint_posterior.draws.points,
            )
        )
    return rows, clouds


_BIOASSAY_QUANTITIES = ("joint", "intercept", "slope", "ld50")


def _run_bioassay_demo(spec: ExperimentSpec) -> Tuple[List[dict], List[dict]]:
    fixture = bioassay()
    mcfg = _mcmc_schedule(spec)
    fits = []
    for i, (_, scale) in enumerate(BIOASSAY_PRIOR_SETTINGS):
        ss, _ = child_seed(spec.root_seed, i, 0)
        fits.append(
            fit_logistic(
                fixture.log_doses,
                fixture.trials,
                fixture.deaths,
                slope_prior_scale=scale,
                cfg=mcfg,
                rng=ss,
            )
        )
    rows: List[dict] = []
    for pair_index, other in enumerate((1, 2, 3)):
        label1, _ = BIOASSAY_PRIOR_SETTINGS[0]
        label2, _ = BIOASSAY_PRIOR_SETTINGS[other]
        base, alt = fits[0], fits[other]
        for q_index, quantity in enumerate(_BIOASSAY_QUANTITIES):
            _, ident = child_seed(spec.root_seed, 100 + pair_index, q_index)
            if quantity == "joint":
                cfg = WimConfig(draws=spec.posterior_draws, seed=ident, se_splits=2)
                report = wim(base.joint_posterior, alt.joint_posterior, cfg)
            else:
                cfg = WimConfig(draws=spec.posterior_draws, seed=ident)
                if quantity == "ld50":
                    report = wim(base.ld50_posterior, alt.ld50_posterior, cfg)
                else:
                    col = 0 if quantity == "intercept" else 1
                    report = wim(
                        _marginal_posterior(base.joint_posterior, col, quantity),
                        _marginal_posterior(alt.joint_posterior, col, quantity),
                        cfg,
                    )
            rows.append(
                {
                    "experiment": spec.experiment.value,
                    "quantity": quantity,
                    "prior1": label1,
                    "prior2": label2,
                    "replicate": 0,
                    "seed": ident,
                    "wim": report.wim,
                    "wim_se": report.wim_se,
                    "error": "",
                }
            )
    clouds: List[dict] = []
    for (label, _), fit in zip(BIOASSAY_PRIOR_SETTINGS, fits):
        clouds.extend(
            _cloud_rows(label, ("intercept", "slope"), fit.joint_posterior.draws.points)
        )
        clouds.extend(_cloud_rows(label, ("ld50",), fit.ld50_posterior.draws.points[:, 0]))
    return rows, clouds


# ---------- dispatch ----------


@dataclass(frozen=True)
class ExperimentResult:
    """Rows from one experiment run, plus draw clouds for demonstration runs."""

    spec: ExperimentSpec
    rows: Tuple[dict, ...]
    columns: Tuple[str, ...]
    clouds: Tuple[dict, ...] = ()
    cloud_columns: Tuple[str, ...] = ()

    def to_csv(self) -> str:
        return rows_to_csv(self.rows, self.columns)

    def clouds_to_csv(self) -> str:
        return rows_to_csv(self.clouds, self.cloud_columns)

    def to_json(self) -> str:
        return rows_to_json(self.rows, self.columns)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Execute an experiment spec; deterministic for a fixed spec."""
    kind = spec.experiment
    if kind in _GRID_KINDS:
        rows = _run_grid(spec)
        return ExperimentResult(spec=spec, rows=tuple(rows), columns=ROW_COLUMNS)
    if kind is ExperimentKind.SKEW_NORMAL_DEMO:
        rows, clouds = _run_skew_normal_demo(spec)
    else:
        rows, clouds = _run_bioassay_demo(spec)
    return ExperimentResult(
        spec=spec,
        rows=tuple(rows),
        columns=DEMO_COLUMNS,
        clouds=tuple(clouds),
        cloud_columns=CLOUD_COLUMNS,
    )
