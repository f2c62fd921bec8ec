"""Command-line interface.

Subcommands::

    compare     distance between the posteriors from two priors on one dataset
    bounds      sandwich bounds from summary statistics (no raw data needed)
    neutrality  posterior mass below the maximum-likelihood estimate
    mopess      signed effective-sample-size impact of one prior over another
    simulate    run a seeded experiment grid from a spec file, emit rows
    bootstrap   distance recomputed over data resamples
    demo        fit the bundled sampler examples, emit pairwise distances

Exit codes: 0 success, 2 input/validation problem, 3 numeric failure.
Every command is deterministic given its ``--seed``: rerunning with the
same flags yields byte-identical output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional, Sequence, Tuple

from .bounds import (
    BoundsReport,
    binomial_bounds,
    conjugate_prior_ratio,
    normal_ig_bounds,
    poisson_gamma_exact,
    theorem1_bounds,
)
from .distributions import Gamma, InverseGamma
from .errors import PriorImpactError, SamplerError, ValidationError
from .experiments import (
    CLOUD_COLUMNS,
    DEMO_COLUMNS,
    ExperimentKind,
    _fast_conjugate_bounds,
    default_spec,
    parse_experiment_file,
    parse_prior,
    rows_to_csv,
    rows_to_json,
    run_experiment,
)
from .impact import WimConfig, bootstrap_wim, mle, neutrality, wim, with_companions
from .posterior import (
    BayesModel,
    BinomialLikelihood,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    Posterior,
    PriorKind,
    _pseudo_params,
    conjugate_update,
)

__all__ = ["main", "read_dataset", "parse_model"]


# ---------- ingestion ----------


def read_dataset(path: str) -> Tuple[float, ...]:
    """Read one observation per line; '#' starts a comment; an optional
    non-numeric header line is allowed at the top."""
    values = []
    header_allowed = True
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                if header_allowed:
                    header_allowed = False
                    continue
                raise ValidationError(
                    f"{path}: line {line_no}: {line!r} is not a number"
                ) from None
            header_allowed = False
    if not values:
        raise ValidationError(f"{path}: no observations found")
    return tuple(values)


def parse_model(text: str):
    """Parse a model expression: ``poisson``, ``binomial:<trials>``, or
    ``normal-variance:<known-mean>``."""
    parts = text.strip().lower().split(":")
    head = parts[0]
    try:
        if head == "poisson" and len(parts) == 1:
            return PoissonLikelihood()
        if head == "binomial" and len(parts) == 2:
            return BinomialLikelihood(trials=int(parts[1]))
        if head in ("normal-variance", "normalvar") and len(parts) == 2:
            return NormalVarianceLikelihood(mean=float(parts[1]))
    except ValueError:
        raise ValidationError(f"model {text!r}: bad numeric parameter") from None
    raise ValidationError(
        f"model {text!r}: expected poisson, binomial:<trials>, or normal-variance:<mean>"
    )


# ---------- output helpers ----------


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_output(args, rows: Sequence[dict], columns: Sequence[str]) -> None:
    """Write rows to --out (or stdout) in the chosen --format."""
    text = (
        rows_to_json(rows, columns)
        if args.format == "json"
        else rows_to_csv(rows, columns)
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_lines(report) -> list:
    lines = [f"wim: {_fmt(report.wim)}"]
    if report.wim_se is not None:
        lines.append(f"wim_se: {_fmt(report.wim_se)}")
    lines.append(f"method: {report.config.get('method', '-')}")
    lines.append(f"order: {_fmt(report.config.get('order'))}")
    lines.append(f"seed: {_fmt(report.config.get('seed'))}")
    lines.append(f"draws: {_fmt(report.config.get('draws'))}")
    if report.bounds is not None:
        b = report.bounds
        lines.append(
            f"bounds: lower={_fmt(b.lower)} upper={_fmt(b.upper)} exact={_fmt(b.exact)}"
        )
    if report.exact_gap is not None:
        lines.append(f"exact_gap: {_fmt(report.exact_gap)}")
    if report.neutrality is not None:
        lines.append(
            f"neutrality: prior1={_fmt(report.neutrality[0])} prior2={_fmt(report.neutrality[1])}"
        )
    return lines


def _report_row(report) -> dict:
    b = report.bounds
    n = report.neutrality
    return {
        "wim": report.wim,
        "wim_se": report.wim_se,
        "lower": None if b is None else b.lower,
        "upper": None if b is None else b.upper,
        "exact": None if b is None else b.exact,
        "neutrality1": None if n is None else n[0],
        "neutrality2": None if n is None else n[1],
        "method": report.config.get("method"),
        "order": report.config.get("order"),
        "seed": report.config.get("seed"),
        "draws": report.config.get("draws"),
    }


_REPORT_COLUMNS = (
    "wim",
    "wim_se",
    "lower",
    "upper",
    "exact",
    "neutrality1",
    "neutrality2",
    "method",
    "order",
    "seed",
    "draws",
)


# ---------- subcommands ----------


def cmd_compare(args) -> int:
    lik = parse_model(args.model)
    data = read_dataset(args.dataset)
    prior1, prior2 = parse_prior(args.prior1), parse_prior(args.prior2)
    post1 = conjugate_update(BayesModel(lik, data, prior1))
    post2 = conjugate_update(BayesModel(lik, data, prior2))
    cfg = WimConfig(draws=args.draws, seed=_seed(args), force_empirical=args.empirical)
    report = wim(post1, post2, cfg)
    bounds_rep = None
    try:
        bounds_rep = _fast_conjugate_bounds(prior1, prior2, lik, post1, post2)
    except PriorImpactError:
        pass  # bounds stay optional when no ratio is available for the pair
    mle_value = float(mle(BayesModel(lik, data, prior1)))
    pair = (neutrality(post1, mle_value).value, neutrality(post2, mle_value).value)
    report = with_companions(report, neutrality_pair=pair, bounds=bounds_rep)
    print("\n".join(_report_lines(report)))
    if args.out:
        _write_output(args, [_report_row(report)], _REPORT_COLUMNS)
    return 0


def _closed_or_theorem_bounds(args, lik, prior1, prior2):
    """Closed-form bounds when this (model, prior pair) has them, else the
    kernel-weighted quadrature route. Returns (report, extra text lines)."""
    if isinstance(lik, PoissonLikelihood):
        if args.n is None or args.total is None:
            raise ValidationError("poisson bounds need --n and --total")
        a1, b1 = _pseudo_params(prior1, lik)
        a2, b2 = _pseudo_params(prior2, lik)
        res = poisson_gamma_exact(a1, b1, a2, b2, args.n, args.total)
        extra = [
            f"formula_value: {_fmt(res.value)}",
            f"formula_guaranteed_exact: {str(res.guaranteed_exact).lower()}",
        ]
        if res.guaranteed_exact:
            return (
                BoundsReport(lower=res.value, upper=res.value, exact=res.value),
                extra,
            )
        post1 = Posterior(distribution=Gamma(a1 + args.total, b1 + args.n))
        ratio = conjugate_prior_ratio(prior1, prior2, lik)
        return theorem1_bounds(post1, ratio), extra
    if isinstance(lik, BinomialLikelihood):
        if args.successes is None:
            raise ValidationError("binomial bounds need --successes")
        from .experiments import _binomial_variant

        variant, extra_kwargs = _binomial_variant(prior1, prior2, (args.prior1, args.prior2))
        return binomial_bounds(variant, lik.trials, args.successes, **extra_kwargs), []
    # normal variance
    if args.n is None or args.sq_dev_sum is None:
        raise ValidationError("normal-variance bounds need --n and --sq-dev-sum")
    shape, scale = _pseudo_params(prior1, lik)
    if prior2.kind is PriorKind.JEFFREYS_VARIANCE and shape >= 0 and scale >= 0:
        return normal_ig_bounds(shape, scale, args.n, args.sq_dev_sum), []
    post1 = Posterior(
        distribution=InverseGamma(shape + args.n / 2.0, scale + args.sq_dev_sum / 2.0)
    )
    ratio = conjugate_prior_ratio(prior1, prior2, lik)
    return theorem1_bounds(post1, ratio), []


def cmd_bounds(args) -> int:
    lik = parse_model(args.model)
    prior1, prior2 = parse_prior(args.prior1), parse_prior(args.prior2)
    report, extra = _closed_or_theorem_bounds(args, lik, prior1, prior2)
    lines = [
        f"lower: {_fmt(report.lower)}",
        f"upper: {_fmt(report.upper)}",
        f"exact: {_fmt(report.exact)}",
        f"method: {report.method.value}",
    ] + extra
    print("\n".join(lines))
    if args.out:
        row = {
            "lower": report.lower,
            "upper": report.upper,
            "exact": report.exact,
            "method": report.method.value,
        }
        _write_output(args, [row], ("lower", "upper", "exact", "method"))
    return 0


def cmd_neutrality(args) -> int:
    lik = parse_model(args.model)
    data = read_dataset(args.dataset)
    prior = parse_prior(args.prior)
    post = conjugate_update(BayesModel(lik, data, prior))
    mle_value = float(mle(BayesModel(lik, data, prior)))
    result = neutrality(post, mle_value)
    print(f"neutrality: {_fmt(result.value)}")
    print(f"degenerate: {str(result.degenerate).lower()}")
    print(f"mle: {_fmt(mle_value)}")
    if args.out:
        row = {"neutrality": result.value, "degenerate": result.degenerate, "mle": mle_value}
        _write_output(args, [row], ("neutrality", "degenerate", "mle"))
    return 0


def cmd_mopess(args) -> int:
    from .impact import mopess as run_mopess

    lik = parse_model(args.model)
    data = read_dataset(args.dataset)
    prior_interest = parse_prior(args.prior)
    prior_base = parse_prior(args.base_prior)
    rep = run_mopess(
        lik,
        data,
        prior_interest,
        prior_base,
        L=args.cap,
        reps=args.replicates if args.replicates is not None else 100,
        rng=_seed(args),
    )
    print(f"mopess: {_fmt(rep.mopess)}")
    print(f"band: [{_fmt(rep.quantile_band[0])}, {_fmt(rep.quantile_band[1])}]")
    print(f"cap: {rep.L}")
    print(f"replicates: {rep.reps}")
    if args.out:
        rows = [
            {"replicate": i, "signed_draw": float(v)} for i, v in enumerate(rep.opess_draws)
        ]
        _write_output(args, rows, ("replicate", "signed_draw"))
    return 0


def cmd_simulate(args) -> int:
    try:
        with open(args.spec_file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read spec file: {exc}") from None
    spec = parse_experiment_file(text, paper_scale_override=True if args.paper_scale else None)
    updates = {}
    if args.seed is not None:
        updates["root_seed"] = args.seed
    if args.replicates is not None:
        updates["replicates"] = args.replicates
    if args.draws is not None:
        updates["posterior_draws"] = args.draws
    if args.workers is not None:
        updates["workers"] = args.workers
    if updates:
        spec = dataclasses.replace(spec, **updates)
    result = run_experiment(spec)
    _write_output(args, result.rows, result.columns)
    if result.clouds and args.out:
        stem, ext = os.path.splitext(args.out)
        with open(f"{stem}-clouds{ext or '.csv'}", "w", encoding="utf-8", newline="") as fh:
            fh.write(result.clouds_to_csv())
    return 0


def cmd_bootstrap(args) -> int:
    lik = parse_model(args.model)
    data = read_dataset(args.dataset)
    prior1, prior2 = parse_prior(args.prior1), parse_prior(args.prior2)
    if args.resamples < 1:
        raise ValidationError(f"--resamples must be >= 1, got {args.resamples}")
    cfg = WimConfig(draws=args.draws, seed=_seed(args))
    result = bootstrap_wim(
        data, lik, prior1, prior2, B=args.resamples, rng=_seed(args), cfg=cfg
    )
    rows = [{"replicate": i, "wim": v} for i, v in enumerate(result.values)]
    summary = [
        f"# median = {_fmt(result.median)}",
        f"# interval_2.5 = {_fmt(result.interval[0])}",
        f"# interval_97.5 = {_fmt(result.interval[1])}",
        f"# excluded = {result.excluded}",
        f"# requested = {result.requested}",
    ]
    if args.format == "json":
        payload = {
            "values": list(result.values),
            "median": result.median,
            "interval": list(result.interval),
            "excluded": result.excluded,
            "requested": result.requested,
        }
        text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    else:
        text = rows_to_csv(rows, ("replicate", "wim")) + "\n".join(summary) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_DEMO_NAMES = {
    "skewnormal": ExperimentKind.SKEW_NORMAL_DEMO,
    "bioassay": ExperimentKind.BIOASSAY_DEMO,
}


def cmd_demo(args) -> int:
    kind = _DEMO_NAMES[args.name]
    overrides = {}
    if args.seed is not None:
        overrides["root_seed"] = args.seed
    if args.draws is not None:
        overrides["posterior_draws"] = args.draws
    spec = default_spec(kind, paper_scale=args.paper_scale, **overrides)
    try:
        result = run_experiment(spec)
    except SamplerError as exc:
        print(f"sampler failure: {exc}", file=sys.stderr)
        if exc.diagnostics:
            for key, value in exc.diagnostics.items():
                print(f"  {key}: {value}", file=sys.stderr)
        raise
    _write_output(args, result.rows, DEMO_COLUMNS)
    if args.out:
        stem, ext = os.path.splitext(args.out)
        with open(f"{stem}-clouds{ext or '.csv'}", "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(result.clouds, CLOUD_COLUMNS))
    elif result.clouds:
        print("note: posterior clouds are written only with --out", file=sys.stderr)
    return 0


# ---------- parser ----------


def _add_common(sub, *, draws_default: Optional[int] = None) -> None:
    sub.add_argument(
        "--seed",
        type=int,
        default=None,
        help="root random seed (default 0; for simulate, the spec file's root_seed)",
    )
    sub.add_argument(
        "--draws", type=int, default=draws_default, help="posterior draw count"
    )
    sub.add_argument("--replicates", type=int, default=None, help="replicate count")
    sub.add_argument("--out", type=str, default=None, help="output file path")
    sub.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="file output format"
    )
    sub.add_argument(
        "--paper-scale",
        action="store_true",
        help="full-size replicate/draw/chain schedule instead of the quick default",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="priorimpact",
        description="Quantify how much a prior choice moves a Bayesian posterior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="distance between two priors' posteriors")
    p.add_argument("dataset", help="data file: one observation per line")
    p.add_argument("--model", required=True, help="poisson | binomial:<trials> | normal-variance:<mean>")
    p.add_argument("--prior1", required=True, help="first prior, e.g. gamma:2.5:2.5")
    p.add_argument("--prior2", required=True, help="second prior, e.g. flat")
    p.add_argument(
        "--empirical",
        action="store_true",
        help="use the coupled draw-based estimate instead of the deterministic quadrature",
    )
    _add_common(p, draws_default=10_000)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bounds", help="sandwich bounds from summary statistics")
    p.add_argument("--model", required=True)
    p.add_argument("--prior1", required=True)
    p.add_argument("--prior2", required=True)
    p.add_argument("--n", type=int, default=None, help="sample size (trials for binomial)")
    p.add_argument("--total", type=int, default=None, help="sum of counts (poisson)")
    p.add_argument("--successes", type=int, default=None, help="success count (binomial)")
    p.add_argument(
        "--sq-dev-sum",
        type=float,
        default=None,
        help="sum of squared deviations from the known mean (normal-variance)",
    )
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("neutrality", help="posterior mass below the MLE")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--prior", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_neutrality)

    p = sub.add_parser("mopess", help="signed effective-sample-size impact")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--prior", required=True, help="prior of interest")
    p.add_argument("--base-prior", required=True, help="baseline prior")
    p.add_argument("--cap", type=int, default=None, help="augmentation cap (default 2n)")
    _add_common(p)
    p.set_defaults(func=cmd_mopess)

    p = sub.add_parser("simulate", help="run an experiment grid from a spec file")
    p.add_argument("spec_file")
    p.add_argument("--workers", type=int, default=None, help="worker process count")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bootstrap", help="distance over data resamples")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--prior1", required=True)
    p.add_argument("--prior2", required=True)
    p.add_argument("--resamples", type=int, default=250, help="number of resamples (default 250)")
    _add_common(p, draws_default=10_000)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("demo", help="bundled sampler demonstrations")
    p.add_argument("name", choices=sorted(_DEMO_NAMES))
    _add_common(p)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PriorImpactError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # keep the exit-code contract: nothing but 0/2/3
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
