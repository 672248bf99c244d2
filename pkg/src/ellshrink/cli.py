"""Command-line front-end.

Subcommands::

    ellshrink risk <config> [overrides]   Monte Carlo risk study -> CSV
    ellshrink check --fn <spec> --p --N   condition reports for a shrinkage rule
    ellshrink identity [flags]            two-sided check of the moment identities
    ellshrink posterior --data --at       log posterior density at points

Exit codes: 0 success, 1 a checked condition/identity failed, 2 bad
usage or configuration, 3 runtime numeric failure.

Risk CSVs embed ``# seed=``, ``# config_sha256=`` and ``# version=``
comment lines ahead of the header, so every row is re-derivable; byte
output depends only on the effective config, never on ``--jobs``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys

import numpy as np

from . import __version__
from .conditions import (
    check_minimax_conditions,
    check_necessary_conditions,
    check_schwartz_integrability,
    reference_f_samples,
)
from .config import (
    ExperimentConfig,
    config_sha256,
    parse_config,
    split_list,
    theta_points,
)
from .estimators import parse_estimator
from .exceptions import (
    BadGridError,
    BadSpecError,
    ConfigError,
    DegenerateScatterError,
    DimensionMismatchError,
    DivergentMomentError,
    DofTooSmallError,
    InvalidParameterError,
    NotPositiveDefiniteError,
    TooFewSamplesError,
)
from .mixing import parse_mixing
from .posterior import MeanPosterior
from .risk import Scenario, mc_risk_suite, stein_identity_check
from .shrinkage import alam_thompson_shrinkage, constant_shrinkage
from .spd import spd_from_spec

_USAGE_ERRORS = (
    ConfigError,
    BadSpecError,
    BadGridError,
    DofTooSmallError,
    InvalidParameterError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    TooFewSamplesError,
    FileNotFoundError,
)
_RUNTIME_ERRORS = (
    DegenerateScatterError,
    DivergentMomentError,
    np.linalg.LinAlgError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellshrink",
        description="Monte Carlo risk studies for shrinkage mean estimators "
        "under elliptically contoured errors.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    risk = sub.add_parser("risk", help="run a risk study from a config file")
    risk.add_argument("config", help="path to a key = value config file")
    risk.add_argument("--p", type=int, help="override: dimension")
    risk.add_argument("--N", type=int, help="override: rows per dataset")
    risk.add_argument("--sigma", help="override: scale matrix spec")
    risk.add_argument("--theta", help="override: mean spec")
    risk.add_argument("--mixing", help="override: mixing measure spec")
    risk.add_argument("--estimators", help="override: comma-separated list")
    risk.add_argument("--reps", type=int, help="override: replicates")
    risk.add_argument("--seed", type=int, help="override: base seed")
    risk.add_argument("--compare", choices=["true", "false"],
                      help="override: paired-difference rows")
    risk.add_argument("--out", help="override: output CSV path")
    risk.add_argument("--jobs", type=int, default=1,
                      help="worker processes (output is identical for any value)")

    check = sub.add_parser(
        "check", help="condition reports for a shrinkage rule"
    )
    check.add_argument("--fn", required=True,
                       help="estimator spec (its shrinkage function is checked)")
    check.add_argument("--p", type=int, required=True)
    check.add_argument("--N", type=int, required=True)
    check.add_argument("--samples", type=int, default=20_000,
                       help="reference draws for the integrability check")
    check.add_argument("--seed", type=int, default=0,
                       help="seed for the reference draws")
    check.add_argument("--format", choices=["text", "csv"], default="text")

    ident = sub.add_parser(
        "identity", help="Monte Carlo check of the two moment identities"
    )
    ident.add_argument("--p", type=int, default=5)
    ident.add_argument("--dof", type=int, default=19,
                       help="Wishart degrees of freedom n")
    ident.add_argument("--alpha", type=float, default=0.05,
                       help="covariance scale of the normal draw")
    ident.add_argument("--beta", type=float, default=1.0,
                       help="scale multiplier of the Wishart draw")
    ident.add_argument("--theta-norm", type=float, default=0.0,
                       help="mean norm along the first axis")
    ident.add_argument("--fn", default="at,c=1",
                       help="shrinkage family: at,c=<c> (with N = dof+1) or "
                       "const,k=<k>")
    ident.add_argument("--sigma", default="identity")
    ident.add_argument("--reps", type=int, default=200_000)
    ident.add_argument("--seed", type=int, default=0)
    ident.add_argument("--jobs", type=int, default=1)
    ident.add_argument("--perturb", type=float, default=1.0,
                       help="multiply the right-hand constants (failure-injection "
                       "test hook)")

    post = sub.add_parser("posterior", help="log posterior density of the mean")
    post.add_argument("--data", required=True,
                      help="dataset CSV: N rows, p comma-separated columns")
    post.add_argument("--at", action="append", required=True,
                      help="evaluation point x1,x2,...  (repeatable)")
    return parser


def _run_risk(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as err:
        raise ConfigError(f"cannot read config {args.config!r}: {err}") from err
    overrides = {}
    for attr, key in (
        ("p", "dim"), ("N", "n_obs"), ("sigma", "sigma_spec"),
        ("theta", "theta_spec"), ("mixing", "mixing_spec"),
        ("reps", "reps"), ("seed", "seed"), ("out", "out"),
    ):
        value = getattr(args, attr)
        if value is not None:
            overrides[key] = value
    if args.estimators is not None:
        overrides["estimator_specs"] = tuple(split_list(args.estimators))
    if args.compare is not None:
        overrides["compare"] = args.compare == "true"
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    if cfg.reps < 100:
        raise ConfigError(f"reps must be >= 100, got {cfg.reps}")

    sigma = spd_from_spec(cfg.sigma_spec, cfg.dim)
    mixing = parse_mixing(cfg.mixing_spec)
    estimators = [parse_estimator(s) for s in cfg.estimator_specs]
    thetas = theta_points(cfg.theta_spec, cfg.dim)

    estimate_rows = []
    pair_rows = []
    for theta in thetas:
        scenario = Scenario(cfg.n_obs, sigma, theta, mixing)
        suite = mc_risk_suite(
            scenario, estimators, cfg.reps, cfg.seed,
            n_jobs=args.jobs, include_pairs=cfg.compare,
        )
        estimate_rows.extend((scenario, est) for est in suite[: len(estimators)])
        pair_rows.extend((scenario, est) for est in suite[len(estimators):])

    if cfg.out is None:
        _write_csv(sys.stdout, cfg, estimate_rows + pair_rows)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            _write_csv(fh, cfg, estimate_rows + pair_rows)
    return 0


def _write_csv(fh, cfg: ExperimentConfig, rows):
    fh.write(f"# seed={cfg.seed}\n")
    fh.write(f"# config_sha256={config_sha256(cfg)}\n")
    fh.write(f"# version={__version__}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(
        ["scenario", "estimator", "p", "N", "mixing", "theta_norm",
         "reps", "seed", "risk", "std_error"]
    )
    for scenario, est in rows:
        writer.writerow(
            [
                est.scenario,
                est.estimator,
                scenario.dim,
                scenario.n_obs,
                scenario.mixing.label,
                f"{scenario.theta_norm:.17g}",
                est.reps,
                est.seed,
                f"{est.value:.17g}",
                f"{est.std_error:.17g}",
            ]
        )


def _shrinkage_for(fn_spec: str, p: int, n_obs: int):
    estimator = parse_estimator(fn_spec)
    rule = estimator.bind(p, n_obs)
    if rule.shrinkage is None:
        return constant_shrinkage(0.0)
    return rule.shrinkage


def _run_check(args) -> int:
    r = _shrinkage_for(args.fn, args.p, args.N)
    samples = reference_f_samples(args.p, args.N, args.samples, args.seed)
    reports = [
        check_minimax_conditions(r, args.p, args.N),
        check_necessary_conditions(r, args.p, args.N),
        check_schwartz_integrability(r, samples),
    ]
    for report in reports:
        if args.format == "csv":
            sys.stdout.write(report.as_csv())
        else:
            print(report.as_text())
            print()
    return 1 if any(rep.has_fail for rep in reports) else 0


def _parse_identity_fn(spec: str, p: int, dof: int):
    family, _, param = spec.strip().partition(",")
    key, eq, raw = param.partition("=")
    try:
        value = float(raw) if eq else None
    except ValueError as err:
        raise BadSpecError(f"bad parameter in {spec!r}") from err
    if family == "at" and key == "c" and value is not None:
        # the family's sample-size parameter is taken as dof + 1
        return alam_thompson_shrinkage(p, dof + 1, value)
    if family == "const" and key == "k" and value is not None:
        return constant_shrinkage(value)
    raise BadSpecError(
        f"unknown shrinkage spec {spec!r} (want at,c=<c> or const,k=<k>)"
    )


def _run_identity(args) -> int:
    sigma = spd_from_spec(args.sigma, args.p)
    r = _parse_identity_fn(args.fn, args.p, args.dof)
    theta = np.zeros(args.p)
    theta[0] = args.theta_norm
    report = stein_identity_check(
        args.alpha, args.beta, args.dof, theta, sigma, r,
        args.reps, args.seed, rhs_scale=args.perturb, n_jobs=args.jobs,
    )
    for ide in (report.cross_term, report.quadratic):
        status = "pass" if ide.passed else "FAIL"
        print(
            f"{ide.name:10s} lhs={ide.lhs:.6e} (se {ide.lhs_se:.2e})  "
            f"rhs={ide.rhs:.6e} (se {ide.rhs_se:.2e})  "
            f"gap={ide.gap:+.3e} tol={ide.tolerance:.3e}  {status}"
        )
    print(f"overall: {'pass' if report.passed else 'FAIL'} "
          f"(reps={report.reps}, seed={report.seed})")
    return 0 if report.passed else 1


def _run_posterior(args) -> int:
    try:
        rows = np.loadtxt(args.data, delimiter=",", ndmin=2)
    except OSError as err:
        raise BadSpecError(f"cannot read data {args.data!r}: {err}") from err
    except ValueError as err:
        raise BadSpecError(f"bad data file {args.data!r}: {err}") from err
    post = MeanPosterior.from_data(rows)
    for spec in args.at:
        try:
            point = np.array([float(tok) for tok in spec.split(",")])
        except ValueError as err:
            raise BadSpecError(f"bad point {spec!r}") from err
        print(f"{post.logpdf(point):.17g}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "risk": _run_risk,
        "check": _run_check,
        "identity": _run_identity,
        "posterior": _run_posterior,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        where = f" (line {err.line})" if err.line is not None else ""
        print(f"ellshrink: config error{where}: {err}", file=sys.stderr)
        return 2
    except _USAGE_ERRORS as err:
        print(f"ellshrink: {err}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as err:
        print(f"ellshrink: runtime failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
