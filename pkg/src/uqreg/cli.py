"""Command-line front end.

Exit codes: 0 success, 1 a verdict or reproduction deviates from its
expectation, 2 usage or configuration error, 3 numeric or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .axioms import (
    DEFAULT_SEED,
    EXPECTED_SUMMARY,
    REPRO_IDS,
    load_catalog,
    reproduce_counterexample,
    run_suite,
)
from .config import RunConfig, SweepSpec, SyntheticEnsembleSpec, read_flat, seed_override
from .errors import ConfigError, UqregError, UsageError
from .figures import SWEEP_COLUMNS, TOY_COLUMNS, format_number, sweep_rows, toy_rows, write_csv
from .measures import ForceMonteCarlo, ForceQuadrature, PreferClosedForm, measure
from .numerics import RandomnessContract
from .second_order import describe

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

REPORT_COLUMNS = ("measure", "tu", "au", "eu", "tu_marginal", "estimator", "se_tu", "se_au", "se_eu", "additivity_gap")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _err(msg):
    print(f"uqreg: error: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# measure


def _policy(cfg: RunConfig):
    if cfg.estimator == "monte_carlo":
        return ForceMonteCarlo(cfg.mc_samples, RandomnessContract(cfg.seed))
    if cfg.estimator == "quadrature":
        return ForceQuadrature()
    return PreferClosedForm(fallback=ForceMonteCarlo(max(cfg.mc_samples, 1000), RandomnessContract(cfg.seed)))


def _reports(cfg: RunConfig):
    kinds = ("entropy", "variance") if cfg.measure == "both" else (cfg.measure,)
    out = []
    for k in kinds:
        kw = {}
        if k == "entropy" and cfg.marginal:
            kw = {"marginal_samples": cfg.mc_samples, "marginal_rng": RandomnessContract(cfg.seed).spawn(1)}
        out.append(measure(cfg.q, k, _policy(cfg), **kw))
    return out


def _fmt_human(v):
    return "-" if v is None else format_number(v)


def cmd_measure(args) -> int:
    cfg = RunConfig.from_mapping(read_flat(args.config))
    reports = _reports(cfg)
    if cfg.output == "json":
        for r in reports:
            print(json.dumps(r.to_record()))
    elif cfg.output == "csv":
        print(",".join(REPORT_COLUMNS))
        for r in reports:
            rec = r.to_record()
            cells = []
            for c in REPORT_COLUMNS:
                v = rec.get(c)
                cells.append("" if v is None else v if isinstance(v, str) else format_number(v))
            print(",".join(cells))
    else:
        print(describe(cfg.q))
        for r in reports:
            print(f"[{r.measure_kind}]")
            for c in ("tu", "au", "eu"):
                se = r.mc_standard_error.get(c)
                extra = f"  (se {format_number(se)})" if se is not None else ""
                print(f"  {c.upper()} = {format_number(r.get(c))}  [{r.estimator[c]}]{extra}")
            print(f"  additivity gap = {format_number(r.additivity_gap)}")
            if r.tu_marginal is not None:
                print(f"  H(Y) marginal = {format_number(r.tu_marginal)}  (se {format_number(r.tu_marginal_se)})")
            if r.diagnostics:
                print(f"  diagnostics: {', '.join(r.diagnostics)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# axioms


def cmd_axioms(args) -> int:
    catalog = load_catalog(args.catalog) if args.catalog else None
    seed = seed_override(DEFAULT_SEED)
    result = run_suite(catalog, args.measure, seed)
    expected_summary = EXPECTED_SUMMARY if catalog is None else None
    problems = result.mismatches(expected_summary)
    doc = {
        "seed": seed,
        "catalog": "default" if catalog is None else str(args.catalog),
        "measure": args.measure,
        "verdicts": [dict(name=n, expected=e, **v.to_record())
                     for n, v, e in zip(result.names, result.verdicts, result.expected)],
        "summary": [{"measure": m, "axiom": a, "status": s} for (m, a), s in sorted(result.summary.items())],
        "mismatches": problems,
    }
    text = json.dumps(doc, indent=2, allow_nan=True) + "\n"
    try:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        _err(f"cannot write {args.output}: {exc.strerror}")
        return EXIT_NUMERIC
    print(f"{'measure':9s} {'axiom':10s} status")
    for (m, a), s in sorted(result.summary.items()):
        print(f"{m:9s} {a:10s} {s}")
    for p in problems:
        print(f"MISMATCH {p}")
    return EXIT_MISMATCH if problems else EXIT_OK


# ---------------------------------------------------------------------------
# repro


def cmd_repro(args) -> int:
    ids = REPRO_IDS if args.id == "all" else (args.id,)
    if args.id != "all" and args.id not in REPRO_IDS:
        raise UsageError(f"unknown counterexample id {args.id!r}; expected one of {', '.join(REPRO_IDS)} or all")
    seed = seed_override(DEFAULT_SEED)
    ok = True
    for rid in ids:
        rep = reproduce_counterexample(rid, seed)
        ok &= rep.agree
        print(f"== {rid}: {'agree' if rep.agree else 'DISAGREE'}")
        print(f"  config: {json.dumps(rep.config, sort_keys=True)}")
        for row in rep.rows:
            flag = "ok" if row.agree else "MISMATCH"
            err = "tol" if row.oracle_method == "quadrature" else "se"
            print(f"  {row.quantity:20s} closed_form={format_number(row.closed_form):>14s} "
                  f"oracle={format_number(row.oracle):>14s} ({row.oracle_method}, {err} {format_number(row.oracle_error)}) {flag}")
        for k, v in rep.facts.items():
            print(f"  {k} = {str(v).lower()}")
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# toy / sweep


def _write(path, columns, rows) -> int:
    try:
        write_csv(path, columns, rows)
    except OSError as exc:
        _err(f"cannot write {path}: {exc.strerror}")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_toy(args) -> int:
    mapping = read_flat(args.config) if args.config else {}
    spec = SyntheticEnsembleSpec.from_mapping(mapping)
    return _write(args.output, TOY_COLUMNS, toy_rows(spec))


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_mapping(read_flat(args.config))
    return _write(args.output, SWEEP_COLUMNS, sweep_rows(spec))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uqreg", description="Uncertainty measures for exponential-family regression.")
    p.add_argument("--version", action="version", version=f"uqreg {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("measure", help="compute TU/AU/EU for a configured second-order law")
    s.add_argument("-c", "--config", required=True)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("axioms", help="run the axiom suite and write a verdict report (JSON)")
    s.add_argument("--catalog")
    s.add_argument("--measure", choices=("entropy", "variance", "both"), default="both")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_axioms)

    s = sub.add_parser("repro", help="reproduce a counterexample with oracle confirmation")
    s.add_argument("id", help=f"one of {', '.join(REPRO_IDS)}, or all")
    s.set_defaults(func=cmd_repro)

    s = sub.add_parser("toy", help="synthetic-ensemble table (CSV)")
    s.add_argument("-c", "--config")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_toy)

    s = sub.add_parser("sweep", help="closed-form parameter sweep (CSV)")
    s.add_argument("-c", "--config", required=True)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (ConfigError, UsageError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except UqregError as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except (ArithmeticError, ValueError) as exc:
        _err(f"numeric failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
