"""Command-line interface.

Exit codes: 0 ok, 1 usage, 2 input/parse, 3 undefined posterior,
4 audit found inconsistency, 5 fit error. Every error writes one
``error:<category>: message`` line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .evaluation import evaluate
from .grid import (
    DEFAULT_TOLERANCE,
    GridError,
    OutcomePolicy,
    diff_grid,
    load_published_grid,
    parse_grid,
    prediction_grid,
    render_grid,
)
from .ingest import (
    ParseError,
    aggregate,
    audit_consistency,
    iter_rows,
    load_training_tables,
    parse_records,
    parse_tables,
)
from .model import REPLICATION_POLICY, FitError, dumps_model, fit, loads_model, posterior
from .schema import (
    ClassTotalsPolicy,
    Explicit,
    InputError,
    MarginalTableSet,
    PerAttribute,
    Profile,
    Reference,
    SchemaError,
    SmoothingConfig,
)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_UNDEFINED, EXIT_AUDIT, EXIT_FIT = range(6)


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        super().__init__(message)
        self.category = category
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", f"{self.prog}: {message}", EXIT_USAGE)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from None


def _parse_policy(spec: str, tables: MarginalTableSet) -> ClassTotalsPolicy:
    kind, _, arg = spec.partition(":")
    if kind == "per-attribute":
        source = arg or tables.schema.names[0]
        policy: ClassTotalsPolicy = PerAttribute(source)
        named = source
    elif kind == "reference" and arg:
        policy = Reference(arg)
        named = arg
    elif kind == "explicit" and arg:
        return _explicit_policy(arg, tables)
    else:
        raise CliError(
            "usage",
            f"bad --policy {spec!r}; use per-attribute[:ATTR], reference:ATTR or explicit:FILE",
            EXIT_USAGE,
        )
    if not tables.schema.has(named):
        raise CliError("input", f"policy names unknown attribute {named!r}", EXIT_INPUT)
    return policy


def _explicit_policy(path: str, tables: MarginalTableSet) -> Explicit:
    """File format: header `class,total`, one row per class label."""
    rows = iter(iter_rows(_read(path)))
    header = next(rows, (0, []))[1]
    if header != ["class", "total"]:
        raise ParseError(f"{path}: header must be class,total", 1)
    totals: dict[str, int] = {}
    for lineno, cells in rows:
        if len(cells) != 2 or not cells[1].isdigit():
            raise ParseError(f"{path}: expected class,total with a non-negative integer", lineno)
        if cells[0] in totals:
            raise ParseError(f"{path}: duplicate class {cells[0]!r}", lineno)
        totals[cells[0]] = int(cells[1])
    if set(totals) != set(tables.classes.labels):
        raise CliError(
            "input", f"{path}: classes {sorted(totals)} do not match {list(tables.classes)}", EXIT_INPUT
        )
    ordered = tuple(totals[c] for c in tables.classes)
    return Explicit(ordered, sum(ordered))


def _load_model(path: str):
    return loads_model(_read(path))


def _outcome(args) -> OutcomePolicy:
    performer = frozenset(c.strip() for c in args.performer.split(",") if c.strip())
    try:
        return OutcomePolicy(performer, args.risk_class, args.risk_threshold)
    except SchemaError as exc:
        raise CliError("usage", str(exc), EXIT_USAGE) from None


def cmd_fit(args, out) -> int:
    if args.replicate_paper:
        if args.tables or args.records or args.policy or args.alpha is not None:
            raise CliError("usage", "--replicate-paper takes no data or policy flags", EXIT_USAGE)
        tables, policy, smoothing = load_training_tables(), REPLICATION_POLICY, SmoothingConfig()
    else:
        if args.tables:
            tables = parse_tables(_read(args.tables))
        elif args.records:
            tables = aggregate(parse_records(_read(args.records)))
        else:
            raise CliError("usage", "fit needs --tables, --records or --replicate-paper", EXIT_USAGE)
        policy = _parse_policy(args.policy or "per-attribute", tables)
        try:
            smoothing = SmoothingConfig(args.alpha or "0")
        except (ValueError, ZeroDivisionError) as exc:
            raise CliError("usage", f"bad --alpha: {exc}", EXIT_USAGE) from None
    text = dumps_model(fit(tables, policy, smoothing))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_predict(args, out) -> int:
    model = _load_model(args.model)
    assignments: dict[str, str] = {}
    for item in args.set or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise CliError("usage", f"--set expects ATTR=VALUE, got {item!r}", EXIT_USAGE)
        if name.strip() in assignments:
            raise CliError("usage", f"attribute {name.strip()!r} set twice", EXIT_USAGE)
        assignments[name.strip()] = value.strip()
    res = posterior(model, Profile.of(assignments))
    if not res.scores_defined:
        raise CliError("undefined", "every class has zero probability for this profile", EXIT_UNDEFINED)
    for label, p in zip(res.classes, res.per_class):
        out.write(f"{label}\t{p:.6f}\n")
    out.write(f"predicted\t{res.predicted}\t{res.probability:.6f}\n")
    out.write(f"tie\t{'true' if res.tie else 'false'}\n")
    return EXIT_OK


def cmd_grid(args, out) -> int:
    if args.replicate_paper:
        if args.model:
            raise CliError("usage", "--replicate-paper and --model are exclusive", EXIT_USAGE)
        model = fit(load_training_tables(), REPLICATION_POLICY, SmoothingConfig())
    elif args.model:
        model = _load_model(args.model)
    else:
        raise CliError("usage", "grid needs --model or --replicate-paper", EXIT_USAGE)
    outcome = _outcome(args)
    try:
        outcome.check(model.classes)
    except SchemaError as exc:
        raise CliError("usage", str(exc), EXIT_USAGE) from None
    rows = prediction_grid(model, outcome)
    out.write(render_grid(rows, args.format, model.schema.names))
    if args.diff is not None:
        reference = load_published_grid() if args.diff == "published" else parse_grid(_read(args.diff))
        found = diff_grid(rows, reference, args.tolerance)
        out.write(f"\ndiscrepancies: {len(found)} of {len(reference)} reference rows "
                  f"(tolerance {args.tolerance:g})\n")
        for d in found:
            out.write(f"  {d.describe()}\n")
    return EXIT_OK


def cmd_audit(args, out) -> int:
    if args.replicate_paper == bool(args.tables):
        raise CliError("usage", "audit needs exactly one of --tables or --replicate-paper", EXIT_USAGE)
    tables = load_training_tables() if args.replicate_paper else parse_tables(_read(args.tables))
    report = audit_consistency(tables)
    out.write(report.render())
    if not report.is_consistent:
        raise CliError("audit", "marginal tables are inconsistent", EXIT_AUDIT)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    model = _load_model(args.model)
    dataset = parse_records(_read(args.records), model.schema, model.classes)
    out.write(evaluate(model, dataset).to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="perfbayes", description="Categorical naive Bayes over marginal count tables.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", help="fit a model and write it as JSON")
    src = f.add_mutually_exclusive_group()
    src.add_argument("--tables", metavar="FILE")
    src.add_argument("--records", metavar="FILE")
    f.add_argument("--policy", metavar="SPEC",
                   help="per-attribute[:ATTR] (default), reference:ATTR or explicit:FILE")
    f.add_argument("--alpha", metavar="A", help="additive smoothing, rational (default 0)")
    f.add_argument("--out", metavar="MODEL", help="output path (default stdout)")
    f.add_argument("--replicate-paper", action="store_true",
                   help="bundled training counts, reference:stream, alpha 0")
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("predict", help="posterior for one (possibly partial) profile")
    pr.add_argument("--model", required=True)
    pr.add_argument("--set", action="append", metavar="ATTR=VALUE")
    pr.set_defaults(func=cmd_predict)

    g = sub.add_parser("grid", help="predictions for every full profile")
    g.add_argument("--model")
    g.add_argument("--replicate-paper", action="store_true")
    g.add_argument("--format", choices=("text", "csv", "json"), default="text")
    g.add_argument("--performer", default="I,II", metavar="CLASSLIST")
    g.add_argument("--risk-class", default="FAIL")
    g.add_argument("--risk-threshold", type=float, default=0.25)
    g.add_argument("--diff", nargs="?", const="published", metavar="REFERENCE",
                   help="compare with a grid file (bare --diff: the bundled published grid)")
    g.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    g.set_defaults(func=cmd_grid)

    a = sub.add_parser("audit", help="check marginal consistency of a table file")
    a.add_argument("--tables", metavar="FILE")
    a.add_argument("--replicate-paper", action="store_true")
    a.set_defaults(func=cmd_audit)

    e = sub.add_parser("eval", help="score a model on labeled records")
    e.add_argument("--model", required=True)
    e.add_argument("--records", required=True)
    e.set_defaults(func=cmd_eval)
    return p


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except CliError as exc:
        code, category, msg = exc.code, exc.category, str(exc)
    except ParseError as exc:
        code, category, msg = EXIT_INPUT, "parse", str(exc)
    except (InputError, SchemaError, GridError) as exc:
        code, category, msg = EXIT_INPUT, "input", str(exc)
    except FitError as exc:
        code, category, msg = EXIT_FIT, "fit", str(exc)
    err.write(f"error:{category}: {msg}\n")
    return code


def main() -> None:
    sys.exit(run())
