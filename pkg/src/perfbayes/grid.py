"""Prediction grids over every full profile, performer/at-risk flags,
rendering, and comparison against a reference grid file.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Iterable, Sequence, TextIO

from .ingest import ParseError, iter_rows, bundled_text
from .model import NBModel, posterior
from .schema import AttributeSchema, ClassLabelSet, Profile, SchemaError

GRID_COLUMNS = ("predicted", "probability", "performer", "at_risk")
FORMATS = ("text", "csv", "json")
DEFAULT_TOLERANCE = 1e-5


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class OutcomePolicy:
    """Maps divisions to performer/underperformer and sets the risk rule."""

    performer_classes: frozenset[str] = frozenset({"I", "II"})
    risk_class: str = "FAIL"
    risk_threshold: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "performer_classes", frozenset(self.performer_classes))
        if not 0.0 <= self.risk_threshold <= 1.0:
            raise SchemaError(f"risk threshold must be in [0, 1], got {self.risk_threshold}")

    def check(self, classes: ClassLabelSet) -> None:
        labels = set(classes.labels)
        if not self.performer_classes:
            raise SchemaError("performer classes must not be empty")
        if not self.performer_classes < labels:
            raise SchemaError(
                f"performer classes {sorted(self.performer_classes)} must be a proper subset of "
                f"{list(classes.labels)}"
            )
        if self.risk_class not in labels:
            raise SchemaError(f"risk class {self.risk_class!r} is not a class label")

    def flags(self, classes: Sequence[str], posterior_row: Sequence[float],
              predicted: str | None, defined: bool) -> tuple[bool, bool]:
        if not defined:
            return False, False
        performer = predicted in self.performer_classes
        at_risk = posterior_row[list(classes).index(self.risk_class)] >= self.risk_threshold
        return performer, at_risk


@dataclass(frozen=True)
class GridRow:
    profile: Profile
    classes: tuple[str, ...]
    predicted: str | None
    probability: float | None
    full_posterior: tuple[float, ...]
    performer: bool
    at_risk: bool
    defined: bool
    tie: bool = False


def enumerate_profiles(schema: AttributeSchema) -> list[Profile]:
    """Cartesian product; the last attribute varies fastest."""
    names = schema.names
    return [
        Profile(tuple(zip(names, combo)))
        for combo in itertools.product(*(a.values for a in schema))
    ]


def prediction_grid(model: NBModel, outcome: OutcomePolicy | None = None) -> list[GridRow]:
    outcome = outcome or OutcomePolicy()
    outcome.check(model.classes)
    rows = []
    for profile in enumerate_profiles(model.schema):
        res = posterior(model, profile)
        performer, at_risk = outcome.flags(res.classes, res.per_class, res.predicted, res.scores_defined)
        rows.append(GridRow(
            profile=profile,
            classes=res.classes,
            predicted=res.predicted,
            probability=res.probability,
            full_posterior=res.per_class,
            performer=performer,
            at_risk=at_risk,
            defined=res.scores_defined,
            tie=res.tie,
        ))
    return rows


def format_probability(p: float | None) -> str:
    """Six fractional digits, round-half-even on the exact binary value."""
    if p is None:
        return ""
    return str(Decimal(p).quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def _bool(b: bool) -> str:
    return "true" if b else "false"


def _attribute_names(rows: Sequence[GridRow], attributes: Sequence[str] | None) -> list[str]:
    if attributes is not None:
        return list(attributes)
    return [k for k, _ in rows[0].profile.items] if rows else []


def render_grid(rows: Sequence[GridRow], fmt: str = "text",
                attributes: Sequence[str] | None = None) -> str:
    """Render as aligned text, comma-delimited text, or JSON."""
    names = _attribute_names(rows, attributes)
    if fmt == "json":
        doc = [
            {
                "profile": {n: r.profile.get(n) for n in names},
                "predicted": r.predicted,
                "probability": format_probability(r.probability) or None,
                "posterior": {c: format_probability(p) for c, p in zip(r.classes, r.full_posterior)},
                "performer": r.performer,
                "at_risk": r.at_risk,
                "defined": r.defined,
                "tie": r.tie,
            }
            for r in rows
        ]
        return json.dumps({"attributes": names, "rows": doc}, indent=2) + "\n"

    header = names + list(GRID_COLUMNS)
    table = [header] + [
        [r.profile.get(n) for n in names]
        + [r.predicted or "", format_probability(r.probability), _bool(r.performer), _bool(r.at_risk)]
        for r in rows
    ]
    if fmt == "csv":
        return "\n".join(",".join(line) for line in table) + "\n"
    if fmt == "text":
        widths = [max(len(line[i]) for line in table) for i in range(len(header))]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in table
        ) + "\n"
    raise GridError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


@dataclass(frozen=True)
class ReferenceRow:
    profile: Profile
    predicted: str | None
    probability: float | None


def parse_grid(stream: TextIO | str) -> list[ReferenceRow]:
    """Read a comma-delimited grid. Columns after the attributes are matched by name;
    `performer` and `at_risk` are optional.
    """
    rows = iter(iter_rows(stream))
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise ParseError("no header") from None
    if "predicted" not in header or "probability" not in header:
        raise ParseError("grid header needs 'predicted' and 'probability' columns", header_line)
    names = [h for h in header if h not in GRID_COLUMNS]
    out = []
    for lineno, cells in rows:
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        rec = dict(zip(header, cells))
        raw = rec["probability"]
        try:
            prob = float(raw) if raw else None
        except ValueError:
            raise ParseError(f"bad probability {raw!r}", lineno) from None
        out.append(ReferenceRow(
            Profile(tuple((n, rec[n]) for n in names)),
            rec["predicted"] or None,
            prob,
        ))
    return out


def load_published_grid() -> list[ReferenceRow]:
    """The published 30-row prediction grid, labels normalized to the training-table spelling."""
    return parse_grid(bundled_text("table2_reference.csv"))


@dataclass(frozen=True)
class Discrepancy:
    profile: Profile
    expected_label: str | None
    expected_probability: float | None
    actual_label: str | None
    actual_probability: float | None

    @property
    def label_mismatch(self) -> bool:
        return self.expected_label != self.actual_label

    @property
    def delta(self) -> float | None:
        if self.expected_probability is None or self.actual_probability is None:
            return None
        return abs(self.actual_probability - self.expected_probability)

    def describe(self) -> str:
        delta = self.delta
        return (
            f"{self.profile}: expected {self.expected_label or '-'} "
            f"{format_probability(self.expected_probability) or '-'}, got "
            f"{self.actual_label or '-'} {format_probability(self.actual_probability) or '-'}"
            + (f" (delta {delta:.6f})" if delta is not None else "")
        )


def diff_grid(rows: Iterable[GridRow], reference: Iterable[ReferenceRow],
              tolerance: float = DEFAULT_TOLERANCE) -> list[Discrepancy]:
    """Reference rows whose label differs or whose probability is off by more than `tolerance`."""
    by_profile = {r.profile: r for r in rows}
    out = []
    for ref in reference:
        row = by_profile.get(ref.profile)
        if row is None:
            raise GridError(f"reference profile {ref.profile} is not in the grid")
        d = Discrepancy(ref.profile, ref.predicted, ref.probability, row.predicted, row.probability)
        if d.label_mismatch or (d.delta is not None and d.delta > tolerance) or (
            (d.expected_probability is None) != (d.actual_probability is None)
        ):
            out.append(d)
    return out
