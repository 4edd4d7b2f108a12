"""Reading and writing record files and count-table files, aggregation of
records into per-attribute count tables, and marginal consistency audits.

Both on-disk formats are plain comma-delimited text without quoting. Category
order is taken from first occurrence unless a schema is supplied.
"""

from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, TextIO

from .schema import (
    AttributeSchema,
    ClassLabelSet,
    MarginalTable,
    MarginalTableSet,
    Profile,
    SchemaError,
)

CLASS_COLUMN = "class"
TABLE_HEADER = ("attribute", "value", "class", "count")
_INT = re.compile(r"[+-]?[0-9]+")


class ParseError(ValueError):
    """Malformed input file. `line` is 1-based, or None when not line-specific."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RecordDataset:
    schema: AttributeSchema
    classes: ClassLabelSet
    records: tuple[tuple[Profile, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        names = set(self.schema.names)
        for i, (profile, label) in enumerate(self.records):
            if set(profile.as_dict()) != names:
                raise SchemaError(f"record {i} does not assign every attribute")
            for name, value in profile.items:
                self.schema.attribute(name).index(value)
            self.classes.index(label)

    def __len__(self) -> int:
        return len(self.records)

    def subset(self, indices: Iterable[int]) -> "RecordDataset":
        return RecordDataset(self.schema, self.classes, tuple(self.records[i] for i in indices))


def iter_rows(stream: TextIO | str) -> Iterable[tuple[int, list[str]]]:
    text = stream if isinstance(stream, str) else stream.read()
    for lineno, row in enumerate(csv.reader(io.StringIO(text), quoting=csv.QUOTE_NONE), start=1):
        cells = [c.strip() for c in row]
        if not any(cells):
            continue
        yield lineno, cells


def parse_records(
    stream: TextIO | str,
    schema: AttributeSchema | None = None,
    classes: ClassLabelSet | None = None,
) -> RecordDataset:
    """Parse a record file whose header names the attributes followed by `class`."""
    rows = iter(iter_rows(stream))
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise ParseError("no header") from None
    if len(header) < 2 or header[-1] != CLASS_COLUMN:
        raise ParseError(f"header must end with a {CLASS_COLUMN!r} column", header_line)
    attr_names = header[:-1]
    if len(set(attr_names)) != len(attr_names) or not all(attr_names):
        raise ParseError("duplicate or empty attribute name in header", header_line)
    if schema is not None and set(attr_names) != set(schema.names):
        raise ParseError(
            f"header attributes {attr_names} do not match schema {list(schema.names)}",
            header_line,
        )

    seen_values: dict[str, list[str]] = {n: [] for n in attr_names}
    seen_labels: list[str] = []
    parsed: list[tuple[Profile, str]] = []
    for lineno, cells in rows:
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        *values, label = cells
        if not label or not all(values):
            raise ParseError("empty field", lineno)
        for name, value in zip(attr_names, values):
            if schema is not None:
                if value not in schema.attribute(name).values:
                    raise ParseError(f"value {value!r} not declared for attribute {name!r}", lineno)
            elif value not in seen_values[name]:
                seen_values[name].append(value)
        if classes is not None:
            if label not in classes:
                raise ParseError(f"class label {label!r} not declared", lineno)
        elif label not in seen_labels:
            seen_labels.append(label)
        # profiles are stored in schema order regardless of column order
        assigned = dict(zip(attr_names, values))
        order = schema.names if schema is not None else attr_names
        parsed.append((Profile(tuple((n, assigned[n]) for n in order)), label))

    if schema is None:
        if not parsed:
            raise ParseError("no records to infer a schema from")
        schema = AttributeSchema.from_pairs((n, seen_values[n]) for n in attr_names)
    if classes is None:
        if not seen_labels:
            raise ParseError("no records to infer class labels from")
        classes = ClassLabelSet(tuple(seen_labels))
    return RecordDataset(schema, classes, tuple(parsed))


def write_records(dataset: RecordDataset) -> str:
    out = [",".join(dataset.schema.names + (CLASS_COLUMN,))]
    for profile, label in dataset.records:
        out.append(",".join([profile.get(n) for n in dataset.schema.names] + [label]))
    return "\n".join(out) + "\n"


def aggregate(dataset: RecordDataset) -> MarginalTableSet:
    """Cross-tabulate records into one value-by-class count table per attribute."""
    k = len(dataset.classes)
    grids = {a.name: [[0] * k for _ in a.values] for a in dataset.schema}
    for profile, label in dataset.records:
        j = dataset.classes.index(label)
        for attr in dataset.schema:
            grids[attr.name][attr.index(profile.get(attr.name))][j] += 1
    tables = tuple(MarginalTable(a.name, grids[a.name]) for a in dataset.schema)
    return MarginalTableSet(dataset.schema, dataset.classes, tables)


def parse_tables(stream: TextIO | str) -> MarginalTableSet:
    """Parse an `attribute,value,class,count` file. Missing cells are zero."""
    rows = iter(iter_rows(stream))
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise ParseError("no header") from None
    if tuple(header) != TABLE_HEADER:
        raise ParseError(f"header must be {','.join(TABLE_HEADER)}", header_line)

    attr_values: dict[str, list[str]] = {}
    labels: list[str] = []
    cells: dict[tuple[str, str, str], int] = {}
    for lineno, row in rows:
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", lineno)
        attribute, value, label, raw = row
        if not (attribute and value and label):
            raise ParseError("empty field", lineno)
        if not _INT.fullmatch(raw):
            raise ParseError(f"non-integer count {raw!r}", lineno)
        count = int(raw)
        if count < 0:
            raise ParseError(f"negative count {count}", lineno)
        key = (attribute, value, label)
        if key in cells:
            raise ParseError(f"duplicate key {attribute},{value},{label}", lineno)
        cells[key] = count
        values = attr_values.setdefault(attribute, [])
        if value not in values:
            values.append(value)
        if label not in labels:
            labels.append(label)

    if not cells:
        raise ParseError("no count rows")
    schema = AttributeSchema.from_pairs(attr_values.items())
    classes = ClassLabelSet(tuple(labels))
    tables = tuple(
        MarginalTable(a.name, [[cells.get((a.name, v, c), 0) for c in labels] for v in a.values])
        for a in schema
    )
    return MarginalTableSet(schema, classes, tables)


def write_tables(tables: MarginalTableSet) -> str:
    """Emit every cell, zeros included, in declaration order."""
    out = [",".join(TABLE_HEADER)]
    for attr, table in zip(tables.schema, tables.tables):
        for value, row in zip(attr.values, table.counts):
            for label, count in zip(tables.classes, row):
                out.append(f"{attr.name},{value},{label},{count}")
    return "\n".join(out) + "\n"


def bundled_text(name: str) -> str:
    return resources.files("perfbayes.data").joinpath(name).read_text(encoding="utf-8")


def load_training_tables() -> MarginalTableSet:
    """The training counts shipped with the package (600 students, 3 attributes)."""
    return parse_tables(bundled_text("table1.csv"))


@dataclass(frozen=True)
class ConsistencyReport:
    attributes: tuple[str, ...]
    classes: tuple[str, ...]
    per_class_totals: tuple[tuple[int, ...], ...]
    grand_totals: tuple[int, ...]
    modal_grand_total: int
    inconsistent_classes: tuple[str, ...]
    inconsistent_grand: tuple[str, ...]

    @property
    def is_consistent(self) -> bool:
        return not self.inconsistent_classes and not self.inconsistent_grand

    def render(self) -> str:
        width = max([len("attribute")] + [len(a) for a in self.attributes])
        cols = list(self.classes) + ["total"]
        cw = [max(len(c), 6) for c in cols]
        lines = ["attribute".ljust(width) + "".join(" " + c.rjust(w) for c, w in zip(cols, cw))]
        for name, totals, grand in zip(self.attributes, self.per_class_totals, self.grand_totals):
            cells = list(totals) + [grand]
            lines.append(name.ljust(width) + "".join(" " + str(v).rjust(w) for v, w in zip(cells, cw)))
        lines.append("inconsistent classes: " + (", ".join(self.inconsistent_classes) or "none"))
        grand_notes = [
            f"{a} ({self.grand_totals[self.attributes.index(a)]} vs modal {self.modal_grand_total})"
            for a in self.inconsistent_grand
        ]
        lines.append("inconsistent grand totals: " + (", ".join(grand_notes) or "none"))
        lines.append(f"consistent: {'true' if self.is_consistent else 'false'}")
        return "\n".join(lines) + "\n"


def audit_consistency(tables: MarginalTableSet) -> ConsistencyReport:
    """Compare class column sums and grand totals across attribute tables.

    The modal grand total is the most frequent one; ties go to the attribute
    declared first.
    """
    per_class = tuple(t.column_sums() for t in tables.tables)
    grands = tuple(t.grand_total() for t in tables.tables)
    bad_classes = tuple(
        label for j, label in enumerate(tables.classes)
        if len({totals[j] for totals in per_class}) > 1
    )
    modal = Counter(grands).most_common(1)[0][0] if grands else 0
    bad_grand = tuple(t.attribute for t, g in zip(tables.tables, grands) if g != modal)
    return ConsistencyReport(
        attributes=tables.schema.names,
        classes=tables.classes.labels,
        per_class_totals=per_class,
        grand_totals=grands,
        modal_grand_total=modal,
        inconsistent_classes=bad_classes,
        inconsistent_grand=bad_grand,
    )


__all__ = [
    "ConsistencyReport",
    "ParseError",
    "RecordDataset",
    "aggregate",
    "audit_consistency",
    "bundled_text",
    "load_training_tables",
    "parse_records",
    "parse_tables",
    "write_records",
    "write_tables",
]
