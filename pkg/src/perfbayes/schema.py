"""Categorical data model: attributes, class labels, profiles, count tables
and the policies that decide which totals normalize the probabilities.

All types are frozen value objects. Counts are stored as tuples of ints so a
table set can be hashed, compared, and shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union


class SchemaError(ValueError):
    """Structural violation in a schema, table set, or policy."""


class InputError(ValueError):
    """A profile or dataset does not fit the schema it is used with."""


@dataclass(frozen=True)
class Attribute:
    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def index(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise InputError(
                f"unknown value {value!r} for attribute {self.name!r}"
            ) from None


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered categorical attributes, each with an ordered value list."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        attrs = tuple(
            a if isinstance(a, Attribute) else Attribute(a[0], tuple(a[1]))
            for a in self.attributes
        )
        object.__setattr__(self, "attributes", attrs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Sequence[str]]]) -> "AttributeSchema":
        return cls(tuple(Attribute(name, tuple(values)) for name, values in pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def __iter__(self) -> Iterator[Attribute]:
        return iter(self.attributes)

    def __len__(self) -> int:
        return len(self.attributes)

    def attribute(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise InputError(f"unknown attribute {name!r}")

    def has(self, name: str) -> bool:
        return any(a.name == name for a in self.attributes)


@dataclass(frozen=True)
class ClassLabelSet:
    """Outcome classes. Declaration order breaks ties."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown class label {label!r}") from None


@dataclass(frozen=True, eq=False)
class Profile:
    """A partial assignment of attribute values.

    Assignment order is kept for display; equality and hashing ignore it.
    """

    items: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        items = tuple((str(k), str(v)) for k, v in self.items)
        names = [k for k, _ in items]
        if len(set(names)) != len(names):
            raise InputError(f"attribute assigned twice in profile: {names}")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, assignments: "Profile | Mapping[str, str] | None" = None, **kwargs: str) -> "Profile":
        if isinstance(assignments, Profile) and not kwargs:
            return assignments
        merged = dict(assignments.items() if isinstance(assignments, Profile) else (assignments or {}))
        merged.update(kwargs)
        return cls(tuple(merged.items()))

    def get(self, name: str, default: str | None = None) -> str | None:
        for k, v in self.items:
            if k == name:
                return v
        return default

    def as_dict(self) -> dict[str, str]:
        return dict(self.items)

    def __contains__(self, name: object) -> bool:
        return any(k == name for k, _ in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Profile):
            return NotImplemented
        return frozenset(self.items) == frozenset(other.items)

    def __hash__(self) -> int:
        return hash(frozenset(self.items))

    def __str__(self) -> str:
        return "(" + ", ".join(f"{k}={v}" for k, v in self.items) + ")"


def validate_profile(schema: AttributeSchema, profile: Profile | Mapping[str, str]) -> Profile:
    """Coerce to a `Profile` and check every assignment against `schema`."""
    profile = Profile.of(profile)
    for name, value in profile.items:
        schema.attribute(name).index(value)
    return profile


@dataclass(frozen=True)
class MarginalTable:
    """Counts for one attribute: rows are values, columns are classes."""

    attribute: str
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(tuple(int(c) for c in row) for row in self.counts))

    def column_sums(self) -> tuple[int, ...]:
        if not self.counts:
            return ()
        return tuple(sum(col) for col in zip(*self.counts))

    def grand_total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def scaled(self, k: int) -> "MarginalTable":
        return MarginalTable(self.attribute, tuple(tuple(c * k for c in row) for row in self.counts))


@dataclass(frozen=True)
class MarginalTableSet:
    """One count table per schema attribute, in schema order."""

    schema: AttributeSchema
    classes: ClassLabelSet
    tables: tuple[MarginalTable, ...]

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        violations = validate_schema(self.schema, self.classes).violations
        if violations:
            raise SchemaError("; ".join(violations))
        if tuple(t.attribute for t in self.tables) != self.schema.names:
            raise SchemaError(
                f"tables {[t.attribute for t in self.tables]} do not match "
                f"schema attributes {list(self.schema.names)}"
            )
        k = len(self.classes)
        for attr, table in zip(self.schema, self.tables):
            if len(table.counts) != len(attr.values) or any(len(r) != k for r in table.counts):
                raise SchemaError(
                    f"table {attr.name!r} must be {len(attr.values)}x{k}"
                )
            if any(c < 0 for r in table.counts for c in r):
                raise SchemaError(f"table {attr.name!r} has a negative count")

    def table(self, name: str) -> MarginalTable:
        for t in self.tables:
            if t.attribute == name:
                return t
        raise SchemaError(f"no table for attribute {name!r}")

    def count(self, attribute: str, value: str, label: str) -> int:
        attr = self.schema.attribute(attribute)
        return self.table(attribute).counts[attr.index(value)][self.classes.index(label)]

    def cells(self) -> dict[tuple[str, str, str], int]:
        """Order-free view: (attribute, value, class) -> count."""
        return {
            (attr.name, value, label): count
            for attr, table in zip(self.schema, self.tables)
            for value, row in zip(attr.values, table.counts)
            for label, count in zip(self.classes, row)
        }

    def scaled(self, k: int) -> "MarginalTableSet":
        return MarginalTableSet(self.schema, self.classes, tuple(t.scaled(k) for t in self.tables))

    def reordered(self, names: Sequence[str]) -> "MarginalTableSet":
        """The same counts under a permuted attribute order."""
        schema = AttributeSchema(tuple(self.schema.attribute(n) for n in names))
        return MarginalTableSet(schema, self.classes, tuple(self.table(n) for n in names))


@dataclass(frozen=True)
class PerAttribute:
    """Each attribute normalizes by its own column sums; priors come from `prior_source`."""

    prior_source: str


@dataclass(frozen=True)
class Reference:
    """One attribute's column sums serve as class totals for every attribute."""

    attribute: str


@dataclass(frozen=True)
class Explicit:
    totals: tuple[int, ...]
    grand_total: int

    def __post_init__(self):
        object.__setattr__(self, "totals", tuple(int(t) for t in self.totals))
        if any(t <= 0 for t in self.totals):
            raise SchemaError("explicit class totals must all be > 0")
        if sum(self.totals) != self.grand_total:
            raise SchemaError(
                f"explicit totals sum to {sum(self.totals)}, not {self.grand_total}"
            )


ClassTotalsPolicy = Union[PerAttribute, Reference, Explicit]


def format_policy(policy: ClassTotalsPolicy) -> str:
    if isinstance(policy, PerAttribute):
        return f"per-attribute:{policy.prior_source}"
    if isinstance(policy, Reference):
        return f"reference:{policy.attribute}"
    return "explicit:" + "/".join(map(str, policy.totals))


@dataclass(frozen=True)
class SmoothingConfig:
    """Additive pseudo-count. Stored as an exact rational."""

    alpha: Fraction = Fraction(0)

    def __post_init__(self):
        alpha = self.alpha
        if isinstance(alpha, str):
            alpha = Fraction(alpha.strip())
        elif isinstance(alpha, float):
            # go through repr so 0.1 means 1/10, not the nearest binary double
            alpha = Fraction(repr(alpha))
        else:
            alpha = Fraction(alpha)
        if alpha < 0:
            raise SchemaError(f"smoothing alpha must be >= 0, got {alpha}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_schema(schema: AttributeSchema, classes: ClassLabelSet) -> ValidationResult:
    """Collect every structural violation rather than stopping at the first."""
    problems: list[str] = []
    if not schema.attributes:
        problems.append("no attributes")
    seen: set[str] = set()
    for attr in schema.attributes:
        if not attr.name:
            problems.append("empty attribute name")
        elif attr.name in seen:
            problems.append(f"duplicate attribute {attr.name!r}")
        seen.add(attr.name)
        if not attr.values:
            problems.append(f"attribute {attr.name!r} has no values")
        vals: set[str] = set()
        for v in attr.values:
            if not v:
                problems.append(f"attribute {attr.name!r} has an empty value name")
            elif v in vals:
                problems.append(f"duplicate value {v!r} in attribute {attr.name!r}")
            vals.add(v)
    if not classes.labels:
        problems.append("no class labels")
    labels: set[str] = set()
    for c in classes.labels:
        if not c:
            problems.append("empty class label")
        elif c in labels:
            problems.append(f"duplicate class label {c!r}")
        labels.add(c)
    return ValidationResult(tuple(problems))


@dataclass(frozen=True)
class ResolvedTotals:
    class_totals: tuple[int, ...]
    grand_total: int
    denominators: Mapping[str, tuple[int, ...]] = field(default_factory=dict)


def resolve_class_totals(tables: MarginalTableSet, policy: ClassTotalsPolicy) -> ResolvedTotals:
    """Per-class totals, grand total, and per-attribute conditional denominators."""
    if isinstance(policy, PerAttribute):
        source = tables.table(policy.prior_source)
        denoms = {t.attribute: t.column_sums() for t in tables.tables}
        return ResolvedTotals(source.column_sums(), source.grand_total(), denoms)
    if isinstance(policy, Reference):
        ref = tables.table(policy.attribute)
        totals = ref.column_sums()
        return ResolvedTotals(totals, ref.grand_total(), {n: totals for n in tables.schema.names})
    if isinstance(policy, Explicit):
        if len(policy.totals) != len(tables.classes):
            raise SchemaError(
                f"explicit policy has {len(policy.totals)} totals for {len(tables.classes)} classes"
            )
        return ResolvedTotals(
            policy.totals, policy.grand_total, {n: policy.totals for n in tables.schema.names}
        )
    raise SchemaError(f"unknown class-totals policy {policy!r}")
