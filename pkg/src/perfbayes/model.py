"""Categorical naive Bayes fitted from marginal count tables.

Parameters are estimated in exact rational arithmetic and stored as floats.
Scoring runs in log space. A zero factor removes the class from contention
(its score is exactly 0) instead of leaking -inf into the output.
`posterior_exact` evaluates the same formulas without rounding and is used
as the reference route in tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .schema import (
    AttributeSchema,
    ClassLabelSet,
    ClassTotalsPolicy,
    Explicit,
    MarginalTable,
    MarginalTableSet,
    PerAttribute,
    Profile,
    Reference,
    ResolvedTotals,
    SchemaError,
    SmoothingConfig,
    resolve_class_totals,
    validate_profile,
)

# Log-score gap under which two classes count as tied.
TIE_TOLERANCE = 1e-12

REPLICATION_POLICY = Reference("stream")


class FitError(ValueError):
    """A probability would need a zero denominator."""


@dataclass(frozen=True)
class NBModel:
    schema: AttributeSchema
    classes: ClassLabelSet
    priors: tuple[float, ...]
    # attribute -> [value][class]
    conditionals: Mapping[str, tuple[tuple[float, ...], ...]]
    policy: ClassTotalsPolicy
    smoothing: SmoothingConfig
    raw_counts: MarginalTableSet

    def conditional(self, attribute: str, value: str, label: str) -> float:
        attr = self.schema.attribute(attribute)
        return self.conditionals[attribute][attr.index(value)][self.classes.index(label)]

    def prior(self, label: str) -> float:
        return self.priors[self.classes.index(label)]


@dataclass(frozen=True)
class PosteriorResult:
    classes: tuple[str, ...]
    per_class: tuple[float, ...]
    predicted: str | None
    tie: bool
    scores_defined: bool

    @property
    def probability(self) -> float | None:
        if not self.scores_defined:
            return None
        return self.per_class[self.classes.index(self.predicted)]

    def of(self, label: str) -> float:
        return self.per_class[self.classes.index(label)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.classes, self.per_class))


def _exact_parameters(tables: MarginalTableSet, totals: ResolvedTotals, alpha: Fraction):
    """Priors and conditionals as Fractions; raises FitError on a zero denominator."""
    if totals.grand_total <= 0:
        raise FitError("grand total is zero; priors are undefined")
    priors = tuple(Fraction(n, totals.grand_total) for n in totals.class_totals)
    conds: dict[str, tuple[tuple[Fraction, ...], ...]] = {}
    for attr, table in zip(tables.schema, tables.tables):
        denoms = []
        for label, d in zip(tables.classes, totals.denominators[attr.name]):
            denom = d + alpha * len(attr.values)
            if denom == 0:
                raise FitError(
                    f"zero denominator for class {label!r} in attribute {attr.name!r}; "
                    "use a different policy or alpha > 0"
                )
            denoms.append(denom)
        conds[attr.name] = tuple(
            tuple((c + alpha) / denom for c, denom in zip(row, denoms))
            for row in table.counts
        )
    return priors, conds


def fit(
    tables: MarginalTableSet,
    policy: ClassTotalsPolicy = REPLICATION_POLICY,
    smoothing: SmoothingConfig | None = None,
) -> NBModel:
    """Estimate priors and class-conditionals by relative frequency.

    P(C) = n_C / N and P(x|C) = (count(x, C) + alpha) / (d_C + alpha * V), where
    n_C, N and the per-attribute denominators d_C come from `policy`.
    """
    smoothing = smoothing or SmoothingConfig()
    totals = resolve_class_totals(tables, policy)
    priors, conds = _exact_parameters(tables, totals, smoothing.alpha)
    return NBModel(
        schema=tables.schema,
        classes=tables.classes,
        priors=tuple(float(p) for p in priors),
        conditionals={a: tuple(tuple(float(p) for p in row) for row in m) for a, m in conds.items()},
        policy=policy,
        smoothing=smoothing,
        raw_counts=tables,
    )


def joint_log_scores(model: NBModel, profile: Profile | Mapping[str, str]) -> tuple[float | None, ...]:
    """log P(C) + sum of log P(x|C) over assigned attributes; None where a factor is 0."""
    profile = validate_profile(model.schema, profile)
    rows = [
        model.conditionals[name][model.schema.attribute(name).index(value)]
        for name, value in profile.items
    ]
    scores: list[float | None] = []
    for j, prior in enumerate(model.priors):
        factors = [prior] + [row[j] for row in rows]
        if any(f == 0.0 for f in factors):
            scores.append(None)
        else:
            scores.append(math.fsum(math.log(f) for f in factors))
    return tuple(scores)


def likelihood(model: NBModel, profile: Profile | Mapping[str, str]) -> tuple[float, ...]:
    """P(profile | C) for each class; unassigned attributes contribute 1."""
    profile = validate_profile(model.schema, profile)
    out = []
    for j in range(len(model.classes)):
        logs = 0.0
        zero = False
        for name, value in profile.items:
            p = model.conditionals[name][model.schema.attribute(name).index(value)][j]
            if p == 0.0:
                zero = True
                break
            logs += math.log(p)
        out.append(0.0 if zero else math.exp(logs))
    return tuple(out)


def posterior(model: NBModel, profile: Profile | Mapping[str, str]) -> PosteriorResult:
    scores = joint_log_scores(model, profile)
    labels = model.classes.labels
    live = [s for s in scores if s is not None]
    if not live:
        return PosteriorResult(labels, (0.0,) * len(labels), None, False, False)
    top = max(live)
    log_norm = top + math.log(math.fsum(math.exp(s - top) for s in live))
    per_class = tuple(0.0 if s is None else math.exp(s - log_norm) for s in scores)
    winners = [j for j, s in enumerate(scores) if s is not None and top - s <= TIE_TOLERANCE]
    return PosteriorResult(labels, per_class, labels[winners[0]], len(winners) > 1, True)


def predict(model: NBModel, profile: Profile | Mapping[str, str]) -> tuple[str | None, float | None]:
    result = posterior(model, profile)
    return result.predicted, result.probability


def joint_scores_exact(model: NBModel, profile: Profile | Mapping[str, str]) -> tuple[Fraction, ...]:
    profile = validate_profile(model.schema, profile)
    totals = resolve_class_totals(model.raw_counts, model.policy)
    priors, conds = _exact_parameters(model.raw_counts, totals, model.smoothing.alpha)
    scores = []
    for j, prior in enumerate(priors):
        s = prior
        for name, value in profile.items:
            s *= conds[name][model.schema.attribute(name).index(value)][j]
        scores.append(s)
    return tuple(scores)


def posterior_exact(model: NBModel, profile: Profile | Mapping[str, str]) -> tuple[Fraction, ...]:
    """Posterior as exact rationals. All zeros when every joint score is zero."""
    scores = joint_scores_exact(model, profile)
    total = sum(scores)
    if total == 0:
        return scores
    return tuple(s / total for s in scores)


# -- persistence -------------------------------------------------------------

MODEL_FORMAT = "perfbayes-model"
MODEL_VERSION = 1


def _policy_to_obj(policy: ClassTotalsPolicy) -> dict:
    if isinstance(policy, PerAttribute):
        return {"kind": "per-attribute", "prior_source": policy.prior_source}
    if isinstance(policy, Reference):
        return {"kind": "reference", "attribute": policy.attribute}
    if isinstance(policy, Explicit):
        return {"kind": "explicit", "totals": list(policy.totals), "grand_total": policy.grand_total}
    raise SchemaError(f"unknown policy {policy!r}")


def _policy_from_obj(obj: dict) -> ClassTotalsPolicy:
    kind = obj.get("kind")
    if kind == "per-attribute":
        return PerAttribute(obj["prior_source"])
    if kind == "reference":
        return Reference(obj["attribute"])
    if kind == "explicit":
        return Explicit(tuple(obj["totals"]), obj["grand_total"])
    raise SchemaError(f"unknown policy kind {kind!r}")


def dumps_model(model: NBModel) -> str:
    """Serialize counts and configuration. Probabilities are recomputed on load."""
    tables = model.raw_counts
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": list(tables.classes.labels),
        "attributes": [
            {"name": a.name, "values": list(a.values), "counts": [list(r) for r in t.counts]}
            for a, t in zip(tables.schema, tables.tables)
        ],
        "policy": _policy_to_obj(model.policy),
        "alpha": str(model.smoothing.alpha),
    }
    return json.dumps(doc, indent=2) + "\n"


def loads_model(text: str) -> NBModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise SchemaError("not a perfbayes model document")
    if doc.get("version") != MODEL_VERSION:
        raise SchemaError(f"unsupported model version {doc.get('version')!r}")
    try:
        schema = AttributeSchema.from_pairs((a["name"], a["values"]) for a in doc["attributes"])
        tables = MarginalTableSet(
            schema,
            ClassLabelSet(tuple(doc["classes"])),
            tuple(MarginalTable(a["name"], a["counts"]) for a in doc["attributes"]),
        )
        policy = _policy_from_obj(doc["policy"])
        smoothing = SmoothingConfig(Fraction(doc["alpha"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model document: {exc}") from None
    return fit(tables, policy, smoothing)
