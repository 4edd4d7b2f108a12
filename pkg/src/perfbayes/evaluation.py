"""Scoring a fitted model against labeled records, and seeded train/test splits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ingest import RecordDataset
from .model import NBModel, posterior
from .schema import InputError


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    # [true][predicted]
    counts: tuple[tuple[int, ...], ...]
    undefined_count: int = 0

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))

    @property
    def correct(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.classes)))


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float | None
    # None where the ratio is 0/0
    precision: dict[str, float | None]
    recall: dict[str, float | None]

    def to_json(self) -> str:
        cm = self.confusion
        doc = {
            "classes": list(cm.classes),
            "confusion": [list(r) for r in cm.counts],
            "evaluated": cm.total,
            "undefined": cm.undefined_count,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
        }
        return json.dumps(doc, indent=2) + "\n"


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def _check_compatible(model: NBModel, dataset: RecordDataset) -> None:
    if set(dataset.schema.names) != set(model.schema.names):
        raise InputError(
            f"dataset attributes {list(dataset.schema.names)} do not match model "
            f"attributes {list(model.schema.names)}"
        )
    for attr in dataset.schema:
        extra = set(attr.values) - set(model.schema.attribute(attr.name).values)
        if extra:
            raise InputError(f"values {sorted(extra)} of {attr.name!r} are unknown to the model")
    extra = set(dataset.classes.labels) - set(model.classes.labels)
    if extra:
        raise InputError(f"class labels {sorted(extra)} are unknown to the model")


def evaluate(model: NBModel, dataset: RecordDataset) -> EvalReport:
    """Confusion matrix, accuracy, and per-class precision/recall.

    Records whose posterior is undefined are counted separately and excluded
    from every ratio.
    """
    _check_compatible(model, dataset)
    labels = model.classes.labels
    k = len(labels)
    grid = [[0] * k for _ in range(k)]
    undefined = 0
    cache: dict = {}
    for profile, label in dataset.records:
        if profile not in cache:
            cache[profile] = posterior(model, profile)
        res = cache[profile]
        if not res.scores_defined:
            undefined += 1
            continue
        grid[labels.index(label)][labels.index(res.predicted)] += 1
    cm = ConfusionMatrix(labels, tuple(map(tuple, grid)), undefined)
    precision = {c: _ratio(grid[j][j], sum(grid[i][j] for i in range(k))) for j, c in enumerate(labels)}
    recall = {c: _ratio(grid[j][j], sum(grid[j])) for j, c in enumerate(labels)}
    return EvalReport(cm, _ratio(cm.correct, cm.total), precision, recall)


def split(dataset: RecordDataset, fraction: float, seed: int) -> tuple[RecordDataset, RecordDataset]:
    """Shuffle with PCG64(seed) and cut at ceil(n * fraction)."""
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = len(dataset)
    # decimal reading of the fraction so 0.7 * 10 is exactly 7
    cut = math.ceil(n * Fraction(repr(float(fraction))))
    order = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    return dataset.subset(int(i) for i in order[:cut]), dataset.subset(int(i) for i in order[cut:])
