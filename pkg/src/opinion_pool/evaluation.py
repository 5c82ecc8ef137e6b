"""Evaluation over every non-empty subset of modalities.

For each test example and subset, member outputs are fused with the
Independent Opinion Pool (singletons pass through untouched) and the fused
distribution's hard decision, entropy and score difference are recorded.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

from .distributions import (
    CategoricalDistribution,
    entropy,
    fuse_iop,
    predict_label,
    score_difference,
)
from .scenario import MultimodalExample

SUMMARY_COLUMNS = ("subset", "accuracy", "entropy_mean", "entropy_var", "scorediff_mean", "scorediff_var")
PER_EXAMPLE_COLUMNS = ("example_id", "subset", "true_label", "predicted_label", "entropy", "score_difference")
SEP = ";"


class ProtocolError(ValueError):
    pass


def enumerate_subsets(modalities: Sequence[str]) -> list[tuple[str, ...]]:
    """All non-empty subsets, ordered by size then lexicographically; members sorted."""
    names = list(modalities)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate modality names in {names}")
    names = sorted(names)
    return [c for r in range(1, len(names) + 1) for c in combinations(names, r)]


def subset_name(subset: Sequence[str]) -> str:
    return "+".join(subset)


@dataclass(frozen=True)
class ExampleRecord:
    example_id: str
    true_label: int
    predicted_label: int
    entropy: float
    score_difference: float


@dataclass(frozen=True)
class SubsetResult:
    subset: tuple[str, ...]
    accuracy: float
    entropy_mean: float
    entropy_var: float
    scorediff_mean: float
    scorediff_var: float
    records: tuple[ExampleRecord, ...]

    @property
    def name(self) -> str:
        return subset_name(self.subset)


@dataclass(frozen=True)
class EvaluationReport:
    results: tuple[SubsetResult, ...]
    meta: Mapping = field(default_factory=dict)

    def __getitem__(self, subset) -> SubsetResult:
        key = subset if isinstance(subset, str) else subset_name(sorted(subset))
        for r in self.results:
            if r.name == key:
                return r
        raise KeyError(key)

    def singletons(self) -> list[SubsetResult]:
        return [r for r in self.results if len(r.subset) == 1]

    def multi(self) -> list[SubsetResult]:
        return [r for r in self.results if len(r.subset) > 1]


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    # population variance; fsum keeps the result independent of summation order
    n = len(xs)
    mean = math.fsum(xs) / n
    return mean, math.fsum((x - mean) ** 2 for x in xs) / n


def aggregate(subset: tuple[str, ...], records: Sequence[ExampleRecord]) -> SubsetResult:
    records = tuple(sorted(records, key=lambda r: r.example_id))
    correct = sum(r.predicted_label == r.true_label for r in records)
    e_mean, e_var = _mean_var([r.entropy for r in records])
    s_mean, s_var = _mean_var([r.score_difference for r in records])
    return SubsetResult(subset, correct / len(records), e_mean, e_var, s_mean, s_var, records)


def evaluate_outputs(
    outputs: Mapping[str, Sequence[CategoricalDistribution]],
    examples: Sequence[MultimodalExample],
    meta: Mapping | None = None,
) -> EvaluationReport:
    """Score precomputed per-modality outputs (one list per modality, aligned with ``examples``)."""
    if not examples:
        raise ProtocolError("empty test set")
    for name, outs in outputs.items():
        if len(outs) != len(examples):
            raise ProtocolError(f"modality {name!r} has {len(outs)} outputs for {len(examples)} examples")
    results = []
    for subset in enumerate_subsets(list(outputs)):
        records = []
        for i, ex in enumerate(examples):
            members = [outputs[m][i] for m in subset]
            d = members[0] if len(members) == 1 else fuse_iop(members)
            records.append(
                ExampleRecord(ex.id, ex.label, predict_label(d), entropy(d), score_difference(d))
            )
        results.append(aggregate(subset, records))
    return EvaluationReport(tuple(results), dict(meta or {}))


def evaluate(
    classifiers: Mapping[str, object],
    test: Sequence[MultimodalExample],
    intentions=None,
    meta: Mapping | None = None,
) -> EvaluationReport:
    """Run every classifier on every test example and score all modality subsets."""
    if not test:
        raise ProtocolError("empty test set")
    if intentions is not None:
        for name, c in classifiers.items():
            if c.intentions != intentions:
                raise ProtocolError(f"classifier {name!r} was trained on a different intention set")
    outputs = {}
    for name, c in classifiers.items():
        outs = [c.predict(e) for e in test]
        if intentions is not None and any(len(d) != len(intentions) for d in outs):
            raise ProtocolError(f"classifier {name!r} emits the wrong number of intentions")
        outputs[name] = outs
    return evaluate_outputs(outputs, test, meta)


# -- persistence -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_report(report: EvaluationReport, path) -> list[Path]:
    """Write ``summary.csv``, ``per_example.csv`` and ``meta.json`` into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "summary.csv"
    per_example = out / "per_example.csv"
    meta = out / "meta.json"
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=SEP, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in report.results:
            w.writerow([r.name, _fmt(r.accuracy), _fmt(r.entropy_mean), _fmt(r.entropy_var),
                        _fmt(r.scorediff_mean), _fmt(r.scorediff_var)])
    rows = [(rec, r.name) for r in report.results for rec in r.records]
    order = {r.name: i for i, r in enumerate(report.results)}
    rows.sort(key=lambda t: (t[0].example_id, order[t[1]]))
    with open(per_example, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=SEP, lineterminator="\n")
        w.writerow(PER_EXAMPLE_COLUMNS)
        for rec, name in rows:
            w.writerow([rec.example_id, name, rec.true_label, rec.predicted_label,
                        _fmt(rec.entropy), _fmt(rec.score_difference)])
    with open(meta, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [summary, per_example, meta]


def read_report(path) -> EvaluationReport:
    src = Path(path)
    with open(src / "summary.csv", encoding="utf-8", newline="") as fh:
        summary = list(csv.DictReader(fh, delimiter=SEP))
    with open(src / "per_example.csv", encoding="utf-8", newline="") as fh:
        per_example = list(csv.DictReader(fh, delimiter=SEP))
    meta_path = src / "meta.json"
    meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
    records: dict[str, list[ExampleRecord]] = {}
    for row in per_example:
        records.setdefault(row["subset"], []).append(
            ExampleRecord(row["example_id"], int(row["true_label"]), int(row["predicted_label"]),
                          float(row["entropy"]), float(row["score_difference"]))
        )
    results = []
    for row in summary:
        name = row["subset"]
        results.append(
            SubsetResult(
                tuple(name.split("+")),
                float(row["accuracy"]),
                float(row["entropy_mean"]),
                float(row["entropy_var"]),
                float(row["scorediff_mean"]),
                float(row["scorediff_var"]),
                tuple(sorted(records.get(name, []), key=lambda r: r.example_id)),
            )
        )
    return EvaluationReport(tuple(results), meta)
