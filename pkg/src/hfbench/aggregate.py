"""Run/task aggregation, validation-based checkpoint selection and ranking."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .exceptions import (
    DuplicateTask,
    EmptyHistory,
    EmptyInput,
    EmptyTable,
    IdentityMismatch,
    MixedBaselines,
    UnknownKey,
    WrongSplit,
)
from .relative import ComparisonResult, PerformancePoint

HIGHER = "higher"
LOWER = "lower"


class Column(NamedTuple):
    name: str
    label: str
    better: str


CLASSIFICATION_COLUMNS = (
    Column("acc", "Acc.", HIGHER),
    Column("mga", "MGA", HIGHER),
    Column("m_ga", "mGA", HIGHER),
    Column("da", "DA", LOWER),
    Column("deo", "DEO", LOWER),
    Column("deodds", "DEOdds", LOWER),
    Column("delta_dto", "ΔDTO", HIGHER),
    Column("sigma_hf", "σ(HF)", HIGHER),
)

LANDMARK_COLUMNS = (
    Column("sdr", "SDR", HIGHER),
    Column("mgs", "MGS", HIGHER),
    Column("m_gs", "mGS", HIGHER),
    Column("ds", "DS", LOWER),
    Column("delta_dto", "ΔDTO", HIGHER),
    Column("sigma_hf", "σ(HF)", HIGHER),
)


@dataclass(frozen=True)
class RunReport:
    method_id: str
    task_id: str
    run_id: str
    metrics: Dict[str, float]


@dataclass(frozen=True)
class AggregateReport:
    method_id: str
    task_id: str
    n_runs: int
    mean: Dict[str, float]
    std: Dict[str, float]
    # per-run values, kept so task averaging can pool them
    runs: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    @classmethod
    def from_means(cls, method_id, task_id, mean, std=None, n_runs=1):
        std = dict(std or {})
        return cls(method_id, task_id, n_runs, dict(mean), {k: std.get(k, 0.0) for k in mean})

    @property
    def task_kind(self):
        return "landmark" if "mgs" in self.mean else "classification"

    def point(self) -> PerformancePoint:
        if "mgs" in self.mean:
            return PerformancePoint(self.mean["m_gs"], self.mean["mgs"])
        return PerformancePoint(self.mean["m_ga"], self.mean["mga"])


def _mean_std(values):
    values = list(values)
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def aggregate_runs(reports: Sequence[RunReport]) -> AggregateReport:
    """Mean and sample standard deviation of every metric over runs."""
    if not reports:
        raise EmptyInput("no run reports")
    first = reports[0]
    keys = set(first.metrics)
    for r in reports[1:]:
        if (r.method_id, r.task_id) != (first.method_id, first.task_id):
            raise IdentityMismatch(
                f"cannot mix {(r.method_id, r.task_id)} with {(first.method_id, first.task_id)}"
            )
        if set(r.metrics) != keys:
            raise IdentityMismatch("run reports carry different metric sets")
    ordered = sorted(reports, key=lambda r: (r.run_id, sorted(r.metrics.items())))
    mean, std, runs = {}, {}, {}
    for k in sorted(keys):
        vals = tuple(r.metrics[k] for r in ordered)
        mean[k], std[k] = _mean_std(vals)
        runs[k] = vals
    return AggregateReport(first.method_id, first.task_id, len(reports), mean, std, runs)


def average_tasks(aggregates: Sequence[AggregateReport], task_id: str = "average") -> AggregateReport:
    """Unweighted mean over tasks of the per-task run means.

    The spread is the sample std of the pooled per-(task, run) values when
    every aggregate kept them, else the mean of per-task stds.
    """
    if not aggregates:
        raise EmptyInput("no task aggregates")
    method = aggregates[0].method_id
    tasks = [a.task_id for a in aggregates]
    if len(set(tasks)) != len(tasks):
        raise DuplicateTask(f"task listed twice in {tasks}")
    keys = set(aggregates[0].mean)
    for a in aggregates:
        if a.method_id != method:
            raise IdentityMismatch(f"cannot average {a.method_id!r} with {method!r}")
        if set(a.mean) != keys:
            raise IdentityMismatch("task aggregates carry different metric sets")
    if len(aggregates) == 1:
        return aggregates[0]
    ordered = sorted(aggregates, key=lambda a: a.task_id)
    pooled = all(set(a.runs) == keys for a in ordered)
    mean, std = {}, {}
    for k in sorted(keys):
        mean[k] = statistics.fmean(a.mean[k] for a in ordered)
        if pooled:
            vals = [v for a in ordered for v in a.runs[k]]
            std[k] = statistics.stdev(vals) if len(vals) > 1 else 0.0
        else:
            std[k] = statistics.fmean(a.std[k] for a in ordered)
    n_runs = min(a.n_runs for a in ordered)
    return AggregateReport(method, task_id, n_runs, mean, std)


class CheckpointEval(NamedTuple):
    checkpoint: int
    profile: object
    split: str = "val"


def _worst_group_score(profile):
    if isinstance(profile, (int, float)):
        return float(profile)
    return float(profile.worst)


def select_checkpoint(history) -> int:
    """Checkpoint with the best worst-group score on validation; earliest wins ties.

    ``history`` holds ``(checkpoint, profile)`` or ``(checkpoint, profile,
    split)`` entries, where ``profile`` is a GroupProfile, a SuccessProfile or
    a bare worst-group score.
    """
    history = [CheckpointEval(*h) for h in history]
    if not history:
        raise EmptyHistory("no validation history")
    bad = sorted({h.split for h in history if h.split != "val"})
    if bad:
        raise WrongSplit(f"selection must use the val split, got {bad}")
    return min(history, key=lambda h: (-_worst_group_score(h.profile), h.checkpoint)).checkpoint


@dataclass(frozen=True)
class TableRow:
    method_id: str
    aggregate: AggregateReport
    comparison: Optional[ComparisonResult]
    marks: Dict[str, str] = field(default_factory=dict)
    is_baseline: bool = False

    def value(self, column):
        if column == "delta_dto":
            return 0.0 if self.comparison is None else self.comparison.delta_dto
        if column == "sigma_hf":
            if "sigma_hf" in self.aggregate.mean:
                return self.aggregate.mean["sigma_hf"]
            return 0.5 if self.comparison is None else self.comparison.sigma_hf
        return self.aggregate.mean[column]

    def spread(self, column):
        if column == "sigma_hf" and "sigma_hf" not in self.aggregate.std:
            return 0.0
        return self.aggregate.std.get(column, 0.0)


@dataclass(frozen=True)
class RankedTable:
    task_id: str
    task_kind: str
    key: str
    columns: Tuple[Column, ...]
    rows: Tuple[TableRow, ...]

    @property
    def baseline(self):
        return self.rows[0]

    @property
    def methods(self):
        return self.rows[1:]


def columns_for(task_kind):
    return LANDMARK_COLUMNS if task_kind == "landmark" else CLASSIFICATION_COLUMNS


def _same_point(a: PerformancePoint, b: PerformancePoint):
    return math.isclose(a.min_group, b.min_group, abs_tol=1e-9) and math.isclose(
        a.max_group, b.max_group, abs_tol=1e-9
    )


def rank_methods(baseline: AggregateReport, methods, key: str = "sigma_hf") -> RankedTable:
    """Order methods by ``key`` and mark the best and second-best cell per column.

    ``methods`` holds ``(AggregateReport, ComparisonResult)`` pairs, all
    computed against ``baseline``. Ties in the sort key, and in marking, are
    resolved by method_id.
    """
    methods = list(methods)
    kind = baseline.task_kind
    columns = columns_for(kind)
    by_name = {c.name: c for c in columns}
    if key not in by_name:
        raise UnknownKey(f"unknown ranking key {key!r}; choose from {list(by_name)}")
    ref = baseline.point()
    for agg, comp in methods:
        if not _same_point(comp.baseline, ref):
            raise MixedBaselines(f"{agg.method_id!r} was compared against a different baseline")
        if agg.task_id != baseline.task_id:
            raise IdentityMismatch(f"{agg.method_id!r} is on task {agg.task_id!r}, baseline on {baseline.task_id!r}")

    rows = [TableRow(a.method_id, a, c) for a, c in methods]
    sign = -1 if by_name[key].better == HIGHER else 1
    rows.sort(key=lambda r: r.method_id)
    rows.sort(key=lambda r: sign * r.value(key))

    marks = {r.method_id: {} for r in rows}
    if rows:
        for col in columns:
            s = -1 if col.better == HIGHER else 1
            order = sorted(rows, key=lambda r: (s * r.value(col.name), r.method_id))
            marks[order[0].method_id][col.name] = "best"
            if len(order) > 1:
                marks[order[1].method_id][col.name] = "second"
    out = [TableRow(baseline.method_id, baseline, None, {}, True)]
    out += [TableRow(r.method_id, r.aggregate, r.comparison, marks[r.method_id]) for r in rows]
    return RankedTable(baseline.task_id, kind, key, columns, tuple(out))


def require_rows(table: RankedTable):
    if not table.rows:
        raise EmptyTable("table has no rows")
    return table
