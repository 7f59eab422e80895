"""End-to-end evaluation of a manifest: logs in, ranked tables and sweeps out."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, List

from .aggregate import (
    AggregateReport,
    RankedTable,
    RunReport,
    aggregate_runs,
    average_tasks,
    rank_methods,
    select_checkpoint,
)
from .classify import fairness_report
from .exceptions import FairnessError
from .ingest import read_log
from .landmark import (
    SweepSeries,
    compare_landmark,
    group_nmes,
    group_success_profile,
    profile_from_nmes,
)
from .model import BenchmarkManifest
from .relative import PerformancePoint, compare_to_baseline

log = logging.getLogger(__name__)


def profile_records(records, manifest: BenchmarkManifest, threshold=None):
    if manifest.task_kind == "landmark":
        t = manifest.sdr_threshold if threshold is None else threshold
        return group_success_profile(records, t, manifest.normalization, manifest.group_labels)
    return fairness_report(records, manifest)


def group_by(records, key):
    out = defaultdict(list)
    for r in records:
        out[key(r)].append(r)
    return dict(out)


def select_test_records(records, manifest: BenchmarkManifest):
    """Pick the test records of one (run, task) cell.

    When validation records with checkpoints exist, the checkpoint with the
    best worst-group score is chosen and the matching test records returned.
    Returns ``(records, checkpoint)``.
    """
    val = [r for r in records if r.split == "val" and r.checkpoint is not None]
    test = [r for r in records if r.split == "test"]
    if not test:
        raise FairnessError("no test records")
    chosen = None
    if val:
        history = [(ck, profile_records(rs, manifest), "val") for ck, rs in sorted(group_by(val, lambda r: r.checkpoint).items())]
        chosen = select_checkpoint(history)
    test_cks = {r.checkpoint for r in test}
    if test_cks == {None}:
        return test, chosen
    if chosen is None:
        if len(test_cks) > 1:
            raise FairnessError(f"test records span checkpoints {sorted(c for c in test_cks if c is not None)} "
                                "and no validation history picks one")
        return test, test_cks.pop()
    picked = [r for r in test if r.checkpoint == chosen]
    if not picked:
        raise FairnessError(f"selected checkpoint {chosen} has no test records")
    return picked, chosen


@dataclass
class RunCell:
    method_id: str
    task_id: str
    run_id: str
    checkpoint: object
    records: list
    profile: object


@dataclass
class BenchmarkResult:
    manifest: BenchmarkManifest
    cells: List[RunCell]
    aggregates: Dict[str, Dict[str, AggregateReport]]
    tables: Dict[str, RankedTable]
    parse_reports: Dict[str, object] = field(default_factory=dict)


def load_cells(manifest: BenchmarkManifest, reports=None) -> List[RunCell]:
    cells = []
    for m in manifest.methods:
        for i, path in enumerate(m.runs):
            records, report = read_log(path, manifest)
            if reports is not None:
                reports[path] = report
            if report.records_rejected:
                log.warning("%s: %d rows rejected, first: %s", path, report.records_rejected, report.first_errors[:3])
            by_task = group_by(records, lambda r: (r.task_id, r.run_id))
            for (task, run_id), recs in sorted(by_task.items()):
                test, ck = select_test_records(recs, manifest)
                cells.append(RunCell(m.method_id, task, f"{i}:{run_id}", ck, test, profile_records(test, manifest)))
    return cells


def _with_relative(report: RunReport, hf: float, sigma: float):
    metrics = dict(report.metrics)
    metrics["hf"] = hf
    metrics["sigma_hf"] = sigma
    return replace(report, metrics=metrics)


def run_benchmark(manifest: BenchmarkManifest, key=None) -> BenchmarkResult:
    """Evaluate every run of every method and rank methods per task.

    HF is scored per run against the baseline's run-averaged point and then
    averaged; delta DTO is computed from run-averaged points. With several
    tasks an extra ``average`` table pools the per-task aggregates.
    """
    key = key or manifest.output.key
    parse_reports = {}
    cells = load_cells(manifest, parse_reports)
    tasks = sorted({c.task_id for c in cells})

    def point(profile):
        m = profile.as_metrics()
        return PerformancePoint(m.get("m_ga", m.get("m_gs")), m.get("mga", m.get("mgs")))

    aggregates: Dict[str, Dict[str, AggregateReport]] = {}
    for task in tasks:
        per_method = {}
        base_cells = [c for c in cells if c.task_id == task and c.method_id == manifest.baseline_id]
        if not base_cells:
            raise FairnessError(f"baseline has no runs for task {task!r}")
        base_agg = aggregate_runs([RunReport(c.method_id, task, c.run_id, c.profile.as_metrics()) for c in base_cells])
        ref = base_agg.point()
        for mid in manifest.method_ids:
            mc = [c for c in cells if c.task_id == task and c.method_id == mid]
            if not mc:
                raise FairnessError(f"method {mid!r} has no runs for task {task!r}")
            runs = []
            for c in mc:
                rr = RunReport(mid, task, c.run_id, c.profile.as_metrics())
                if mid == manifest.baseline_id:
                    # the reference scores itself as unchanged
                    runs.append(_with_relative(rr, 50.0, 0.5))
                else:
                    comp = compare_to_baseline(ref, point(c.profile))
                    runs.append(_with_relative(rr, comp.hf, comp.sigma_hf))
            per_method[mid] = aggregate_runs(runs)
        aggregates[task] = per_method

    if len(tasks) > 1:
        aggregates["average"] = {
            mid: average_tasks([aggregates[t][mid] for t in tasks]) for mid in manifest.method_ids
        }

    tables = {}
    for task, per_method in aggregates.items():
        base = per_method[manifest.baseline_id]
        ref = base.point()
        others = [
            (agg, compare_to_baseline(ref, agg.point()))
            for mid, agg in per_method.items()
            if mid != manifest.baseline_id
        ]
        tables[task] = rank_methods(base, others, key)
    return BenchmarkResult(manifest, cells, aggregates, tables, parse_reports)


def compare_method(manifest: BenchmarkManifest, method_id: str):
    """Per-task comparison of one method's run-averaged point with the baseline's."""
    if method_id not in manifest.method_ids:
        raise FairnessError(f"unknown method {method_id!r}")
    result = run_benchmark(manifest)
    out = {}
    for task, per_method in result.aggregates.items():
        base = per_method[manifest.baseline_id]
        agg = per_method[method_id]
        out[task] = (agg, compare_to_baseline(base.point(), agg.point()))
    return out


def _mean_profile(profiles, threshold):
    """Run-averaged success profile; group labels come from the first run."""
    n = len(profiles)
    first = profiles[0]
    groups = list(first.per_group_sdr)
    per_group = {g: sum(p.per_group_sdr[g] for p in profiles) / n for g in groups}
    mgs = sum(p.mgs for p in profiles) / n
    m_gs = sum(p.m_gs for p in profiles) / n
    return replace(
        first,
        sdr_overall=sum(p.sdr_overall for p in profiles) / n,
        per_group_sdr=per_group,
        mgs=mgs,
        m_gs=m_gs,
        ds=mgs - m_gs,
        threshold=threshold,
    )


def manifest_sweep(manifest: BenchmarkManifest, grid) -> SweepSeries:
    """Threshold sweep over a landmark manifest, averaging profiles over runs."""
    if manifest.task_kind != "landmark":
        raise FairnessError("sweep needs a landmark manifest")
    grid = tuple(grid)
    nmes = defaultdict(list)
    for m in manifest.methods:
        for path in m.runs:
            records, _ = read_log(path, manifest)
            for run_id, recs in sorted(group_by(records, lambda r: r.run_id).items()):
                test, _ = select_test_records(recs, manifest)
                nmes[m.method_id].append(group_nmes(test, manifest.normalization))

    def profiles_for(mid):
        return tuple(
            _mean_profile([profile_from_nmes(n, t, manifest.group_labels) for n in nmes[mid]], t) for t in grid
        )

    base = profiles_for(manifest.baseline_id)
    profiles, results = {}, {}
    for mid in manifest.method_ids:
        if mid == manifest.baseline_id:
            continue
        profs = profiles_for(mid)
        profiles[mid] = profs
        results[mid] = tuple(compare_landmark(b, p) for b, p in zip(base, profs))
    return SweepSeries(thresholds=grid, baseline_profiles=base, profiles=profiles, results=results)
