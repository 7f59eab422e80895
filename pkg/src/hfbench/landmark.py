"""Landmark localisation: NME, success rates per group, sweeps, heatmap decoding."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from .exceptions import (
    EmptyGroup,
    EmptyInput,
    EmptySeries,
    FairnessError,
    KMismatch,
    NonFiniteValue,
    SingleGroup,
    ThresholdMismatch,
    ZeroNormalization,
)
from .model import Normalization
from .relative import ComparisonResult, PerformancePoint, compare_to_baseline

# 1% to 10% in 0.5% steps
DEFAULT_SWEEP_GRID = tuple(round(0.01 + 0.005 * i, 4) for i in range(19))


@dataclass(frozen=True)
class SuccessProfile:
    sdr_overall: float
    per_group_sdr: Dict[str, float]
    mgs: float
    mgs_group: str
    m_gs: float
    m_gs_group: str
    ds: float
    threshold: float

    def as_metrics(self):
        return {"sdr": self.sdr_overall, "mgs": self.mgs, "m_gs": self.m_gs, "ds": self.ds}

    @property
    def point(self):
        return PerformancePoint(self.m_gs, self.mgs)

    @property
    def worst(self):
        return self.m_gs


@dataclass(frozen=True)
class SweepSeries:
    thresholds: Tuple[float, ...]
    baseline_profiles: Tuple[SuccessProfile, ...]
    profiles: Dict[str, Tuple[SuccessProfile, ...]]
    results: Dict[str, Tuple[ComparisonResult, ...]]

    def rows(self):
        """``(method_id, threshold, profile, comparison)`` in method then threshold order."""
        for mid, comps in self.results.items():
            for t, prof, comp in zip(self.thresholds, self.profiles[mid], comps):
                yield mid, t, prof, comp


def resolve_norm(rec, normalization: Normalization) -> float:
    if rec.norm_override is not None:
        d = rec.norm_override
    elif normalization.kind == "fixed":
        d = normalization.value
    elif normalization.kind == "per_record":
        raise ZeroNormalization(f"record {rec.sample_id!r} has no norm value")
    else:
        i, j = normalization.indices
        if max(i, j) >= rec.k:
            raise FairnessError(f"interocular indices {i},{j} out of range for K={rec.k}")
        (x0, y0), (x1, y1) = rec.gt[i], rec.gt[j]
        d = float(np.hypot(x1 - x0, y1 - y0))
    if d is None or not d > 0:
        raise ZeroNormalization(f"normalization distance for {rec.sample_id!r} is {d}")
    return d


def nme(rec, normalization: Normalization = Normalization()) -> float:
    """Mean per-landmark L2 error divided by the normalization distance."""
    pred = np.asarray(rec.pred, dtype=float)
    gt = np.asarray(rec.gt, dtype=float)
    if pred.shape != gt.shape:
        raise KMismatch(f"pred has {len(pred)} points, gt has {len(gt)}")
    d = resolve_norm(rec, normalization)
    err = np.sqrt(((pred - gt) ** 2).sum(axis=1))
    return float(err.mean() / d)


def sdr(nmes: Sequence[float], threshold: float) -> float:
    """Percentage of NMEs strictly below ``threshold``."""
    if len(nmes) == 0:
        raise EmptyInput("no NME values")
    if threshold < 0:
        raise FairnessError("threshold must be non-negative")
    hits = sum(1 for v in nmes if v < threshold)
    return 100.0 * hits / len(nmes)


def group_nmes(records: Sequence, normalization: Normalization) -> Dict[str, list]:
    """NMEs per group, accumulated in ascending sample_id order."""
    out = defaultdict(list)
    for rec in sorted(records, key=lambda r: r.sample_id):
        out[rec.group].append(nme(rec, normalization))
    return dict(out)


def profile_from_nmes(nmes_by_group: Mapping[str, Sequence[float]], threshold: float, group_order=None) -> SuccessProfile:
    order = list(group_order) if group_order else sorted(nmes_by_group)
    order = [g for g in order if g in nmes_by_group] + [g for g in sorted(nmes_by_group) if g not in order]
    for g in order:
        if len(nmes_by_group[g]) == 0:
            raise EmptyGroup(f"group {g!r} has no records")
    if len(order) < 2:
        raise SingleGroup(f"need at least two groups, found {order}")
    hits = {g: sum(1 for v in nmes_by_group[g] if v < threshold) for g in order}
    sizes = {g: len(nmes_by_group[g]) for g in order}
    rate = {g: 100.0 * hits[g] / sizes[g] for g in order}
    best = max(order, key=lambda g: (rate[g], -order.index(g)))
    worst = min(order, key=lambda g: (rate[g], order.index(g)))
    return SuccessProfile(
        sdr_overall=100.0 * sum(hits.values()) / sum(sizes.values()),
        per_group_sdr=rate,
        mgs=rate[best],
        mgs_group=best,
        m_gs=rate[worst],
        m_gs_group=worst,
        ds=rate[best] - rate[worst],
        threshold=threshold,
    )


def group_success_profile(records, threshold: float = 0.08, normalization: Normalization = Normalization(), group_order=None):
    if not records:
        raise EmptyInput("no landmark records")
    return profile_from_nmes(group_nmes(records, normalization), threshold, group_order)


def compare_landmark(baseline: SuccessProfile, method: SuccessProfile) -> ComparisonResult:
    if baseline.threshold != method.threshold:
        raise ThresholdMismatch(f"baseline at {baseline.threshold}, method at {method.threshold}")
    return compare_to_baseline(baseline.point, method.point)


def threshold_sweep(baseline_records, method_records, grid=DEFAULT_SWEEP_GRID,
                    normalization: Normalization = Normalization(), group_order=None) -> SweepSeries:
    """Compare every method with the baseline at each SDR threshold in ``grid``.

    ``method_records`` maps method ids to record lists (a bare list is taken
    as a single method called ``"method"``). NMEs are computed once per record.
    """
    grid = tuple(grid)
    if not grid:
        raise EmptySeries("empty threshold grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise FairnessError("threshold grid must be strictly ascending")
    if not isinstance(method_records, Mapping):
        method_records = {"method": method_records}
    base_nmes = group_nmes(baseline_records, normalization)
    base_profiles = tuple(profile_from_nmes(base_nmes, t, group_order) for t in grid)
    profiles = {}
    results = {}
    for mid, recs in method_records.items():
        nmes_m = group_nmes(recs, normalization)
        profs = tuple(profile_from_nmes(nmes_m, t, group_order) for t in grid)
        profiles[mid] = profs
        results[mid] = tuple(compare_landmark(b, p) for b, p in zip(base_profiles, profs))
    return SweepSeries(thresholds=grid, baseline_profiles=base_profiles, profiles=profiles, results=results)


def decode_heatmaps(heatmaps) -> np.ndarray:
    """Return a ``(K, 2)`` array of ``(x, y)`` = (column, row) argmax positions.

    ``heatmaps`` has shape ``(H, W, K)``. Ties resolve to the first cell in
    row-major order.
    """
    hm = np.asarray(heatmaps, dtype=float)
    if hm.ndim != 3 or min(hm.shape) < 1:
        raise FairnessError(f"expected an H x W x K array, got shape {hm.shape}")
    if not np.isfinite(hm).all():
        raise NonFiniteValue("heatmaps contain NaN or infinite values")
    h, w, k = hm.shape
    flat = hm.reshape(h * w, k)
    idx = flat.argmax(axis=0)
    rows, cols = np.divmod(idx, w)
    return np.stack([cols, rows], axis=1).astype(int)
