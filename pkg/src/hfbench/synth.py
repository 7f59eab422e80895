"""Synthetic prediction logs with exactly controlled statistics, plus a brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .classify import Confusion, GroupProfile, RateSet
from .exceptions import DegenerateSpec, EmptyInput, SingleGroup, UndefinedRate
from .model import ClassificationRecord, LandmarkRecord


@dataclass(frozen=True)
class GroupSpec:
    group: str
    n_pos: int
    n_neg: int
    tpr: float
    fpr: float

    def counts(self):
        """``(tp, fn, fp, tn)`` with rates realised by round-half-up."""
        tp = _round_half_up(self.tpr, self.n_pos)
        fp = _round_half_up(self.fpr, self.n_neg)
        return tp, self.n_pos - tp, fp, self.n_neg - fp


def _round_half_up(rate, n):
    return int((Decimal(repr(float(rate))) * n).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _check_spec(s: GroupSpec):
    if s.n_pos < 0 or s.n_neg < 0 or s.n_pos + s.n_neg == 0:
        raise DegenerateSpec(f"group {s.group!r} needs a positive sample count")
    if not (0 <= s.tpr <= 1 and 0 <= s.fpr <= 1):
        raise DegenerateSpec(f"group {s.group!r} rates must lie in [0, 1]")


def generate_classification(specs: Sequence[GroupSpec], seed: int, *, run_id="r0", task_id="synthetic",
                            split="test", positive_label=1, checkpoint=None):
    """Records whose per-group confusion matrices match ``specs`` exactly, shuffled by ``seed``."""
    if not specs:
        raise DegenerateSpec("no group specs")
    pos, neg = positive_label, 1 - positive_label
    rows = []
    for s in specs:
        _check_spec(s)
        tp, fn, fp, tn = s.counts()
        rows += [(s.group, pos, pos)] * tp + [(s.group, pos, neg)] * fn
        rows += [(s.group, neg, pos)] * fp + [(s.group, neg, neg)] * tn
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(rows))
    return [
        ClassificationRecord(
            sample_id=f"s{i:05d}",
            y_true=rows[j][1],
            y_pred=rows[j][2],
            group=rows[j][0],
            run_id=run_id,
            task_id=task_id,
            split=split,
            checkpoint=checkpoint,
        )
        for i, j in enumerate(order)
    ]


def landmark_template(k: int, center=(100.0, 100.0), radius=50.0):
    angles = 2 * math.pi * np.arange(k) / k
    return np.stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)], axis=1)


def generate_landmark(n_per_group: Mapping[str, int], k: int, noise_scale: Mapping[str, float], seed: int, *,
                      run_id="r0", split="test", checkpoint=None, norm=None):
    """Ground truth on a fixed circular template; predictions add Gaussian pixel noise per group.

    Noise is drawn from ``numpy.random.default_rng(seed)``, group by group in
    the mapping's order.
    """
    if k < 1:
        raise DegenerateSpec("k must be at least 1")
    if set(noise_scale) != set(n_per_group):
        raise DegenerateSpec("noise_scale must cover exactly the groups in n_per_group")
    for g, n in n_per_group.items():
        if n < 0 or noise_scale[g] < 0:
            raise DegenerateSpec(f"group {g!r}: counts and noise must be non-negative")
    if sum(n_per_group.values()) == 0:
        raise DegenerateSpec("no samples requested")
    gt = landmark_template(k)
    gt_pairs = tuple(map(tuple, gt))
    rng = np.random.default_rng(seed)
    out = []
    idx = 0
    for g, n in n_per_group.items():
        for _ in range(n):
            noise = rng.normal(0.0, 1.0, size=gt.shape) * noise_scale[g]
            out.append(
                LandmarkRecord(
                    sample_id=f"s{idx:05d}",
                    group=g,
                    pred=tuple(map(tuple, gt + noise)),
                    gt=gt_pairs,
                    norm_override=norm,
                    run_id=run_id,
                    split=split,
                    checkpoint=checkpoint,
                )
            )
            idx += 1
    return out


def oracle_report(records, positive_label: int = 1, group_order=None) -> GroupProfile:
    """Brute-force recomputation of the classification fairness profile.

    Scans records directly per group and per label with exact rationals and
    shares no computation with the production path. Intended for tests.
    """
    if not records:
        raise EmptyInput("no records")
    groups = sorted({r.group for r in records})
    if group_order:
        groups = [g for g in group_order if g in groups] + [g for g in groups if g not in group_order]
    if len(groups) < 2:
        raise SingleGroup("need at least two groups")

    def count(g, actual, predicted):
        return sum(
            1 for r in records
            if r.group == g and (r.y_true == positive_label) == actual and (r.y_pred == positive_label) == predicted
        )

    conf, tpr, fpr, acc = {}, {}, {}, {}
    for g in groups:
        c = Confusion(tp=count(g, True, True), fp=count(g, False, True), tn=count(g, False, False),
                      fn=count(g, True, False))
        conf[g] = c
        n_pos = sum(1 for r in records if r.group == g and r.y_true == positive_label)
        n_neg = sum(1 for r in records if r.group == g and r.y_true != positive_label)
        n = sum(1 for r in records if r.group == g)
        if n_pos == 0 or n_neg == 0:
            raise UndefinedRate(f"group {g!r} lacks positives or negatives")
        tpr[g] = Fraction(100) * c.tp / n_pos
        fpr[g] = Fraction(100) * c.fp / n_neg
        acc[g] = Fraction(100) * sum(1 for r in records if r.group == g and r.y_true == r.y_pred) / n

    best = groups[0]
    worst = groups[0]
    for g in groups[1:]:
        if acc[g] > acc[best]:
            best = g
        if acc[g] < acc[worst]:
            worst = g
    deo = max(abs(tpr[a] - tpr[b]) for a in groups for b in groups)
    deodds = max(abs(tpr[a] - tpr[b]) + abs(fpr[a] - fpr[b]) for a in groups for b in groups)
    overall = Fraction(100) * sum(1 for r in records if r.y_true == r.y_pred) / len(records)
    per_group = {
        g: (conf[g], RateSet(float(tpr[g]), float(fpr[g]), float(acc[g]), True, True)) for g in groups
    }
    return GroupProfile(
        per_group=per_group,
        acc_overall=float(overall),
        mga=float(acc[best]),
        mga_group=best,
        m_ga=float(acc[worst]),
        m_ga_group=worst,
        da=float(acc[best] - acc[worst]),
        deo=float(deo),
        deodds=float(deodds),
    )
