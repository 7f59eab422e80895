"""Per-group confusion statistics and absolute group-fairness criteria.

All rates are percentages. Gaps are evaluated on exact rationals built from
integer counts and rounded to float once, so results do not depend on record
order and can be compared bit-for-bit against an independent implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, Optional, Sequence, Tuple

from .exceptions import EmptyConfusion, EmptyInput, SingleGroup, UndefinedRate


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @property
    def positives(self):
        return self.tp + self.fn

    @property
    def negatives(self):
        return self.fp + self.tn


@dataclass(frozen=True)
class RateSet:
    tpr: Optional[float]
    fpr: Optional[float]
    acc: float
    defined_tpr: bool
    defined_fpr: bool


@dataclass(frozen=True)
class GroupProfile:
    per_group: Dict[str, Tuple[Confusion, RateSet]]
    acc_overall: float
    mga: float
    mga_group: str
    m_ga: float
    m_ga_group: str
    da: float
    deo: float
    deodds: float

    def as_metrics(self):
        return {
            "acc": self.acc_overall,
            "mga": self.mga,
            "m_ga": self.m_ga,
            "da": self.da,
            "deo": self.deo,
            "deodds": self.deodds,
        }

    @property
    def worst(self):
        return self.m_ga


def _pct(num, den):
    return Fraction(100 * num, den)


def group_confusion(records: Sequence, positive_label: int = 1) -> Dict[str, Confusion]:
    """Count TP/FP/TN/FN per group, with ``positive_label`` as the positive class."""
    if not records:
        raise EmptyInput("no records to count")
    counts: Dict[str, list] = {}
    for r in records:
        c = counts.setdefault(r.group, [0, 0, 0, 0])
        actual = r.y_true == positive_label
        predicted = r.y_pred == positive_label
        if actual and predicted:
            c[0] += 1
        elif predicted:
            c[1] += 1
        elif actual:
            c[3] += 1
        else:
            c[2] += 1
    return {g: Confusion(*c) for g, c in sorted(counts.items())}


def _exact_rates(conf: Confusion):
    if conf.total == 0:
        raise EmptyConfusion("confusion matrix has no samples")
    tpr = _pct(conf.tp, conf.positives) if conf.positives else None
    fpr = _pct(conf.fp, conf.negatives) if conf.negatives else None
    acc = _pct(conf.tp + conf.tn, conf.total)
    return tpr, fpr, acc


def rates(conf: Confusion) -> RateSet:
    """TPR, FPR and accuracy in percent; 0/0 rates are flagged undefined."""
    tpr, fpr, acc = _exact_rates(conf)
    return RateSet(
        tpr=None if tpr is None else float(tpr),
        fpr=None if fpr is None else float(fpr),
        acc=float(acc),
        defined_tpr=tpr is not None,
        defined_fpr=fpr is not None,
    )


def fairness_report(records: Sequence, manifest=None, *, positive_label: Optional[int] = None) -> GroupProfile:
    """Compute Acc, MGA, mGA, DA, DEO and DEOdds over the groups present.

    With more than two groups DEO and DEOdds take the largest pairwise gap and
    DA the spread between best and worst group accuracy; for two groups this
    is the plain absolute difference.

    Raises :class:`UndefinedRate` when a group has no positives (or no
    negatives), since the equal-opportunity gaps are then meaningless.
    """
    if positive_label is None:
        positive_label = manifest.positive_label if manifest is not None else 1
    conf = group_confusion(records, positive_label)
    if manifest is not None:
        order = [g for g in manifest.group_labels if g in conf]
        order += [g for g in conf if g not in order]
    else:
        order = list(conf)
    if len(order) < 2:
        raise SingleGroup(f"need at least two groups, found {order}")

    exact = {g: _exact_rates(conf[g]) for g in order}
    for g in order:
        if exact[g][0] is None:
            raise UndefinedRate(f"group {g!r} has no positive samples; TPR is undefined")
        if exact[g][1] is None:
            raise UndefinedRate(f"group {g!r} has no negative samples; FPR is undefined")

    # first group in declared order wins ties
    best = max(order, key=lambda g: (exact[g][2], -order.index(g)))
    worst = min(order, key=lambda g: (exact[g][2], order.index(g)))
    deo = Fraction(0)
    deodds = Fraction(0)
    for a, b in combinations(order, 2):
        dt = abs(exact[a][0] - exact[b][0])
        df = abs(exact[a][1] - exact[b][1])
        deo = max(deo, dt)
        deodds = max(deodds, dt + df)

    correct = sum(conf[g].tp + conf[g].tn for g in order)
    acc = _pct(correct, len(records))
    return GroupProfile(
        per_group={g: (conf[g], rates(conf[g])) for g in order},
        acc_overall=float(acc),
        mga=float(exact[best][2]),
        mga_group=best,
        m_ga=float(exact[worst][2]),
        m_ga_group=worst,
        da=float(exact[best][2] - exact[worst][2]),
        deo=float(deo),
        deodds=float(deodds),
    )
