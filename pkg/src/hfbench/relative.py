"""Baseline-relative scores: distance to the optimum and Harmonic Fairness.

A model is summarised by its worst- and best-group performance, both in
percent. Comparisons against a fixed reference model reward closing the group
gap and raising the best group at the same time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import FairnessError, InfeasiblePoint

SHIFT = 100.0
OPTIMUM = (100.0, 100.0)


@dataclass(frozen=True)
class PerformancePoint:
    min_group: float
    max_group: float

    @property
    def gap(self):
        return self.max_group - self.min_group

    def check(self):
        if not (0.0 <= self.min_group <= self.max_group <= 100.0):
            raise InfeasiblePoint(
                f"({self.min_group}, {self.max_group}) is outside 0 <= min_group <= max_group <= 100"
            )
        return self


@dataclass(frozen=True)
class ComparisonResult:
    baseline: PerformancePoint
    method: PerformancePoint
    delta_gap: float
    delta_max: float
    hf: float
    sigma_hf: float
    dto_baseline: float
    dto_method: float
    delta_dto: float

    def as_dict(self):
        return {
            "baseline": [self.baseline.min_group, self.baseline.max_group],
            "method": [self.method.min_group, self.method.max_group],
            "delta_gap": self.delta_gap,
            "delta_max": self.delta_max,
            "hf": self.hf,
            "sigma_hf": self.sigma_hf,
            "dto_baseline": self.dto_baseline,
            "dto_method": self.dto_method,
            "delta_dto": self.delta_dto,
        }


def distance_to_optimum(min_group: float, max_group: float) -> float:
    """Plain L2 distance from ``(min_group, max_group)`` to (100, 100); no feasibility check."""
    return math.hypot(OPTIMUM[0] - min_group, OPTIMUM[1] - max_group)


def compute_dto(p: PerformancePoint) -> float:
    p.check()
    return distance_to_optimum(p.min_group, p.max_group)


def harmonic_fairness(delta_gap: float, delta_max: float) -> float:
    """Harmonic mean-style combination of the two shifted improvements.

    Both deltas live in [-100, 100]; shifting by 100 keeps the terms
    non-negative. When both shifted terms are 0 the score is 0.
    """
    a = delta_gap + SHIFT
    b = delta_max + SHIFT
    if a + b == 0:
        return 0.0
    return a * b / (a + b)


def sigmoid_rescale(hf: float) -> float:
    """Logistic squashing centred on 50, the score of an unchanged model."""
    if not math.isfinite(hf):
        raise FairnessError(f"hf must be finite, got {hf!r}")
    x = hf - 50.0
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def compare_to_baseline(baseline: PerformancePoint, method: PerformancePoint) -> ComparisonResult:
    baseline.check()
    method.check()
    delta_gap = baseline.gap - method.gap
    delta_max = method.max_group - baseline.max_group
    hf = harmonic_fairness(delta_gap, delta_max)
    dto_b = compute_dto(baseline)
    dto_m = compute_dto(method)
    return ComparisonResult(
        baseline=baseline,
        method=method,
        delta_gap=delta_gap,
        delta_max=delta_max,
        hf=hf,
        sigma_hf=sigmoid_rescale(hf),
        dto_baseline=dto_b,
        dto_method=dto_m,
        delta_dto=dto_b - dto_m,
    )


@dataclass(frozen=True)
class HFGrid:
    """HF over a uniform grid of the (min_group, max_group) square.

    ``hf[i, j]`` holds the score at ``max_group=axis[i]``, ``min_group=axis[j]``;
    infeasible cells (min above max) are NaN.
    """

    baseline: PerformancePoint
    axis: np.ndarray
    hf: np.ndarray

    def cells(self):
        for i, mx in enumerate(self.axis):
            for j, mn in enumerate(self.axis):
                v = self.hf[i, j]
                yield float(mn), float(mx), None if np.isnan(v) else float(v)

    def to_csv(self, decimals=4):
        lines = ["min_group,max_group,hf"]
        for mn, mx, v in self.cells():
            if v is not None:
                lines.append(f"{mn:.{decimals}f},{mx:.{decimals}f},{v:.{decimals}f}")
        return "\n".join(lines) + "\n"


def hf_isoline_grid(baseline: PerformancePoint, resolution: int) -> HFGrid:
    if resolution < 2:
        raise FairnessError("resolution must be at least 2")
    baseline.check()
    axis = np.linspace(0.0, 100.0, resolution)
    mn = axis[None, :]
    mx = axis[:, None]
    a = (baseline.gap - (mx - mn)) + SHIFT
    b = (mx - baseline.max_group) + SHIFT
    denom = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        hf = np.where(denom == 0, 0.0, a * b / denom)
    hf = np.where(mn > mx, np.nan, hf)
    return HFGrid(baseline=baseline, axis=axis, hf=hf)
