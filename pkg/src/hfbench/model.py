"""Shared record types and the benchmark manifest."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

from .exceptions import FairnessError, ManifestError

SPLITS = ("train", "val", "test")
TASK_KINDS = ("classification", "landmark")
NORMALIZATION_KINDS = ("interocular", "fixed", "per_record")
TABLE_FORMATS = ("md", "csv", "tsv")

DEFAULT_SCORE_THRESHOLD = 0.5
DEFAULT_SDR_THRESHOLD = 0.08
# outer eye corners in the 0-indexed 68-point annotation
DEFAULT_INTEROCULAR = (36, 45)

Point2 = Tuple[float, float]


@dataclass(frozen=True)
class ClassificationRecord:
    sample_id: str
    y_true: int
    y_pred: int
    group: str
    run_id: str
    task_id: str
    split: str = "test"
    checkpoint: Optional[int] = None
    score: Optional[float] = None

    def __post_init__(self):
        if self.y_true not in (0, 1) or self.y_pred not in (0, 1):
            raise FairnessError(f"labels must be 0/1, got y_true={self.y_true!r} y_pred={self.y_pred!r}")
        if self.split not in SPLITS:
            raise FairnessError(f"unknown split {self.split!r}")
        if self.checkpoint is not None and self.checkpoint < 0:
            raise FairnessError("checkpoint must be non-negative")

    @property
    def cell(self):
        return (self.run_id, self.task_id, self.split, self.checkpoint)


@dataclass(frozen=True)
class LandmarkRecord:
    sample_id: str
    group: str
    pred: Tuple[Point2, ...]
    gt: Tuple[Point2, ...]
    norm_override: Optional[float] = None
    run_id: str = "r0"
    split: str = "test"
    checkpoint: Optional[int] = None

    def __post_init__(self):
        pred = tuple((float(x), float(y)) for x, y in self.pred)
        gt = tuple((float(x), float(y)) for x, y in self.gt)
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "gt", gt)
        if not pred:
            raise FairnessError("a landmark record needs at least one point")
        if not all(math.isfinite(v) for p in pred + gt for v in p):
            raise FairnessError("coordinates must be finite")
        if self.norm_override is not None and not self.norm_override > 0:
            raise FairnessError("norm_override must be positive")
        if self.split not in SPLITS:
            raise FairnessError(f"unknown split {self.split!r}")

    @property
    def k(self):
        return len(self.gt)

    @property
    def task_id(self):
        # landmark logs carry no task column; one log is one task
        return "landmarks"


@dataclass(frozen=True)
class Normalization:
    """How the NME denominator D is resolved for a landmark record.

    ``interocular`` uses the distance between two ground-truth landmarks,
    ``fixed`` a constant, ``per_record`` the record's own ``norm_override``.
    A record's ``norm_override`` always wins when present.
    """

    kind: str = "interocular"
    indices: Tuple[int, int] = DEFAULT_INTEROCULAR
    value: Optional[float] = None

    @classmethod
    def from_json(cls, obj):
        if obj is None:
            return cls()
        if isinstance(obj, str):
            return cls(kind=obj)
        if not isinstance(obj, dict):
            raise ManifestError([("BadNormalization", f"cannot read normalization from {obj!r}")])
        indices = obj.get("indices", DEFAULT_INTEROCULAR)
        return cls(
            kind=obj.get("kind", "interocular"),
            indices=tuple(indices),
            value=obj.get("value"),
        )

    def to_json(self):
        out = {"kind": self.kind}
        if self.kind == "interocular":
            out["indices"] = list(self.indices)
        if self.kind == "fixed":
            out["value"] = self.value
        return out


@dataclass(frozen=True)
class RenderOptions:
    format: str = "md"
    decimals_pct: int = 2
    decimals_sigma: int = 3
    mark_best: bool = True
    key: str = "sigma_hf"

    @property
    def extension(self):
        return self.format


@dataclass(frozen=True)
class MethodRuns:
    method_id: str
    runs: Tuple[str, ...]


@dataclass(frozen=True)
class BenchmarkManifest:
    task_kind: str
    baseline_id: str
    methods: Tuple[MethodRuns, ...]
    group_labels: Tuple[str, ...]
    positive_label: int = 1
    score_threshold: float = DEFAULT_SCORE_THRESHOLD
    sdr_threshold: float = DEFAULT_SDR_THRESHOLD
    sweep_grid: Optional[Tuple[float, ...]] = None
    normalization: Normalization = field(default_factory=Normalization)
    output: RenderOptions = field(default_factory=RenderOptions)

    @property
    def method_ids(self):
        return [m.method_id for m in self.methods]

    def runs_of(self, method_id):
        for m in self.methods:
            if m.method_id == method_id:
                return m.runs
        raise KeyError(method_id)

    def with_runs_resolved(self, resolve):
        """Return a copy with every run path passed through ``resolve``."""
        methods = tuple(MethodRuns(m.method_id, tuple(resolve(r) for r in m.runs)) for m in self.methods)
        return replace(self, methods=methods)


def _in_open_unit(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and 0 < x < 1


def manifest_violations(m: BenchmarkManifest):
    """List every ``(code, message)`` violation of the manifest invariants."""
    out = []
    if m.task_kind not in TASK_KINDS:
        out.append(("BadTaskKind", f"task_kind must be one of {TASK_KINDS}, got {m.task_kind!r}"))
    ids = m.method_ids
    seen = set()
    for mid in ids:
        if mid in seen:
            out.append(("DuplicateMethodId", f"method_id {mid!r} appears more than once"))
        seen.add(mid)
    if not ids:
        out.append(("MissingBaseline", "no methods declared"))
    elif m.baseline_id not in seen:
        out.append(("MissingBaseline", f"baseline_id {m.baseline_id!r} is not among the methods"))
    for meth in m.methods:
        if not meth.runs:
            out.append(("EmptyRuns", f"method {meth.method_id!r} has no runs"))
    if len(m.group_labels) < 2 or len(set(m.group_labels)) != len(m.group_labels):
        out.append(("BadGroups", "group_labels must list at least two distinct labels"))
    if m.positive_label not in (0, 1):
        out.append(("BadPositiveLabel", "positive_label must be 0 or 1"))
    if not _in_open_unit(m.score_threshold):
        out.append(("BadThreshold", f"score_threshold must lie in (0, 1), got {m.score_threshold!r}"))
    if not _in_open_unit(m.sdr_threshold):
        out.append(("BadThreshold", f"sdr_threshold must lie in (0, 1), got {m.sdr_threshold!r}"))
    if m.sweep_grid is not None:
        grid = list(m.sweep_grid)
        if not grid or not all(_in_open_unit(t) for t in grid):
            out.append(("BadThreshold", "sweep_grid entries must lie in (0, 1)"))
        elif any(b <= a for a, b in zip(grid, grid[1:])):
            out.append(("BadThreshold", "sweep_grid must be strictly ascending"))
    norm = m.normalization
    if norm.kind not in NORMALIZATION_KINDS:
        out.append(("BadNormalization", f"normalization kind must be one of {NORMALIZATION_KINDS}"))
    elif norm.kind == "fixed" and not (isinstance(norm.value, (int, float)) and norm.value > 0):
        out.append(("BadNormalization", "fixed normalization needs a positive value"))
    elif norm.kind == "interocular":
        i = norm.indices
        if len(i) != 2 or i[0] == i[1] or min(i) < 0:
            out.append(("BadNormalization", "interocular indices must be two distinct non-negative integers"))
    o = m.output
    if o.format not in TABLE_FORMATS:
        out.append(("BadOutput", f"output format must be one of {TABLE_FORMATS}"))
    if o.decimals_pct < 0 or o.decimals_sigma < 0:
        out.append(("BadOutput", "decimals must be non-negative"))
    return out


def validate_manifest(m: BenchmarkManifest) -> BenchmarkManifest:
    """Return ``m`` unchanged when valid, else raise :class:`ManifestError` listing all violations."""
    violations = manifest_violations(m)
    if violations:
        raise ManifestError(violations)
    return m


def manifest_from_dict(obj: dict) -> BenchmarkManifest:
    if not isinstance(obj, dict):
        raise ManifestError([("BadStructure", "manifest must be a JSON object")])
    missing = [k for k in ("task_kind", "baseline_id", "methods", "group_labels") if k not in obj]
    if missing:
        raise ManifestError([("MissingField", f"missing field {k!r}") for k in missing])
    methods = []
    for entry in obj["methods"]:
        if not isinstance(entry, dict) or "method_id" not in entry:
            raise ManifestError([("BadStructure", f"method entry needs a method_id: {entry!r}")])
        methods.append(MethodRuns(str(entry["method_id"]), tuple(entry.get("runs", ()))))
    grid = obj.get("sweep_grid")
    out = obj.get("output") or {}
    fmt = out.get("format", "md")
    output = RenderOptions(
        format="md" if fmt == "markdown" else fmt,
        decimals_pct=int(out.get("decimals_pct", 2)),
        decimals_sigma=int(out.get("decimals_sigma", 3)),
        mark_best=bool(out.get("mark_best", True)),
        key=out.get("key", "sigma_hf"),
    )
    return BenchmarkManifest(
        task_kind=obj["task_kind"],
        baseline_id=str(obj["baseline_id"]),
        methods=tuple(methods),
        group_labels=tuple(str(g) for g in obj["group_labels"]),
        positive_label=obj.get("positive_label", 1),
        score_threshold=obj.get("score_threshold", DEFAULT_SCORE_THRESHOLD),
        sdr_threshold=obj.get("sdr_threshold", DEFAULT_SDR_THRESHOLD),
        sweep_grid=tuple(grid) if grid is not None else None,
        normalization=Normalization.from_json(obj.get("normalization")),
        output=output,
    )


def manifest_to_dict(m: BenchmarkManifest) -> dict:
    out = {
        "task_kind": m.task_kind,
        "baseline_id": m.baseline_id,
        "methods": [{"method_id": x.method_id, "runs": list(x.runs)} for x in m.methods],
        "group_labels": list(m.group_labels),
        "positive_label": m.positive_label,
        "score_threshold": m.score_threshold,
        "sdr_threshold": m.sdr_threshold,
        "normalization": m.normalization.to_json(),
        "output": {
            "format": m.output.format,
            "decimals_pct": m.output.decimals_pct,
            "decimals_sigma": m.output.decimals_sigma,
            "mark_best": m.output.mark_best,
            "key": m.output.key,
        },
    }
    if m.sweep_grid is not None:
        out["sweep_grid"] = list(m.sweep_grid)
    return out


def check_groups(records: Sequence, declared: Sequence[str]):
    """Raise if any record uses a group label outside ``declared``."""
    allowed = set(declared)
    bad = sorted({r.group for r in records} - allowed)
    if bad:
        raise FairnessError(f"groups {bad} are not declared in the manifest")
