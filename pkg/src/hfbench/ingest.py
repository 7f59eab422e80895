"""Readers and writers for prediction logs and manifests.

Classification logs are CSV (header required, any column order) or JSONL.
Landmark logs are JSONL only. Bad rows are rejected and counted in a
:class:`ParseReport`; they are never dropped silently.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Tuple, Union

from .exceptions import EmptyLog, FairnessError, ManifestSyntaxError, MissingColumn
from .model import (
    BenchmarkManifest,
    ClassificationRecord,
    LandmarkRecord,
    manifest_from_dict,
    validate_manifest,
)

MAX_REPORTED_ERRORS = 20

CLASSIFICATION_COLUMNS = ("sample_id", "y_true", "group", "run_id", "task_id", "split")
LANDMARK_KEYS = ("sample_id", "group", "pred", "gt", "run_id", "split")

Source = Union[str, Iterable[str], io.TextIOBase]


@dataclass
class ParseReport:
    records_parsed: int = 0
    records_rejected: int = 0
    first_errors: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def total(self):
        return self.records_parsed + self.records_rejected

    def reject(self, lineno, code, detail=""):
        self.records_rejected += 1
        if len(self.first_errors) < MAX_REPORTED_ERRORS:
            self.first_errors.append((lineno, f"{code}: {detail}" if detail else code))

    def codes(self):
        return [reason.split(":", 1)[0] for _, reason in self.first_errors]


class _Reject(Exception):
    def __init__(self, code, detail=""):
        super().__init__(detail)
        self.code = code
        self.detail = detail


def _lines(source: Source) -> List[str]:
    if isinstance(source, str):
        return source.splitlines()
    # joining first makes the result independent of how the stream is chunked
    return "".join(source).splitlines()


def _looks_like_jsonl(lines):
    for line in lines:
        if line.strip():
            return line.lstrip().startswith("{")
    return False


def _label(value, name):
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, str):
        value = value.strip()
        if value not in ("0", "1"):
            raise _Reject("MalformedLine", f"{name} must be 0 or 1, got {value!r}")
        return int(value)
    if value not in (0, 1):
        raise _Reject("MalformedLine", f"{name} must be 0 or 1, got {value!r}")
    return int(value)


def _checkpoint(value):
    if value is None or value == "":
        return None
    try:
        ck = int(value)
    except (TypeError, ValueError):
        raise _Reject("MalformedLine", f"checkpoint must be an integer, got {value!r}") from None
    if ck < 0 or (isinstance(value, float) and not value.is_integer()):
        raise _Reject("MalformedLine", f"bad checkpoint {value!r}")
    return ck


def _score(value):
    try:
        s = float(value)
    except (TypeError, ValueError):
        raise _Reject("MalformedLine", f"score must be a number, got {value!r}") from None
    if not (0.0 <= s <= 1.0):
        raise _Reject("MalformedLine", f"score must lie in [0, 1], got {value!r}")
    return s


def _classification_row(row, manifest, groups):
    missing = [c for c in CLASSIFICATION_COLUMNS if row.get(c) in (None, "")]
    has_pred = row.get("y_pred") not in (None, "")
    has_score = row.get("score") not in (None, "")
    if not (has_pred or has_score):
        missing.append("y_pred|score")
    if missing:
        raise _Reject("MissingColumn", ", ".join(missing))
    group = str(row["group"]).strip()
    if group not in groups:
        raise _Reject("UnknownGroup", repr(group))
    score = _score(row["score"]) if has_score else None
    if has_pred:
        y_pred = _label(row["y_pred"], "y_pred")
    else:
        pos = manifest.positive_label
        y_pred = pos if score >= manifest.score_threshold else 1 - pos
    split = str(row["split"]).strip()
    try:
        return ClassificationRecord(
            sample_id=str(row["sample_id"]).strip(),
            y_true=_label(row["y_true"], "y_true"),
            y_pred=y_pred,
            group=group,
            run_id=str(row["run_id"]).strip(),
            task_id=str(row["task_id"]).strip(),
            split=split,
            checkpoint=_checkpoint(row.get("checkpoint")),
            score=score,
        )
    except FairnessError as e:
        raise _Reject("MalformedLine", str(e)) from None


def _finish(records, report, what):
    if not records:
        raise EmptyLog(f"no valid {what} records ({report.records_rejected} rejected)", report)
    return records, report


def parse_classification_log(source: Source, manifest: BenchmarkManifest):
    """Parse a classification log into ``(records, ParseReport)``.

    Scores are thresholded with ``>=`` so ties go to the positive label. A
    missing required CSV header column raises :class:`MissingColumn`; per-row
    problems are recorded in the report.
    """
    lines = _lines(source)
    groups = set(manifest.group_labels)
    report = ParseReport()
    records = []
    seen = set()

    def accept(lineno, row):
        try:
            rec = _classification_row(row, manifest, groups)
        except _Reject as r:
            report.reject(lineno, r.code, r.detail)
            return
        key = rec.cell + (rec.sample_id,)
        if key in seen:
            report.reject(lineno, "DuplicateSample", rec.sample_id)
            return
        seen.add(key)
        records.append(rec)
        report.records_parsed += 1

    if _looks_like_jsonl(lines):
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                report.reject(lineno, "MalformedLine", e.msg)
                continue
            if not isinstance(row, dict):
                report.reject(lineno, "MalformedLine", "expected a JSON object")
                continue
            accept(lineno, row)
        return _finish(records, report, "classification")

    nonblank = [(i, ln) for i, ln in enumerate(lines, 1) if ln.strip()]
    if not nonblank:
        raise EmptyLog("log is empty", report)
    header = next(csv.reader([nonblank[0][1]]))
    header = [h.strip() for h in header]
    need = [c for c in CLASSIFICATION_COLUMNS if c not in header]
    if "y_pred" not in header and "score" not in header:
        need.append("y_pred|score")
    if need:
        raise MissingColumn(f"CSV header lacks {', '.join(need)}")
    for lineno, line in nonblank[1:]:
        values = next(csv.reader([line]))
        if len(values) != len(header):
            report.reject(lineno, "MalformedLine", f"expected {len(header)} fields, got {len(values)}")
            continue
        accept(lineno, dict(zip(header, values)))
    return _finish(records, report, "classification")


def _points(value, name):
    if not isinstance(value, list) or not value:
        raise _Reject("MalformedLine", f"{name} must be a non-empty list of [x, y] pairs")
    out = []
    for p in value:
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise _Reject("MalformedLine", f"{name} entries must be [x, y] pairs")
        try:
            x, y = float(p[0]), float(p[1])
        except (TypeError, ValueError):
            raise _Reject("MalformedLine", f"{name} holds a non-numeric coordinate") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise _Reject("NonFiniteCoordinate", name)
        out.append((x, y))
    return tuple(out)


def parse_landmark_log(source: Source, manifest: BenchmarkManifest):
    """Parse a JSONL landmark log into ``(records, ParseReport)``.

    The first accepted line fixes K; later lines with a different K, or with
    pred/gt of different lengths, are rejected as ``KMismatch``.
    """
    lines = _lines(source)
    groups = set(manifest.group_labels)
    report = ParseReport()
    records = []
    seen = set()
    k = None
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            try:
                row = json.loads(line, parse_constant=lambda c: float(c))
            except json.JSONDecodeError as e:
                raise _Reject("MalformedLine", e.msg) from None
            if not isinstance(row, dict):
                raise _Reject("MalformedLine", "expected a JSON object")
            missing = [c for c in LANDMARK_KEYS if c not in row]
            if missing:
                raise _Reject("MissingColumn", ", ".join(missing))
            group = str(row["group"])
            if group not in groups:
                raise _Reject("UnknownGroup", repr(group))
            pred = _points(row["pred"], "pred")
            gt = _points(row["gt"], "gt")
            if len(pred) != len(gt):
                raise _Reject("KMismatch", f"pred has {len(pred)} points, gt has {len(gt)}")
            if k is not None and len(gt) != k:
                raise _Reject("KMismatch", f"K={len(gt)} differs from K={k} earlier in the file")
            norm = row.get("norm")
            if norm is not None:
                try:
                    norm = float(norm)
                except (TypeError, ValueError):
                    raise _Reject("MalformedLine", "norm must be a number") from None
                if not math.isfinite(norm):
                    raise _Reject("NonFiniteCoordinate", "norm")
                if norm <= 0:
                    raise _Reject("MalformedLine", "norm must be positive")
            try:
                rec = LandmarkRecord(
                    sample_id=str(row["sample_id"]),
                    group=group,
                    pred=pred,
                    gt=gt,
                    norm_override=norm,
                    run_id=str(row["run_id"]),
                    split=str(row["split"]),
                    checkpoint=_checkpoint(row.get("checkpoint")),
                )
            except FairnessError as e:
                raise _Reject("MalformedLine", str(e)) from None
            key = (rec.run_id, rec.split, rec.checkpoint, rec.sample_id)
            if key in seen:
                raise _Reject("DuplicateSample", rec.sample_id)
        except _Reject as r:
            report.reject(lineno, r.code, r.detail)
            continue
        seen.add(key)
        k = len(gt)
        records.append(rec)
        report.records_parsed += 1
    return _finish(records, report, "landmark")


def load_manifest(source: str) -> BenchmarkManifest:
    """Parse manifest JSON text, fill defaults and validate."""
    try:
        obj = json.loads(source)
    except json.JSONDecodeError as e:
        raise ManifestSyntaxError(e.msg, e.lineno, e.colno) from None
    return validate_manifest(manifest_from_dict(obj))


def load_manifest_file(path) -> BenchmarkManifest:
    """Load a manifest from disk, resolving run paths against its directory."""
    path = Path(path)
    manifest = load_manifest(path.read_text(encoding="utf-8"))
    base = path.parent
    return manifest.with_runs_resolved(lambda r: str(r if Path(r).is_absolute() else base / r))


def read_log(path, manifest: BenchmarkManifest):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if manifest.task_kind == "landmark":
        return parse_landmark_log(text, manifest)
    return parse_classification_log(text, manifest)


def write_classification_log(records, fmt="csv") -> str:
    """Serialize records in the canonical CSV or JSONL layout."""
    has_ck = any(r.checkpoint is not None for r in records)
    has_score = any(r.score is not None for r in records)
    cols = ["sample_id", "y_true", "y_pred", "group", "run_id", "task_id", "split"]
    if has_score:
        cols.append("score")
    if has_ck:
        cols.append("checkpoint")

    def row(r):
        d = {
            "sample_id": r.sample_id,
            "y_true": r.y_true,
            "y_pred": r.y_pred,
            "group": r.group,
            "run_id": r.run_id,
            "task_id": r.task_id,
            "split": r.split,
        }
        if has_score:
            d["score"] = r.score
        if has_ck:
            d["checkpoint"] = r.checkpoint
        return d

    if fmt == "jsonl":
        return "".join(json.dumps({k: v for k, v in row(r).items() if v is not None}) + "\n" for r in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in records:
        d = row(r)
        writer.writerow(["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c]) for c in cols])
    return buf.getvalue()


def write_landmark_log(records) -> str:
    out = []
    for r in records:
        d = {
            "sample_id": r.sample_id,
            "group": r.group,
            "pred": [list(p) for p in r.pred],
            "gt": [list(p) for p in r.gt],
            "run_id": r.run_id,
            "split": r.split,
        }
        if r.norm_override is not None:
            d["norm"] = r.norm_override
        if r.checkpoint is not None:
            d["checkpoint"] = r.checkpoint
        out.append(json.dumps(d) + "\n")
    return "".join(out)
