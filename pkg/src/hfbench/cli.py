"""Command line entry point: ``hfbench <subcommand> ...``.

Exit codes: 0 on success, 1 for input or validation errors, 2 for anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .aggregate import select_checkpoint
from .benchmark import group_by, compare_method, manifest_sweep, profile_records, run_benchmark
from .exceptions import FairnessError
from .ingest import load_manifest_file, read_log, write_classification_log, write_landmark_log
from .landmark import DEFAULT_SWEEP_GRID
from .model import BenchmarkManifest, manifest_from_dict, manifest_to_dict, validate_manifest
from .relative import PerformancePoint, hf_isoline_grid
from .render import render_sweep_plot, render_table
from .synth import GroupSpec, generate_classification, generate_landmark

log = logging.getLogger("hfbench")


def parse_grid(text):
    """``a:b:step`` to an inclusive ascending tuple of thresholds."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise FairnessError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise FairnessError("grid needs step > 0 and b >= a")
    n = int(round((b - a) / step))
    return tuple(round(a + i * step, 10) for i in range(n + 1))


def _manifest(args) -> BenchmarkManifest:
    m = load_manifest_file(args.manifest)
    if getattr(args, "threshold", None) is not None:
        field = "sdr_threshold" if m.task_kind == "landmark" else "score_threshold"
        m = validate_manifest(replace(m, **{field: args.threshold}))
    if getattr(args, "format", None):
        m = replace(m, output=replace(m.output, format=args.format))
    if getattr(args, "key", None):
        m = replace(m, output=replace(m.output, key=args.key))
    return m


def _emit(args, payload, text=None):
    if args.json or text is None:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _profile_dict(profile):
    d = dict(profile.as_metrics())
    if hasattr(profile, "mga_group"):
        d["mga_group"] = profile.mga_group
        d["m_ga_group"] = profile.m_ga_group
        d["groups"] = {
            g: {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "tpr": r.tpr, "fpr": r.fpr, "acc": r.acc}
            for g, (c, r) in profile.per_group.items()
        }
    else:
        d["mgs_group"] = profile.mgs_group
        d["m_gs_group"] = profile.m_gs_group
        d["threshold"] = profile.threshold
        d["groups"] = dict(profile.per_group_sdr)
    return d


def cmd_evaluate(args):
    manifest = _manifest(args)
    records, report = read_log(args.log, manifest)
    cells = []
    for (run, task, split, ck), recs in sorted(
        group_by(records, lambda r: (r.run_id, r.task_id, r.split, r.checkpoint)).items(),
        key=lambda kv: tuple("" if v is None else str(v) for v in kv[0]),
    ):
        cells.append({
            "run_id": run, "task_id": task, "split": split, "checkpoint": ck,
            "n_records": len(recs), "metrics": _profile_dict(profile_records(recs, manifest)),
        })
    payload = {
        "log": str(args.log),
        "records_parsed": report.records_parsed,
        "records_rejected": report.records_rejected,
        "first_errors": report.first_errors,
        "cells": cells,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_compare(args):
    manifest = _manifest(args)
    out = compare_method(manifest, args.method)
    payload = {task: {"aggregate": agg.mean, "comparison": comp.as_dict()} for task, (agg, comp) in out.items()}
    lines = []
    for task, (_, c) in out.items():
        lines.append(
            f"{task}: {args.method} vs {manifest.baseline_id}  dGap={c.delta_gap:+.2f}  dMax={c.delta_max:+.2f}  "
            f"HF={c.hf:.2f}  sigma(HF)={c.sigma_hf:.3f}  dDTO={c.delta_dto:+.2f}"
        )
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_rank(args):
    manifest = _manifest(args)
    result = run_benchmark(manifest)
    opts = manifest.output
    texts = []
    for task, table in result.tables.items():
        body = render_table(table, opts)
        texts.append(f"## {task}\n\n{body}" if opts.format == "md" else body)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if len(result.tables) == 1:
            (out / f"rank.{opts.extension}").write_text(texts[0], encoding="utf-8")
        else:
            for task, text in zip(result.tables, texts):
                (out / f"rank.{task}.{opts.extension}").write_text(text, encoding="utf-8")
    payload = {
        task: [
            {
                "method_id": row.method_id,
                "baseline": row.is_baseline,
                "values": {c.name: row.value(c.name) for c in table.columns},
                "sigma_hf_std": row.spread("sigma_hf"),
                "marks": row.marks,
            }
            for row in table.rows
        ]
        for task, table in result.tables.items()
    }
    _emit(args, payload, "\n".join(texts))
    return 0


def cmd_sweep(args):
    manifest = _manifest(args)
    grid = parse_grid(args.grid) if args.grid else (manifest.sweep_grid or DEFAULT_SWEEP_GRID)
    series = manifest_sweep(manifest, grid)
    csv_text, svg_text = render_sweep_plot(series, manifest.output, svg=bool(args.out), metric=args.metric)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(csv_text, encoding="utf-8")
        (out / "sweep.svg").write_text(svg_text, encoding="utf-8")
    payload = [
        {"method_id": mid, "threshold": t, "mgs": p.mgs, "m_gs": p.m_gs, "ds": p.ds,
         "hf": c.hf, "sigma_hf": c.sigma_hf, "delta_dto": c.delta_dto}
        for mid, t, p, c in series.rows()
    ]
    _emit(args, payload, csv_text)
    return 0


def cmd_isolines(args):
    if args.baseline:
        try:
            lo, hi = (float(x) for x in args.baseline.split(","))
        except ValueError:
            raise FairnessError("--baseline must look like MIN,MAX") from None
        ref = PerformancePoint(lo, hi)
    elif args.manifest:
        manifest = _manifest(args)
        result = run_benchmark(manifest)
        task = "average" if "average" in result.tables else next(iter(result.tables))
        ref = result.tables[task].baseline.aggregate.point()
    else:
        raise FairnessError("isolines needs --baseline MIN,MAX or --manifest")
    grid = hf_isoline_grid(ref, args.resolution)
    text = grid.to_csv()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "isolines.csv").write_text(text, encoding="utf-8")
    payload = {"baseline": [ref.min_group, ref.max_group], "resolution": args.resolution,
               "cells": [[a, b, v] for a, b, v in grid.cells() if v is not None]}
    if args.json:
        _emit(args, payload)
    elif not args.out:
        print(text, end="")
    return 0


def cmd_select(args):
    manifest = _manifest(args)
    records, _ = read_log(args.log, manifest)
    picks = []
    for (run, task), recs in sorted(group_by(records, lambda r: (r.run_id, r.task_id)).items()):
        val = [r for r in recs if r.split == "val" and r.checkpoint is not None]
        if not val:
            raise FairnessError(f"run {run!r} task {task!r} has no validation records with checkpoints")
        history = []
        for ck, rs in sorted(group_by(val, lambda r: r.checkpoint).items()):
            history.append((ck, profile_records(rs, manifest), "val"))
        chosen = select_checkpoint(history)
        picks.append({
            "run_id": run, "task_id": task, "checkpoint": chosen,
            "history": [{"checkpoint": ck, "worst_group": p.worst} for ck, p, _ in history],
        })
    text = "\n".join(f"{p['run_id']}\t{p['task_id']}\t{p['checkpoint']}" for p in picks)
    _emit(args, picks, text)
    return 0


# demo scenario for `synth`: per-method (tpr, fpr) by group, or pixel noise by group
_CLS_SCENARIO = {
    "Baseline": {"Male": (0.85, 0.10), "Female": (0.62, 0.28)},
    "Align": {"Male": (0.86, 0.09), "Female": (0.74, 0.18)},
    "LevelDown": {"Male": (0.72, 0.22), "Female": (0.66, 0.26)},
}
_LMK_SCENARIO = {
    "Baseline": {"light": 1.9, "dark": 2.4},
    "RegAdapt": {"light": 1.7, "dark": 1.8},
    "Adversarial": {"light": 1.8, "dark": 2.1},
}


def _synth_classification(out: Path, seed: int, n_runs: int, n: int):
    rng = np.random.default_rng(seed)
    groups = ["Male", "Female"]
    methods = []
    for mid, spec in _CLS_SCENARIO.items():
        runs = []
        for r in range(n_runs):
            recs = []
            for ck in (500, 1000, 1500):
                for split in ("val", "test"):
                    specs = []
                    for g in groups:
                        tpr, fpr = spec[g]
                        j = rng.uniform(-0.04, 0.04, size=2)
                        specs.append(GroupSpec(g, n, n, float(np.clip(tpr + j[0], 0, 1)),
                                               float(np.clip(fpr + j[1], 0, 1))))
                    part = generate_classification(specs, int(rng.integers(2**31)), run_id=f"r{r}",
                                                   task_id="EyeBags", split=split, checkpoint=ck)
                    recs += [replace(x, sample_id=f"{split}{ck}-{x.sample_id}") for x in part]
            name = f"{mid}_run{r}.csv"
            (out / name).write_text(write_classification_log(recs), encoding="utf-8")
            runs.append(name)
        methods.append({"method_id": mid, "runs": runs})
    return {"task_kind": "classification", "baseline_id": "Baseline", "methods": methods,
            "group_labels": groups, "positive_label": 1, "score_threshold": 0.5}


def _synth_landmark(out: Path, seed: int, n_runs: int, n: int, k: int = 68):
    rng = np.random.default_rng(seed)
    methods = []
    spread = (0.6, 0.8, 1.0, 1.2, 1.4)
    for mid, noise in _LMK_SCENARIO.items():
        runs = []
        for r in range(n_runs):
            recs = []
            for i, f in enumerate(spread):
                part = generate_landmark({g: n // len(spread) for g in noise}, k,
                                         {g: s * f for g, s in noise.items()}, int(rng.integers(2**31)),
                                         run_id=f"r{r}")
                recs += [replace(x, sample_id=f"b{i}-{x.sample_id}") for x in part]
            name = f"{mid}_run{r}.jsonl"
            (out / name).write_text(write_landmark_log(recs), encoding="utf-8")
            runs.append(name)
        methods.append({"method_id": mid, "runs": runs})
    return {"task_kind": "landmark", "baseline_id": "Baseline", "methods": methods,
            "group_labels": ["light", "dark"], "sdr_threshold": 0.08,
            "normalization": {"kind": "interocular", "indices": [36, 45]}}


def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "classification":
        manifest = _synth_classification(out, args.seed, args.runs, args.n)
    else:
        manifest = _synth_landmark(out, args.seed, args.runs, args.n)
    manifest = manifest_to_dict(validate_manifest(manifest_from_dict(manifest)))
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    _emit(args, {"manifest": str(path), "runs": sum(len(m["runs"]) for m in manifest["methods"])}, str(path))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hfbench", description="Group-fairness benchmarking against a shared baseline.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, manifest_required=True):
        sp.add_argument("--manifest", required=manifest_required, help="benchmark manifest (JSON)")
        sp.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
        sp.add_argument("--threshold", type=float, help="override the SDR (landmark) or score (classification) threshold")

    sp = sub.add_parser("evaluate", help="metrics for every cell of one log")
    sp.add_argument("log")
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("compare", help="one method against the baseline")
    sp.add_argument("--method", required=True)
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("rank", help="ranked benchmark table")
    common(sp)
    sp.add_argument("--out", help="directory for rank.<ext>")
    sp.add_argument("--format", choices=("md", "csv", "tsv"))
    sp.add_argument("--key", help="ranking column, e.g. sigma_hf (default) or delta_dto")
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("sweep", help="landmark metrics across SDR thresholds")
    common(sp)
    sp.add_argument("--grid", help="thresholds as a:b:step, e.g. 0.01:0.1:0.005")
    sp.add_argument("--out", help="directory for sweep.csv and sweep.svg")
    sp.add_argument("--metric", default="hf", choices=("hf", "sigma_hf", "delta_dto", "mgs", "m_gs", "ds"))
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("isolines", help="HF over the (min_group, max_group) square")
    common(sp, manifest_required=False)
    sp.add_argument("--baseline", help="baseline point as MIN,MAX")
    sp.add_argument("--resolution", type=int, default=101)
    sp.add_argument("--out", help="directory for isolines.csv")
    sp.set_defaults(func=cmd_isolines)

    sp = sub.add_parser("select", help="pick checkpoints from a validation history log")
    sp.add_argument("log")
    common(sp)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("synth", help="write a synthetic benchmark (logs + manifest)")
    sp.add_argument("--kind", choices=("classification", "landmark"), default="classification")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--runs", type=int, default=3)
    sp.add_argument("--n", type=int, default=100, help="samples per group and label (landmark: per group)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FairnessError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
