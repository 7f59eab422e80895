"""Text renderers: ranked tables (markdown/CSV/TSV), sweep CSV and SVG charts.

Rounding happens only here; everything upstream carries full precision.
"""

from __future__ import annotations

import csv
import io
from xml.sax.saxutils import escape

from .aggregate import RankedTable, require_rows
from .exceptions import EmptySeries, EmptyTable
from .model import RenderOptions

SWEEP_COLUMNS = ("method_id", "threshold", "mgs", "m_gs", "ds", "hf", "sigma_hf", "delta_dto")
SWEEP_METRICS = ("hf", "sigma_hf", "delta_dto", "mgs", "m_gs", "ds")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _fmt(value, column, opts: RenderOptions):
    decimals = opts.decimals_sigma if column == "sigma_hf" else opts.decimals_pct
    return f"{value:.{decimals}f}"


def _markdown(table: RankedTable, opts: RenderOptions):
    header = ["Method"] + [c.label for c in table.columns]
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join(["---"] * len(header)) + "|"]
    for row in table.rows:
        cells = [row.method_id]
        for col in table.columns:
            text = _fmt(row.value(col.name), col.name, opts)
            mark = row.marks.get(col.name) if opts.mark_best else None
            if mark == "best":
                text = f"**{text}**"
            elif mark == "second":
                text = f"_{text}_"
            if col.name == "sigma_hf":
                text += f" ± {_fmt(row.spread('sigma_hf'), 'sigma_hf', opts)}"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _delimited(table: RankedTable, delimiter: str):
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    names = [c.name for c in table.columns]
    w.writerow(["method_id"] + names + ["sigma_hf_std", "best", "second"])
    for row in table.rows:
        best = ";".join(n for n in names if row.marks.get(n) == "best")
        second = ";".join(n for n in names if row.marks.get(n) == "second")
        w.writerow([row.method_id] + [repr(float(row.value(n))) for n in names]
                   + [repr(float(row.spread("sigma_hf"))), best, second])
    return buf.getvalue()


def render_table(table: RankedTable, opts: RenderOptions = RenderOptions()) -> str:
    if table is None:
        raise EmptyTable("no table")
    require_rows(table)
    if opts.format == "md":
        return _markdown(table, opts)
    return _delimited(table, "," if opts.format == "csv" else "\t")


def sweep_csv(series) -> str:
    if not series.results:
        raise EmptySeries("sweep has no methods")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for mid, t, prof, comp in series.rows():
        w.writerow([mid, repr(float(t)), repr(prof.mgs), repr(prof.m_gs), repr(prof.ds), repr(comp.hf),
                    repr(comp.sigma_hf), repr(comp.delta_dto)])
    return buf.getvalue()


def _metric(prof, comp, metric):
    if metric in ("mgs", "m_gs", "ds"):
        return getattr(prof, metric)
    return getattr(comp, metric)


def sweep_svg(series, metric="hf", width=640, height=400) -> str:
    """Line chart of ``metric`` against threshold, one polyline per method."""
    if not series.results:
        raise EmptySeries("sweep has no methods")
    if metric not in SWEEP_METRICS:
        raise ValueError(f"metric must be one of {SWEEP_METRICS}")
    left, right, top, bottom = 60, 140, 20, 50
    pw, ph = width - left - right, height - top - bottom
    xs = [float(t) for t in series.thresholds]
    ys = {mid: [_metric(p, c, metric) for _, _, p, c in [r for r in series.rows() if r[0] == mid]]
          for mid in series.results}
    lo = min(min(v) for v in ys.values())
    hi = max(max(v) for v in ys.values())
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    x0, x1 = xs[0], xs[-1]
    if x1 == x0:
        x0, x1 = x0 - 0.005, x1 + 0.005

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (1 - (y - lo) / (hi - lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = lo + (hi - lo) * i / 4
        out.append(f'<text x="{sx(xv):.2f}" y="{top + ph + 18}" font-size="11" text-anchor="middle">{xv * 100:.1f}%</text>')
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.2f}" font-size="11" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 8}" font-size="12" text-anchor="middle">NME threshold</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.2f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2:.2f})">{escape(metric)}</text>')
    for n, (mid, vals) in enumerate(ys.items()):
        color = PALETTE[n % len(PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, vals))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 14 + 18 * n
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}" font-size="11">{escape(mid)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_sweep_plot(series, opts: RenderOptions = RenderOptions(), *, svg=False, metric="hf"):
    """Return ``(csv_text, svg_text_or_None)``."""
    if series is None or not series.thresholds:
        raise EmptySeries("empty sweep")
    return sweep_csv(series), (sweep_svg(series, metric) if svg else None)
