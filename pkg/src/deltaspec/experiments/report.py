"""CSV, markdown and SVG renderings of simulation results."""

from __future__ import annotations

import csv
import io
from typing import Dict, List, Optional, Sequence

from .simulate import CostResult, SimResult


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return "NA"
    return format(float(x), ".12g")


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def rq3_csv(sim: SimResult) -> str:
    return _csv(["pool", "size", "rep", "rms"], ((p, k, r, _fmt(v)) for p, k, r, v in sim.rows))


def rq3_stats_csv(sim: SimResult) -> str:
    return _csv(["size", "U", "p", "a12"], ((k, _fmt(u), _fmt(p), _fmt(a)) for k, u, p, a in sim.stats))


def rq4_csv(cost: CostResult) -> str:
    return _csv(["pool", "target", "rep", "cost"],
                ((p, _fmt(t), r, "UNREACHED" if c is None else c) for p, t, r, c in cost.rows))


def summary_markdown(commit: str, sim: Optional[SimResult] = None, cost: Optional[CostResult] = None,
                     sizes: Sequence[int] = (), targets: Sequence[float] = ()) -> str:
    out = [f"# Selection experiments: {commit}", ""]
    if sim is not None:
        out += ["## Mean rMS by selection size", "",
                "| size | " + " | ".join(sim.pools) + " |",
                "|---|" + "---|" * len(sim.pools)]
        for k in sizes:
            cells = []
            for p in sim.pools:
                m = sim.mean(p, k)
                mark = "*" if sim.exhausted.get((p, k)) else ""
                cells.append("n/a" if m is None else f"{m:.4f}{mark}")
            out.append(f"| {k} | " + " | ".join(cells) + " |")
        out += ["", "`*` the pool has no more than `size` members, so every rep selects the whole pool.",
                "With a single commit the per-commit mean and the mean over all reps coincide.", ""]
        if sim.stats:
            out += [f"Mann-Whitney U and A12 compare `{sim.pools[0]}` against `{sim.pools[1]}`.", "",
                    "| size | U | p | A12 |", "|---|---|---|---|"]
            for k, u, p, a in sim.stats:
                out.append(f"| {k} | {_fmt(u)} | {_fmt(p)} | {_fmt(a)} |")
            out.append("")
        if sim.absent:
            out += ["Empty pools: " + ", ".join(sim.absent), ""]
    if cost is not None:
        out += ["## Assertions drawn to reach a target rMS", "",
                "| pool | target | reach rate | mean | median |", "|---|---|---|---|---|"]
        for p in cost.pools:
            if p in cost.absent:
                continue
            for t in targets:
                s = cost.summary(p, t)
                mean = "n/a" if s["mean_cost"] is None else f"{s['mean_cost']:.2f}"
                med = "n/a" if s["median_cost"] is None else f"{s['median_cost']:.1f}"
                out.append(f"| {p} | {t} | {s['reach_rate']:.2f} | {mean} | {med} |")
        out += ["", "Unreached reps are left out of the mean and median and show up in the reach rate.", ""]
        if cost.absent:
            out += ["Empty pools: " + ", ".join(cost.absent), ""]
    return "\n".join(out)


_COLORS = ("#1b6ca8", "#d1495b", "#2e933c", "#7d5ba6")


def rms_svg(sim: SimResult, sizes: Sequence[int], width: int = 480, height: int = 320) -> str:
    """Line chart of mean rMS against selection size, one line per pool."""
    ml, mr, mt, mb = 50, 120, 20, 40
    pw, ph = width - ml - mr, height - mt - mb
    lo, hi = min(sizes), max(sizes)

    def x(k):
        return ml + (0 if hi == lo else (k - lo) / (hi - lo) * pw)

    def y(v):
        return mt + (1.0 - v) * ph

    parts: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
    ]
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(f'<text x="{ml - 6}" y="{y(v) + 4:.1f}" text-anchor="end">{v:.2f}</text>')
    for k in sizes:
        parts.append(f'<text x="{x(k):.1f}" y="{mt + ph + 16}" text-anchor="middle">{k}</text>')
    parts.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 6}" text-anchor="middle">selection size</text>')
    for i, p in enumerate(sim.pools):
        pts = [(k, sim.mean(p, k)) for k in sizes]
        pts = [(k, m) for k, m in pts if m is not None]
        if not pts:
            continue
        c = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{x(k):.1f},{y(m):.1f}" for k, m in pts)
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="2" points="{coords}"/>')
        ly = mt + 14 + 16 * i
        parts.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 28}" y2="{ly - 4}" stroke="{c}" stroke-width="2"/>')
        parts.append(f'<text x="{ml + pw + 32}" y="{ly}">{p}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cost_rows_by_pool(cost: CostResult, target: float) -> Dict[str, List[Optional[int]]]:
    return {p: cost.costs(p, target) for p in cost.pools}
