"""Leaderboard tables and deterministic SVG plots for curves and reports.

SVG output is built by plain string assembly with fixed number formatting,
so identical inputs produce byte-identical documents.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import prmetrics
from .blur import RegionReport
from .embedio import read_embeddings
from .errors import DataError, PerceptError
from .frechet import fd_between_sets
from .runtime import resolve_threads
from .sweep import SweepCurve

# Log-scale floor: values below this are drawn at the floor with a hollow
# marker so near-zero FDs stay visible on Fig-style log axes.
LOG_FLOOR = 1e-6

LEADERBOARD_COLUMNS = ("generator", "feature_space", "fd", "precision", "recall", "error")

_METRIC_DIRECTIONS = {"fd": 1, "precision": -1, "recall": -1}


@dataclass
class LeaderboardEntry:
    generator: str
    feature_space: str
    real_path: str
    gen_path: str


@dataclass
class CellMetrics:
    fd: float | None = None
    precision: float | None = None
    recall: float | None = None
    error: str | None = None


@dataclass
class Leaderboard:
    generators: list[str]
    feature_spaces: list[str]
    cells: dict
    ranks: dict = field(default_factory=dict)
    k: int = 3


def build_leaderboard(
    entries: list[LeaderboardEntry],
    k: int = 3,
    *,
    threads: int | None = None,
) -> Leaderboard:
    """FD / precision / recall per (generator, feature space) cell.

    A failing cell is recorded with its error string and excluded from
    ranking; it never produces fabricated numbers.
    """
    if not entries:
        raise DataError("leaderboard needs at least one entry")
    threads = resolve_threads(threads)
    generators: list[str] = []
    spaces: list[str] = []
    cells: dict = {}
    set_cache: dict = {}

    def load(path: str):
        if path not in set_cache:
            set_cache[path] = read_embeddings(path)
        return set_cache[path]

    for entry in entries:
        if entry.generator not in generators:
            generators.append(entry.generator)
        if entry.feature_space not in spaces:
            spaces.append(entry.feature_space)
        key = (entry.generator, entry.feature_space)
        try:
            real = load(entry.real_path)
            gen = load(entry.gen_path)
            fd = fd_between_sets(real, gen).total
            pr = prmetrics.precision_recall(real, gen, k, threads=threads)
            cells[key] = CellMetrics(fd=fd, precision=pr.precision, recall=pr.recall)
        except PerceptError as exc:
            cells[key] = CellMetrics(error=str(exc))

    ranks: dict = {}
    for space in spaces:
        for metric, direction in _METRIC_DIRECTIONS.items():
            scored = [
                (direction * getattr(cells[(g, space)], metric), g)
                for g in generators
                if (g, space) in cells and getattr(cells[(g, space)], metric) is not None
            ]
            scored.sort(key=lambda t: t[0])
            ranks[(space, metric)] = [g for _, g in scored[:3]]
    return Leaderboard(
        generators=generators, feature_spaces=spaces, cells=cells, ranks=ranks, k=k
    )


def leaderboard_to_json(board: Leaderboard) -> str:
    doc = {
        "k": board.k,
        "generators": board.generators,
        "feature_spaces": board.feature_spaces,
        "cells": [
            {
                "generator": g,
                "feature_space": s,
                "fd": cell.fd,
                "precision": cell.precision,
                "recall": cell.recall,
                "error": cell.error,
            }
            for (g, s), cell in sorted(board.cells.items())
        ],
        "ranks": [
            {"feature_space": s, "metric": m, "top": top}
            for (s, m), top in sorted(board.ranks.items())
        ],
    }
    return json.dumps(doc, indent=2)


def leaderboard_from_json(text: str) -> Leaderboard:
    doc = json.loads(text)
    cells = {
        (c["generator"], c["feature_space"]): CellMetrics(
            fd=c["fd"], precision=c["precision"], recall=c["recall"], error=c["error"]
        )
        for c in doc["cells"]
    }
    ranks = {(r["feature_space"], r["metric"]): r["top"] for r in doc["ranks"]}
    return Leaderboard(
        generators=doc["generators"],
        feature_spaces=doc["feature_spaces"],
        cells=cells,
        ranks=ranks,
        k=doc["k"],
    )


def leaderboard_to_csv(board: Leaderboard) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LEADERBOARD_COLUMNS)
    for g in board.generators:
        for s in board.feature_spaces:
            cell = board.cells.get((g, s))
            if cell is None:
                continue
            writer.writerow(
                [g, s,
                 "" if cell.fd is None else repr(cell.fd),
                 "" if cell.precision is None else repr(cell.precision),
                 "" if cell.recall is None else repr(cell.recall),
                 cell.error or ""]
            )
    return buf.getvalue()


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 420
    margin_left: int = 64
    margin_right: int = 20
    margin_top: int = 24
    margin_bottom: int = 52
    stroke: str = "#1f6feb"
    fill: str = "#1f6feb"
    axis_color: str = "#24292f"
    font_family: str = "monospace"
    font_size: int = 12
    title: str = ""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Svg:
    def __init__(self, style: PlotStyle):
        self.style = style
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
            f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
            f'<rect width="{style.width}" height="{style.height}" fill="#ffffff"/>',
        ]

    def line(self, x1, y1, x2, y2, color, width=1.0):
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{width}"/>'
        )

    def circle(self, cx, cy, r, fill, cls=""):
        cls_attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<circle{cls_attr} cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{r}" fill="{fill}"/>'
        )

    def rect(self, x, y, w, h, fill, cls=""):
        cls_attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<rect{cls_attr} x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(h)}" fill="{fill}"/>'
        )

    def polyline(self, pts, color, width=1.5):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>'
        )

    def text(self, x, y, content, anchor="middle", cls=""):
        s = self.style
        cls_attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<text{cls_attr} x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
            f'font-family="{s.font_family}" font-size="{s.font_size}" '
            f'fill="{s.axis_color}">{content}</text>'
        )

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _plot_frame(svg: _Svg):
    s = svg.style
    x0, x1 = s.margin_left, s.width - s.margin_right
    y0, y1 = s.height - s.margin_bottom, s.margin_top
    svg.line(x0, y0, x1, y0, s.axis_color)
    svg.line(x0, y0, x0, y1, s.axis_color)
    if s.title:
        svg.text((x0 + x1) / 2, y1 - 8, s.title)
    return x0, x1, y0, y1


def render_sweep_curve(curve: SweepCurve, style: PlotStyle = PlotStyle()) -> str:
    """Log-y curve of FD against proportion difference with std error bars.

    Values below the log floor are clamped to it and drawn as hollow
    "clamped" markers.
    """
    if not curve.points:
        raise DataError("cannot render an empty curve")
    svg = _Svg(style)
    x0, x1, y0, y1 = _plot_frame(svg)

    def clamp(v: float) -> float:
        return max(v, LOG_FLOOR)

    los, his = [], []
    for p in curve.points:
        los.append(clamp(p.fd_mean - p.fd_std))
        his.append(clamp(p.fd_mean + p.fd_std))
    lo, hi = math.log10(min(los)), math.log10(max(his))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    dmin = min(p.d for p in curve.points)
    dmax = max(p.d for p in curve.points)
    dspan = (dmax - dmin) or 1.0

    def sx(d: float) -> float:
        return x0 + (d - dmin) / dspan * (x1 - x0)

    def sy(v: float) -> float:
        return y0 - (math.log10(clamp(v)) - lo) / (hi - lo) * (y0 - y1)

    decade = math.floor(lo)
    while decade <= math.ceil(hi):
        v = 10.0 ** decade
        if lo <= decade <= hi:
            y = sy(v)
            svg.line(x0 - 4, y, x0, y, style.axis_color)
            svg.text(x0 - 8, y + 4, f"1e{decade:d}", anchor="end", cls="ytick-log")
        decade += 1
    for p in curve.points:
        x = sx(p.d)
        svg.line(x, y0, x, y0 + 4, style.axis_color)
        svg.text(x, y0 + 18, f"{p.d:g}", cls="xtick")
    svg.text((x0 + x1) / 2, y0 + 36, f"attribute proportion difference ({curve.attribute})")

    for p in curve.points:
        x = sx(p.d)
        svg.line(x, sy(p.fd_mean - p.fd_std), x, sy(p.fd_mean + p.fd_std), style.stroke)
    svg.polyline([(sx(p.d), sy(p.fd_mean)) for p in curve.points], style.stroke)
    for p in curve.points:
        clamped = p.fd_mean < LOG_FLOOR
        svg.circle(
            sx(p.d), sy(p.fd_mean), 3,
            "#ffffff" if clamped else style.fill,
            cls="marker clamped" if clamped else "marker",
        )
    return svg.finish()


def render_region_report(report: RegionReport, style: PlotStyle = PlotStyle()) -> str:
    """Bar chart of normalized FD per region, one bar per region."""
    if not report.entries:
        raise DataError("cannot render an empty region report")
    svg = _Svg(style)
    x0, x1, y0, y1 = _plot_frame(svg)
    vmax = max(max(e.normalized_fd for e in report.entries), 1.0)
    n = len(report.entries)
    slot = (x1 - x0) / n
    bar_w = slot * 0.7

    def sy(v: float) -> float:
        return y0 - (v / vmax) * (y0 - y1)

    ticks = 5
    for t in range(ticks + 1):
        v = vmax * t / ticks
        y = sy(v)
        svg.line(x0 - 4, y, x0, y, style.axis_color)
        svg.text(x0 - 8, y + 4, f"{v:.2f}", anchor="end", cls="ytick")
    for i, e in enumerate(report.entries):
        cx = x0 + slot * (i + 0.5)
        svg.rect(cx - bar_w / 2, sy(e.normalized_fd), bar_w,
                 y0 - sy(e.normalized_fd), style.fill, cls="bar")
        svg.text(cx, y0 + 18, e.region, cls="xtick")
    svg.text((x0 + x1) / 2, y0 + 36, "normalized FD per region")
    return svg.finish()


def render_curve(data, style: PlotStyle = PlotStyle()) -> str:
    """Render a SweepCurve or RegionReport to an SVG document."""
    if isinstance(data, SweepCurve):
        return render_sweep_curve(data, style)
    if isinstance(data, RegionReport):
        return render_region_report(data, style)
    raise DataError(f"cannot render object of type {type(data).__name__}")


def write_svg(text: str, destination) -> None:
    Path(destination).write_text(text)
