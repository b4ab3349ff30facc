"""Deterministic SVG histograms and scatter plots for aggregate results."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 40, 50


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    overflow: int  # +inf values
    underflow: int  # -inf, or values <= 0 on a log axis
    log_scale: bool


def _n(x: float) -> str:
    return f"{x:.2f}"


def _label(x: float) -> str:
    return f"{x:.4g}"


def histogram_counts(values: Sequence[float], bins: int, value_range=None,
                     log_scale: bool = False) -> Histogram:
    """Bin finite values; infinities (and nonpositive values on a log axis) are
    counted separately. NaNs are ignored. Values outside an explicit range are
    clipped into the end bins."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    v = v[~np.isnan(v)]
    overflow = int(np.count_nonzero(v == np.inf))
    underflow = int(np.count_nonzero(v == -np.inf))
    v = v[np.isfinite(v)]
    if log_scale:
        underflow += int(np.count_nonzero(v <= 0))
        v = v[v > 0]
    if value_range is not None:
        lo, hi = float(value_range[0]), float(value_range[1])
    elif len(v):
        lo, hi = float(v.min()), float(v.max())
    else:
        lo, hi = (1.0, 10.0) if log_scale else (0.0, 1.0)
    if log_scale:
        if lo == hi:
            lo, hi = lo / math.sqrt(10), hi * math.sqrt(10)
        edges = np.geomspace(lo, hi, bins + 1)
        coords, span = np.log10(v), (math.log10(lo), math.log10(hi))
    else:
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        coords, span = v, (lo, hi)
    idx = np.floor((coords - span[0]) / (span[1] - span[0]) * bins).astype(np.int64)
    idx = np.clip(idx, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(edges, counts, overflow, underflow, log_scale)


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    x0, y0 = LEFT, HEIGHT - BOTTOM
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{TOP / 2 + 5}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{escape(title)}</text>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{WIDTH - RIGHT}" y2="{y0}" stroke="black"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{TOP}" stroke="black"/>',
        f'<text x="{(LEFT + WIDTH - RIGHT) / 2}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{(TOP + y0) / 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 15 {(TOP + y0) / 2})">{escape(ylabel)}</text>',
    ]


def write_histogram_svg(values: Sequence[float], bins: int, title: str,
                        log_scale: bool = False, value_range=None, xlabel: str = "") -> str:
    hist = histogram_counts(values, bins, value_range, log_scale)
    slots = []  # (css class, count, label)
    if hist.underflow:
        slots.append(("underflow", hist.underflow, "<=0" if log_scale else "-inf"))
    for i, c in enumerate(hist.counts):
        slots.append(("bar", int(c), None))
    if hist.overflow:
        slots.append(("overflow", hist.overflow, "inf"))

    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    y0 = HEIGHT - BOTTOM
    slot_w = plot_w / len(slots)
    top = max((c for _, c, _ in slots), default=0)
    axis = xlabel + (" (log scale)" if log_scale else "")
    lines = _frame(title, axis, "meshes")
    lines.append(f'<text x="{LEFT - 5}" y="{TOP + 4}" text-anchor="end" '
                 f'font-family="sans-serif" font-size="10">{top}</text>')

    bar_i = 0
    for s, (cls, count, label) in enumerate(slots):
        h = plot_h * count / top if top else 0.0
        x = LEFT + s * slot_w
        attrs = f'class="{cls}" data-count="{count}"'
        if cls == "bar":
            lo, hi = hist.edges[bar_i], hist.edges[bar_i + 1]
            attrs += f' data-lo="{_label(lo)}" data-hi="{_label(hi)}"'
            bar_i += 1
        fill = "#4878a8" if cls == "bar" else "#c0504d"
        lines.append(f'<rect {attrs} x="{_n(x + 1)}" y="{_n(y0 - h)}" '
                     f'width="{_n(max(slot_w - 2, 0.5))}" height="{_n(h)}" fill="{fill}"/>')
        if label is not None:
            lines.append(f'<text class="{cls}-label" x="{_n(x + slot_w / 2)}" y="{y0 + 14}" '
                         f'text-anchor="middle" font-family="sans-serif" font-size="10">'
                         f'{escape(label)}</text>')

    # edge ticks: first, middle and last edge of the regular bins
    first = LEFT + (1 if hist.underflow else 0) * slot_w
    n_bins = len(hist.counts)
    for i in sorted({0, n_bins // 2, n_bins}):
        x = first + i * slot_w
        lines.append(f'<text x="{_n(x)}" y="{y0 + 28}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{_label(hist.edges[i])}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_scatter_svg(xs: Sequence[float], ys: Sequence[float], title: str,
                      xlabel: str = "", ylabel: str = "", log_scale: bool = False) -> str:
    """Scatter of paired values with the y = x diagonal; non-plottable pairs are counted."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    ok = np.isfinite(x) & np.isfinite(y)
    if log_scale:
        ok &= (x > 0) & (y > 0)
    skipped = int(len(x) - np.count_nonzero(ok))
    x, y = x[ok], y[ok]
    tx, ty = (np.log10(x), np.log10(y)) if log_scale else (x, y)
    if len(tx):
        lo = float(min(tx.min(), ty.min()))
        hi = float(max(tx.max(), ty.max()))
    else:
        lo, hi = 0.0, 1.0
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    y0 = HEIGHT - BOTTOM

    def px(t):
        return LEFT + (t - lo) / (hi - lo) * plot_w

    def py(t):
        return y0 - (t - lo) / (hi - lo) * plot_h

    suffix = " (log10)" if log_scale else ""
    lines = _frame(title, xlabel + suffix, ylabel + suffix)
    lines.append(f'<line class="diagonal" x1="{_n(px(lo))}" y1="{_n(py(lo))}" '
                 f'x2="{_n(px(hi))}" y2="{_n(py(hi))}" stroke="#999" stroke-dasharray="4 3"/>')
    for a, b in zip(tx, ty):
        lines.append(f'<circle class="point" cx="{_n(px(a))}" cy="{_n(py(b))}" r="2.5" '
                     f'fill="#4878a8" fill-opacity="0.7"/>')
    for t in (lo, hi):
        lines.append(f'<text x="{_n(px(t))}" y="{y0 + 14}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{_label(t)}</text>')
        lines.append(f'<text x="{LEFT - 5}" y="{_n(py(t) + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="10">{_label(t)}</text>')
    if skipped:
        lines.append(f'<text class="skipped" x="{WIDTH - RIGHT}" y="{TOP - 5}" '
                     f'text-anchor="end" font-family="sans-serif" font-size="10">'
                     f'{skipped} non-finite pairs not shown</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
