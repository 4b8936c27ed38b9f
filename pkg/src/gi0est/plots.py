"""Minimal deterministic SVG figures (line panels and box plots)."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
PANEL_W, PANEL_H = 360, 260
MARGIN = dict(left=58, right=14, top=30, bottom=44)

Series = Mapping[str, tuple[Sequence[float], Sequence[float]]]


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if abs(v) < 1e4 else f"{v:.3g}"


def _ticks(lo: float, hi: float, k: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / k
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _panel(series: Series, kind: str, ox: float, oy: float, title: str, xlabel: str, ylabel: str):
    parts, skipped = [], 0
    names = list(series)
    if kind == "line":
        xs_all, ys_all = [], []
        for name in names:
            x, y = series[name]
            if len(x) != len(y):
                raise ValueError(f"series {name!r}: x and y lengths differ")
            for a, b in zip(x, y):
                if math.isfinite(a) and math.isfinite(b):
                    xs_all.append(a)
                    ys_all.append(b)
        x_lo, x_hi = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    else:
        ys_all = [v for name in names for v in series[name][1] if math.isfinite(v)]
        x_lo, x_hi = 0.5, len(names) + 0.5
    y_lo, y_hi = (min(ys_all), max(ys_all)) if ys_all else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    w = PANEL_W - MARGIN["left"] - MARGIN["right"]
    h = PANEL_H - MARGIN["top"] - MARGIN["bottom"]
    x0, y0 = ox + MARGIN["left"], oy + MARGIN["top"]

    def X(v):
        return x0 + (v - x_lo) / (x_hi - x_lo) * w

    def Y(v):
        return y0 + h - (v - y_lo) / (y_hi - y_lo) * h

    parts.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{w}" height="{h}" fill="none" stroke="#333"/>')
    parts.append(f'<text x="{x0 + w / 2:.2f}" y="{oy + 18:.2f}" text-anchor="middle" font-size="13">{_esc(title)}</text>')
    parts.append(f'<text x="{x0 + w / 2:.2f}" y="{oy + PANEL_H - 6:.2f}" text-anchor="middle" font-size="11">{_esc(xlabel)}</text>')
    parts.append(
        f'<text x="{ox + 12:.2f}" y="{y0 + h / 2:.2f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 {ox + 12:.2f} {y0 + h / 2:.2f})">{_esc(ylabel)}</text>'
    )
    for t in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{x0 - 4:.2f}" y1="{Y(t):.2f}" x2="{x0:.2f}" y2="{Y(t):.2f}" stroke="#333"/>')
        parts.append(f'<text x="{x0 - 6:.2f}" y="{Y(t) + 4:.2f}" text-anchor="end" font-size="10">{_fmt(t)}</text>')
    if kind == "line":
        for t in _ticks(x_lo, x_hi):
            parts.append(f'<line x1="{X(t):.2f}" y1="{y0 + h:.2f}" x2="{X(t):.2f}" y2="{y0 + h + 4:.2f}" stroke="#333"/>')
            parts.append(f'<text x="{X(t):.2f}" y="{y0 + h + 16:.2f}" text-anchor="middle" font-size="10">{_fmt(t)}</text>')

    for k, name in enumerate(names):
        color = PALETTE[k % len(PALETTE)]
        x, y = series[name]
        if kind == "line":
            seg, segs = [], []
            for a, b in zip(x, y):
                if math.isfinite(a) and math.isfinite(b):
                    seg.append((X(a), Y(b)))
                else:
                    skipped += 1
                    if seg:
                        segs.append(seg)
                    seg = []
            if seg:
                segs.append(seg)
            for s in segs:
                if len(s) > 1:
                    pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in s)
                    parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
                for px, py in s:
                    parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="{color}"/>')
        else:
            vals = np.array([v for v in y if math.isfinite(v)])
            skipped += len(y) - vals.size
            cx = X(k + 1)
            parts.append(f'<text x="{cx:.2f}" y="{y0 + h + 16:.2f}" text-anchor="middle" font-size="10">{_esc(name)}</text>')
            if vals.size:
                q1, med, q3 = np.percentile(vals, [25, 50, 75])
                lo_w, hi_w = vals.min(), vals.max()
                bw = min(40.0, 0.6 * w / len(names))
                parts.append(f'<line x1="{cx:.2f}" y1="{Y(lo_w):.2f}" x2="{cx:.2f}" y2="{Y(hi_w):.2f}" stroke="{color}"/>')
                parts.append(
                    f'<rect x="{cx - bw / 2:.2f}" y="{Y(q3):.2f}" width="{bw:.2f}" height="{max(Y(q1) - Y(q3), 0.5):.2f}" '
                    f'fill="white" stroke="{color}" stroke-width="1.5"/>'
                )
                parts.append(f'<line x1="{cx - bw / 2:.2f}" y1="{Y(med):.2f}" x2="{cx + bw / 2:.2f}" y2="{Y(med):.2f}" stroke="{color}" stroke-width="2"/>')
        if kind == "line":
            ly = y0 + 12 + 14 * k
            parts.append(f'<line x1="{x0 + w - 70:.2f}" y1="{ly - 4:.2f}" x2="{x0 + w - 56:.2f}" y2="{ly - 4:.2f}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{x0 + w - 52:.2f}" y="{ly:.2f}" font-size="10">{_esc(name)}</text>')
    return parts, skipped


def render_panels(panels: Sequence[tuple[str, Series]], kind: str, path, xlabel: str = "", ylabel: str = "", columns: int | None = None) -> dict:
    """Write a grid of panels to ``path``; returns metadata with the NaN skip count."""
    if kind not in ("line", "box"):
        raise ValueError(f"unknown plot kind {kind!r}")
    if not panels or any(not s for _, s in panels):
        raise ValueError("nothing to plot")
    cols = columns or min(len(panels), 2)
    rows = math.ceil(len(panels) / cols)
    W, H = cols * PANEL_W, rows * PANEL_H
    body, skipped = [], 0
    for i, (title, series) in enumerate(panels):
        parts, s = _panel(series, kind, (i % cols) * PANEL_W, (i // cols) * PANEL_H, title, xlabel, ylabel)
        body += parts
        skipped += s
    meta = {"kind": kind, "panels": len(panels), "skipped_nan": skipped}
    if skipped:
        log.warning("skipped %d non-finite points while plotting %s", skipped, path)
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">',
        f"<metadata>{json.dumps(meta, sort_keys=True)}</metadata>",
        f'<rect width="{W}" height="{H}" fill="white"/>',
        *body,
        "</svg>",
    ]
    Path(path).write_text("\n".join(svg) + "\n")
    return meta


def render_plot(series: Series, kind: str, path, title: str = "", xlabel: str = "", ylabel: str = "") -> dict:
    return render_panels([(title, series)], kind, path, xlabel, ylabel, columns=1)
