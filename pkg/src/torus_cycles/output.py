"""CSV rendering/parsing and small standalone SVG line charts."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence
from xml.sax.saxutils import escape


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    f = float(v)
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    # repr is the shortest string that round-trips
    return repr(f)


def emit_csv(rows: Iterable[Sequence], schema: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(schema)
    for row in rows:
        if len(row) != len(schema):
            raise ValueError(f"row has {len(row)} fields, schema has {len(schema)}")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def parse_value(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(text: str) -> tuple[list[str], list[list]]:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return [], []
    return rows[0], [[parse_value(c) for c in row] for row in rows[1:]]


# ---------------------------------------------------------------- SVG

@dataclass
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]


@dataclass
class Axes:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    notes: list[str] = field(default_factory=list)


_COLORS = ["#1f4e9c", "#c2410c", "#15803d", "#7e22ce", "#0f766e", "#b91c1c"]
W, H = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _fmt_tick(t: float) -> str:
    if t != 0 and (abs(t) >= 1e5 or abs(t) < 1e-3):
        return f"{t:.0e}"
    return f"{t:.6g}"


def _clean(series: Series, axes: Axes) -> list[tuple[float, float]]:
    pts = []
    for x, y in zip(series.xs, series.ys):
        if x is None or y is None:
            continue
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        if (axes.logx and x <= 0) or (axes.logy and y <= 0):
            continue
        pts.append((math.log10(x) if axes.logx else x, math.log10(y) if axes.logy else y))
    return pts


def emit_svg(series: Sequence[Series], axes: Axes | None = None) -> str:
    """Standalone SVG 1.1 line chart with ticks and a legend."""
    axes = axes or Axes()
    if not series:
        raise ValueError("emit_svg needs at least one series")
    cleaned = [_clean(s, axes) for s in series]
    if any(len(s.xs) < 2 for s in series) or not any(cleaned):
        raise ValueError("every series needs at least two points")
    xs = [x for pts in cleaned for x, _ in pts]
    ys = [y for pts in cleaned for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        pad = abs(y0) * 0.1 or 1.0
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if axes.title:
        out.append(f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
                   f'{escape(axes.title)}</text>')
    for t in _nice_ticks(x0, x1):
        px = sx(t)
        label = _fmt_tick(10**t if axes.logx else t)
        out.append(f'<line x1="{px:.2f}" y1="{TOP + ph}" x2="{px:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{label}</text>')
    for t in _nice_ticks(y0, y1):
        py = sy(t)
        label = _fmt_tick(10**t if axes.logy else t)
        out.append(f'<line x1="{LEFT - 5}" y1="{py:.2f}" x2="{LEFT}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<line x1="{LEFT}" y1="{py:.2f}" x2="{LEFT + pw}" y2="{py:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{py + 4:.2f}" text-anchor="end">{label}</text>')
    if axes.xlabel:
        out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 15}" text-anchor="middle">{escape(axes.xlabel)}</text>')
    if axes.ylabel:
        out.append(f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(axes.ylabel)}</text>')
    for i, (s, pts) in enumerate(zip(series, cleaned)):
        color = _COLORS[i % len(_COLORS)]
        if pts:
            path = " ".join(f"{'M' if j == 0 else 'L'}{sx(x):.2f},{sy(y):.2f}" for j, (x, y) in enumerate(pts))
            out.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        ly = TOP + 16 + 18 * i
        out.append(f'<line x1="{LEFT + 12}" y1="{ly}" x2="{LEFT + 36}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + 42}" y="{ly + 4}">{escape(s.label)}</text>')
    for i, note in enumerate(axes.notes):
        out.append(f'<text x="{LEFT + pw - 6}" y="{TOP + 16 + 16 * i}" text-anchor="end" '
                   f'font-size="10">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
