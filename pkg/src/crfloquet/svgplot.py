"""Tiny dependency-free SVG renderings of series and surface data.

Decorative output behind the CLI's --svg flag; the CSV files remain the
interchange contract.
"""

from __future__ import annotations

import math

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 860, 520
_ML, _MR, _MT, _MB = 70, 20, 36, 52


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(step):
        out.append(t)
        t += step
    return out


def _fmt_num(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 1e4 or abs(x) < 1e-3:
        return f"{x:.2e}"
    return f"{x:.4g}"


def line_plot(path, x, curves: dict, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Polyline plot of one or more named curves over a shared x axis."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in curves.items()}
    xlo, xhi = float(x.min()), float(x.max())
    ylo = min(float(np.nanmin(v)) for v in ys.values())
    yhi = max(float(np.nanmax(v)) for v in ys.values())
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def sx(v):
        return _ML + (v - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
    ]
    for tx in _ticks(xlo, xhi):
        parts.append(
            f'<line x1="{sx(tx):.1f}" y1="{_H - _MB}" x2="{sx(tx):.1f}" y2="{_MT}" '
            f'stroke="#eeeeee"/>'
            f'<text x="{sx(tx):.1f}" y="{_H - _MB + 16}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{_fmt_num(tx)}</text>'
        )
    for ty in _ticks(ylo, yhi):
        parts.append(
            f'<line x1="{_ML}" y1="{sy(ty):.1f}" x2="{_W - _MR}" y2="{sy(ty):.1f}" '
            f'stroke="#eeeeee"/>'
            f'<text x="{_ML - 6}" y="{sy(ty) + 4:.1f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{_fmt_num(ty)}</text>'
        )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="#333333"/>'
    )
    for ci, (name, y) in enumerate(ys.items()):
        color = _COLORS[ci % len(_COLORS)]
        pts = " ".join(
            f"{sx(xv):.2f},{sy(yv):.2f}" for xv, yv in zip(x, y) if np.isfinite(yv)
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>')
        parts.append(
            f'<text x="{_W - _MR - 8}" y="{_MT + 18 + 16 * ci}" text-anchor="end" '
            f'font-size="12" font-family="sans-serif" fill="{color}">{name}</text>'
        )
    parts.append(
        f'<text x="{_W / 2:.0f}" y="{_H - 12}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">{xlabel}</text>'
        f'<text x="16" y="{_H / 2:.0f}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 16 {_H / 2:.0f})">{ylabel}</text>'
        "</svg>"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))


def heatmap(path, xs, ys, z, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Cell heatmap of z[i, j] over axes (xs, ys); NaN cells are left white."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    z = np.asarray(z, dtype=float)
    finite = z[np.isfinite(z)]
    zlo = float(finite.min()) if finite.size else 0.0
    zhi = float(finite.max()) if finite.size else 1.0
    if zhi == zlo:
        zhi = zlo + 1.0

    def color(v):
        f = (v - zlo) / (zhi - zlo)
        r = int(255 * min(1.0, 2.0 * f))
        b = int(255 * min(1.0, 2.0 * (1.0 - f)))
        g = int(128 * (1.0 - abs(2.0 * f - 1.0)))
        return f"rgb({r},{g},{b})"

    cw = (_W - _ML - _MR) / xs.size
    ch = (_H - _MT - _MB) / ys.size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title} [{_fmt_num(zlo)} .. {_fmt_num(zhi)}]</text>',
    ]
    for i in range(xs.size):
        for j in range(ys.size):
            if not np.isfinite(z[i, j]):
                continue
            px = _ML + i * cw
            py = _H - _MB - (j + 1) * ch
            parts.append(
                f'<rect x="{px:.1f}" y="{py:.1f}" width="{cw + 0.5:.1f}" height="{ch + 0.5:.1f}" '
                f'fill="{color(z[i, j])}"/>'
            )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="#333333"/>'
        f'<text x="{_W / 2:.0f}" y="{_H - 12}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">{xlabel} ({_fmt_num(xs[0])} .. {_fmt_num(xs[-1])})</text>'
        f'<text x="16" y="{_H / 2:.0f}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 16 {_H / 2:.0f})">{ylabel} '
        f'({_fmt_num(ys[0])} .. {_fmt_num(ys[-1])})</text>'
        "</svg>"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
