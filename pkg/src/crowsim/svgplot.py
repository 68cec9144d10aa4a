"""Static SVG plots (polylines and a heatmap) with no plotting dependency.

Derived artifacts only — CSV files remain the source of record. Curves are
thinned to a bounded point budget so the files stay diff- and browser-friendly.
"""

from __future__ import annotations

import math

import numpy as np

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 24, 36, 56
_PW, _PH = _W - _ML - _MR, _H - _MT - _MB

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#17becf", "#8c564b", "#7f7f7f",
)

_MAX_POINTS = 1500
_MAX_HEAT_COLS = 240

# Anchors of a perceptually ordered dark-to-bright ramp.
_RAMP = ((13, 8, 135), (126, 3, 168), (204, 71, 120), (248, 149, 64), (240, 249, 33))


def _nice_ticks(lo: float, hi: float, target: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    val = first
    while val <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(val) < 1e-12 * step else val)
        val += step
    return ticks


def _fmt_tick(v: float) -> str:
    return f"{v:g}"


def _scale(vals, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(vals, dtype=float) - lo) * (out_hi - out_lo) / span


def _thin(x: np.ndarray, budget: int) -> np.ndarray:
    stride = max(1, int(math.ceil(len(x) / budget)))
    idx = np.arange(0, len(x), stride)
    if idx[-1] != len(x) - 1:
        idx = np.append(idx, len(x) - 1)
    return idx


def _header(title: str):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:g}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]


def _axes(parts, xlo, xhi, ylo, yhi, xlabel, ylabel):
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_PW}" height="{_PH}" '
        'fill="none" stroke="black"/>'
    )
    for tx in _nice_ticks(xlo, xhi):
        px = float(_scale(tx, xlo, xhi, _ML, _ML + _PW))
        parts.append(
            f'<line x1="{px:.1f}" y1="{_MT + _PH}" x2="{px:.1f}" '
            f'y2="{_MT + _PH + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{_MT + _PH + 18}" text-anchor="middle">'
            f"{_fmt_tick(tx)}</text>"
        )
    for ty in _nice_ticks(ylo, yhi):
        py = float(_scale(ty, ylo, yhi, _MT + _PH, _MT))
        parts.append(
            f'<line x1="{_ML - 4}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py + 4:.1f}" text-anchor="end">'
            f"{_fmt_tick(ty)}</text>"
        )
    parts.append(
        f'<text x="{_ML + _PW / 2:g}" y="{_H - 14}" text-anchor="middle">'
        f"{xlabel}</text>"
    )
    parts.append(
        f'<text x="18" y="{_MT + _PH / 2:g}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MT + _PH / 2:g})">{ylabel}</text>'
    )


def line_plot(path, x, series, xlabel="", ylabel="", title="") -> str:
    """Write a multi-curve line plot; ``series`` is [(label, y-array), ...]."""
    x = np.asarray(x, dtype=float)
    xlo, xhi = float(x.min()), float(x.max())
    ys = [np.asarray(y, dtype=float) for _, y in series]
    ylo = min(float(np.nanmin(y)) for y in ys)
    yhi = max(float(np.nanmax(y)) for y in ys)
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    parts = _header(title)
    _axes(parts, xlo, xhi, ylo, yhi, xlabel, ylabel)
    for i, ((label, _), y) in enumerate(zip(series, ys)):
        color = _PALETTE[i % len(_PALETTE)]
        idx = _thin(x, _MAX_POINTS)
        px = _scale(x[idx], xlo, xhi, _ML, _ML + _PW)
        py = _scale(y[idx], ylo, yhi, _MT + _PH, _MT)
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(px, py))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.4"/>'
        )
        if label:
            ly = _MT + 16 + 16 * i
            parts.append(
                f'<line x1="{_ML + _PW - 150}" y1="{ly - 4}" '
                f'x2="{_ML + _PW - 126}" y2="{ly - 4}" stroke="{color}" '
                'stroke-width="2"/>'
            )
            parts.append(f'<text x="{_ML + _PW - 120}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return str(path)


def _ramp_color(frac: float) -> str:
    frac = min(1.0, max(0.0, frac))
    pos = frac * (len(_RAMP) - 1)
    i = min(int(pos), len(_RAMP) - 2)
    w = pos - i
    rgb = tuple(
        int(round((1.0 - w) * a + w * b)) for a, b in zip(_RAMP[i], _RAMP[i + 1])
    )
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def heatmap(path, x, y, Z, xlabel="", ylabel="", title="", zlabel="") -> str:
    """Write a heatmap of Z[i, j] over y[i] (rows) and x[j] (columns)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    cols = _thin(x, _MAX_HEAT_COLS)
    zlo, zhi = float(np.nanmin(Z)), float(np.nanmax(Z))
    span = (zhi - zlo) or 1.0

    parts = _header(title)
    cw = _PW / len(cols)
    ch = _PH / len(y)
    for i in range(len(y)):
        py = _MT + _PH - (i + 1) * ch
        for jj, j in enumerate(cols):
            color = _ramp_color((Z[i, j] - zlo) / span)
            parts.append(
                f'<rect x="{_ML + jj * cw:.1f}" y="{py:.1f}" '
                f'width="{cw + 0.5:.1f}" height="{ch + 0.5:.1f}" '
                f'fill="{color}"/>'
            )
    xlo, xhi = float(x.min()), float(x.max())
    ylo, yhi = float(y.min()), float(y.max())
    _axes(parts, xlo, xhi, ylo, yhi, xlabel, ylabel)
    # Compact colorbar annotation.
    parts.append(
        f'<text x="{_W - _MR}" y="{_MT - 8}" text-anchor="end">'
        f"{zlabel} ∈ [{zlo:.2g}, {zhi:.2g}]</text>"
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return str(path)
