"""Hand-emitted SVG line charts (no plotting dependency).

One polyline per series, with one-standard-deviation error bars, axis
ticks and a legend.  Output is a deterministic function of the inputs.
"""

from __future__ import annotations

from typing import Sequence

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 160, 40, 55


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def line_chart(
    title: str,
    xlabel: str,
    ylabel: str,
    series: Sequence[dict],
) -> str:
    """Render series [{label, x, y, err}] as an SVG document string."""
    xs_all = [v for s in series for v in s["x"]]
    ys_all = [v for s in series for v in s["y"]]
    errs_all = [e for s in series for e in s.get("err", [0.0] * len(s["x"]))]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo = min(y - e for y, e in zip(ys_all, errs_all))
    y_hi = max(y + e for y, e in zip(ys_all, errs_all))
    y_lo = min(y_lo, 0.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_hi += pad

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x: float) -> float:
        return _ML + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MT + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_ML + plot_w / 2}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444"/>',
    ]
    for tx in _ticks(x_lo, x_hi):
        out.append(
            f'<line x1="{_fmt(px(tx))}" y1="{_MT + plot_h}" x2="{_fmt(px(tx))}" '
            f'y2="{_MT + plot_h + 5}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_fmt(px(tx))}" y="{_MT + plot_h + 20}" text-anchor="middle">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        out.append(
            f'<line x1="{_ML - 5}" y1="{_fmt(py(ty))}" x2="{_ML}" y2="{_fmt(py(ty))}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_ML - 9}" y="{_fmt(py(ty) + 4)}" text-anchor="end">{_fmt(ty)}</text>'
        )
    out.append(
        f'<text x="{_ML + plot_w / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{_MT + plot_h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MT + plot_h / 2})">{ylabel}</text>'
    )
    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s["x"], s["y"]))
        errs = s.get("err", [0.0] * len(s["x"]))
        for x, y, e in zip(s["x"], s["y"], errs):
            if e > 0:
                out.append(
                    f'<line x1="{_fmt(px(x))}" y1="{_fmt(py(y - e))}" '
                    f'x2="{_fmt(px(x))}" y2="{_fmt(py(y + e))}" stroke="{color}" stroke-width="1"/>'
                )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in zip(s["x"], s["y"]):
            out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{color}"/>')
        ly = _MT + 14 + 18 * i
        lx = _ML + plot_w + 12
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{lx + 28}" y="{ly}">{s["label"]}</text>')
    out.append("</svg>")
    return "\n".join(out)
