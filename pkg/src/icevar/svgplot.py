"""Minimal static SVG line charts for response curves.

Hand-rolled so output is deterministic byte-for-byte: fixed canvas, fixed
tick logic, fixed float formatting. Aggregate curve in black, regime bins in
fixed colors, optional confidence band as a shaded polygon.
"""

import numpy as np

from . import __version__
from .analysis import BootstrapResult
from .ice import ResponseCurve

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 44

BIN_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
BAND_FILL = "#9ecae1"


def _f(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def curve_svg(
    curve: ResponseCurve,
    band: BootstrapResult | None = None,
    title: str | None = None,
    meta: dict | None = None,
) -> str:
    x = np.asarray(curve.grid.values, dtype=float)
    series: list[tuple[str, str, np.ndarray]] = [("aggregate", "#000000", curve.response)]
    if curve.bin_responses is not None:
        n_bins = len(curve.bin_responses)
        for r, row in enumerate(curve.bin_responses):
            label = ("low", "mid", "high")[r] if n_bins == 3 else f"bin {r + 1}"
            series.append((label, BIN_COLORS[r % len(BIN_COLORS)], row))

    ys = [s[2] for s in series]
    if band is not None:
        ys += [band.aggregate.lower, band.aggregate.upper]
    y_lo = min(float(np.min(v)) for v in ys)
    y_hi = max(float(np.max(v)) for v in ys)
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    x_lo, x_hi = float(x[0]), float(x[-1])

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v: float) -> float:
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    def polyline(values: np.ndarray, color: str, width: float = 1.8) -> str:
        pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x, values))
        return f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<!-- icevar-curve v1 (toolkit {__version__}) -->",
    ]
    for key, value in (meta or {}).items():
        safe = str(value).replace("--", "-")
        parts.append(f"<!-- {key} = {safe} -->")
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')

    # gridlines and ticks
    for tv in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{_f(px(tv))}" y1="{MARGIN_T}" x2="{_f(px(tv))}" '
            f'y2="{HEIGHT - MARGIN_B}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_f(px(tv))}" y="{HEIGHT - MARGIN_B + 16}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{tv:.2g}</text>'
        )
    for tv in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{_f(py(tv))}" x2="{WIDTH - MARGIN_R}" '
            f'y2="{_f(py(tv))}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{_f(py(tv) + 4)}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{tv:.2g}</text>'
        )
    if y_lo < 0.0 < y_hi:
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{_f(py(0.0))}" x2="{WIDTH - MARGIN_R}" '
            f'y2="{_f(py(0.0))}" stroke="#888888" stroke-width="1"/>'
        )

    if band is not None:
        upper = band.aggregate.upper
        lower = band.aggregate.lower
        pts = [f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x, upper)]
        pts += [f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x[::-1], lower[::-1])]
        parts.append(f'<polygon fill="{BAND_FILL}" fill-opacity="0.5" points="{" ".join(pts)}"/>')

    for _, color, values in series[1:]:
        parts.append(polyline(values, color, width=1.4))
    parts.append(polyline(series[0][2], series[0][1], width=2.0))

    # axes
    parts.append(
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{HEIGHT - MARGIN_B}" '
        f'stroke="#000000" stroke-width="1.2"/>'
    )
    parts.append(
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="#000000" stroke-width="1.2"/>'
    )

    # labels and legend
    head = title or f"{curve.source} → {curve.target} ({curve.variant})"
    parts.append(
        f'<text x="{WIDTH // 2}" y="20" font-size="14" text-anchor="middle" '
        f'font-family="sans-serif">{head}</text>'
    )
    parts.append(
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 8}" font-size="12" text-anchor="middle" '
        f'font-family="sans-serif">{curve.grid.variable} (standardized)</text>'
    )
    lx = WIDTH - MARGIN_R - 140
    ly = MARGIN_T + 8
    for label, color, _ in series:
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly + 4}" font-size="11" font-family="sans-serif">{label}</text>'
        )
        ly += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
