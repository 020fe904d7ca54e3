"""Dependency-free, byte-deterministic SVG line plots."""
import numpy as np

from .report import atomic_write_text

WIDTH, HEIGHT = 640, 400
MARGIN = (70, 20, 40, 50)  # left, right, top, bottom
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x):
    return f"{x:.6g}"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _range(values, pad=0.05):
    if not values:
        return 0.0, 1.0
    lo, hi = float(min(values)), float(max(values))
    if hi == lo:
        d = abs(lo) * 0.1 or 1.0
        return lo - d, hi + d
    d = (hi - lo) * pad
    return lo - d, hi + d


def line_plot(series, title="", xlabel="", ylabel="", vlines=(), hlines=()):
    """Render ``series`` = [(label, xs, ys), ...] as an SVG string.

    ``vlines``/``hlines`` are (value, label) markers. An empty series list
    draws the axes only.
    """
    xs_all, ys_all = [], []
    for _, xs, ys in series:
        xs_all += [float(x) for x in xs if np.isfinite(x)]
        ys_all += [float(y) for y in ys if np.isfinite(y)]
    xs_all += [float(v) for v, _ in vlines]
    ys_all += [float(v) for v, _ in hlines]
    x0, x1 = _range(xs_all, 0.0)
    y0, y1 = _range(ys_all)
    L, R, T, B = MARGIN
    pw, ph = WIDTH - L - R, HEIGHT - T - B

    def px(x):
        return L + (x - x0) / (x1 - x0) * pw

    def py(y):
        return T + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{T - 15}" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{_fmt(px(xv))}" y="{T + ph + 16}" text-anchor="middle" '
                   f'font-size="10">{_fmt(xv)}</text>')
        out.append(f'<text x="{L - 5}" y="{_fmt(py(yv) + 3)}" text-anchor="end" '
                   f'font-size="10">{_fmt(yv)}</text>')
    out.append(f'<text x="{L + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle" '
               f'font-size="12">{_esc(xlabel)}</text>')
    out.append(f'<text x="15" y="{T + ph / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 15 {T + ph / 2})">{_esc(ylabel)}</text>')
    for v, label in vlines:
        out.append(f'<line x1="{_fmt(px(v))}" y1="{T}" x2="{_fmt(px(v))}" y2="{T + ph}" '
                   f'stroke="gray" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{_fmt(px(v) + 3)}" y="{T + 12}" font-size="10">{_esc(label)}</text>')
    for v, label in hlines:
        out.append(f'<line x1="{L}" y1="{_fmt(py(v))}" x2="{L + pw}" y2="{_fmt(py(v))}" '
                   f'stroke="gray" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{L + 3}" y="{_fmt(py(v) - 3)}" font-size="10">{_esc(label)}</text>')
    for n, (label, xs, ys) in enumerate(series):
        color = COLORS[n % len(COLORS)]
        pts = " ".join(f"{_fmt(px(float(x)))},{_fmt(py(float(y)))}"
                       for x, y in zip(xs, ys) if np.isfinite(x) and np.isfinite(y))
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{L + pw - 5}" y="{T + 14 + 14 * n}" text-anchor="end" '
                   f'font-size="11" fill="{color}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path, series, **kw):
    atomic_write_text(path, line_plot(series, **kw))


def chi_window_plot(t, chi, threshold, T_max):
    return line_plot([("chi(t)", t, chi), ("threshold", t, threshold)],
                     title="Energy profile and threshold", xlabel="t", ylabel="chi",
                     vlines=[(T_max, f"T_max={_fmt(T_max)}")])


def gap_plot(gaps):
    k = list(range(len(gaps)))
    return line_plot([("gap", k, gaps)] if len(gaps) else [], title="Energy gap per step",
                     xlabel="step", ylabel="gap")


def deficit_plot(t, deficit, variance):
    return line_plot([("energy deficit", t, deficit), ("theta variance at r0", t, variance)],
                     title="Deficit and angular variance", xlabel="t", ylabel="value",
                     hlines=[(0.0, "0")])


def profile_plot(r, profiles):
    """``profiles`` = [(t, f_values), ...]."""
    return line_plot([(f"f(., {_fmt(t)})", r, f) for t, f in profiles],
                     title="Rarefaction profiles", xlabel="r", ylabel="f")
