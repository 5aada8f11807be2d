"""Self-contained SVG heatmap of the gain surface."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

# viridis sampled at 0, .25, .5, .75, 1
_STOPS = np.array(
    [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ],
    dtype=float,
)
_INFEASIBLE = "#d9d9d9"


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_STOPS) - 1)
    k = min(int(t), len(_STOPS) - 2)
    rgb = _STOPS[k] + (t - k) * (_STOPS[k + 1] - _STOPS[k])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in rgb)


def gain_heatmap(
    eta: np.ndarray,
    gamma: np.ndarray,
    values: np.ndarray,
    feasible: np.ndarray,
    boundary: Sequence[tuple[float, float]] = (),
    optimum: Optional[tuple[float, float]] = None,
    width: int = 640,
    height: int = 480,
) -> str:
    """Render ``values[i, j]`` at (eta[i], gamma[j]); infeasible cells are grey.

    ``boundary`` is a polyline of (eta, gamma) points outlining the feasible
    region and ``optimum`` an optional marker.
    """
    margin_l, margin_b, margin_t, margin_r = 60, 50, 20, 90
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b
    e_max = eta[-1] + (eta[1] - eta[0]) / 2 if len(eta) > 1 else 1.0
    g_max = gamma[-1] + (gamma[1] - gamma[0]) / 2 if len(gamma) > 1 else 1.0

    def sx(e):
        return margin_l + pw * e / e_max

    def sy(g):
        return margin_t + ph * (1.0 - g / g_max)

    shown = values[feasible]
    lo, hi = (float(shown.min()), float(shown.max())) if shown.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    cw, ch = pw / len(eta), ph / len(gamma)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        '<g shape-rendering="crispEdges">',
    ]
    for i, e in enumerate(eta):
        x = margin_l + i * cw
        for j in range(len(gamma)):
            y = margin_t + ph - (j + 1) * ch
            fill = _color((values[i, j] - lo) / span) if feasible[i, j] else _INFEASIBLE
            out.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                f'height="{ch + 0.05:.2f}" fill="{fill}"/>'
            )
    out.append("</g>")

    if len(boundary):
        pts = " ".join(f"{sx(e):.2f},{sy(g):.2f}" for e, g in boundary if g <= g_max and e <= e_max)
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    # local/nonlocal divide gamma = 3 eta
    e_end = min(e_max, g_max / 3.0)
    out.append(
        f'<line x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(e_end):.2f}" y2="{sy(3 * e_end):.2f}" '
        'stroke="white" stroke-dasharray="4 3"/>'
    )
    if optimum is not None:
        out.append(
            f'<circle cx="{sx(optimum[0]):.2f}" cy="{sy(optimum[1]):.2f}" r="4" '
            'fill="red" stroke="white"/>'
        )

    # axes and ticks
    out.append(
        f'<rect x="{margin_l}" y="{margin_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    for k in range(6):
        e = e_max * k / 5
        out.append(
            f'<text x="{sx(e):.2f}" y="{margin_t + ph + 16}" text-anchor="middle">{e:.3f}</text>'
        )
        g = g_max * k / 5
        out.append(f'<text x="{margin_l - 6}" y="{sy(g) + 4:.2f}" text-anchor="end">{g:.2f}</text>')
    out.append(
        f'<text x="{margin_l + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">eta</text>'
    )
    out.append(
        f'<text x="16" y="{margin_t + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {margin_t + ph / 2:.2f})">gamma</text>'
    )

    # colour bar
    bx, steps = width - margin_r + 20, 50
    for k in range(steps):
        y = margin_t + ph * (1 - (k + 1) / steps)
        out.append(
            f'<rect x="{bx}" y="{y:.2f}" width="16" height="{ph / steps + 0.05:.2f}" '
            f'fill="{_color(k / (steps - 1))}"/>'
        )
    out.append(f'<text x="{bx + 20}" y="{margin_t + 10}">{hi:.3f}</text>')
    out.append(f'<text x="{bx + 20}" y="{margin_t + ph}">{lo:.3f}</text>')
    out.append(f'<text x="{bx}" y="{margin_t + ph + 16}">gain</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def planar_boundary(n: int = 200) -> list[tuple[float, float]]:
    """(eta, gamma) along the planar-measurement curve for phi in (0, pi/6]."""
    phis = np.linspace(0.0, math.pi / 6, n)
    return [((1 - math.cos(p)) / 2, (1 - math.cos(3 * p)) / 2) for p in phis]
