"""
SVG rendering of planar projections.

The parameter line is sampled densely on a window and through t = tan(theta)
beyond it, so the drawing closes through the point at infinity. Segments
are refined where the polyline turns sharply. When a height is available the
under strand is broken at each crossing, and arcs can be coloured by a
3-colouring.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from knotforge.errors import InputError
from knotforge.services.curve import AXES, DoublePoint, Parameterization, closure_point, double_points
from knotforge.services.diagram import Diagram, arc_structure, build_diagram, find_tricoloring

logger = logging.getLogger("knotforge.plot")

PLOT_WINDOW = 8.0
BASE_SAMPLES = 1200
REFINE_PASSES = 4
TURN_LIMIT = math.radians(8.0)
CANVAS = 600
PADDING = 30
GAP_FRACTION = 0.02
PALETTE = ("#d62728", "#1f77b4", "#2ca02c")
INK = "#222222"


def _fmt(value: float) -> str:
    return f"{value:.3f}".rstrip("0").rstrip(".")


def _parameter_grid(window: float) -> np.ndarray:
    inner = np.linspace(-window, window, BASE_SAMPLES)
    edge = math.atan(window)
    tails = np.tan(np.linspace(edge, math.pi / 2, BASE_SAMPLES // 4, endpoint=False)[1:])
    return np.concatenate([-tails[::-1], inner, tails])


def _refine(f, g, t: np.ndarray) -> np.ndarray:
    for _ in range(REFINE_PASSES):
        x, y = f(t), g(t)
        dx, dy = np.diff(x), np.diff(y)
        heading = np.arctan2(dy, dx)
        turn = np.abs(np.angle(np.exp(1j * np.diff(heading))))
        rough = np.flatnonzero(turn > TURN_LIMIT)
        if rough.size == 0:
            break
        # split both segments around each sharp vertex
        segments = np.unique(np.concatenate([rough, rough + 1]))
        midpoints = 0.5 * (t[segments] + t[segments + 1])
        t = np.sort(np.concatenate([t, midpoints]))
    return t


def sample_projection(p: Parameterization, axes: Tuple[str, str], window: float = PLOT_WINDOW) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parameters and projected points, closed through the closure point."""
    f, g = p.projection(axes)
    t = _refine(f, g, _parameter_grid(window))
    return t, f(t), g(t)


def _height_axis(axes: Tuple[str, str]) -> str:
    return next(a for a in AXES if a not in axes)


def _segment_colors(d: Diagram, coloring: Optional[List[int]], t: np.ndarray) -> np.ndarray:
    """Arc colour index for every sample, or -1 when drawing in one ink."""
    if coloring is None or not d.events:
        return np.full(len(t), -1)
    params = np.array(sorted([c.dp.s for c in d.crossings] + [c.dp.t for c in d.crossings]))
    _, after = arc_structure(d)
    crossed = np.searchsorted(params, t, side="right")
    arcs = np.array([after[k - 1] if k > 0 else after[-1] for k in crossed])
    return np.array([coloring[a] for a in arcs])


def _under_gaps(d: Optional[Diagram], t: np.ndarray, x: np.ndarray, y: np.ndarray, radius: float) -> np.ndarray:
    hidden = np.zeros(len(t), dtype=bool)
    if d is None:
        return hidden
    for c in d.crossings:
        under = c.dp.t if c.over_at_s else c.dp.s
        cx, cy = c.dp.position
        near = np.hypot(x - cx, y - cy) < radius
        # only the stretch of curve around the under parameter
        span = np.abs(np.arctan(t) - math.atan(under)) < np.abs(math.atan(c.dp.t) - math.atan(c.dp.s)) / 2
        hidden |= near & span
    return hidden


def _runs(mask: np.ndarray, colors: np.ndarray) -> List[Tuple[int, int]]:
    """Index ranges [a, b) of visible samples sharing one colour."""
    runs = []
    start = None
    for k in range(len(mask)):
        if mask[k] and start is None:
            start = k
        elif start is not None and (not mask[k] or colors[k] != colors[start]):
            runs.append((start, k + 1 if mask[k] else k))
            start = k if mask[k] else None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def render_svg(
    p: Parameterization,
    axes: Tuple[str, str] = ("x", "y"),
    color: bool = False,
    tol: float = 1e-9,
    window: float = PLOT_WINDOW,
    dps: Optional[Sequence[DoublePoint]] = None,
) -> str:
    """Polyline drawing of one projection with crossing marks."""
    if len(axes) != 2 or axes[0] == axes[1] or any(a not in AXES for a in axes):
        raise InputError(f"projection axes must be two distinct names from {AXES}, got {axes}")
    f, g = p.projection(axes)
    if dps is None:
        dps = double_points(f, g, tol)
    height = _height_axis(axes)
    d: Optional[Diagram] = None
    if getattr(p, height) is not None:
        d = build_diagram(f, g, p.coordinate(height), dps)

    t, x, y = sample_projection(p, axes, window)
    closure = closure_point(Parameterization(f, g)).position
    t = np.concatenate([[-math.inf], t, [math.inf]])
    x = np.concatenate([[closure[0]], x, [closure[0]]])
    y = np.concatenate([[closure[1]], y, [closure[1]]])

    xmin, xmax, ymin, ymax = float(x.min()), float(x.max()), float(y.min()), float(y.max())
    span = max(xmax - xmin, ymax - ymin) or 1.0
    scale = (CANVAS - 2 * PADDING) / span

    def to_screen(px, py):
        return PADDING + (px - xmin) * scale, CANVAS - PADDING - (py - ymin) * scale

    coloring = find_tricoloring(d) if (color and d is not None) else None
    if color and coloring is None:
        logger.info("No non-trivial 3-colouring; drawing in one colour")
    colors = _segment_colors(d, coloring, t) if d is not None else np.full(len(t), -1)
    visible = ~_under_gaps(d, t, x, y, GAP_FRACTION * span)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<title>{p.name} ({axes[0]}-{axes[1]} projection)</title>',
        '<g fill="none" stroke-width="2" stroke-linejoin="round" stroke-linecap="round">',
    ]
    for a, b in _runs(visible, colors):
        if b - a < 2:
            continue
        stroke = PALETTE[colors[a]] if colors[a] >= 0 else INK
        points = " ".join(f"{_fmt(sx)},{_fmt(sy)}" for sx, sy in (to_screen(x[k], y[k]) for k in range(a, b)))
        lines.append(f'<polyline stroke="{stroke}" points="{points}" />')
    lines.append("</g>")
    lines.append('<g fill="none" stroke="#888888" stroke-width="1">')
    for dp in dps:
        cx, cy = to_screen(*dp.position)
        lines.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="6"><title>crossing {dp.index}: s={dp.s:.6g}, t={dp.t:.6g}</title></circle>')
    lines.append("</g>")
    lines.append("</svg>")
    logger.info(f"✓ Rendered {p.name}: {len(t)} samples, {len(dps)} crossings")
    return "\n".join(lines) + "\n"
