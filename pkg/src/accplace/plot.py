"""Deterministic SVG snapshots of a placement.

Standard cells are drawn as red points, fixed cells (macros, terminals) as
blue rectangles and fillers as green points.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .netlist import CellKind, Netlist, Region

COLORS = {CellKind.MOVABLE: "red", CellKind.FIXED: "blue", CellKind.FILLER: "green"}
_KIND_OF_CODE = {0: CellKind.MOVABLE, 1: CellKind.FIXED, 2: CellKind.FILLER}


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(region: Region, rects: Iterable[tuple[float, float, float, float, CellKind]],
               size: int = 800) -> str:
    """SVG text for rectangles given as (x, y, w, h, kind) in layout units.

    The y axis points up as in the layout; output depends only on inputs.
    """
    scale = size / max(region.width, region.height)
    W = region.width * scale
    H = region.height * scale
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(W)}" height="{_n(H)}" '
           f'viewBox="0 0 {_n(W)} {_n(H)}">',
           f'<rect x="0" y="0" width="{_n(W)}" height="{_n(H)}" fill="white" stroke="black"/>']
    # points are drawn after rectangles so macros never hide cells
    rects = list(rects)
    for x, y, w, h, kind in rects:
        if kind != CellKind.FIXED:
            continue
        sx = (x - region.x0) * scale
        sy = (region.y1 - y - h) * scale
        out.append(f'<rect x="{_n(sx)}" y="{_n(sy)}" width="{_n(w * scale)}" height="{_n(h * scale)}" '
                   f'fill="{COLORS[kind]}" fill-opacity="0.5" stroke="{COLORS[kind]}"/>')
    r = max(0.8, 0.15 * size / 100)
    for x, y, w, h, kind in rects:
        if kind == CellKind.FIXED:
            continue
        cx = (x + w / 2 - region.x0) * scale
        cy = (region.y1 - y - h / 2) * scale
        out.append(f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(r)}" fill="{COLORS[kind]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def netlist_rects(netlist: Netlist, positions: dict | None = None):
    rects = []
    for c in netlist.cells.values():
        x, y = positions.get(c.id, (c.x, c.y)) if positions else (c.x, c.y)
        rects.append((x, y, c.width, c.height, c.kind))
    return rects


def problem_rects(problem, v: np.ndarray):
    """Rectangles of a PlacementProblem at positions ``v`` (fillers included)."""
    rects = [(float(v[0, i]), float(v[1, i]), float(problem.w[i]), float(problem.h[i]),
              _KIND_OF_CODE[int(problem.kind[i])]) for i in range(problem.n)]
    fx = problem.fixed
    rects += [(float(fx.x[i]), float(fx.y[i]), float(fx.w[i]), float(fx.h[i]), CellKind.FIXED)
              for i in range(len(fx))]
    return rects


def write_svg(path, region: Region, rects, size: int = 800) -> Path:
    p = Path(path)
    p.write_text(render_svg(region, rects, size))
    return p


__all__ = ["COLORS", "render_svg", "netlist_rects", "problem_rects", "write_svg"]
