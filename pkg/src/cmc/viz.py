"""Figures: SVG heat maps with flow arrows for 2D meshes, legacy VTK for 3D.

Colours follow a rainbow sweep from red (lowest value) to magenta
(highest value).  Each 2-cell is filled flat with the mean potential of its
nodes.  Each 1-cell with non-zero flow rate gets a fixed-length arrow at its
midpoint, crossing the edge from the 2-cell that induces a positive
orientation on it towards the one inducing a negative orientation (a
negative flow reverses it).  A missing neighbour on the boundary is a ghost
cell.  Edges are drawn as straight segments between their end nodes.
"""
from __future__ import annotations

import colorsys
from dataclasses import dataclass

import numpy as np


@dataclass
class RenderSpec:
    """Rendering options; ``None`` ranges are taken from the data."""

    width: int = 640
    height: int = 640
    margin: float = 24.0
    u_range: tuple | None = None
    q_range: tuple | None = None
    arrow_scale: float = 0.3
    zero_tol: float = 0.0
    stroke: str = "#333333"


def rainbow(values, vmin, vmax):
    """Hex colours on the hue sweep 0 (red) to 300 degrees (magenta)."""
    values = np.atleast_1d(np.asarray(values, float))
    span = vmax - vmin
    t = np.zeros_like(values) if span <= 0 else np.clip((values - vmin) / span, 0.0, 1.0)
    out = []
    for h in t:
        r, g, b = colorsys.hsv_to_rgb(h * 300.0 / 360.0, 1.0, 1.0)
        out.append(f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}")
    return out


def cell_cycle(complex_, a):
    """Nodes of the 2-cell ``a`` in boundary-walk order."""
    edges = complex_.faces[2][a]
    ends = [tuple(complex_.faces[1][e]) for e in edges]
    loop = [ends[0][0], ends[0][1]]
    used = {0}
    while len(used) < len(ends):
        for k, (x, y) in enumerate(ends):
            if k in used:
                continue
            if x == loop[-1] or y == loop[-1]:
                loop.append(y if x == loop[-1] else x)
                used.add(k)
                break
        else:
            raise ValueError(f"boundary of 2-cell {a} is not a cycle")
    return np.asarray(loop[:-1])


def flow_arrows(complex_, coords, q, zero_tol=0.0):
    """Arrow anchors and unit directions of a flow rate on a 2D mesh.

    Returns ``(edges, midpoints, directions)``; edges with ``|q| <=
    zero_tol`` are skipped.
    """
    coords = np.asarray(coords, float)[:, :2]
    q = np.asarray(q, float)
    nodes = complex_.cell_nodes(2)
    centroids = np.array([coords[n].mean(axis=0) for n in nodes])
    keep, mids, dirs = [], [], []
    for c in range(complex_.counts[1]):
        if abs(q[c]) <= zero_tol:
            continue
        t, h = complex_.faces[1][c]
        m = 0.5 * (coords[t] + coords[h])
        e = coords[h] - coords[t]
        n = np.array([-e[1], e[0]])
        n /= np.linalg.norm(n)
        cof, sgn = complex_.cofaces(1, c)
        # direction from the positive side to the negative side
        if np.any(sgn > 0):
            away = m - centroids[cof[sgn > 0][0]]
        else:
            away = centroids[cof[sgn < 0][0]] - m
        d = n if n @ away > 0 else -n
        keep.append(c)
        mids.append(m)
        dirs.append(d * np.sign(q[c]))
    return np.asarray(keep, dtype=np.int64), np.asarray(mids).reshape(-1, 2), \
        np.asarray(dirs).reshape(-1, 2)


def _fmt(x):
    return f"{x:.3f}"


def render_svg(complex_, coords, u, q, spec: RenderSpec | None = None) -> str:
    """SVG document of a potential heat map with flow-rate arrows.

    ``coords`` holds one row per node; only the first two columns are used,
    so surface meshes in R^3 are shown from above.
    """
    if complex_.dim != 2:
        raise ValueError("SVG rendering needs a 2-dimensional mesh")
    if coords is None:
        raise ValueError("node coordinates are required for rendering")
    spec = spec or RenderSpec()
    xy = np.asarray(coords, float)[:, :2]
    u = np.asarray(u, float)
    q = np.asarray(q, float)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    extent = np.maximum(hi - lo, 1e-300)
    scale = min((spec.width - 2 * spec.margin) / extent[0],
                (spec.height - 2 * spec.margin) / extent[1])

    def px(p):
        return (spec.margin + (p[0] - lo[0]) * scale,
                spec.height - spec.margin - (p[1] - lo[1]) * scale)

    nodes = complex_.cell_nodes(2)
    means = np.array([u[n].mean() for n in nodes])
    umin, umax = spec.u_range or (float(u.min()), float(u.max()))
    fills = rainbow(means, umin, umax)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
           f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
           '<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" '
           'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="context-stroke"/></marker></defs>',
           '<g id="cells">']
    for a in range(complex_.counts[2]):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (px(xy[n]) for n in cell_cycle(complex_, a)))
        out.append(f'<polygon points="{pts}" fill="{fills[a]}" stroke="{spec.stroke}" '
                   f'stroke-width="0.5"/>')
    out.append("</g>")

    edges, mids, dirs = flow_arrows(complex_, xy, q, spec.zero_tol)
    out.append('<g id="arrows">')
    if len(edges):
        mags = np.abs(q[edges])
        qmin, qmax = spec.q_range or (float(mags.min()), float(mags.max()))
        colors = rainbow(mags, qmin, qmax)
        lengths = [np.linalg.norm(xy[complex_.faces[1][c][1]] - xy[complex_.faces[1][c][0]])
                   for c in range(complex_.counts[1])]
        half = 0.5 * spec.arrow_scale * float(np.median(lengths)) * scale
        for c, m, d, col in zip(edges, mids, dirs, colors):
            x0, y0 = px(m)
            # screen y axis points down
            dx, dy = d[0] * half, -d[1] * half
            out.append(f'<line data-edge="{c}" x1="{_fmt(x0 - dx)}" y1="{_fmt(y0 - dy)}" '
                       f'x2="{_fmt(x0 + dx)}" y2="{_fmt(y0 + dy)}" stroke="{col}" '
                       f'stroke-width="1.5" marker-end="url(#head)"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_vtk(complex_, coords, u, q, title="cmc result") -> str:
    """Legacy ASCII VTK of a 3D mesh: the 2-cells as polygons carrying the
    flow rate as cell data, and the potential as point data."""
    if complex_.dim != 3:
        raise ValueError("VTK output is for 3-dimensional meshes")
    if coords is None:
        raise ValueError("node coordinates are required")
    xyz = np.asarray(coords, float)
    u = np.asarray(u, float)
    q = np.asarray(q, float)
    n0, n2 = complex_.counts[0], complex_.counts[2]
    cycles = [cell_cycle(complex_, a) for a in range(n2)]
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {n0} double"]
    lines += [" ".join(f"{v:.17g}" for v in p) for p in xyz]
    size = sum(len(c) + 1 for c in cycles)
    lines.append(f"CELLS {n2} {size}")
    lines += [f"{len(c)} " + " ".join(str(int(n)) for n in c) for c in cycles]
    lines.append(f"CELL_TYPES {n2}")
    lines += ["9" if len(c) == 4 else "7" for c in cycles]  # VTK_QUAD or VTK_POLYGON
    lines += [f"POINT_DATA {n0}", "SCALARS u double 1", "LOOKUP_TABLE default"]
    lines += [f"{v:.17g}" for v in u]
    lines += [f"CELL_DATA {n2}", "SCALARS q double 1", "LOOKUP_TABLE default"]
    lines += [f"{v:.17g}" for v in q]
    return "\n".join(lines) + "\n"
