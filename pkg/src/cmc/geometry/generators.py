"""Mesh generators in chart coordinates.

Cell orderings are deterministic:

* tensor grids enumerate, per dimension p, the axis subsets S of size p in
  ``itertools.combinations`` order and then the cell multi-indices in C
  order (axes in S index intervals, the others index grid lines);
* polar-like meshes (disk, hemisphere) number the center/pole node 0
  followed by ring nodes (i, j) ring by ring; edges are the radial edges
  (i = 0..n1-1, j) followed by the ring arcs (i = 1..n1, j); 2-cells are
  (i, j) in C order.
"""
from __future__ import annotations

from itertools import combinations, product

import numpy as np

from ..complex import CellComplex, check_compatible_orientation
from ..forman import forman_subdivide
from . import charts
from .embedding import BoxEmbedding, EmbeddedMesh, PolygonEmbedding


def box_signs(chart, lo, hi, faces):
    """Relative orientations of chart-aligned boxes that are all oriented
    positively with respect to the chart."""
    tmp = BoxEmbedding(chart, None, lo, hi)
    signs = [[]]
    for p in range(1, len(lo)):
        sp_ = []
        for i, f in enumerate(faces[p]):
            ax = tmp.axes(p, i)
            row = []
            for h in f:
                (flat,) = [a for a in ax if a not in tmp.axes(p - 1, h)]
                val = chart.unwrap(flat, lo[p - 1][h][flat], lo[p][i][flat], hi[p][i][flat])
                out = 1 if val > 0.5 * (lo[p][i][flat] + hi[p][i][flat]) else -1
                row.append(out * (-1) ** ax.index(flat))
            sp_.append(np.asarray(row, dtype=np.int8))
        signs.append(sp_)
    return signs


def tensor_grid(coords):
    """Cells, hyperfaces and boxes of the tensor grid on the given axis
    coordinate arrays."""
    D = len(coords)
    n = [len(c) - 1 for c in coords]
    index = {}
    lo = [[] for _ in range(D + 1)]
    hi = [[] for _ in range(D + 1)]
    keys = [[] for _ in range(D + 1)]
    for p in range(D + 1):
        for S in combinations(range(D), p):
            ranges = [range(n[k]) if k in S else range(n[k] + 1) for k in range(D)]
            for idx in product(*ranges):
                index[(S, idx)] = len(keys[p])
                keys[p].append((S, idx))
                lo[p].append([coords[k][idx[k]] for k in range(D)])
                hi[p].append([coords[k][idx[k] + (k in S)] for k in range(D)])
    faces = [[]]
    for p in range(1, D + 1):
        fp = []
        for S, idx in keys[p]:
            row = []
            for k in S:
                T = tuple(s for s in S if s != k)
                row.append(index[(T, idx)])
                up = list(idx)
                up[k] += 1
                row.append(index[(T, tuple(up))])
            fp.append(row)
        faces.append(fp)
    return [len(k) for k in keys], faces, [np.asarray(a, float) for a in lo], \
        [np.asarray(a, float) for a in hi]


def polar_like(n1, n2, r_max):
    """Rings of n2 cells around a single center node, n1 rings up to
    radius (or polar angle) ``r_max``.  Axis 1 is the angle."""
    r = np.linspace(0.0, r_max, n1 + 1)
    phi = 2 * np.pi * np.arange(n2) / n2
    dphi = 2 * np.pi / n2

    def node(i, j):
        return 0 if i == 0 else 1 + (i - 1) * n2 + (j % n2)

    nlo = [[0.0, np.nan]] + [[r[i], phi[j]] for i in range(1, n1 + 1) for j in range(n2)]
    radial = lambda i, j: i * n2 + (j % n2)
    arc = lambda i, j: n1 * n2 + (i - 1) * n2 + (j % n2)

    e_faces, elo, ehi = [], [], []
    for i in range(n1):
        for j in range(n2):
            e_faces.append([node(i, j), node(i + 1, j)])
            elo.append([r[i], phi[j]])
            ehi.append([r[i + 1], phi[j]])
    for i in range(1, n1 + 1):
        for j in range(n2):
            e_faces.append([node(i, j), node(i, j + 1)])
            elo.append([r[i], phi[j]])
            ehi.append([r[i], phi[j] + dphi])

    f_faces, flo, fhi = [], [], []
    for i in range(n1):
        for j in range(n2):
            row = [radial(i, j), radial(i, j + 1), arc(i + 1, j)]
            if i >= 1:
                row.append(arc(i, j))
            f_faces.append(row)
            flo.append([r[i], phi[j]])
            fhi.append([r[i + 1], phi[j] + dphi])

    nlo = np.asarray(nlo)
    lo = [nlo, np.asarray(elo), np.asarray(flo)]
    hi = [nlo.copy(), np.asarray(ehi), np.asarray(fhi)]
    counts = [len(nlo), len(e_faces), len(f_faces)]
    return counts, [[], e_faces, f_faces], lo, hi


def orient_to_chart(K, embedding):
    """Flip top cells of K that are negatively oriented in the chart."""
    D = K.dim
    sigma = embedding.orientation(D)
    if np.all(sigma > 0):
        return K
    cx = K.complex
    signs = list(cx.signs)
    signs[D] = [s * np.int8(g) for s, g in zip(cx.signs[D], sigma)]
    K2 = K.with_complex(cx.with_signs(signs))
    embedding.reset_orientation(K2.complex)
    return K2


def _embedded_box_mesh(name, chart, counts, faces, lo, hi, params):
    signs = box_signs(chart, lo, hi, faces)
    M = CellComplex(counts, faces, signs)
    K = forman_subdivide(M)
    emb = BoxEmbedding.from_parent(chart, K, lo, hi)
    K = orient_to_chart(K, emb)
    emb.reset_orientation(K.complex)
    ok, _ = check_compatible_orientation(K.complex)
    assert ok
    mesh = EmbeddedMesh(name, M, K, emb, emb.measures(), dict(params))
    mesh.parent_boxes = (lo, hi)
    return mesh


def gen_cube_mesh(nx, ny=None, nz=None):
    """Uniform grid of the unit cube with the Euclidean metric."""
    ny = nx if ny is None else ny
    nz = nx if nz is None else nz
    if min(nx, ny, nz) < 1:
        raise ValueError("grid resolution must be at least 1")
    coords = [np.linspace(0, 1, k + 1) for k in (nx, ny, nz)]
    return _embedded_box_mesh("cube", charts.cartesian(3), *tensor_grid(coords),
                              {"nx": nx, "ny": ny, "nz": nz})


def gen_rect_mesh(w, h, nx, ny):
    """Uniform rectangular grid of [0, w] x [0, h]."""
    if min(nx, ny) < 1 or w <= 0 or h <= 0:
        raise ValueError("need positive size and resolution")
    coords = [np.linspace(0, w, nx + 1), np.linspace(0, h, ny + 1)]
    return _embedded_box_mesh("rectangle", charts.cartesian(2), *tensor_grid(coords),
                              {"w": w, "h": h, "nx": nx, "ny": ny})


def gen_polar_disk_mesh(nr, nphi, radius=1.0):
    """Concentric circles and equally spaced rays on a disk (polar chart)."""
    if nr < 1 or nphi < 3:
        raise ValueError("need nr >= 1 and nphi >= 3")
    return _embedded_box_mesh("disk", charts.polar(), *polar_like(nr, nphi, radius),
                              {"nr": nr, "nphi": nphi, "radius": radius})


def gen_hemisphere_mesh(ntheta, nphi):
    """Northern hemisphere of the unit sphere in (theta, phi) coordinates."""
    if ntheta < 1 or nphi < 3:
        raise ValueError("need ntheta >= 1 and nphi >= 3")
    return _embedded_box_mesh("hemisphere", charts.spherical(),
                              *polar_like(ntheta, nphi, np.pi / 2),
                              {"ntheta": ntheta, "nphi": nphi})


def embed_polygon_mesh(M, points, name="polygons", params=None):
    """Forman subdivision and straight embedding of a planar polygon mesh
    given by its complex and vertex coordinates."""
    from ..complex import orient_top_cells
    M = orient_top_cells(M)
    K = forman_subdivide(M)
    chart = charts.cartesian(2)
    emb = PolygonEmbedding.from_parent(chart, K, np.asarray(points, float))
    K = orient_to_chart(K, emb)
    emb.reset_orientation(K.complex)
    mesh = EmbeddedMesh(name, M, K, emb, emb.measures(), dict(params or {}))
    mesh.parent_points = np.asarray(points, float)
    return mesh
