"""Embeddings of quasi-cubical meshes: cell geometry in chart coordinates,
measures, orientation relative to the chart and de Rham maps.

Two flavours are supported:

* :class:`BoxEmbedding` -- every cell is a coordinate box of a chart
  (regular cartesian, polar and spherical meshes).  Degenerate box axes
  mark the directions along which the cell is flat.
* :class:`PolygonEmbedding` -- straight cells in the cartesian plane
  (imported polygonal tessellations).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..complex import Cochain, DimensionError
from ..operators import MetricData
from .charts import Chart

QUAD_POINTS = 5


@dataclass
class FormField:
    """A differential form given by its components in chart coordinates.

    ``components`` maps an increasing tuple of axes I to a callable
    ``f(x)`` (``x`` of shape (npts, dim)) so that the form is
    sum_I f_I dx_I.  0-forms use the key ``()``.
    """

    degree: int
    components: dict
    name: str = ""
    units: str = ""

    def component(self, axes) -> Callable | None:
        return self.components.get(tuple(axes))


def _gauss(n):
    t, w = leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _tensor_rule(k, n):
    """Gauss-Legendre points/weights on [0, 1]^k."""
    t, w = _gauss(n)
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*([t] * k), indexing="ij")
    wgrids = np.meshgrid(*([w] * k), indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    wts = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)
    return pts, wts


class BoxEmbedding:
    """Cells as chart boxes ``[lo, hi]`` (one array pair per dimension)."""

    kind = "box"

    def __init__(self, chart: Chart, complex_, lo, hi):
        self.chart = chart
        self.complex = complex_
        self.lo = [np.asarray(a, dtype=float) for a in lo]
        self.hi = [np.asarray(a, dtype=float) for a in hi]
        span = np.nanmax(np.abs(np.concatenate([h.ravel() for h in self.hi])))
        self.tol = 1e-12 * max(1.0, float(np.nan_to_num(span)))
        self._sigma = None

    # ----------------------------------------------------------- building
    @classmethod
    def from_parent(cls, chart, K, mlo, mhi, centers=None):
        """Embed the Forman subdivision ``K`` of a box mesh with boxes
        ``mlo``/``mhi``: node [c, c] sits at the chart midpoint of c (or at
        ``centers[dim][c]`` when given) and each cell [a, b] is the bounding
        box of its nodes (computed in the periodic range of b)."""
        cx = K.complex
        mid = [0.5 * (np.asarray(l) + np.asarray(h)) for l, h in zip(mlo, mhi)]
        if centers is not None:
            mid = [np.asarray(c, dtype=float) for c in centers]
        node_src = K.intervals[0]
        lo, hi = [], []
        for p in range(cx.dim + 1):
            n = cx.counts[p]
            lp = np.full((n, chart.dim), np.nan)
            hp = np.full((n, chart.dim), np.nan)
            nodes = cx.cell_nodes(p)
            for i, (ld, a, ud, b) in enumerate(K.intervals[p]):
                blo, bhi = mlo[ud][b], mhi[ud][b]
                pts = np.array([mid[node_src[k][0]][node_src[k][1]] for k in nodes[i]])
                for ax in chart.periods:
                    for r in range(len(pts)):
                        pts[r, ax] = chart.unwrap(ax, pts[r, ax], blo[ax], bhi[ax])
                with np.errstate(all="ignore"):
                    import warnings
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", RuntimeWarning)
                        lp[i] = np.nanmin(pts, axis=0)
                        hp[i] = np.nanmax(pts, axis=0)
            lo.append(lp)
            hi.append(hp)
        return cls(chart, cx, lo, hi)

    # ---------------------------------------------------------- geometry
    def axes(self, p, i):
        d = self.hi[p][i] - self.lo[p][i]
        return tuple(int(k) for k in np.nonzero(np.nan_to_num(d) > self.tol)[0])

    def centers(self, p):
        return 0.5 * (self.lo[p] + self.hi[p])

    def node_points(self):
        return self.lo[0]

    def cartesian_nodes(self):
        return self.chart.to_cartesian(self.node_points())

    def _groups(self, p):
        groups = {}
        for i in range(self.complex.counts[p]):
            groups.setdefault(self.axes(p, i), []).append(i)
        return {k: np.asarray(v) for k, v in groups.items()}

    def _quadrature(self, p, axes, cells, n=QUAD_POINTS):
        """Points (ncell, npts, dim) and weights (ncell, npts) of a tensor
        Gauss rule on the given boxes; weights include the box volume."""
        t, w = _tensor_rule(len(axes), n)
        lo = np.nan_to_num(self.lo[p][cells])
        hi = np.nan_to_num(self.hi[p][cells])
        x = np.repeat(lo[:, None, :], len(w), axis=1)
        vol = np.ones(len(cells))
        for k, ax in enumerate(axes):
            x[:, :, ax] = lo[:, None, ax] + t[None, :, k] * (hi[:, None, ax] - lo[:, None, ax])
            vol *= hi[:, ax] - lo[:, ax]
        return x, w[None, :] * vol[:, None]

    def measures(self) -> MetricData:
        cx = self.complex
        out = [np.ones(cx.counts[0])]
        for p in range(1, cx.dim + 1):
            mu = np.zeros(cx.counts[p])
            for axes, cells in self._groups(p).items():
                if len(axes) != p:
                    raise ValueError(f"{p}-cells {cells[:3]} are degenerate boxes")
                x, w = self._quadrature(p, axes, cells)
                g = self.chart.metric_diagonal(x.reshape(-1, self.chart.dim))
                dens = np.prod(np.sqrt(g[:, list(axes)]), axis=1).reshape(x.shape[:2])
                mu[cells] = np.sum(w * dens, axis=1)
            out.append(mu)
        return MetricData(out)

    # -------------------------------------------------------- orientation
    def orientation(self, p):
        """Sign of each p-cell relative to the chart orientation of its
        coordinate directions (increasing axis order)."""
        if self._sigma is None:
            self._sigma = self._orientations()
        return self._sigma[p]

    def _orientations(self):
        cx = self.complex
        sig = [np.ones(cx.counts[0], dtype=np.int64)]
        for p in range(1, cx.dim + 1):
            sp_ = np.zeros(cx.counts[p], dtype=np.int64)
            for i in range(cx.counts[p]):
                f, s = cx.hyperfaces(p, i)
                ax = self.axes(p, i)
                h = int(f[0])
                hax = self.axes(p - 1, h)
                (flat,) = [a for a in ax if a not in hax]
                val = self.chart.unwrap(flat, self.lo[p - 1][h][flat],
                                        self.lo[p][i][flat], self.hi[p][i][flat])
                centre = 0.5 * (self.lo[p][i][flat] + self.hi[p][i][flat])
                out = 1 if val > centre else -1
                pos = ax.index(flat)
                sp_[i] = int(s[0]) * out * (-1) ** pos * sig[p - 1][h]
            sig.append(sp_)
        return sig

    def reset_orientation(self, complex_):
        self.complex = complex_
        self._sigma = None

    # ------------------------------------------------------------ de Rham
    def derham(self, form: FormField, npts=QUAD_POINTS) -> Cochain:
        """Integrate ``form`` over every cell of its degree with a tensor
        Gauss-Legendre rule of ``npts`` nodes per axis (1 = midpoint)."""
        p = form.degree
        cx = self.complex
        if p > cx.dim:
            raise DimensionError(f"cannot integrate a {p}-form on a {cx.dim}-mesh")
        if p == 0:
            f = form.component(())
            x = np.nan_to_num(self.lo[0])
            vals = np.zeros(cx.counts[0]) if f is None else np.broadcast_to(
                np.asarray(f(x), dtype=float), (cx.counts[0],)).copy()
            return Cochain(0, vals, form.units)
        vals = np.zeros(cx.counts[p])
        sigma = self.orientation(p)
        for axes, group in self._groups(p).items():
            f = form.component(axes)
            if f is None:
                continue
            x, w = self._quadrature(p, axes, group, npts)
            fx = np.broadcast_to(np.asarray(f(x.reshape(-1, self.chart.dim)), dtype=float),
                                 (x.shape[0] * x.shape[1],)).reshape(x.shape[:2])
            vals[group] = sigma[group] * np.sum(w * fx, axis=1)
        return Cochain(p, vals, form.units)


class PolygonEmbedding:
    """Straight cells in the cartesian plane given by node coordinates."""

    kind = "polygon"

    def __init__(self, chart: Chart, complex_, points):
        self.chart = chart
        self.complex = complex_
        self.points = np.asarray(points, dtype=float)
        self._cycles = None

    @classmethod
    def from_parent(cls, chart, K, mesh_points):
        """Node [c, c] sits at the arithmetic mean of the vertices of c."""
        M = K.parent
        nodes_of = [M.cell_nodes(p) for p in range(M.dim + 1)]
        pts = []
        for (d, c, _, _) in K.intervals[0]:
            pts.append(np.mean(mesh_points[nodes_of[d][c]], axis=0))
        return cls(chart, K.complex, np.asarray(pts))

    def node_points(self):
        return self.points

    def cartesian_nodes(self):
        return self.points

    def centers(self, p):
        nodes = self.complex.cell_nodes(p)
        return np.array([self.points[n].mean(axis=0) for n in nodes])

    def _edge_ends(self):
        cx = self.complex
        tail = np.empty(cx.counts[1], dtype=np.int64)
        head = np.empty(cx.counts[1], dtype=np.int64)
        for e in range(cx.counts[1]):
            f, s = cx.hyperfaces(1, e)
            head[e] = f[s > 0][0]
            tail[e] = f[s < 0][0]
        return tail, head

    def cycles(self):
        """Node cycle of every 2-cell, traversed along its orientation."""
        if self._cycles is None:
            cx = self.complex
            tail, head = self._edge_ends()
            out = []
            for i in range(cx.counts[2]):
                f, s = cx.hyperfaces(2, i)
                nxt = {}
                for e, si in zip(f, s):
                    a, b = (tail[e], head[e]) if si > 0 else (head[e], tail[e])
                    nxt[int(a)] = int(b)
                start = next(iter(nxt))
                cyc = [start]
                while nxt[cyc[-1]] != start:
                    cyc.append(nxt[cyc[-1]])
                out.append(np.asarray(cyc))
            self._cycles = out
        return self._cycles

    def measures(self) -> MetricData:
        cx = self.complex
        tail, head = self._edge_ends()
        lengths = np.linalg.norm(self.points[head] - self.points[tail], axis=1)
        out = [np.ones(cx.counts[0]), lengths]
        if cx.dim >= 2:
            out.append(np.abs(self._signed_areas()))
        return MetricData(out)

    def _signed_areas(self):
        areas = []
        for cyc in self.cycles():
            xy = self.points[cyc]
            x, y = xy[:, 0], xy[:, 1]
            areas.append(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        return np.asarray(areas)

    def orientation(self, p):
        cx = self.complex
        if p < 2:
            return np.ones(cx.counts[p], dtype=np.int64)
        return np.sign(self._signed_areas()).astype(np.int64)

    def reset_orientation(self, complex_):
        self.complex = complex_
        self._cycles = None

    def derham(self, form: FormField, npts=QUAD_POINTS) -> Cochain:
        p = form.degree
        cx = self.complex
        if p == 0:
            f = form.component(())
            vals = np.zeros(cx.counts[0]) if f is None else np.broadcast_to(
                np.asarray(f(self.points), dtype=float), (cx.counts[0],)).copy()
            return Cochain(0, vals, form.units)
        if p == 1:
            tail, head = self._edge_ends()
            t, w = _gauss(npts)
            a, b = self.points[tail], self.points[head]
            d = b - a
            x = a[:, None, :] + t[None, :, None] * d[:, None, :]
            vals = np.zeros(cx.counts[1])
            for ax in range(2):
                f = form.component((ax,))
                if f is None:
                    continue
                fx = np.broadcast_to(np.asarray(f(x.reshape(-1, 2)), dtype=float),
                                     (x.shape[0] * x.shape[1],)).reshape(x.shape[:2])
                vals += d[:, ax] * np.sum(w[None, :] * fx, axis=1)
            return Cochain(1, vals, form.units)
        if p == 2:
            f = form.component((0, 1))
            vals = np.zeros(cx.counts[2])
            if f is None:
                return Cochain(2, vals, form.units)
            pts, wts = _tensor_rule(2, npts)
            for i, cyc in enumerate(self.cycles()):
                if len(cyc) != 4:
                    raise ValueError("only quadrilateral 2-cells are supported")
                c = self.points[cyc]
                s, t = pts[:, 0], pts[:, 1]
                # bilinear map: c0 (0,0), c1 (1,0), c2 (1,1), c3 (0,1)
                x = ((1 - s) * (1 - t))[:, None] * c[0] + (s * (1 - t))[:, None] * c[1] \
                    + (s * t)[:, None] * c[2] + ((1 - s) * t)[:, None] * c[3]
                dxs = (1 - t)[:, None] * (c[1] - c[0]) + t[:, None] * (c[2] - c[3])
                dxt = (1 - s)[:, None] * (c[3] - c[0]) + s[:, None] * (c[2] - c[1])
                jac = dxs[:, 0] * dxt[:, 1] - dxs[:, 1] * dxt[:, 0]
                fx = np.broadcast_to(np.asarray(f(x), dtype=float), (len(wts),))
                vals[i] = np.sum(wts * fx * jac)
            return Cochain(2, vals, form.units)
        raise DimensionError("polygon embeddings are two-dimensional")


@dataclass
class EmbeddedMesh:
    """A Forman-subdivided mesh with its embedding and measures."""

    name: str
    parent: object
    K: object
    embedding: object
    metric: MetricData = None
    params: dict = field(default_factory=dict)

    @property
    def complex(self):
        return self.K.complex

    @property
    def chart(self):
        return self.embedding.chart

    @property
    def dim(self):
        return self.K.dim

    def derham(self, form, npts=QUAD_POINTS):
        return self.embedding.derham(form, npts)
