"""Forman subdivision of polytopal meshes into quasi-cubical meshes.

The p-cells of the subdivision K of a mesh M are the poset intervals [a, b]
of M with dim b - dim a = p.  Cells of K are indexed per dimension in the
order (dim a, a, b).  Relative orientations are derived intrinsically:
edges [a, b] point from [a, a] to [b, b]; higher cells get signs by
propagating the diamond (chain complex) constraints around each cell; top
cells are finally flood-filled to a compatible orientation.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

import numpy as np

from .complex import CellComplex, CellId, OrientationError, orient_top_cells


class NonSimpleCellError(ValueError):
    """A cell of the input mesh is not a simple polytope."""


@dataclass(frozen=True)
class IntervalCell:
    lower: CellId
    upper: CellId

    @property
    def dim(self):
        return self.upper.dim - self.lower.dim


@dataclass(frozen=True)
class OrthogonalPair:
    enclosing: int
    left: int
    right: int
    sign: int
    pivot: int


def check_simple(mesh):
    """Return the CellIds of cells that are not simple polytopes (a node of a
    p-cell must lie on exactly p of the cell's edges)."""
    bad = []
    for p in range(2, mesh.dim + 1):
        inc_e = mesh.incidence_matrix(p, 1)
        edge_nodes = mesh.cell_nodes(1)
        for a in range(mesh.counts[p]):
            edges = inc_e.indices[inc_e.indptr[a]:inc_e.indptr[a + 1]]
            deg = {}
            for e in edges:
                for n in edge_nodes[e]:
                    deg[n] = deg.get(n, 0) + 1
            if any(v != p for v in deg.values()):
                bad.append(CellId(p, a))
    return bad


class QuasiCubicalMesh:
    """A quasi-cubical complex together with its Forman interval map.

    Attributes
    ----------
    complex : CellComplex
    intervals : list of ndarray
        ``intervals[p]`` has one row ``(lower_dim, lower, upper_dim, upper)``
        per p-cell; ``None`` when the mesh was not produced by subdivision.
    parent : CellComplex or None
    """

    def __init__(self, complex_, intervals=None, parent=None):
        self.complex = complex_
        self.intervals = intervals
        self.parent = parent
        self.dim = complex_.dim
        self._pairs = {}

    def __repr__(self):
        return f"QuasiCubicalMesh(counts={self.complex.counts})"

    def interval(self, p, i):
        ld, lo, ud, up = self.intervals[p][i]
        return IntervalCell(CellId(int(ld), int(lo)), CellId(int(ud), int(up)))

    def with_complex(self, complex_):
        return QuasiCubicalMesh(complex_, self.intervals, self.parent)

    # --------------------------------------------------------- orthogonality
    def orthogonal_pairs(self, p, q):
        """All orthogonal pairs of (p, q)-subfaces of the (p+q)-cells.

        Returns a tuple of integer arrays ``(enclosing, left, right, sign,
        pivot)``, sorted by enclosing cell.
        """
        key = (p, q)
        if key not in self._pairs:
            self._pairs[key] = _orthogonal_pairs(self.complex, p, q)
        return self._pairs[key]

    def pairs_of(self, a, p, q):
        """Orthogonal pairs within the single (p+q)-cell ``a`` as
        :class:`OrthogonalPair` objects."""
        enc, left, right, sign, pivot = self.orthogonal_pairs(p, q)
        sel = np.nonzero(enc == a)[0]
        return [OrthogonalPair(int(enc[k]), int(left[k]), int(right[k]), int(sign[k]),
                               int(pivot[k])) for k in sel]


def _orthogonal_pairs(cx, p, q):
    n = p + q
    if n > cx.dim:
        raise ValueError(f"no {n}-cells in a {cx.dim}-dimensional mesh")
    enc, left, right, sign, pivot = [], [], [], [], []
    nodes_p = cx.cell_nodes(p)
    nodes_q = cx.cell_nodes(q)
    for a in range(cx.counts[n]):
        bs = cx.subfaces(n, a, p)
        cs = cx.subfaces(n, a, q)
        for b in bs:
            nb = nodes_p[b]
            for c in cs:
                common = np.intersect1d(nb, nodes_q[c], assume_unique=True)
                if len(common) != 1:
                    continue
                node = int(common[0])
                enc.append(a)
                left.append(b)
                right.append(c)
                pivot.append(node)
                sign.append(orthogonal_orientation(cx, a, p, b, q, c, node))
    as_int = lambda x: np.asarray(x, dtype=np.int64)
    return as_int(enc), as_int(left), as_int(right), as_int(sign), as_int(pivot)


def orthogonal_orientation(cx, a, p, b, q, c, node):
    """Relative orthogonal orientation of the pair (b, c) inside a, where b is
    a p-cell, c a q-cell and ``node`` their single common node (D <= 3)."""
    if p == 0 or q == 0:
        return 1
    if p == 1:
        return cx.epsilon(p + q, a, c) * cx.epsilon(1, b, node)
    if q == 1:
        # (-1)^p * eps(a, b) * eps(c, node); only p == 2 occurs for D <= 3
        return (-1) ** p * cx.epsilon(p + q, a, b) * cx.epsilon(1, c, node)
    raise NotImplementedError("orthogonal orientation is only implemented for p + q <= 3")


def relative_orthogonal_orientation(K, a, b, c):
    """Sign relating the orientation of the cell ``a`` to the ordered pair of
    orthogonal subfaces ``b``, ``c`` (CellIds)."""
    cx = K.complex if isinstance(K, QuasiCubicalMesh) else K
    if b.dim + c.dim != a.dim:
        raise ValueError("dimensions of b and c must add up to that of a")
    if a.dim > 3 or (b.dim >= 2 and c.dim >= 2):
        raise NotImplementedError("orthogonal orientation is only implemented for D <= 3")
    common = np.intersect1d(cx.cell_nodes(b.dim)[b.index], cx.cell_nodes(c.dim)[c.index])
    if len(common) != 1:
        raise ValueError(f"{b} and {c} are not orthogonal")
    return orthogonal_orientation(cx, a.index, b.dim, b.index, c.dim, c.index, int(common[0]))


def orthogonal_pairs(K, a, p, q):
    """Orthogonal pairs of p- and q-subfaces of the (p+q)-cell ``a``."""
    if isinstance(a, CellId):
        if a.dim != p + q:
            raise ValueError(f"cell {a} does not have dimension {p + q}")
        a = a.index
    return K.pairs_of(a, p, q)


# ------------------------------------------------------------- subdivision
def forman_subdivide(mesh: CellComplex, orient=True) -> QuasiCubicalMesh:
    """Forman subdivision of a mesh of simple polytopes."""
    bad = check_simple(mesh)
    if bad:
        raise NonSimpleCellError(f"non-simple cells: {bad[:5]}")
    D = mesh.dim
    # subfaces of every cell, per dimension, sorted
    sub = [[[mesh.subfaces(p, b, r) if r < p else np.array([b]) for r in range(p + 1)]
            for b in range(mesh.counts[p])] for p in range(D + 1)]

    intervals = [[] for _ in range(D + 1)]
    # enumerate all [a, b]: sorted by (dim a, a, dim b, b) within each K-dim
    rows = []
    for ud in range(D + 1):
        for b in range(mesh.counts[ud]):
            for ld in range(ud + 1):
                for a in sub[ud][b][ld]:
                    rows.append((ld, int(a), ud, b))
    rows.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
    for t in rows:
        intervals[t[2] - t[0]].append(t)
    intervals = [np.asarray(iv, dtype=np.int64).reshape(-1, 4) for iv in intervals]
    index = [{tuple(row): i for i, row in enumerate(iv)} for iv in intervals]

    # covers within a cell: cofaces of a that are subfaces of b
    up_lists = [[mesh.cofaces(p, a)[0] for a in range(mesh.counts[p])] for p in range(D)]

    faces = [[]]
    for p in range(1, D + 1):
        fp = []
        for (ld, a, ud, b) in intervals[p]:
            hf = []
            # [a', b] with a' covering a inside b
            bset = sub[ud][b][ld + 1]
            for a2 in up_lists[ld][a]:
                if np.any(bset == a2):
                    hf.append(index[p - 1][(ld + 1, int(a2), ud, b)])
            # [a, b'] with b' a hyperface of b containing a
            for b2 in mesh.faces[ud][b]:
                if np.any(sub[ud - 1][b2][ld] == a):
                    hf.append(index[p - 1][(ld, a, ud - 1, int(b2))])
            fp.append(np.asarray(hf, dtype=np.int64))
        faces.append(fp)

    if any(len(f) != 2 * p for p in range(1, D + 1) for f in faces[p]):
        raise NonSimpleCellError("subdivision produced a cell that is not cube-like")

    signs = _assign_signs(faces, intervals)
    labels = {}
    for name, cells in mesh.labels.items():
        labels[name] = _label_intervals(intervals, index, sub, cells, D)
    cx = CellComplex([len(iv) for iv in intervals], faces, signs, labels)
    K = QuasiCubicalMesh(cx, intervals, mesh)
    if orient:
        K = assign_forman_orientations(K)
    return K


def _label_intervals(intervals, index, sub, cells, D):
    """Sub-mesh of K made of intervals [a, b] with b in the labelled set."""
    present = [set(np.asarray(c).tolist()) for c in cells] + [set()] * (D + 1)
    out = [[] for _ in range(D + 1)]
    for p, iv in enumerate(intervals):
        for i, (ld, a, ud, b) in enumerate(iv):
            if b in present[ud]:
                out[p].append(i)
    return [np.asarray(o, dtype=np.int64) for o in out]


def _assign_signs(faces, intervals):
    """Relative orientations from the edge convention plus per-cell
    propagation of the diamond constraints."""
    D = len(faces) - 1
    signs = [[]]
    if D >= 1:
        e_signs = []
        for (ld, a, ud, b), f in zip(intervals[1], faces[1]):
            # hyperfaces of an edge [a, b] are [a, a] and [b, b]
            lo_node = intervals[0][f[0]]
            e_signs.append(np.array([-1, 1] if lo_node[1] == a and lo_node[0] == ld else [1, -1],
                                    dtype=np.int8))
        signs.append(e_signs)
    for p in range(2, D + 1):
        sp_ = []
        for f in faces[p]:
            sp_.append(_propagate_cell(f, faces[p - 1], signs[p - 1]))
        signs.append(sp_)
    return signs


def _propagate_cell(hfaces, lower_faces, lower_signs):
    """Signs on the hyperfaces of one cell so that its boundary has zero
    boundary: for every ridge c shared by hyperfaces h, h',
    s_h eps(h, c) + s_h' eps(h', c) = 0."""
    k = len(hfaces)
    ridge = {}
    for j, h in enumerate(hfaces):
        for c, e in zip(lower_faces[h], lower_signs[h]):
            ridge.setdefault(int(c), []).append((j, int(e)))
    adj = [[] for _ in range(k)]
    for c, lst in ridge.items():
        if len(lst) != 2:
            raise OrientationError("cell boundary violates the diamond property")
        (i, ei), (j, ej) = lst
        adj[i].append((j, ei, ej))
        adj[j].append((i, ej, ei))
    s = np.zeros(k, dtype=np.int8)
    s[0] = 1
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j, ei, ej in adj[i]:
            want = -s[i] * ei * ej
            if s[j] == 0:
                s[j] = want
                queue.append(j)
            elif s[j] != want:
                raise OrientationError("inconsistent diamond constraints")
    if np.any(s == 0):
        raise OrientationError("cell boundary is disconnected")
    return s


def assign_forman_orientations(K: QuasiCubicalMesh) -> QuasiCubicalMesh:
    """Enforce global compatibility of the top-cell orientations."""
    return K.with_complex(orient_top_cells(K.complex))


def cube_lattice_violations(cx):
    """CellIds whose face lattice does not look like a cube's
    (2^p nodes and 2p hyperfaces)."""
    bad = []
    for p in range(1, cx.dim + 1):
        nodes = cx.cell_nodes(p)
        for i in range(cx.counts[p]):
            if len(cx.faces[p][i]) != 2 * p or len(nodes[i]) != 2 ** p:
                bad.append(CellId(p, i))
    return bad


def interval_counts(mesh):
    """Independent poset scan: number of intervals [a, b] per length."""
    D = mesh.dim
    out = [0] * (D + 1)
    for ud, ld in product(range(D + 1), repeat=2):
        if ld > ud:
            continue
        inc = mesh.incidence_matrix(ud, ld) if ld < ud else None
        out[ud - ld] += mesh.counts[ud] if inc is None else int(inc.nnz)
    return out
