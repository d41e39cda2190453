"""Intrinsic cell complexes: graded cells with signed hyperface incidence.

A :class:`CellComplex` stores, for every p-cell with p >= 1, the list of its
hyperfaces together with the relative orientation (+1/-1) of each
cell/hyperface pair.  Everything else (cofaces, node sets, boundary
matrices, sub-meshes) is derived lazily and cached.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    """Raised when a chain/cochain does not match the expected degree or size."""


class OrientationError(ValueError):
    """Raised when a complex cannot be (or is not) compatibly oriented."""


@dataclass(frozen=True)
class CellId:
    dim: int
    index: int


@dataclass
class Chain:
    dim: int
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)


@dataclass
class Cochain:
    """Real values on the p-cells of a complex (a discrete p-form)."""

    dim: int
    values: np.ndarray
    units: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return len(self.values)


class CellComplex:
    """Graded poset with signed hyperface incidence.

    Parameters
    ----------
    counts : sequence of int
        Number of cells in each dimension 0..D.
    faces : list
        ``faces[p][i]`` is the integer array of hyperfaces ((p-1)-cells) of
        the p-cell ``i``; ``faces[0]`` is ignored and may be empty.
    signs : list
        Matching relative orientations in {-1, +1}.
    labels : dict, optional
        Named sub-meshes, each a list (one entry per dimension) of cell
        index arrays.
    """

    def __init__(self, counts, faces, signs, labels=None):
        self.counts = tuple(int(n) for n in counts)
        self.dim = len(self.counts) - 1
        if self.dim < 0:
            raise DimensionError("a complex needs at least one dimension")
        self.faces = [[]] + [
            [np.asarray(f, dtype=np.int64) for f in faces[p]] for p in range(1, self.dim + 1)
        ]
        self.signs = [[]] + [
            [np.asarray(s, dtype=np.int8) for s in signs[p]] for p in range(1, self.dim + 1)
        ]
        for p in range(1, self.dim + 1):
            if len(self.faces[p]) != self.counts[p] or len(self.signs[p]) != self.counts[p]:
                raise DimensionError(f"incidence of dimension {p} does not match counts")
            for f, s in zip(self.faces[p], self.signs[p]):
                if f.shape != s.shape:
                    raise DimensionError(f"faces/signs length mismatch in dimension {p}")
        self.labels = {}
        for name, cells in (labels or {}).items():
            per_dim = [np.asarray(cells[p] if p < len(cells) else [], dtype=np.int64)
                       for p in range(self.dim + 1)]
            self.labels[name] = per_dim
        self._cache = {}

    # ------------------------------------------------------------------ basics
    def __repr__(self):
        return f"CellComplex(dim={self.dim}, counts={self.counts})"

    def num_cells(self, p):
        return self.counts[p]

    def hyperfaces(self, p, i):
        return self.faces[p][i], self.signs[p][i]

    def epsilon(self, p, a, b):
        """Relative orientation of the p-cell ``a`` and the (p-1)-cell ``b``
        (0 when ``b`` is not a hyperface of ``a``)."""
        f, s = self.faces[p][a], self.signs[p][a]
        hit = np.nonzero(f == b)[0]
        return int(s[hit[0]]) if len(hit) else 0

    def boundary_matrix(self, p):
        """Sparse integer matrix of the boundary operator C_p -> C_{p-1}."""
        if not 1 <= p <= self.dim:
            raise DimensionError(f"boundary operator undefined for p={p} (D={self.dim})")
        key = ("boundary", p)
        if key not in self._cache:
            rows = np.concatenate([f for f in self.faces[p]] or [np.zeros(0, np.int64)])
            vals = np.concatenate([s for s in self.signs[p]] or [np.zeros(0, np.int8)])
            cols = np.repeat(np.arange(self.counts[p]), [len(f) for f in self.faces[p]])
            mat = sp.csr_matrix(
                (vals.astype(np.int64), (rows, cols)), shape=(self.counts[p - 1], self.counts[p])
            )
            self._cache[key] = mat
        return self._cache[key]

    def coboundary_matrix(self, p):
        """Sparse integer matrix of the coboundary operator C^p -> C^{p+1}."""
        if not 0 <= p <= self.dim - 1:
            raise DimensionError(f"coboundary operator undefined for p={p} (D={self.dim})")
        key = ("coboundary", p)
        if key not in self._cache:
            self._cache[key] = self.boundary_matrix(p + 1).T.tocsr()
        return self._cache[key]

    def cofaces(self, p, i):
        """(p+1)-cells having the p-cell ``i`` as a hyperface, with signs."""
        key = ("cofaces", p)
        if key not in self._cache:
            mat = self.boundary_matrix(p + 1).tocsr()
            self._cache[key] = [
                (mat.indices[mat.indptr[k]:mat.indptr[k + 1]].copy(),
                 mat.data[mat.indptr[k]:mat.indptr[k + 1]].copy())
                for k in range(self.counts[p])
            ]
        return self._cache[key][i]

    def incidence_matrix(self, p, q):
        """Boolean sparse matrix S with S[i, j] true iff the q-cell j is a
        subface of the p-cell i (q <= p)."""
        key = ("incidence", p, q)
        if key not in self._cache:
            if q > p:
                raise DimensionError("subfaces must have lower dimension")
            mat = sp.identity(self.counts[p], dtype=np.int64, format="csr")
            for r in range(p, q, -1):
                mat = mat @ abs(self.boundary_matrix(r)).T
                mat.data[:] = 1
            self._cache[key] = mat.tocsr()
        return self._cache[key]

    def subfaces(self, p, i, q):
        mat = self.incidence_matrix(p, q)
        return mat.indices[mat.indptr[i]:mat.indptr[i + 1]]

    def cell_nodes(self, p):
        """List of sorted node arrays, one per p-cell."""
        key = ("nodes", p)
        if key not in self._cache:
            mat = self.incidence_matrix(p, 0)
            mat.sort_indices()
            self._cache[key] = [mat.indices[mat.indptr[i]:mat.indptr[i + 1]].copy()
                                for i in range(self.counts[p])]
        return self._cache[key]

    # -------------------------------------------------------------- boundary
    @cached_property
    def top_coface_counts(self):
        """Number of D-cofaces of each (D-1)-cell."""
        if self.dim == 0:
            return np.zeros(0, dtype=np.int64)
        return np.asarray(abs(self.boundary_matrix(self.dim)).sum(axis=1)).ravel()

    @cached_property
    def boundary_cells(self):
        """Per-dimension sorted index arrays of the cells on the boundary of
        the complex (closure of the (D-1)-cells with a single D-coface)."""
        D = self.dim
        cells = [np.zeros(0, dtype=np.int64) for _ in range(D + 1)]
        if D == 0:
            return cells
        top = np.nonzero(self.top_coface_counts == 1)[0]
        return self.closure(D - 1, top)

    def closure(self, p, cells):
        """Downward closure of a set of p-cells, returned per dimension."""
        cells = np.unique(np.asarray(cells, dtype=np.int64))
        out = [np.zeros(0, dtype=np.int64) for _ in range(self.dim + 1)]
        out[p] = cells
        for q in range(p, 0, -1):
            if len(out[q]):
                out[q - 1] = np.unique(np.concatenate([self.faces[q][i] for i in out[q]]))
        return out

    def boundary_orientation(self, cells):
        """Sign of each (D-1)-cell induced by its unique D-coface."""
        D = self.dim
        out = np.zeros(len(cells), dtype=np.int64)
        for k, c in enumerate(cells):
            idx, sgn = self.cofaces(D - 1, c)
            if len(idx) != 1:
                raise OrientationError(f"cell {CellId(D - 1, int(c))} is not on the boundary")
            out[k] = sgn[0]
        return out

    # ----------------------------------------------------------- sub-meshes
    def submesh(self, cells, name=""):
        """Sub-mesh spanned by per-dimension cell arrays (closed under
        subfaces), or by a label name."""
        if isinstance(cells, str):
            name, cells = cells, self.labels[cells]
        return SubMesh(self, cells, name)

    def with_signs(self, signs):
        """Copy of the complex with replaced relative orientations."""
        return CellComplex(self.counts, self.faces, signs, self.labels)


class SubMesh:
    """A closed subset of a complex, re-indexed as a complex of its own.

    ``cells[p]`` holds the parent indices of the sub-mesh p-cells in
    increasing order; position in that array is the local index.
    """

    def __init__(self, parent: CellComplex, cells, name=""):
        self.parent = parent
        self.name = name
        cells = [np.unique(np.asarray(c, dtype=np.int64)) for c in cells]
        while len(cells) > 1 and len(cells[-1]) == 0:
            cells.pop()
        self.cells = cells
        self.dim = len(cells) - 1
        local = []
        for p, arr in enumerate(cells):
            lookup = np.full(parent.counts[p], -1, dtype=np.int64)
            lookup[arr] = np.arange(len(arr))
            local.append(lookup)
        self.local_index = local
        faces, signs = [[]], [[]]
        for p in range(1, self.dim + 1):
            fp, spp = [], []
            for c in cells[p]:
                f, s = parent.hyperfaces(p, c)
                loc = local[p - 1][f]
                if np.any(loc < 0):
                    bad = f[loc < 0][0]
                    raise ValueError(
                        f"sub-mesh {name!r} is not closed: {CellId(p - 1, int(bad))} missing"
                    )
                fp.append(loc)
                spp.append(s)
            faces.append(fp)
            signs.append(spp)
        self.complex = CellComplex([len(c) for c in cells], faces, signs)

    def __repr__(self):
        return f"SubMesh({self.name!r}, counts={self.complex.counts})"

    def contains(self, p, i):
        return p <= self.dim and self.local_index[p][i] >= 0


# ----------------------------------------------------------------- operations
def _check_chain(complex_, dim, n):
    if not 0 <= dim <= complex_.dim:
        raise DimensionError(f"degree {dim} outside 0..{complex_.dim}")
    if n != complex_.counts[dim]:
        raise DimensionError(
            f"expected {complex_.counts[dim]} values for degree {dim}, got {n}"
        )


def boundary(complex_, chain):
    """Boundary of a p-chain, a (p-1)-chain."""
    p = chain.dim
    if p == 0:
        raise DimensionError("the boundary of a 0-chain is undefined")
    _check_chain(complex_, p, len(chain.coefficients))
    return Chain(p - 1, complex_.boundary_matrix(p) @ chain.coefficients)


def coboundary(complex_, cochain):
    """Coboundary of a p-cochain, a (p+1)-cochain."""
    p = cochain.dim
    _check_chain(complex_, p, len(cochain.values))
    if p == complex_.dim:
        raise DimensionError("the coboundary of a top-dimensional cochain is undefined")
    return Cochain(p + 1, complex_.coboundary_matrix(p) @ cochain.values, cochain.units)


def trace(complex_, sub, cochain):
    """Restriction of a cochain to a sub-mesh, re-indexed locally."""
    p = cochain.dim
    _check_chain(complex_, p, len(cochain.values))
    if sub.parent is not complex_:
        raise ValueError("sub-mesh belongs to another complex")
    if p > sub.dim:
        return Cochain(p, np.zeros(0), cochain.units)
    return Cochain(p, cochain.values[sub.cells[p]], cochain.units)


def check_compatible_orientation(complex_):
    """Check that every interior (D-1)-cell receives opposite signs from its
    two D-cofaces.  Returns ``(ok, offending)`` with offending CellIds."""
    D = complex_.dim
    if D == 0:
        return True, []
    mat = complex_.boundary_matrix(D).tocsr()
    bad = []
    for c in range(complex_.counts[D - 1]):
        vals = mat.data[mat.indptr[c]:mat.indptr[c + 1]]
        if len(vals) > 2:
            bad.append(CellId(D - 1, c))
        elif len(vals) == 2 and vals[0] + vals[1] != 0:
            bad.append(CellId(D - 1, c))
    return not bad, bad


def fundamental_class(complex_):
    ok, bad = check_compatible_orientation(complex_)
    if not ok:
        raise OrientationError(f"complex is not compatibly oriented at {bad[:5]}")
    return Chain(complex_.dim, np.ones(complex_.counts[complex_.dim]))


def integrate(complex_, cochain):
    """Discrete integral: the pairing of a D-cochain with the fundamental class."""
    if cochain.dim != complex_.dim:
        raise DimensionError("only top-dimensional cochains can be integrated")
    _check_chain(complex_, cochain.dim, len(cochain.values))
    return float(fundamental_class(complex_).coefficients @ cochain.values)


def orient_top_cells(complex_):
    """Flip D-cell orientations by flood fill so that the complex becomes
    compatibly oriented; the first cell of each component keeps its sign."""
    D = complex_.dim
    if D == 0:
        return complex_
    n = complex_.counts[D]
    mat = complex_.boundary_matrix(D).tocsr()
    flip = np.zeros(n, dtype=np.int64)
    for start in range(n):
        if flip[start]:
            continue
        flip[start] = 1
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for c, s in zip(complex_.faces[D][a], complex_.signs[D][a]):
                row = slice(mat.indptr[c], mat.indptr[c + 1])
                for b, t in zip(mat.indices[row], mat.data[row]):
                    if b == a:
                        continue
                    # need flip[a]*s == -flip[b]*t
                    want = -flip[a] * s * t
                    if flip[b] == 0:
                        flip[b] = want
                        queue.append(b)
                    elif flip[b] != want:
                        raise OrientationError(
                            f"non-orientable: contradiction at {CellId(D - 1, int(c))}"
                        )
    if np.all(flip == 1):
        return complex_
    signs = list(complex_.signs)
    signs[D] = [s * np.int8(f) for s, f in zip(complex_.signs[D], flip)]
    return complex_.with_signs(signs)


def normalize_node_orientation(complex_):
    """Return an equivalent complex whose nodes are all positively oriented,
    i.e. every edge has opposite signs at its two endpoints.

    A negatively oriented node shows up as an edge whose endpoint signs
    agree; flipping that node negates all its edge incidences.  Flips are
    found by two-colouring each connected component of the 1-skeleton; the
    lowest-numbered node of a component keeps its orientation.
    """
    if complex_.dim < 1:
        return complex_
    n0 = complex_.counts[0]
    adj = [[] for _ in range(n0)]
    for f, s in zip(complex_.faces[1], complex_.signs[1]):
        if len(f) != 2:
            raise OrientationError(f"an edge must have two endpoints, got {len(f)}")
        (a, b), (sa, sb) = f, s
        # flip[a] * sa == -flip[b] * sb
        adj[a].append((b, -int(sa) * int(sb)))
        adj[b].append((a, -int(sa) * int(sb)))
    flip = np.zeros(n0, dtype=np.int64)
    for start in range(n0):
        if flip[start]:
            continue
        flip[start] = 1
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b, rel in adj[a]:
                want = flip[a] * rel
                if flip[b] == 0:
                    flip[b] = want
                    queue.append(b)
                elif flip[b] != want:
                    raise OrientationError(
                        f"node orientations are contradictory at {CellId(0, int(b))}")
    if np.all(flip == 1):
        return complex_
    signs = list(complex_.signs)
    signs[1] = [s * flip[f].astype(np.int8) for f, s in zip(complex_.faces[1], complex_.signs[1])]
    return complex_.with_signs(signs)


@dataclass
class ValidationReport:
    grading: list = field(default_factory=list)
    chain_complex: list = field(default_factory=list)
    cofaces: list = field(default_factory=list)
    diamond: list = field(default_factory=list)
    submesh_closure: list = field(default_factory=list)
    signs: list = field(default_factory=list)

    @property
    def ok(self):
        return not any(self.as_dict().values())

    def as_dict(self):
        return {
            "grading": self.grading,
            "chain_complex": self.chain_complex,
            "cofaces": self.cofaces,
            "diamond": self.diamond,
            "submesh_closure": self.submesh_closure,
            "signs": self.signs,
        }

    def violations(self):
        return [(kind, c) for kind, cells in self.as_dict().items() for c in cells]


def validate(complex_):
    """Structural checks; returns a :class:`ValidationReport`."""
    rep = ValidationReport()
    D = complex_.dim
    for p in range(1, D + 1):
        for i in range(complex_.counts[p]):
            f, s = complex_.hyperfaces(p, i)
            if np.any((f < 0) | (f >= complex_.counts[p - 1])):
                rep.grading.append(CellId(p, i))
            if not np.all(np.abs(s) == 1):
                rep.signs.append(CellId(p, i))
            if len(np.unique(f)) != len(f):
                rep.grading.append(CellId(p, i))
    if rep.grading:
        return rep
    for p in range(2, D + 1):
        prod = (complex_.boundary_matrix(p - 1) @ complex_.boundary_matrix(p)).tocsc()
        prod.eliminate_zeros()
        for a in np.unique(prod.nonzero()[1]):
            rep.chain_complex.append(CellId(p, int(a)))
        # diamond: every (p-2)-subface lies under exactly two hyperfaces
        two = (abs(complex_.boundary_matrix(p - 1)) @ abs(complex_.boundary_matrix(p))).tocsc()
        for a in range(complex_.counts[p]):
            col = two.data[two.indptr[a]:two.indptr[a + 1]]
            if np.any(col != 2):
                rep.diamond.append(CellId(p, a))
    if D >= 1:
        for c in np.nonzero(complex_.top_coface_counts > 2)[0]:
            rep.cofaces.append(CellId(D - 1, int(c)))
    for name, cells in complex_.labels.items():
        for p in range(1, D + 1):
            present = set(cells[p - 1].tolist())
            for i in cells[p]:
                if not set(complex_.faces[p][i].tolist()) <= present:
                    rep.submesh_closure.append((name, CellId(p, int(i))))
    return rep
