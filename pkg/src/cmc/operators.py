"""Cup product, diagonal inner products, Hodge stars and the adjoint
coboundary on quasi-cubical Riemannian meshes.

Operators are assembled as sparse matrices once per (mesh, measures) pair
and cached on an :class:`Operators` instance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .complex import Cochain, DimensionError
from .forman import QuasiCubicalMesh


@dataclass
class MetricData:
    """Positive measure of every cell, one array per dimension."""

    measures: list

    def __post_init__(self):
        self.measures = [np.asarray(m, dtype=float) for m in self.measures]
        for p, m in enumerate(self.measures):
            if np.any(~(m > 0)):
                raise ValueError(f"measures of {p}-cells must be strictly positive")
        if len(self.measures) and not np.all(self.measures[0] == 1.0):
            raise ValueError("node measures must all equal 1")

    def __getitem__(self, p):
        return self.measures[p]


@dataclass
class InnerProduct:
    dim: int
    weights: np.ndarray

    def __call__(self, x, y):
        return float(np.sum(self.weights * x * y))

    @property
    def matrix(self):
        return sp.diags(self.weights)


def _mesh(K):
    if isinstance(K, QuasiCubicalMesh):
        return K
    return QuasiCubicalMesh(K)


def cup_pairs(K, p, q):
    """Coefficient list of the cup product on (p, q)-cochains:
    ``(target, left, right, coef)`` with
    (s ⌣ t)(target) = sum coef * s(left) * t(right)."""
    K = _mesh(K)
    enc, left, right, sign, _ = K.orthogonal_pairs(p, q)
    return enc, left, right, sign * 2.0 ** -(p + q)


def cup(K, sigma: Cochain, tau: Cochain) -> Cochain:
    """Quasi-cubical cup product of a p-cochain and a q-cochain."""
    K = _mesh(K)
    p, q = sigma.dim, tau.dim
    if p + q > K.dim:
        raise DimensionError(f"cup of degrees {p} and {q} exceeds dimension {K.dim}")
    cx = K.complex
    for c in (sigma, tau):
        if len(c.values) != cx.counts[c.dim]:
            raise DimensionError("cochain length does not match the mesh")
    enc, left, right, coef = cup_pairs(K, p, q)
    vals = np.bincount(enc, weights=coef * sigma.values[left] * tau.values[right],
                       minlength=cx.counts[p + q])
    return Cochain(p + q, vals)


def cup_matrix(K, tau: Cochain, p):
    """Matrix of s -> s ⌣ tau acting on p-cochains."""
    K = _mesh(K)
    q = tau.dim
    enc, left, right, coef = cup_pairs(K, p, q)
    n = K.complex.counts
    return sp.csr_matrix((coef * tau.values[right], (enc, left)), shape=(n[p + q], n[p]))


def cup_left_matrix(K, sigma: Cochain, q):
    """Matrix of t -> sigma ⌣ t acting on q-cochains."""
    K = _mesh(K)
    p = sigma.dim
    enc, left, right, coef = cup_pairs(K, p, q)
    n = K.complex.counts
    return sp.csr_matrix((coef * sigma.values[left], (enc, right)), shape=(n[p + q], n[q]))


def cup_integral_matrix(K, p):
    """Bilinear form (s, t) -> (s ⌣ t)[K] on (p, D-p)-cochains as a matrix."""
    K = _mesh(K)
    D = K.dim
    enc, left, right, coef = cup_pairs(K, p, D - p)
    n = K.complex.counts
    return sp.csr_matrix((coef, (left, right)), shape=(n[p], n[D - p]))


def inner_product_weights(K, metric, p):
    """Diagonal of the discrete inner product on p-cochains."""
    K = _mesh(K)
    D = K.dim
    mu = metric.measures if isinstance(metric, MetricData) else metric
    enc, b, c, _, _ = K.orthogonal_pairs(D - p, p)
    acc = np.bincount(c, weights=mu[D - p][b], minlength=K.complex.counts[p])
    return acc / (2.0 ** D * mu[p])


def inner_product(K, metric, p) -> InnerProduct:
    return InnerProduct(p, inner_product_weights(K, metric, p))


def hodge_star_matrix(K, metric, p, weights=None):
    """Sparse matrix of the Hodge star C^p -> C^{D-p}."""
    K = _mesh(K)
    D = K.dim
    if not 0 <= p <= D:
        raise DimensionError(f"no Hodge star on degree {p}")
    w = inner_product_weights(K, metric, D - p) if weights is None else weights
    enc, b, c, sign, _ = K.orthogonal_pairs(p, D - p)
    vals = sign / (2.0 ** D * w[c])
    n = K.complex.counts
    return sp.csr_matrix((vals, (c, b)), shape=(n[D - p], n[p]))


def hodge_star(K, metric, p, sigma: Cochain) -> Cochain:
    if sigma.dim != p:
        raise DimensionError(f"expected a {p}-cochain, got degree {sigma.dim}")
    K = _mesh(K)
    return Cochain(K.dim - p, hodge_star_matrix(K, metric, p) @ sigma.values)


def interior_mask(K, p):
    """Boolean mask of the p-cells not on the boundary of K."""
    K = _mesh(K)
    cx = K.complex
    mask = np.ones(cx.counts[p], dtype=bool)
    if p < len(cx.boundary_cells):
        mask[cx.boundary_cells[p]] = False
    return mask


def zero_trace_project(K, cochain: Cochain) -> Cochain:
    """Zero the entries of a cochain on boundary cells."""
    mask = interior_mask(K, cochain.dim)
    return Cochain(cochain.dim, np.where(mask, cochain.values, 0.0), cochain.units)


def adjoint_coboundary_matrix(K, metric, p):
    """δ★_p on zero-trace cochains as a full-size matrix C^p -> C^{p-1};
    rows and columns of boundary cells are zero."""
    K = _mesh(K)
    D = K.dim
    if not 1 <= p <= D:
        raise DimensionError(f"adjoint coboundary undefined for p={p}")
    cx = K.complex
    wp = inner_product_weights(K, metric, p)
    wq = inner_product_weights(K, metric, p - 1)
    bd = cx.boundary_matrix(p).astype(float)  # (p-1) x p
    rin = interior_mask(K, p - 1).astype(float)
    cin = interior_mask(K, p).astype(float)
    mat = sp.diags(rin / wq) @ bd @ sp.diags(wp * cin)
    mat = sp.csr_matrix(mat)
    mat.eliminate_zeros()
    return mat


def adjoint_coboundary(K, metric, p, sigma: Cochain) -> Cochain:
    if sigma.dim != p:
        raise DimensionError(f"expected a {p}-cochain")
    mask = interior_mask(K, p)
    if np.any(sigma.values[~mask] != 0):
        raise ValueError("adjoint coboundary needs a zero-trace cochain")
    return Cochain(p - 1, adjoint_coboundary_matrix(K, metric, p) @ sigma.values)


class Operators:
    """Cached sparse operators for one quasi-cubical Riemannian mesh."""

    def __init__(self, K, metric):
        self.K = _mesh(K)
        self.metric = metric if isinstance(metric, MetricData) else MetricData(metric)
        self.dim = self.K.dim
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def weights(self, p):
        return self._get(("w", p), lambda: inner_product_weights(self.K, self.metric, p))

    def star(self, p):
        return self._get(("star", p),
                         lambda: hodge_star_matrix(self.K, self.metric, p,
                                                   self.weights(self.dim - p)))

    def coboundary(self, p):
        return self._get(("d", p),
                         lambda: self.K.complex.coboundary_matrix(p).astype(float).tocsr())

    def adjoint_coboundary(self, p):
        return self._get(("dstar", p),
                         lambda: adjoint_coboundary_matrix(self.K, self.metric, p))

    def interior(self, p):
        return self._get(("int", p), lambda: interior_mask(self.K, p))

    def cup_matrix(self, tau, p):
        return cup_matrix(self.K, tau, p)

    def cup_integral(self, p):
        return self._get(("cupint", p), lambda: cup_integral_matrix(self.K, p))
