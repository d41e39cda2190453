"""Manufactured transport problems with closed-form solutions.

Every entry fixes a potential u and a constant conductivity kappa; the
flow rate q = -kappa * (Hodge dual of du) and the source f = dq follow,
written out by hand in chart coordinates.  Dirichlet data is u on the
Dirichlet nodes, Neumann data is the de Rham image of q on the Neumann
boundary cells.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .embedding import QUAD_POINTS, EmbeddedMesh, FormField
from .generators import (gen_cube_mesh, gen_hemisphere_mesh, gen_polar_disk_mesh,
                         gen_rect_mesh)

TOL = 1e-9


@dataclass
class CatalogEntry:
    name: str
    make_mesh: Callable
    kappa: float
    u: FormField
    du: FormField
    q: FormField
    f: FormField
    neumann_rule: Callable  # (mesh, boundary (D-1)-cells) -> boolean mask
    defaults: dict


def _zero(x):
    return np.zeros(len(x))


def _const(c):
    return lambda x: np.full(len(x), float(c))


def _cube_neumann(mesh, cells):
    emb = mesh.embedding
    lo, hi = emb.lo[mesh.dim - 1][cells], emb.hi[mesh.dim - 1][cells]
    flat_x = np.abs(hi[:, 0] - lo[:, 0]) < TOL
    return flat_x & ((np.abs(lo[:, 0]) < TOL) | (np.abs(lo[:, 0] - 1) < TOL))


def _disk_neumann(mesh, cells, straddle="dirichlet"):
    """Dirichlet on the half circle x >= 0.  ``straddle`` decides where
    boundary edges crossing x = 0 go."""
    emb = mesh.embedding
    lo, hi = emb.lo[1][cells], emb.hi[1][cells]
    c_lo, c_hi = np.cos(lo[:, 1]), np.cos(hi[:, 1])
    inside = (c_lo >= -TOL) & (c_hi >= -TOL)
    if straddle == "dirichlet":
        # an edge belongs to Gamma_D when its midpoint lies in x >= 0
        dirichlet = np.cos(0.5 * (lo[:, 1] + hi[:, 1])) >= -TOL
    elif straddle == "neumann":
        dirichlet = inside
    else:
        raise ValueError(f"unknown straddle rule {straddle!r}")
    return ~dirichlet


def _hemisphere_neumann(mesh, cells):
    emb = mesh.embedding
    mid = 0.5 * (emb.lo[1][cells, 1] + emb.hi[1][cells, 1])
    return np.sin(mid) > TOL  # y > 0 half of the equator


def _rect_neumann(mesh, cells):
    emb = mesh.embedding
    pts = emb.centers(1)[cells]
    w = mesh.params.get("w", 20.0)
    return ~((np.abs(pts[:, 0]) < TOL) | (np.abs(pts[:, 0] - w) < TOL))


def _cube_forms(kappa):
    u = FormField(0, {(): lambda x: np.sum(x ** 2, axis=1)}, "u")
    du = FormField(1, {(i,): (lambda i: lambda x: 2 * x[:, i])(i) for i in range(3)}, "du")
    c = 2 * kappa
    q = FormField(2, {(1, 2): lambda x: -c * x[:, 0],
                      (0, 2): lambda x: c * x[:, 1],
                      (0, 1): lambda x: -c * x[:, 2]}, "q")
    f = FormField(3, {(0, 1, 2): _const(-3 * c)}, "f")
    return u, du, q, f


def _disk_forms(kappa):
    u = FormField(0, {(): lambda x: x[:, 0] ** 2}, "u")
    du = FormField(1, {(0,): lambda x: 2 * x[:, 0]}, "du")
    q = FormField(1, {(1,): lambda x: -2 * kappa * x[:, 0] ** 2}, "q")
    f = FormField(2, {(0, 1): lambda x: -4 * kappa * x[:, 0]}, "f")
    return u, du, q, f


def _hemisphere_forms(kappa):
    u = FormField(0, {(): lambda x: x[:, 0].copy()}, "u")
    du = FormField(1, {(0,): _const(1.0)}, "du")
    q = FormField(1, {(1,): lambda x: -kappa * np.sin(x[:, 0])}, "q")
    f = FormField(2, {(0, 1): lambda x: -kappa * np.cos(x[:, 0])}, "f")
    return u, du, q, f


def _rect_forms(kappa):
    u = FormField(0, {(): lambda x: 5 * x[:, 0]}, "u")
    du = FormField(1, {(0,): _const(5.0)}, "du")
    q = FormField(1, {(1,): _const(-5 * kappa)}, "q")
    f = FormField(2, {(0, 1): _zero}, "f")
    return u, du, q, f


def _entry(name, make_mesh, kappa, forms, rule, defaults):
    u, du, q, f = forms(kappa)
    return CatalogEntry(name, make_mesh, kappa, u, du, q, f, rule, defaults)


CATALOG = {
    "cube-quadratic": _entry("cube-quadratic", gen_cube_mesh, 2.0, _cube_forms,
                             _cube_neumann, {"nx": 2}),
    "disk-quadratic": _entry("disk-quadratic", gen_polar_disk_mesh, 1.0, _disk_forms,
                             _disk_neumann, {"nr": 4, "nphi": 3}),
    "hemisphere-linear": _entry("hemisphere-linear", gen_hemisphere_mesh, 2.0,
                                _hemisphere_forms, _hemisphere_neumann,
                                {"ntheta": 6, "nphi": 6}),
    "rectangle-linear": _entry("rectangle-linear", gen_rect_mesh, 6.0, _rect_forms,
                               _rect_neumann, {"w": 20.0, "h": 15.0, "nx": 4, "ny": 3}),
}


def catalog_names():
    return sorted(CATALOG)


def catalog_entry(name) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog problem {name!r}; choose from {catalog_names()}") from None


def catalog_problem(name, mesh: EmbeddedMesh | None = None, source_points=QUAD_POINTS,
                    **params):
    """Build the mesh (unless given) and the discrete transport problem of a
    catalog entry.  Returns ``(problem, exact_u, exact_q)`` as cochain
    value arrays.

    ``source_points`` is the number of Gauss points per axis used for the
    production rate f; 1 gives the midpoint rule."""
    from ..solvers import TransportProblem

    entry = catalog_entry(name)
    if mesh is None:
        kw = dict(entry.defaults)
        kw.update(params)
        mesh = entry.make_mesh(**kw)
    cx = mesh.complex
    D = mesh.dim
    bnd = np.nonzero(cx.top_coface_counts == 1)[0]
    neumann = bnd[entry.neumann_rule(mesh, bnd)]
    u_exact = mesh.derham(entry.u).values
    q_exact = mesh.derham(entry.q).values
    f = mesh.derham(entry.f, source_points).values
    g_N = np.zeros(cx.counts[D - 1])
    g_N[neumann] = q_exact[neumann]
    problem = TransportProblem(
        K=mesh.K, metric=mesh.metric,
        kappa=np.full(cx.counts[D - 1], entry.kappa),
        kappa_dual=np.full(cx.counts[1], entry.kappa),
        f=f, neumann=neumann, g_D=u_exact.copy(), g_N=g_N,
        name=name, mesh=mesh,
    )
    return problem, u_exact, q_exact
