"""Primal and mixed weak formulations of scalar transport, steady and
transient, on quasi-cubical Riemannian meshes.

Primal unknown: the nodal potential u.  Mixed unknowns: the flow rate q on
(D-1)-cells and the dual potential u_tilde on D-cells.  Data may be given as
arrays or, for transient runs, as callables ``t -> array``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complex import OrientationError
from .forman import QuasiCubicalMesh
from .operators import MetricData, Operators


class SolverError(RuntimeError):
    """Factorization or consistency failure of a linear solve."""


@dataclass
class TransientSettings:
    dt: float
    steps: int
    theta: float = 0.5
    t0: float = 0.0
    u0: np.ndarray | None = None
    u_tilde0: np.ndarray | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("time step must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.steps < 0:
            raise ValueError("number of steps must be non-negative")

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.steps + 1)


def _at(value, t):
    return value(t) if callable(value) else value


@dataclass
class TransportProblem:
    """Discrete transport problem on a quasi-cubical mesh.

    ``neumann`` lists the boundary (D-1)-cells of the Neumann part; the
    remaining boundary (D-1)-cells form the Dirichlet part.  ``g_D`` is a
    node-length array and ``g_N`` a (D-1)-cell-length array; only entries
    on the respective boundary parts are read.
    """

    K: QuasiCubicalMesh
    metric: MetricData
    kappa: np.ndarray
    kappa_dual: np.ndarray
    f: np.ndarray | Callable
    neumann: np.ndarray
    g_D: np.ndarray | Callable
    g_N: np.ndarray | Callable
    pi: np.ndarray | None = None
    pi_dual: np.ndarray | None = None
    v: np.ndarray | None = None
    transient: TransientSettings | None = None
    name: str = ""
    mesh: object = None
    ops: Operators = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.K, QuasiCubicalMesh):
            self.K = QuasiCubicalMesh(self.K)
        if not isinstance(self.metric, MetricData):
            self.metric = MetricData(self.metric)
        cx = self.K.complex
        D = cx.dim
        n = cx.counts
        self.kappa = np.broadcast_to(np.asarray(self.kappa, float), (n[D - 1],)).copy()
        self.kappa_dual = np.broadcast_to(np.asarray(self.kappa_dual, float), (n[1],)).copy()
        self.pi = np.ones(n[D]) if self.pi is None else np.broadcast_to(
            np.asarray(self.pi, float), (n[D],)).copy()
        self.pi_dual = np.ones(n[0]) if self.pi_dual is None else np.broadcast_to(
            np.asarray(self.pi_dual, float), (n[0],)).copy()
        self.v = np.zeros(n[D - 1]) if self.v is None else np.asarray(self.v, float)
        for label, arr in (("kappa", self.kappa), ("kappa_dual", self.kappa_dual),
                           ("pi", self.pi), ("pi_dual", self.pi_dual)):
            if np.any(~(arr > 0)):
                raise ValueError(f"{label} must be strictly positive")
        if len(self.v) != n[D - 1]:
            raise ValueError("v must have one value per (D-1)-cell")
        boundary = np.nonzero(cx.top_coface_counts == 1)[0]
        self.neumann = np.unique(np.asarray(self.neumann, dtype=np.int64))
        if not np.all(np.isin(self.neumann, boundary)):
            raise ValueError("Neumann cells must lie on the boundary")
        self.boundary = boundary
        self.dirichlet = np.setdiff1d(boundary, self.neumann)
        self.dirichlet_nodes = cx.closure(D - 1, self.dirichlet)[0] if len(self.dirichlet) \
            else np.zeros(0, dtype=np.int64)
        self.ops = Operators(self.K, self.metric)

    @property
    def dim(self):
        return self.K.dim

    @property
    def complex(self):
        return self.K.complex

    @property
    def has_advection(self):
        return bool(np.any(self.v != 0))

    def boundary_signs(self, cells):
        """Orientation of boundary (D-1)-cells induced by their D-coface."""
        return self.complex.boundary_orientation(cells)


@dataclass
class SolveResult:
    formulation: str
    u: np.ndarray
    q: np.ndarray
    u_tilde: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)
    times: np.ndarray | None = None
    series_u: np.ndarray | None = None
    series_q: np.ndarray | None = None
    series_u_tilde: np.ndarray | None = None
    series_Q: np.ndarray | None = None


@dataclass
class ErrorReport:
    u_rel: float
    q_rel: float


def relative_errors(result, exact_u, exact_q) -> ErrorReport:
    """Euclidean relative errors of u and q over all cells."""
    def rel(x, y):
        y = np.asarray(y, float)
        norm = np.linalg.norm(y)
        if norm == 0:
            raise ValueError("exact field has zero norm")
        return float(np.linalg.norm(np.asarray(x, float) - y) / norm)
    return ErrorReport(rel(result.u, exact_u), rel(result.q, exact_q))


# ----------------------------------------------------------------- linear
def _solve(A, b, symmetric=True):
    A = sp.csc_matrix(A)
    if A.shape[0] == 0:
        return np.zeros(0), {"method": "empty"}
    try:
        x = spla.splu(A).solve(b)
        info = {"method": "lu"}
    except RuntimeError:
        if not symmetric:
            raise SolverError("singular system")
        x, code = spla.cg(A, b, rtol=1e-12, maxiter=10 * A.shape[0])
        if code != 0:
            raise SolverError(f"conjugate gradients failed (code {code})")
        info = {"method": "cg"}
    if not np.all(np.isfinite(x)):
        raise SolverError("linear solve produced non-finite values")
    info["residual"] = float(np.linalg.norm(A @ x - b))
    return x, info


# ----------------------------------------------------------------- primal
@dataclass
class PrimalSystem:
    stiffness: sp.csr_matrix
    advection: sp.csr_matrix
    mass: np.ndarray
    free: np.ndarray
    fixed: np.ndarray

    @property
    def matrix(self):
        return (self.stiffness - self.advection).tocsr()

    def reduced(self, mat=None):
        mat = self.matrix if mat is None else mat
        return mat[self.free][:, self.free], mat[self.free][:, self.fixed]


def primal_load(problem: TransportProblem, t=None):
    """F - G on every node."""
    cx = problem.complex
    D = problem.dim
    f = np.asarray(_at(problem.f, t), float)
    nodes = cx.cell_nodes(D)
    rows = np.concatenate(nodes)
    vals = np.repeat(f, [len(n) for n in nodes]) / 2.0 ** D
    b = np.bincount(rows, weights=vals, minlength=cx.counts[0])
    if len(problem.neumann):
        g = np.asarray(_at(problem.g_N, t), float)[problem.neumann]
        s = problem.boundary_signs(problem.neumann)
        cn = cx.cell_nodes(D - 1)
        sub = [cn[c] for c in problem.neumann]
        rows = np.concatenate(sub)
        vals = np.repeat(s * g, [len(n) for n in sub]) / 2.0 ** (D - 1)
        b -= np.bincount(rows, weights=vals, minlength=cx.counts[0])
    return b


def _nodal_average_matrix(problem, weights):
    """Matrix c <- sum_{n in c} weights(c) x(n) / 2^(D-1) on (D-1)-cells."""
    cx = problem.complex
    D = problem.dim
    cn = cx.cell_nodes(D - 1)
    rows = np.repeat(np.arange(cx.counts[D - 1]), [len(n) for n in cn])
    cols = np.concatenate(cn)
    vals = np.repeat(weights, [len(n) for n in cn]) / 2.0 ** (D - 1)
    return sp.csr_matrix((vals, (rows, cols)), shape=(cx.counts[D - 1], cx.counts[0]))


def primal_advection_flux(problem):
    """Matrix of u -> (pi_dual u) cup v."""
    return _nodal_average_matrix(problem, problem.v) @ sp.diags(problem.pi_dual)


def assemble_primal(problem: TransportProblem) -> PrimalSystem:
    ops = problem.ops
    d0 = ops.coboundary(0)
    w1 = ops.weights(1)
    stiff = (d0.T @ sp.diags(w1 * problem.kappa_dual) @ d0).tocsr()
    n0 = problem.complex.counts[0]
    if problem.has_advection:
        adv = (d0.T @ ops.cup_integral(1) @ primal_advection_flux(problem)).tocsr()
    else:
        adv = sp.csr_matrix((n0, n0))
    mass = ops.weights(0) * problem.pi_dual
    fixed = problem.dirichlet_nodes
    free = np.setdiff1d(np.arange(n0), fixed)
    return PrimalSystem(stiff, adv, mass, free, fixed)


def primal_flow_rate(problem, u, t=None, neumann_copy=True):
    """Post-processed flow rate of a nodal potential.  With
    ``neumann_copy`` (the default) the prescribed g_N replaces the computed
    values on Neumann cells."""
    ops = problem.ops
    D = problem.dim
    q = -(ops.star(1) @ (problem.kappa_dual * (ops.coboundary(0) @ u)))
    if problem.has_advection:
        q = q + primal_advection_flux(problem) @ u
    if D == 1:
        q = np.asarray(q).ravel()
    q = np.array(q, dtype=float)
    if neumann_copy:
        q[problem.neumann] = np.asarray(_at(problem.g_N, t), float)[problem.neumann]
    return q


def solve_primal_steady(problem: TransportProblem, neumann_copy=True) -> SolveResult:
    system = assemble_primal(problem)
    A_ff, A_fd = system.reduced()
    n0 = problem.complex.counts[0]
    u = np.zeros(n0)
    u[system.fixed] = np.asarray(_at(problem.g_D, None), float)[system.fixed]
    b = primal_load(problem)
    rhs = b[system.free] - A_fd @ u[system.fixed]
    u[system.free], info = _solve(A_ff, rhs, symmetric=not problem.has_advection)
    q = primal_flow_rate(problem, u, neumann_copy=neumann_copy)
    return SolveResult("primal", u, q, diagnostics=info)


def primal_amount(problem, u):
    """Amount D-cochain of a nodal potential (Hodge star of pi_dual u)."""
    return problem.ops.star(0) @ (problem.pi_dual * u)


def solve_primal_transient(problem: TransportProblem) -> SolveResult:
    ts = problem.transient
    if ts is None:
        raise ValueError("problem has no transient settings")
    system = assemble_primal(problem)
    Kmat = system.matrix
    M = sp.diags(system.mass / ts.dt)
    lhs = (M + ts.theta * Kmat).tocsr()
    rhs_mat = (M - (1 - ts.theta) * Kmat).tocsr()
    free, fixed = system.free, system.fixed
    L_ff = sp.csc_matrix(lhs[free][:, free])
    L_fd = lhs[free][:, fixed]
    solve = spla.splu(L_ff).solve if len(free) else (lambda r: np.zeros(0))

    times = ts.times
    u = np.zeros(problem.complex.counts[0]) if ts.u0 is None else np.asarray(ts.u0, float).copy()
    b_old = primal_load(problem, times[0])
    us, qs, Qs = [u.copy()], [primal_flow_rate(problem, u, times[0])], [primal_amount(problem, u)]
    for k in range(1, len(times)):
        t = times[k]
        b_new = primal_load(problem, t)
        rhs = rhs_mat @ u + ts.theta * b_new + (1 - ts.theta) * b_old
        un = np.empty_like(u)
        un[fixed] = np.asarray(_at(problem.g_D, t), float)[fixed]
        un[free] = solve(rhs[free] - L_fd @ un[fixed])
        u, b_old = un, b_new
        us.append(u.copy())
        qs.append(primal_flow_rate(problem, u, t))
        Qs.append(primal_amount(problem, u))
    return SolveResult("primal", us[-1], qs[-1], times=times, series_u=np.array(us),
                       series_q=np.array(qs), series_Q=np.array(Qs),
                       diagnostics={"theta": ts.theta, "dt": ts.dt})


# ------------------------------------------------------------------ mixed
@dataclass
class MixedSystem:
    A: np.ndarray            # diagonal on (D-1)-cells
    B: sp.csr_matrix         # N_D x N_{D-1}
    BtA: sp.csr_matrix       # advective part of the transposed coupling
    C: np.ndarray            # diagonal on D-cells
    active: np.ndarray       # (D-1)-cells where q is unknown
    neumann: np.ndarray

    @property
    def E(self):
        """Coupling r <- (B^T + B_A^T) u_tilde restricted to active rows."""
        return (self.B.T + self.BtA).tocsr()[self.active]

    def schur(self):
        B_I = self.B[:, self.active]
        return (B_I @ sp.diags(1.0 / self.A[self.active]) @ self.E).tocsr()


def mixed_dirichlet_term(problem, t=None):
    """G on every (D-1)-cell: induced sign times the mean of g_D over the
    cell's nodes, on the Dirichlet part only."""
    cx = problem.complex
    D = problem.dim
    G = np.zeros(cx.counts[D - 1])
    if len(problem.dirichlet):
        gD = np.asarray(_at(problem.g_D, t), float)
        cn = cx.cell_nodes(D - 1)
        s = problem.boundary_signs(problem.dirichlet)
        G[problem.dirichlet] = s * np.array([gD[cn[c]].mean() for c in problem.dirichlet])
    return G


def assemble_mixed(problem: TransportProblem) -> MixedSystem:
    ops = problem.ops
    D = problem.dim
    wq = ops.weights(D - 1)
    wD = ops.weights(D)
    A = wq / problem.kappa
    B = (sp.diags(wD) @ ops.coboundary(D - 1)).tocsr()
    n = problem.complex.counts
    if problem.has_advection:
        BtA = (sp.diags(wq / problem.kappa) @ _nodal_average_matrix(problem, problem.v)
               @ ops.star(D) @ sp.diags(problem.pi)).tocsr()
    else:
        BtA = sp.csr_matrix((n[D - 1], n[D]))
    C = wD * problem.pi
    active = np.setdiff1d(np.arange(n[D - 1]), problem.neumann)
    return MixedSystem(A, B, BtA, C, active, problem.neumann)


def _mixed_rhs(problem, system, t=None):
    """Right-hand side r(t) = F - B_N g_N + B_I A^-1 G_I of the reduced
    equation C du/dt + S u = r."""
    D = problem.dim
    wD = problem.ops.weights(D)
    F = wD * np.asarray(_at(problem.f, t), float)
    G = mixed_dirichlet_term(problem, t)
    qN = np.asarray(_at(problem.g_N, t), float)[system.neumann]
    I = system.active
    r = F - system.B[:, system.neumann] @ qN + system.B[:, I] @ (G[I] / system.A[I])
    return r, G, qN


def _mixed_flow(problem, system, u_tilde, G, qN):
    q = np.zeros(problem.complex.counts[problem.dim - 1])
    I = system.active
    q[I] = (system.E @ u_tilde - G[I]) / system.A[I]
    q[system.neumann] = qN
    return q


def mixed_potential(problem, u_tilde, t=None):
    u = problem.ops.star(problem.dim) @ u_tilde
    fixed = problem.dirichlet_nodes
    u[fixed] = np.asarray(_at(problem.g_D, t), float)[fixed]
    return u


def solve_mixed_steady(problem: TransportProblem, method="eliminate") -> SolveResult:
    system = assemble_mixed(problem)
    r, G, qN = _mixed_rhs(problem, system)
    I = system.active
    nI = len(I)
    symmetric = not problem.has_advection
    if method == "eliminate":
        u_tilde, info = _solve(system.schur(), r, symmetric=symmetric)
        q = _mixed_flow(problem, system, u_tilde, G, qN)
    elif method == "saddle":
        B_I = system.B[:, I]
        nD = problem.complex.counts[problem.dim]
        block = sp.bmat([[sp.diags(system.A[I]), -system.E],
                         [-B_I, sp.csr_matrix((nD, nD))]]).tocsc()
        F_full = problem.ops.weights(problem.dim) * np.asarray(_at(problem.f, None), float)
        rhs = np.concatenate([-G[I], -F_full + system.B[:, system.neumann] @ qN])
        x, info = _solve(block, rhs, symmetric=False)
        q = np.zeros(problem.complex.counts[problem.dim - 1])
        q[I] = x[:nI]
        q[system.neumann] = qN
        u_tilde = x[nI:]
    else:
        raise ValueError(f"unknown mixed method {method!r}")
    info["method_mixed"] = method
    u = mixed_potential(problem, u_tilde)
    return SolveResult("mixed", u, q, u_tilde=u_tilde, diagnostics=info)


def flow_rate_initializer(problem, u0):
    """Initial flow rate kappa * adjoint-coboundary of the Hodge dual of
    u0, plus the advective part; zero on boundary (D-1)-cells."""
    ops = problem.ops
    D = problem.dim
    ut = ops.star(0) @ u0
    q = problem.kappa * (ops.adjoint_coboundary(D) @ ut)
    if problem.has_advection:
        q = q + _nodal_average_matrix(problem, problem.v) @ (ops.star(D) @ (problem.pi * ut))
    return np.asarray(q, float)


def solve_mixed_transient(problem: TransportProblem) -> SolveResult:
    ts = problem.transient
    if ts is None:
        raise ValueError("problem has no transient settings")
    system = assemble_mixed(problem)
    S = system.schur()
    Cdt = sp.diags(system.C / ts.dt)
    lhs = sp.csc_matrix(Cdt + ts.theta * S)
    rhs_mat = (Cdt - (1 - ts.theta) * S).tocsr()
    solve = spla.splu(lhs).solve
    ops = problem.ops
    D = problem.dim
    times = ts.times
    n0 = problem.complex.counts[0]
    u0 = np.zeros(n0) if ts.u0 is None else np.asarray(ts.u0, float)
    u_tilde = ops.star(0) @ u0 if ts.u_tilde0 is None else np.asarray(ts.u_tilde0, float).copy()

    r_old, G, qN = _mixed_rhs(problem, system, times[0])
    q0 = _mixed_flow(problem, system, u_tilde, G, qN)
    interior = ops.interior(D - 1)
    if ts.u_tilde0 is None:
        q0[interior] = flow_rate_initializer(problem, u0)[interior]
    us, qs, uts = [u0.copy()], [q0], [u_tilde.copy()]
    Qs = [problem.pi * u_tilde]
    for k in range(1, len(times)):
        t = times[k]
        r_new, G, qN = _mixed_rhs(problem, system, t)
        u_tilde = solve(rhs_mat @ u_tilde + ts.theta * r_new + (1 - ts.theta) * r_old)
        r_old = r_new
        uts.append(u_tilde.copy())
        qs.append(_mixed_flow(problem, system, u_tilde, G, qN))
        us.append(mixed_potential(problem, u_tilde, t))
        Qs.append(problem.pi * u_tilde)
    return SolveResult("mixed", us[-1], qs[-1], u_tilde=uts[-1], times=times,
                       series_u=np.array(us), series_q=np.array(qs),
                       series_u_tilde=np.array(uts), series_Q=np.array(Qs),
                       diagnostics={"theta": ts.theta, "dt": ts.dt})


def solve(problem: TransportProblem, formulation="primal", regime="steady", method="eliminate"):
    """Dispatch to the requested formulation and regime."""
    if formulation not in ("primal", "mixed"):
        raise ValueError(f"unknown formulation {formulation!r}")
    if regime not in ("steady", "transient"):
        raise ValueError(f"unknown regime {regime!r}")
    if formulation == "primal":
        return solve_primal_steady(problem) if regime == "steady" else solve_primal_transient(problem)
    if regime == "steady":
        return solve_mixed_steady(problem, method)
    return solve_mixed_transient(problem)


__all__ = [
    "TransportProblem", "TransientSettings", "SolveResult", "ErrorReport", "SolverError",
    "PrimalSystem", "MixedSystem", "assemble_primal", "assemble_mixed", "primal_load",
    "primal_flow_rate", "mixed_dirichlet_term", "flow_rate_initializer",
    "solve_primal_steady", "solve_primal_transient", "solve_mixed_steady",
    "solve_mixed_transient", "relative_errors", "solve", "OrientationError",
]
