"""scikit-learn style front end to the solvers.

A solver is configured through constructor parameters only, ``fit`` takes a
:class:`~cmc.solvers.TransportProblem` and stores the fitted fields in
trailing-underscore attributes::

    >>> est = MixedSolver(method="saddle").fit(problem)   # doctest: +SKIP
    >>> est.q_, est.u_tilde_                              # doctest: +SKIP

``get_params``/``set_params``/``clone`` come from
:class:`sklearn.base.BaseEstimator`.
"""
from __future__ import annotations

import copy

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .solvers import (TransientSettings, relative_errors, solve_mixed_steady,
                      solve_mixed_transient, solve_primal_steady, solve_primal_transient)
from .validation import check_cochain, check_problem


class _TransportSolver(BaseEstimator):
    formulation = ""

    def _transient_problem(self, problem):
        """Override the problem's time stepping with constructor values."""
        if self.dt is None and self.steps is None and self.theta is None:
            return problem
        ts = problem.transient or TransientSettings(dt=1.0, steps=0)
        new = TransientSettings(
            dt=ts.dt if self.dt is None else self.dt,
            steps=ts.steps if self.steps is None else self.steps,
            theta=ts.theta if self.theta is None else self.theta,
            t0=ts.t0, u0=ts.u0, u_tilde0=ts.u_tilde0)
        problem = copy.copy(problem)  # leave the caller's problem untouched
        problem.transient = new
        return problem

    def _run(self, problem):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Solve the transport problem ``X``; ``y`` is ignored."""
        problem = X
        if self.regime == "transient":
            problem = self._transient_problem(problem)
        check_problem(problem, self.regime)
        result = self._run(problem)
        cx = problem.complex
        self.result_ = result
        self.u_ = result.u
        self.q_ = result.q
        self.n_cells_ = cx.counts
        self.problem_name_ = problem.name
        return self

    def score(self, X, y):
        """Negative mean of the relative potential and flow-rate errors
        against exact cochains ``y = (u_exact, q_exact)``; higher is better.
        ``X`` must be the problem the estimator was fitted on."""
        check_is_fitted(self, "result_")
        cx = X.complex
        u = check_cochain(y[0], cx, 0, "exact potential")
        q = check_cochain(y[1], cx, cx.dim - 1, "exact flow rate")
        err = relative_errors(self.result_, u, q)
        return -0.5 * (err.u_rel + err.q_rel)

    def errors(self, u_exact, q_exact):
        """:class:`~cmc.solvers.ErrorReport` of the fitted fields."""
        check_is_fitted(self, "result_")
        return relative_errors(self.result_, np.asarray(u_exact), np.asarray(q_exact))


class PrimalSolver(_TransportSolver):
    """Primal weak formulation: solves for the nodal potential and
    post-processes the flow rate.

    Parameters
    ----------
    regime : {"steady", "transient"}
    neumann_copy : bool
        Replace the computed flow rate by the prescribed one on Neumann
        cells (steady regime).
    theta, dt, steps : optional
        Override the problem's time stepping in the transient regime.
    """

    formulation = "primal"

    def __init__(self, regime="steady", neumann_copy=True, theta=None, dt=None, steps=None):
        self.regime = regime
        self.neumann_copy = neumann_copy
        self.theta = theta
        self.dt = dt
        self.steps = steps

    def _run(self, problem):
        if self.regime == "steady":
            return solve_primal_steady(problem, neumann_copy=self.neumann_copy)
        return solve_primal_transient(problem)


class MixedSolver(_TransportSolver):
    """Mixed weak formulation: solves for the flow rate and the dual
    potential, then recovers the nodal potential by the Hodge star.

    Parameters
    ----------
    regime : {"steady", "transient"}
    method : {"eliminate", "saddle"}
        Schur-complement elimination or the full saddle-point system
        (steady regime).
    theta, dt, steps : optional
        Override the problem's time stepping in the transient regime.
    """

    formulation = "mixed"

    def __init__(self, regime="steady", method="eliminate", theta=None, dt=None, steps=None):
        self.regime = regime
        self.method = method
        self.theta = theta
        self.dt = dt
        self.steps = steps

    def _run(self, problem):
        if self.method not in ("eliminate", "saddle"):
            raise ValueError(f"unknown mixed method {self.method!r}")
        if self.regime == "steady":
            return solve_mixed_steady(problem, self.method)
        return solve_mixed_transient(problem)

    def fit(self, X, y=None):
        super().fit(X, y)
        self.u_tilde_ = self.result_.u_tilde
        return self


def make_solver(formulation="primal", **params):
    """Estimator for a formulation name."""
    try:
        cls = {"primal": PrimalSolver, "mixed": MixedSolver}[formulation]
    except KeyError:
        raise ValueError(f"unknown formulation {formulation!r}") from None
    return cls(**params)
