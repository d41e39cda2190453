import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cmc import MixedSolver, PrimalSolver
from cmc.complex import Cochain, DimensionError
from cmc.estimator import make_solver
from cmc.geometry.catalog import catalog_problem
from cmc.solvers import TransientSettings, TransportProblem, relative_errors, solve_primal_steady
from cmc.validation import check_cochain, check_problem


@pytest.fixture(scope="module")
def disk():
    return catalog_problem("disk-quadratic")


def test_params_round_trip():
    est = MixedSolver(method="saddle", theta=1.0)
    params = est.get_params()
    assert params == {"regime": "steady", "method": "saddle", "theta": 1.0, "dt": None,
                      "steps": None}
    copy = clone(est)
    assert copy is not est and copy.get_params() == params
    est.set_params(method="eliminate")
    assert est.method == "eliminate"


def test_fit_matches_solver(disk):
    problem, u, q = disk
    est = PrimalSolver().fit(problem)
    direct = solve_primal_steady(problem)
    np.testing.assert_array_equal(est.u_, direct.u)
    np.testing.assert_array_equal(est.q_, direct.q)
    assert est.n_cells_ == problem.complex.counts
    assert est.problem_name_ == "disk-quadratic"


def test_score_is_negative_mean_error(disk):
    problem, u, q = disk
    est = MixedSolver().fit(problem)
    err = relative_errors(est.result_, u, q)
    assert est.score(problem, (u, q)) == pytest.approx(-(err.u_rel + err.q_rel) / 2)
    assert est.errors(u, q) == err
    assert est.u_tilde_ is not None


def test_not_fitted(disk):
    problem, u, q = disk
    with pytest.raises(NotFittedError):
        PrimalSolver().score(problem, (u, q))


def test_transient_overrides_leave_problem_alone(disk):
    problem, _, _ = disk
    problem.transient = None
    est = PrimalSolver(regime="transient", dt=0.1, steps=4).fit(problem)
    assert problem.transient is None
    assert len(est.result_.times) == 5
    mixed = MixedSolver(regime="transient", dt=0.05, steps=2, theta=1.0).fit(problem)
    assert mixed.result_.diagnostics["theta"] == 1.0


def test_transient_without_settings(disk):
    problem, _, _ = disk
    problem.transient = None
    with pytest.raises(ValueError):
        PrimalSolver(regime="transient").fit(problem)


def test_steady_needs_dirichlet(disk):
    problem, _, _ = disk
    closed = TransportProblem(K=problem.K, metric=problem.metric, kappa=1.0, kappa_dual=1.0,
                              f=problem.f, neumann=problem.boundary, g_D=problem.g_D,
                              g_N=problem.g_N)
    with pytest.raises(ValueError):
        PrimalSolver().fit(closed)
    closed.transient = TransientSettings(dt=0.1, steps=1)
    PrimalSolver(regime="transient").fit(closed)


def test_bad_inputs(disk):
    problem, _, _ = disk
    with pytest.raises(TypeError):
        PrimalSolver().fit("disk")
    with pytest.raises(ValueError):
        MixedSolver(method="lu").fit(problem)
    with pytest.raises(ValueError):
        check_problem(problem, "periodic")
    with pytest.raises(ValueError):
        make_solver("hybrid")
    assert isinstance(make_solver("mixed", method="saddle"), MixedSolver)


def test_check_cochain(disk):
    cx = disk[0].complex
    n0 = cx.counts[0]
    np.testing.assert_array_equal(check_cochain(Cochain(0, np.ones(n0)), cx, 0), 1.0)
    with pytest.raises(DimensionError):
        check_cochain(np.ones(n0 + 1), cx, 0)
    with pytest.raises(DimensionError):
        check_cochain(Cochain(1, np.ones(cx.counts[1])), cx, 0)
    bad = np.ones(n0)
    bad[0] = np.nan
    with pytest.raises(ValueError):
        check_cochain(bad, cx, 0)


def test_wrong_sized_data_rejected(disk):
    problem, _, _ = disk
    broken = TransportProblem(K=problem.K, metric=problem.metric, kappa=1.0, kappa_dual=1.0,
                              f=problem.f[:-1], neumann=problem.neumann, g_D=problem.g_D,
                              g_N=problem.g_N)
    with pytest.raises(DimensionError):
        PrimalSolver().fit(broken)
