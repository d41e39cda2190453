"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import numpy as np

from .complex import Cochain, DimensionError, check_compatible_orientation, validate


def check_cochain(values, complex_, dim, name="cochain"):
    """Return ``values`` as a finite float array of length N_dim.

    Accepts arrays, sequences and :class:`Cochain` objects (whose degree
    must then equal ``dim``).
    """
    if isinstance(values, Cochain):
        if values.dim != dim:
            raise DimensionError(f"{name} has degree {values.dim}, expected {dim}")
        values = values.values
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or len(arr) != complex_.counts[dim]:
        raise DimensionError(
            f"{name} needs {complex_.counts[dim]} values (one per {dim}-cell), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_problem(problem, regime="steady"):
    """Validate a :class:`~cmc.solvers.TransportProblem` before solving.

    Checks the complex structure, compatible orientation, the sizes of all
    data arrays and the requirements of the regime: a steady solve needs
    a Dirichlet boundary (pure Neumann problems are singular) and a
    transient one needs time-stepping settings.
    Returns the problem unchanged.
    """
    from .solvers import TransportProblem

    if not isinstance(problem, TransportProblem):
        raise TypeError(f"expected a TransportProblem, got {type(problem).__name__}")
    cx = problem.complex
    report = validate(cx)
    if not report.ok:
        raise ValueError(f"invalid complex: {report.violations()[:5]}")
    ok, bad = check_compatible_orientation(cx)
    if not ok:
        raise ValueError(f"complex is not compatibly oriented at {bad[:5]}")
    D = cx.dim
    for name, dim in (("f", D), ("g_D", 0), ("g_N", D - 1)):
        value = getattr(problem, name)
        if not callable(value):
            check_cochain(value, cx, dim, name)
    if regime == "steady" and len(problem.dirichlet) == 0:
        raise ValueError("a steady problem needs a non-empty Dirichlet boundary")
    if regime == "transient" and problem.transient is None:
        raise ValueError("problem has no transient settings")
    if regime not in ("steady", "transient"):
        raise ValueError(f"unknown regime {regime!r}")
    return problem
