"""Combinatorial mesh calculus on cell complexes.

Cochains on quasi-cubical Forman subdivisions, their cup product, Hodge
star and adjoint coboundary, and primal/mixed solvers for scalar transport
(diffusion with optional advection), steady and transient.
"""
from .complex import (CellComplex, CellId, Chain, Cochain, DimensionError, OrientationError,
                      SubMesh, ValidationReport, boundary, check_compatible_orientation,
                      coboundary, fundamental_class, integrate, normalize_node_orientation,
                      orient_top_cells, trace, validate)
from .estimator import MixedSolver, PrimalSolver, make_solver
from .forman import (IntervalCell, NonSimpleCellError, OrthogonalPair, QuasiCubicalMesh,
                     forman_subdivide)
from .operators import (InnerProduct, MetricData, Operators, adjoint_coboundary, cup,
                        hodge_star, inner_product)
from .solvers import (ErrorReport, SolveResult, SolverError, TransientSettings,
                      TransportProblem, relative_errors, solve)
from .validation import check_cochain, check_problem

__version__ = "0.1.0"

__all__ = [
    "CellComplex", "CellId", "Chain", "Cochain", "DimensionError", "OrientationError",
    "SubMesh", "ValidationReport", "boundary", "check_compatible_orientation", "coboundary",
    "fundamental_class", "integrate", "normalize_node_orientation", "orient_top_cells",
    "trace", "validate", "MixedSolver", "PrimalSolver", "make_solver", "IntervalCell",
    "NonSimpleCellError", "OrthogonalPair", "QuasiCubicalMesh", "forman_subdivide",
    "InnerProduct", "MetricData", "Operators", "adjoint_coboundary", "cup", "hodge_star",
    "inner_product", "ErrorReport", "SolveResult", "SolverError", "TransientSettings",
    "TransportProblem", "relative_errors", "solve", "check_cochain", "check_problem",
]
