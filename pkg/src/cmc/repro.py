"""The four catalog examples with their reference error values.

``reproduce`` solves every example with both formulations and returns one
:class:`ReproRow` per example; ``format_table`` prints them next to the
reference values.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .geometry.catalog import catalog_problem
from .geometry.tess import tess_mesh, voronoi_rectangle
from .solvers import relative_errors, solve_mixed_steady, solve_primal_steady

COLUMNS = ("u_primal", "u_mixed", "q_primal", "q_mixed")

REFERENCE = {
    "cube-quadratic": (0.0, 0.0467428, 0.129099, 7.2207e-16),
    "disk-quadratic": (0.0243588, 0.0802977, 0.0581986, 4.72913e-06),
    "hemisphere-linear": (0.0190061, 0.0256953, 0.0161111, 0.000889324),
    "rectangle-linear": (0.0942374, 0.132704, 0.397656, 0.329299),
}


@dataclass
class ReproRow:
    name: str
    values: tuple
    reference: tuple
    seconds: float
    extra: dict = field(default_factory=dict)

    def deviation(self, column):
        """Relative deviation of one column from its reference value."""
        k = COLUMNS.index(column)
        ref = self.reference[k]
        return abs(self.values[k] - ref) / abs(ref) if ref else abs(self.values[k])


def run_example(name, source_points=1, mesh=None, **params):
    """Relative errors (u_primal, u_mixed, q_primal, q_mixed) of one
    catalog example plus extra diagnostics."""
    problem, u_ex, q_ex = catalog_problem(name, mesh=mesh, source_points=source_points, **params)
    primal = solve_primal_steady(problem)
    mixed = solve_mixed_steady(problem)
    ep = relative_errors(primal, u_ex, q_ex)
    em = relative_errors(mixed, u_ex, q_ex)
    bare = solve_primal_steady(problem, neumann_copy=False)
    extra = {"q_primal_computed": relative_errors(bare, u_ex, q_ex).q_rel}
    return (ep.u_rel, em.u_rel, ep.q_rel, em.q_rel), extra


def reproduce(source_points=1, cube_n=2, voronoi_cells=10, seed=0):
    """Run all four examples.  The irregular rectangle uses a freshly
    generated Voronoi tessellation."""
    rows = []
    jobs = [("cube-quadratic", {"nx": cube_n}), ("disk-quadratic", {}),
            ("hemisphere-linear", {}), ("rectangle-linear", None)]
    for name, params in jobs:
        start = time.perf_counter()
        if params is None:
            tess = voronoi_rectangle(voronoi_cells, 20.0, 15.0, seed=seed)
            mesh = tess_mesh(tess, name="voronoi", params={"w": 20.0, "h": 15.0})
            values, extra = run_example(name, source_points, mesh=mesh)
        else:
            values, extra = run_example(name, source_points, **params)
        rows.append(ReproRow(name, values, REFERENCE[name], time.perf_counter() - start, extra))
    return rows


def format_table(rows):
    head = f"{'example':<20}" + "".join(f"{c:>14}{'ref':>14}" for c in COLUMNS) + f"{'time[s]':>10}"
    lines = [head, "-" * len(head)]
    for r in rows:
        cells = "".join(f"{v:>14.6g}{ref:>14.6g}" for v, ref in zip(r.values, r.reference))
        lines.append(f"{r.name:<20}{cells}{r.seconds:>10.3f}")
    for r in rows:
        if "q_primal_computed" in r.extra:
            lines.append(f"{r.name}: q_primal without the Neumann copy = "
                         f"{r.extra['q_primal_computed']:.6g}")
    return "\n".join(lines)
