"""JSON file formats: ``cmc-mesh v1``, ``cmc-problem v1`` and ``cmc-result v1``.

All cell indices are 0-based.  A mesh document looks like::

    {"format": "cmc-mesh v1", "dim": 2, "counts": [n0, n1, n2],
     "incidence": [[], [[[h, s], ...], ...], [[[h, s], ...], ...]],
     "labels": {"name": [[...], [...], [...]]},
     "coordinates": [[x, y], ...],          # optional, per node
     "measures": [[...], [...], [...]],     # optional, per dimension
     "interval_map": [[ld, l, ud, u], ...]} # optional, Forman meshes only

``incidence[p]`` lists, for every p-cell, its hyperfaces as
``[index, sign]`` pairs; ``incidence[0]`` is empty.  ``interval_map`` has
one row per cell of the subdivision, ordered by dimension then index.
Node orientations that break the all-nodes-positive convention are
normalized on load.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .complex import CellComplex, OrientationError, normalize_node_orientation
from .forman import QuasiCubicalMesh
from .operators import MetricData

log = logging.getLogger(__name__)

MESH_FORMAT = "cmc-mesh v1"
PROBLEM_FORMAT = "cmc-problem v1"
RESULT_FORMAT = "cmc-result v1"


class MeshFormatError(ValueError):
    """A JSON document does not follow the expected layout."""


def _floats(a):
    return [float(x) for x in np.asarray(a, float).ravel()]


def _read_json(path, fmt):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise MeshFormatError(f"{path}: top level must be an object")
    found = doc.get("format", fmt)
    if found != fmt:
        raise MeshFormatError(f"{path}: expected format {fmt!r}, found {found!r}")
    return doc


# ------------------------------------------------------------------ meshes
@dataclass
class MeshFile:
    """Contents of a mesh document."""

    complex: CellComplex
    coordinates: np.ndarray | None = None
    measures: MetricData | None = None
    intervals: list | None = None

    def quasi_cubical(self) -> QuasiCubicalMesh:
        return QuasiCubicalMesh(self.complex, self.intervals)


def mesh_to_dict(complex_, coordinates=None, measures=None, intervals=None):
    D = complex_.dim
    doc = {
        "format": MESH_FORMAT,
        "dim": D,
        "counts": list(complex_.counts),
        "incidence": [[]] + [
            [[[int(h), int(s)] for h, s in zip(f, sg)]
             for f, sg in zip(complex_.faces[p], complex_.signs[p])]
            for p in range(1, D + 1)],
        "labels": {name: [[int(i) for i in c] for c in cells]
                   for name, cells in complex_.labels.items()},
    }
    if coordinates is not None:
        doc["coordinates"] = np.asarray(coordinates, float).tolist()
    if measures is not None:
        doc["measures"] = [_floats(measures[p]) for p in range(D + 1)]
    if intervals is not None:
        doc["interval_map"] = [[int(x) for x in row] for iv in intervals for row in iv]
    return doc


def mesh_from_dict(doc, normalize=True) -> MeshFile:
    try:
        D = int(doc["dim"])
        counts = [int(n) for n in doc["counts"]]
        inc = doc["incidence"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshFormatError(f"mesh document lacks a required field: {exc}") from None
    if len(counts) != D + 1:
        raise MeshFormatError("counts must have dim + 1 entries")
    if len(inc) == D:  # tolerate documents that omit the empty node entry
        inc = [[]] + list(inc)
    if len(inc) != D + 1:
        raise MeshFormatError("incidence must have one entry per dimension")
    faces, signs = [[]], [[]]
    for p in range(1, D + 1):
        fp, sp_ = [], []
        for cell in inc[p]:
            pairs = np.asarray(cell, dtype=np.int64).reshape(-1, 2)
            fp.append(pairs[:, 0])
            sp_.append(pairs[:, 1])
        faces.append(fp)
        signs.append(sp_)
    try:
        cx = CellComplex(counts, faces, signs, doc.get("labels"))
    except ValueError as exc:
        raise MeshFormatError(str(exc)) from None
    if normalize:
        try:
            normalized = normalize_node_orientation(cx)
        except (OrientationError, IndexError) as exc:
            log.warning("node orientations left as given: %s", exc)
        else:
            if normalized is not cx:
                log.info("flipped negatively oriented nodes to the positive convention")
            cx = normalized
    coords = doc.get("coordinates")
    coords = None if coords is None else np.asarray(coords, float)
    measures = doc.get("measures")
    if measures is not None:
        measures = MetricData([np.asarray(m, float) for m in measures])
    intervals = doc.get("interval_map")
    if intervals is not None:
        rows = np.asarray(intervals, dtype=np.int64).reshape(-1, 4)
        dims = rows[:, 2] - rows[:, 0]
        intervals = [rows[dims == p] for p in range(D + 1)]
        if [len(iv) for iv in intervals] != counts:
            raise MeshFormatError("interval_map does not match the cell counts")
    return MeshFile(cx, coords, measures, intervals)


def save_mesh(path, complex_, coordinates=None, measures=None, intervals=None):
    Path(path).write_text(json.dumps(mesh_to_dict(complex_, coordinates, measures, intervals)))


def load_mesh(path, normalize=True) -> MeshFile:
    return mesh_from_dict(_read_json(path, MESH_FORMAT), normalize=normalize)


def save_embedded_mesh(path, mesh):
    """Write the Forman mesh of an :class:`EmbeddedMesh` with Cartesian node
    coordinates, measures and the interval map."""
    K = mesh.K
    save_mesh(path, K.complex, mesh.embedding.cartesian_nodes(), mesh.metric, K.intervals)


# ---------------------------------------------------------------- problems
def problem_to_dict(problem, mesh_ref, exact=None):
    """Serialize a steady or transient :class:`TransportProblem` whose data
    are arrays (callables are not representable)."""
    for name in ("f", "g_D", "g_N"):
        if callable(getattr(problem, name)):
            raise TypeError(f"cannot serialize time-dependent {name}")
    gD = np.asarray(problem.g_D, float)
    gN = np.asarray(problem.g_N, float)
    nodes = problem.dirichlet_nodes
    doc = {
        "format": PROBLEM_FORMAT,
        "name": problem.name,
        "mesh": str(mesh_ref),
        "kappa": _floats(problem.kappa),
        "kappa_dual": _floats(problem.kappa_dual),
        "pi": _floats(problem.pi),
        "pi_dual": _floats(problem.pi_dual),
        "f": _floats(problem.f),
        "dirichlet": {"cells": [int(c) for c in problem.dirichlet],
                      "nodes": [int(n) for n in nodes],
                      "values": _floats(gD[nodes])},
        "neumann": {"cells": [int(c) for c in problem.neumann],
                    "values": _floats(gN[problem.neumann])},
    }
    if problem.has_advection:
        doc["v"] = _floats(problem.v)
    ts = problem.transient
    if ts is not None:
        doc["transient"] = {"t0": ts.t0, "dt": ts.dt, "steps": ts.steps, "theta": ts.theta}
        if ts.u0 is not None:
            doc["transient"]["u0"] = _floats(ts.u0)
    if exact is not None:
        doc["exact"] = {"u": _floats(exact[0]), "q": _floats(exact[1])}
    return doc


def save_problem(path, problem, mesh_ref, exact=None):
    Path(path).write_text(json.dumps(problem_to_dict(problem, mesh_ref, exact)))


@dataclass
class ProblemFile:
    problem: object
    mesh: MeshFile
    exact_u: np.ndarray | None = None
    exact_q: np.ndarray | None = None


def problem_from_dict(doc, mesh: MeshFile) -> ProblemFile:
    from .solvers import TransientSettings, TransportProblem

    if mesh.measures is None:
        raise MeshFormatError("the problem mesh must carry measures")
    cx = mesh.complex
    D = cx.dim
    try:
        g_D = np.zeros(cx.counts[0])
        dir_ = doc.get("dirichlet", {})
        g_D[np.asarray(dir_.get("nodes", []), dtype=np.int64)] = dir_.get("values", [])
        g_N = np.zeros(cx.counts[D - 1])
        neu = doc.get("neumann", {})
        neumann = np.asarray(neu.get("cells", []), dtype=np.int64)
        g_N[neumann] = neu.get("values", [])
        transient = None
        if "transient" in doc:
            t = dict(doc["transient"])
            transient = TransientSettings(dt=float(t["dt"]), steps=int(t["steps"]),
                                          theta=float(t.get("theta", 0.5)),
                                          t0=float(t.get("t0", 0.0)),
                                          u0=None if "u0" not in t else np.asarray(t["u0"], float))
        problem = TransportProblem(
            K=mesh.quasi_cubical(), metric=mesh.measures,
            kappa=np.asarray(doc["kappa"], float),
            kappa_dual=np.asarray(doc["kappa_dual"] if "kappa_dual" in doc or D != 2
                                  else doc["kappa"], float),
            f=np.asarray(doc["f"], float), neumann=neumann, g_D=g_D, g_N=g_N,
            pi=doc.get("pi"), pi_dual=doc.get("pi_dual"),
            v=None if doc.get("v") is None else np.asarray(doc["v"], float),
            transient=transient, name=doc.get("name", ""),
        )
    except (KeyError, ValueError, IndexError) as exc:
        raise MeshFormatError(f"invalid problem document: {exc}") from None
    given = dir_.get("cells")
    if given is not None and set(map(int, given)) != set(problem.dirichlet.tolist()):
        raise MeshFormatError("Dirichlet and Neumann cells do not partition the boundary")
    exact = doc.get("exact") or {}
    eu = exact.get("u")
    eq = exact.get("q")
    return ProblemFile(problem, mesh, None if eu is None else np.asarray(eu, float),
                       None if eq is None else np.asarray(eq, float))


def load_problem(path) -> ProblemFile:
    """Read a problem document and the mesh it references (a relative
    mesh path is resolved against the problem file's folder)."""
    doc = _read_json(path, PROBLEM_FORMAT)
    if "mesh" not in doc:
        raise MeshFormatError(f"{path}: problem lacks a mesh reference")
    ref = Path(doc["mesh"])
    if not ref.is_absolute():
        ref = Path(path).parent / ref
    return problem_from_dict(doc, load_mesh(ref))


# ----------------------------------------------------------------- results
def result_to_dict(result, errors=None):
    doc = {"format": RESULT_FORMAT, "formulation": result.formulation,
           "u": _floats(result.u), "q": _floats(result.q)}
    if result.u_tilde is not None:
        doc["u_tilde"] = _floats(result.u_tilde)
    if errors is not None:
        doc["errors"] = {"u_rel": float(errors.u_rel), "q_rel": float(errors.q_rel)}
    if result.times is not None:
        series = {"t": _floats(result.times)}
        for key in ("u", "q", "u_tilde", "Q"):
            arr = getattr(result, f"series_{key}")
            if arr is not None:
                series[key] = np.asarray(arr, float).tolist()
        doc["series"] = series
    return doc


def save_result(path, result, errors=None):
    Path(path).write_text(json.dumps(result_to_dict(result, errors)))


def load_result(path):
    """Read a result document into a :class:`~cmc.solvers.SolveResult`
    (errors, if present, are returned alongside)."""
    from .solvers import ErrorReport, SolveResult

    doc = _read_json(path, RESULT_FORMAT)
    try:
        res = SolveResult(doc.get("formulation", ""), np.asarray(doc["u"], float),
                          np.asarray(doc["q"], float),
                          u_tilde=None if "u_tilde" not in doc else np.asarray(doc["u_tilde"], float))
    except KeyError as exc:
        raise MeshFormatError(f"{path}: result lacks {exc}") from None
    series = doc.get("series")
    if series:
        res.times = np.asarray(series["t"], float)
        for key in ("u", "q", "u_tilde", "Q"):
            if key in series:
                setattr(res, f"series_{key}", np.asarray(series[key], float))
    err = doc.get("errors")
    return res, None if err is None else ErrorReport(err["u_rel"], err["q_rel"])
