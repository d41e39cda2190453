import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cmc.complex import (CellComplex, CellId, Chain, Cochain, DimensionError, OrientationError,
                         boundary, check_compatible_orientation, coboundary, fundamental_class,
                         integrate, normalize_node_orientation, orient_top_cells, trace, validate)
from cmc.geometry.embedding import FormField
from cmc.geometry.generators import gen_cube_mesh, gen_rect_mesh
from cmc.geometry.tess import tess_mesh, voronoi_rectangle

from conftest import segment_complex, square_complex, two_squares

finite = st.floats(-10, 10, allow_nan=False)


def basis(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


# ----------------------------------------------------------------- boundary
def test_boundary_of_edge_is_head_minus_tail():
    cx = segment_complex()
    assert boundary(cx, Chain(1, [1.0])).coefficients.tolist() == [-1.0, 1.0]


def test_boundary_of_boundary_of_face_vanishes():
    cx = square_complex()
    once = boundary(cx, Chain(2, [1.0]))
    assert np.all(boundary(cx, once).coefficients == 0)


def _ccw_edge_signs(points, nodes, edges, cx):
    """Oracle: +1 when an edge runs along the counterclockwise walk around
    the cell, found by sorting the cell's nodes by angle."""
    centre = points[nodes].mean(axis=0)
    ang = np.arctan2(points[nodes, 1] - centre[1], points[nodes, 0] - centre[0])
    order = list(np.asarray(nodes)[np.argsort(ang)])
    out = []
    for e in edges:
        f, s = cx.hyperfaces(1, e)
        tail, head = f[s < 0][0], f[s > 0][0]
        i = order.index(tail)
        out.append(1 if order[(i + 1) % len(order)] == head else -1)
    return out


def test_pie_slice_boundary_matches_traversal(disk_mesh):
    M = disk_mesh.parent
    pts = disk_mesh.chart.to_cartesian(disk_mesh.parent_boxes[0][0])
    pie = 0  # innermost ring cells are the pie slices
    edges, signs = M.hyperfaces(2, pie)
    assert len(edges) == 3
    nodes = M.cell_nodes(2)[pie]
    expected = _ccw_edge_signs(pts, nodes, edges, M)
    got = boundary(M, Chain(2, basis(M.counts[2], pie))).coefficients
    assert [int(got[e]) for e in edges] == expected


def test_boundary_rejects_zero_chains():
    with pytest.raises(DimensionError):
        boundary(segment_complex(), Chain(0, [1.0, 1.0]))
    with pytest.raises(DimensionError):
        boundary(segment_complex(), Chain(1, [1.0, 2.0]))


# --------------------------------------------------------------- coboundary
def test_coboundary_of_tail_indicator():
    cx = segment_complex()
    assert coboundary(cx, Cochain(0, [1.0, 0.0])).values.tolist() == [-1.0]


@given(arrays(float, 9, elements=finite))
def test_coboundary_squared_vanishes(values):
    cx = gen_rect_mesh(2, 2, 2, 2).complex
    u = Cochain(0, np.resize(values, cx.counts[0]))
    assert np.allclose(coboundary(cx, coboundary(cx, u)).values, 0.0, atol=1e-12)


def test_coboundary_of_x_on_unit_grid():
    mesh = gen_rect_mesh(2.0, 2.0, 2, 2)
    M = mesh.parent
    lo, hi = mesh.parent_boxes
    x = lo[0][:, 0]
    du = coboundary(M, Cochain(0, x)).values
    for e in range(M.counts[1]):
        f, s = M.hyperfaces(1, e)
        oracle = x[f[s > 0][0]] - x[f[s < 0][0]]
        assert du[e] == oracle
        if hi[1][e][0] > lo[1][e][0]:  # x-directed edge
            assert du[e] == 1.0
        else:
            assert du[e] == 0.0


def test_coboundary_is_transpose_of_boundary(cube_mesh):
    cx = cube_mesh.complex
    for p in range(cx.dim):
        diff = cx.coboundary_matrix(p) - cx.boundary_matrix(p + 1).T
        assert abs(diff).sum() == 0


def test_coboundary_of_top_degree_fails():
    with pytest.raises(DimensionError):
        coboundary(segment_complex(), Cochain(1, [1.0]))


# -------------------------------------------------------------------- trace
def test_trace_of_constant_is_constant(disk_mesh):
    cx = disk_mesh.complex
    sub = cx.submesh(cx.boundary_cells)
    t = trace(cx, sub, Cochain(0, np.full(cx.counts[0], 3.0)))
    assert len(t) == sub.complex.counts[0] and np.all(t.values == 3.0)


@given(arrays(float, 49, elements=finite))
def test_trace_commutes_with_coboundary(values):
    cx = _disk_complex()
    sub = cx.submesh(cx.boundary_cells)
    u = Cochain(0, values)
    lhs = coboundary(sub.complex, trace(cx, sub, u)).values
    rhs = trace(cx, sub, coboundary(cx, u)).values
    assert np.array_equal(lhs, rhs)


_DISK = {}


def _disk_complex():
    if "cx" not in _DISK:
        from cmc.geometry.generators import gen_polar_disk_mesh
        _DISK["cx"] = gen_polar_disk_mesh(4, 3).complex
    return _DISK["cx"]


def test_trace_onto_empty_submesh():
    cx = square_complex()
    sub = cx.submesh([[]])
    assert len(trace(cx, sub, Cochain(0, np.ones(4)))) == 0


def test_submesh_must_be_closed():
    cx = square_complex()
    with pytest.raises(ValueError):
        cx.submesh([[0], [1]])


# --------------------------------------------------------- fundamental class
def test_fundamental_class_of_edge():
    assert fundamental_class(segment_complex()).coefficients.tolist() == [1.0]


def test_fundamental_class_of_grid():
    cx = gen_rect_mesh(3.0, 3.0, 3, 3).parent
    assert np.array_equal(fundamental_class(cx).coefficients, np.ones(9))


def test_fundamental_class_pairs_to_disk_area(disk_mesh):
    fc = fundamental_class(disk_mesh.complex).coefficients
    assert np.all(fc == 1)
    assert fc @ disk_mesh.metric[2] == pytest.approx(np.pi, rel=1e-10)


def test_fundamental_class_rejects_incompatible_orientation():
    with pytest.raises(OrientationError):
        fundamental_class(two_squares(flip_second=True))


# ---------------------------------------------------------------- integrate
def test_integrate_zero():
    cx = square_complex()
    assert integrate(cx, Cochain(2, [0.0])) == 0.0


def test_integrate_cube_volume(cube_mesh):
    vol = integrate(cube_mesh.complex, Cochain(3, cube_mesh.metric[3]))
    assert vol == pytest.approx(1.0, abs=1e-12)


def test_integrate_constant_form_over_disk(disk_mesh):
    f = FormField(2, {(0, 1): lambda x: -4.0 * x[:, 0]})  # -4 dx^dy = -4 r dr^dphi
    assert integrate(disk_mesh.complex, disk_mesh.derham(f)) == pytest.approx(-4 * np.pi, rel=1e-10)


def test_integrate_needs_top_degree():
    with pytest.raises(DimensionError):
        integrate(square_complex(), Cochain(1, np.ones(4)))


@given(arrays(float, 12, elements=finite))
def test_stokes_on_closed_surface(values):
    M = gen_cube_mesh(1).parent
    surface = orient_top_cells(M.submesh(M.boundary_cells).complex)
    assert surface.counts == (8, 12, 6)
    sigma = Cochain(1, values)
    assert integrate(surface, coboundary(surface, sigma)) == pytest.approx(0.0, abs=1e-10)


# -------------------------------------------------------------- orientation
def test_flipped_square_is_reported():
    ok, bad = check_compatible_orientation(two_squares(flip_second=True))
    assert not ok and bad == [CellId(1, 5)]


def test_generated_meshes_are_compatible(disk_mesh, cube_mesh, hemisphere_mesh, rect_mesh):
    for mesh in (disk_mesh, cube_mesh, hemisphere_mesh, rect_mesh):
        assert check_compatible_orientation(mesh.complex)[0]


def test_single_cell_is_compatible():
    assert check_compatible_orientation(square_complex()) == (True, [])


def test_orient_top_cells_keeps_compatible_mesh():
    cx = two_squares()
    assert orient_top_cells(cx) is cx


def test_orient_top_cells_flips_second_square():
    cx = orient_top_cells(two_squares(flip_second=True))
    assert cx.signs[2][0].tolist() == [1, 1, -1, -1]
    assert cx.signs[2][1].tolist() == [1, 1, -1, -1]
    assert check_compatible_orientation(cx)[0]


def test_orient_top_cells_is_idempotent():
    once = orient_top_cells(two_squares(flip_second=True))
    assert orient_top_cells(once) is once


def test_orient_top_cells_on_voronoi_mesh():
    tess = voronoi_rectangle(10, seed=3)
    cx = tess.complex()
    scrambled = cx.with_signs([[], cx.signs[1], [s * (-1) ** i for i, s in enumerate(cx.signs[2])]])
    fixed = orient_top_cells(scrambled)
    assert check_compatible_orientation(fixed)[0]
    assert check_compatible_orientation(tess_mesh(tess).complex)[0]


def test_orient_top_cells_detects_non_orientable():
    # a "Moebius" strip of three squares whose last gluing is twisted
    edges = [[0, 1], [2, 3], [4, 5], [0, 2], [2, 4], [1, 3], [3, 5], [4, 1], [5, 0]]
    faces = [[0, 1, 3, 5], [1, 2, 4, 6], [2, 0, 7, 8]]
    signs = [[1, -1, -1, 1], [1, -1, -1, 1], [1, 1, -1, 1]]
    cx = CellComplex([6, 9, 3], [[], edges, faces], [[], [[-1, 1]] * 9, signs])
    with pytest.raises(OrientationError):
        orient_top_cells(cx)


# ------------------------------------------------------- node normalization
def test_normalize_flips_negative_node():
    cx = square_complex()
    signs = [[], [s.copy() for s in cx.signs[1]], cx.signs[2]]
    for e in range(4):  # node 2 negatively oriented
        f = cx.faces[1][e]
        signs[1][e][f == 2] *= -1
    bad = cx.with_signs(signs)
    fixed = normalize_node_orientation(bad)
    for s in fixed.signs[1]:
        assert sorted(s.tolist()) == [-1, 1]
    assert validate(fixed).ok


def test_normalize_rejects_contradiction():
    cx = CellComplex([3, 3], [[], [[0, 1], [1, 2], [0, 2]]], [[], [[1, 1]] * 3])
    with pytest.raises(OrientationError):
        normalize_node_orientation(cx)


# ------------------------------------------------------------------ validate
def test_valid_cube_has_empty_report(cube_mesh):
    rep = validate(cube_mesh.complex)
    assert rep.ok and rep.violations() == []


def test_single_sign_flip_is_flagged():
    cx = square_complex()
    signs = [[], cx.signs[1], [cx.signs[2][0].copy()]]
    signs[2][0][1] *= -1
    rep = validate(cx.with_signs(signs))
    assert CellId(2, 0) in rep.chain_complex


def test_too_many_cofaces_flagged():
    edges = [[0, 1], [0, 2], [1, 2], [0, 3], [1, 3], [0, 4], [1, 4]]
    faces = [[0, 1, 2], [0, 3, 4], [0, 5, 6]]
    signs = [[1, -1, 1], [1, -1, 1], [1, -1, 1]]
    cx = CellComplex([5, 7, 3], [[], edges, faces], [[], [[-1, 1]] * 7, signs])
    assert CellId(1, 0) in validate(cx).cofaces


def test_label_closure_flagged():
    cx = CellComplex([4, 4, 1], square_complex().faces, square_complex().signs,
                     labels={"bad": [[0], [0], []]})
    assert ("bad", CellId(1, 0)) in validate(cx).submesh_closure


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=4,
                unique=True))
def test_sign_fuzzing_is_caught(flips):
    """Every perturbation that breaks the chain-complex property is reported."""
    mesh = gen_cube_mesh(1)
    cx = mesh.parent
    signs = [[], [s.copy() for s in cx.signs[1]], [s.copy() for s in cx.signs[2]],
             [s.copy() for s in cx.signs[3]]]
    for cell, slot in flips:
        signs[2][cell][slot] *= -1
    pert = cx.with_signs(signs)
    rep = validate(pert)
    # independent oracle: dense products of the signed incidence
    for p in (2, 3):
        prod = pert.boundary_matrix(p - 1).toarray() @ pert.boundary_matrix(p).toarray()
        broken = {CellId(p, int(a)) for a in np.nonzero(np.any(prod != 0, axis=0))[0]}
        assert broken <= set(rep.chain_complex)
