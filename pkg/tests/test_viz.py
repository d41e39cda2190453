import colorsys
import re

import numpy as np
import pytest

from cmc.geometry.catalog import catalog_problem
from cmc.viz import RenderSpec, flow_arrows, rainbow, render_svg, render_vtk


@pytest.fixture(scope="module")
def disk():
    problem, u, q = catalog_problem("disk-quadratic")
    return problem, problem.mesh.embedding.cartesian_nodes(), u, q


def fills(svg):
    return re.findall(r'<polygon [^>]*fill="(#[0-9a-f]{6})"', svg)


def test_rainbow_ends_and_monotone():
    cols = rainbow(np.linspace(0, 1, 50), 0.0, 1.0)
    assert cols[0] == "#ff0000"
    assert cols[-1] == "#ff00ff"
    hues = [colorsys.rgb_to_hsv(*(int(c[i:i + 2], 16) / 255 for i in (1, 3, 5)))[0] for c in cols]
    assert np.all(np.diff(hues) >= 0)


def test_constant_potential_single_fill(disk):
    problem, xy, _, q = disk
    svg = render_svg(problem.complex, xy, np.full(len(xy), 3.0), q)
    colors = fills(svg)
    assert len(colors) == problem.complex.counts[2]
    assert len(set(colors)) == 1


def test_zero_flow_draws_no_arrows(disk):
    problem, xy, u, _ = disk
    svg = render_svg(problem.complex, xy, u, np.zeros(problem.complex.counts[1]))
    assert "<line" not in svg


def test_disk_arrows_follow_the_flow(disk):
    problem, xy, _, q = disk
    edges, mids, dirs = flow_arrows(problem.complex, xy, q, zero_tol=1e-12)
    assert len(edges) > 0
    # the flow -grad(x^2 + y^2) = -2 (x, y) points to the centre
    flow = -2 * mids
    cos = np.sum(dirs * flow, axis=1) / np.linalg.norm(flow, axis=1)
    np.testing.assert_allclose(cos, 1.0, rtol=1e-12)
    # radial edges carry no flow and get no arrow
    assert len(edges) == int(np.sum(np.abs(q) > 1e-12))


def test_arrow_reverses_with_flow(disk):
    problem, xy, _, q = disk
    _, _, d1 = flow_arrows(problem.complex, xy, q, 1e-12)
    _, _, d2 = flow_arrows(problem.complex, xy, -q, 1e-12)
    np.testing.assert_allclose(d1, -d2)


def test_svg_is_deterministic(disk):
    problem, xy, u, q = disk
    spec = RenderSpec(width=300, height=200)
    a = render_svg(problem.complex, xy, u, q, spec)
    b = render_svg(problem.complex, xy, u, q, spec)
    assert a == b
    assert 'width="300"' in a and a.count("<line") == int(np.sum(q != 0))


def test_svg_needs_2d(disk):
    problem, xy, u, q = disk
    with pytest.raises(ValueError):
        render_svg(problem.complex, None, u, q)
    cube, _, _ = catalog_problem("cube-quadratic")
    with pytest.raises(ValueError):
        render_svg(cube.complex, cube.mesh.embedding.cartesian_nodes(), np.zeros(125),
                   np.zeros(cube.complex.counts[2]))


@pytest.fixture(scope="module")
def cube_vtk(tmp_path_factory):
    problem, u, q = catalog_problem("cube-quadratic")
    xyz = problem.mesh.embedding.cartesian_nodes()
    path = tmp_path_factory.mktemp("vtk") / "cube.vtk"
    path.write_text(render_vtk(problem.complex, xyz, u, q))
    return problem, xyz, u, q, path


def test_vtk_reads_back(cube_vtk):
    meshio = pytest.importorskip("meshio")
    problem, xyz, u, q, path = cube_vtk
    m = meshio.read(path)
    assert len(m.points) == problem.complex.counts[0]
    np.testing.assert_allclose(m.points, xyz)
    np.testing.assert_allclose(np.ravel(m.point_data["u"]), u)
    np.testing.assert_allclose(np.concatenate([np.ravel(c) for c in m.cell_data["q"]]), q)


def test_vtk_constant_potential(cube_vtk, tmp_path):
    meshio = pytest.importorskip("meshio")
    problem, xyz, _, q, _ = cube_vtk
    path = tmp_path / "c.vtk"
    path.write_text(render_vtk(problem.complex, xyz, np.full(len(xyz), 7.0), q))
    np.testing.assert_array_equal(np.ravel(meshio.read(path).point_data["u"]), 7.0)


def test_vtk_needs_3d(disk):
    problem, xy, u, q = disk
    with pytest.raises(ValueError):
        render_vtk(problem.complex, xy, u, q)
