"""Shared meshes and builders for the test suite."""
import numpy as np
import pytest
from hypothesis import settings

from cmc.complex import CellComplex
from cmc.forman import forman_subdivide
from cmc.geometry import charts
from cmc.geometry.generators import (_embedded_box_mesh, gen_cube_mesh, gen_hemisphere_mesh,
                                     gen_polar_disk_mesh, gen_rect_mesh, tensor_grid)

settings.register_profile("cmc", max_examples=40, deadline=None)
settings.load_profile("cmc")


def segment_complex():
    """One edge from node 0 to node 1."""
    return CellComplex([2, 1], [[], [[0, 1]]], [[], [[-1, 1]]])


def square_complex():
    """Unit square: nodes (0,0), (1,0), (1,1), (0,1); edges 0->1, 1->2,
    3->2, 0->3; the face is counterclockwise."""
    faces = [[], [[0, 1], [1, 2], [3, 2], [0, 3]], [[0, 1, 2, 3]]]
    signs = [[], [[-1, 1]] * 4, [[1, 1, -1, -1]]]
    return CellComplex([4, 4, 1], faces, signs)


SQUARE_POINTS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def triangle_complex():
    faces = [[], [[0, 1], [1, 2], [0, 2]], [[0, 1, 2]]]
    signs = [[], [[-1, 1]] * 3, [[1, 1, -1]]]
    return CellComplex([3, 3, 1], faces, signs)


def two_squares(flip_second=False):
    """Squares [0,1]x[0,1] and [1,2]x[0,1] sharing the edge 1->4."""
    # nodes: 0 (0,0) 1 (1,0) 2 (2,0) 3 (0,1) 4 (1,1) 5 (2,1)
    edges = [[0, 1], [1, 2], [3, 4], [4, 5], [0, 3], [1, 4], [2, 5]]
    f0 = [0, 5, 2, 4]
    f1 = [1, 6, 3, 5]
    s0 = [1, 1, -1, -1]
    s1 = [1, 1, -1, -1]
    if flip_second:
        s1 = [-s for s in s1]
    return CellComplex([6, 7, 2], [[], edges, [f0, f1]], [[], [[-1, 1]] * 7, [s0, s1]])


def interval_mesh(n, length=1.0):
    """Embedded Forman mesh of [0, length] split into n segments."""
    coords = [np.linspace(0.0, length, n + 1)]
    return _embedded_box_mesh("interval", charts.cartesian(1), *tensor_grid(coords), {})


@pytest.fixture(scope="session")
def disk_mesh():
    return gen_polar_disk_mesh(4, 3)


@pytest.fixture(scope="session")
def cube_mesh():
    return gen_cube_mesh(2)


@pytest.fixture(scope="session")
def hemisphere_mesh():
    return gen_hemisphere_mesh(6, 6)


@pytest.fixture(scope="session")
def rect_mesh():
    return gen_rect_mesh(20.0, 15.0, 4, 3)


@pytest.fixture(scope="session")
def square_K():
    return forman_subdivide(square_complex())


@pytest.fixture(scope="session")
def square_mesh():
    from cmc.geometry.generators import embed_polygon_mesh
    return embed_polygon_mesh(square_complex(), SQUARE_POINTS, "square")
