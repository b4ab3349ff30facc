import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uvbench import shapes
from uvbench.mesh import TriMesh
from uvbench.topology import (TagSet, compute_topology, connected_components, evaluate_tags)


def disjoint_triangles(n):
    v = np.concatenate([[[3 * i, 0, 0], [3 * i + 1, 0, 0], [3 * i, 1, 0]] for i in range(n)])
    return TriMesh(v, np.arange(3 * n).reshape(-1, 3))


def test_tetrahedron():
    info = compute_topology(shapes.tetrahedron())
    assert (info.euler_characteristic, info.genus, info.n_boundary_loops) == (2, 0, 0)
    assert info.manifold and info.orientable
    assert evaluate_tags(info) == TagSet(disk=False, closed=True, manifold=True, small=True)


def test_single_triangle():
    info = compute_topology(shapes.single_triangle())
    assert info.euler_characteristic == 1 and info.n_boundary_loops == 1
    assert info.n_boundary_faces == 1
    assert evaluate_tags(info) == TagSet(disk=True, closed=False, manifold=True, small=True)


def test_torus_grid():
    info = compute_topology(shapes.torus(4, 4))
    # V = 16, E = 48, F = 32 counted by hand
    assert (info.n_vertices, info.n_edges, info.n_faces) == (16, 48, 32)
    assert info.euler_characteristic == 0 and info.genus == 1
    assert evaluate_tags(info).closed


def test_annulus_has_two_loops():
    info = compute_topology(shapes.annulus())
    assert info.n_boundary_loops == 2 and info.genus == 0
    assert info.euler_characteristic == 0


def test_nonmanifold_cases():
    fan = compute_topology(shapes.triple_fan())
    assert not fan.edge_manifold and not fan.manifold and fan.genus is None
    assert not evaluate_tags(fan).manifold
    bow = compute_topology(shapes.bowtie())
    assert bow.edge_manifold and not bow.vertex_manifold and not bow.manifold


def test_non_orientable_strip():
    # Moebius strip from a 5-quad band glued with a half twist
    n = 5
    top = [[np.cos(2 * np.pi * i / n), np.sin(2 * np.pi * i / n), 0.3] for i in range(n)]
    bot = [[np.cos(2 * np.pi * i / n), np.sin(2 * np.pi * i / n), -0.3] for i in range(n)]
    v = top + bot
    faces = []
    for i in range(n):
        a, b, c, d = i, (i + 1) % n, n + (i + 1) % n, n + i
        if i == n - 1:
            b, c = n, 0  # twist: top end joins bottom start
        faces.extend([[a, b, c], [a, c, d]])
    info = compute_topology(TriMesh(v, faces))
    assert info.edge_manifold and not info.orientable and info.genus is None
    assert info.n_boundary_loops == 1


def test_unreferenced_vertex_ignored():
    mesh = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]], [[0, 1, 2]])
    assert compute_topology(mesh).euler_characteristic == 1


def test_small_tag_is_strict():
    assert evaluate_tags(compute_topology(disjoint_triangles(99))).small
    assert not evaluate_tags(compute_topology(disjoint_triangles(100))).small


def test_components_disjoint():
    parts = connected_components(disjoint_triangles(2))
    assert [p.n_faces for p in parts] == [1, 1]
    np.testing.assert_array_equal(parts[0].vertices, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    assert len(connected_components(disjoint_triangles(60))) == 60


def test_components_connected_identity():
    mesh = shapes.grid_disk(3, 3)
    (only,) = connected_components(mesh)
    np.testing.assert_array_equal(only.vertices, mesh.vertices)
    np.testing.assert_array_equal(only.faces, mesh.faces)


def test_components_sorted_by_size():
    a = shapes.grid_disk(1, 1)  # 2 faces
    b = shapes.grid_disk(2, 2)  # 8 faces
    mesh = TriMesh(np.concatenate([a.vertices, b.vertices + 5]),
                   np.concatenate([a.faces, b.faces + a.n_vertices]))
    assert [p.n_faces for p in connected_components(mesh)] == [8, 2]


def test_vertex_touching_pieces_are_one_component():
    assert len(connected_components(shapes.bowtie())) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 7), st.integers(3, 7))
def test_torus_family_genus_one(n, m):
    info = compute_topology(shapes.torus(n, m))
    assert info.euler_characteristic == 0 and info.genus == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8))
def test_grid_euler_formula(nx, ny):
    info = compute_topology(shapes.grid_disk(nx, ny))
    assert info.euler_characteristic == 1 and info.n_boundary_loops == 1 and info.genus == 0
    # boundary faces of a grid: every cell on the rim contributes its rim triangles
    assert info.n_boundary_faces == len(_rim_faces(nx, ny))


def _rim_faces(nx, ny):
    mesh = shapes.grid_disk(nx, ny)
    p = mesh.corners_3d()
    on_rim = (np.isclose(p[..., 0], 0) | np.isclose(p[..., 0], 1)
              | np.isclose(p[..., 1], 0) | np.isclose(p[..., 1], 1))
    out = []
    for f in range(mesh.n_faces):
        for k in range(3):
            a, b = p[f, k], p[f, (k + 1) % 3]
            if on_rim[f, k] and on_rim[f, (k + 1) % 3] and (
                    np.isclose(a[0], b[0]) and a[0] in (0, 1)
                    or np.isclose(a[1], b[1]) and a[1] in (0, 1)):
                out.append(f)
                break
    return out


@pytest.mark.parametrize("make", [shapes.hemisphere, shapes.polar_disk, shapes.cylinder,
                                  shapes.cube_islands])
def test_euler_relation(make):
    info = compute_topology(make())
    assert info.euler_characteristic == 2 - 2 * info.genus - info.n_boundary_loops
