import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uvbench import shapes
from uvbench.errors import NonManifold
from uvbench.mesh import TriMesh, build_adjacency, uv_seam_mask
from uvbench.preprocess import (PreprocessConfig, chart_count, cut_along_seams,
                                merge_close_vertices, preprocess_mesh, split_and_cap)
from uvbench.topology import compute_topology, connected_components


def unwelded(mesh):
    """Same triangles with every corner given its own vertex."""
    return TriMesh(mesh.corners_3d().reshape(-1, 3), np.arange(3 * mesh.n_faces).reshape(-1, 3),
                   mesh.uv)


def blocks(sizes):
    """Disjoint strips with the given face counts."""
    verts, faces, uv = [], [], []
    offset = 0
    for i, n in enumerate(sizes):
        strip = shapes.grid_disk(n, 1)
        keep = strip.faces[:n]
        m = TriMesh(strip.vertices + [0, 3 * i, 0], keep, strip.uv[:n])
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        uv.append(m.uv)
        offset += m.n_vertices
    return TriMesh(np.concatenate(verts), np.concatenate(faces), np.concatenate(uv))


def test_merge_exact_duplicates():
    mesh = shapes.grid_disk(3, 3)
    merged = merge_close_vertices(unwelded(mesh))
    assert merged.n_faces == mesh.n_faces
    assert merged.n_vertices == mesh.n_vertices
    assert compute_topology(merged).euler_characteristic == 1


def test_merge_keeps_uv_seam():
    # two triangles whose shared edge has coincident 3D vertices but UVs 0.3 apart
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
    uv = [[[0, 0], [1, 0], [0, 1]], [[1.3, 0], [0.3, 1], [1.3, 1]]]
    merged = merge_close_vertices(TriMesh(v, [[0, 1, 2], [3, 5, 4]], uv))
    assert merged.n_vertices == 6


def test_merge_near_duplicates_within_tolerance():
    mesh = unwelded(shapes.grid_disk(2, 2))
    v = mesh.vertices + np.random.default_rng(0).uniform(-1e-9, 1e-9, mesh.vertices.shape)
    merged = merge_close_vertices(TriMesh(v, mesh.faces, mesh.uv))
    assert merged.n_vertices == 9


def test_merge_removes_collapsing_sliver():
    # strip of two faces where vertex 3 nearly coincides with vertex 1
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1 + 1e-9, 0, 0]]
    uv = [[[0, 0], [1, 0], [0, 1]], [[1, 0], [1, 0], [0, 1]]]
    merged = merge_close_vertices(TriMesh(v, [[0, 1, 2], [1, 3, 2]], uv),
                                  PreprocessConfig(merge_epsilon_3d=1e-6))
    assert merged.n_faces == 1 and merged.n_vertices == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 1000))
def test_merge_unweld_round_trip(nx, ny, seed):
    mesh = shapes.grid_disk(nx, ny, height=0.5, jitter=0.3, seed=seed)
    merged = merge_close_vertices(unwelded(mesh))
    assert merged.n_vertices == mesh.n_vertices
    np.testing.assert_array_equal(merged.corners_3d(), mesh.corners_3d())
    np.testing.assert_array_equal(merged.uv, mesh.uv)


def test_split_and_cap_order():
    sizes = [p.n_faces for p in split_and_cap(blocks([5, 2, 9]), PreprocessConfig(max_components=2))]
    assert sizes == [9, 5]
    single = shapes.grid_disk(2, 2)
    assert split_and_cap(single)[0].n_faces == single.n_faces


def test_split_and_cap_fifty():
    mesh = blocks([1] * 60)
    assert len(split_and_cap(mesh)) == 50


def test_cut_without_seams_is_identity():
    mesh = shapes.grid_disk(3, 3)
    cut = cut_along_seams(mesh)
    np.testing.assert_array_equal(cut.vertices, mesh.vertices)
    np.testing.assert_array_equal(cut.faces, mesh.faces)


def test_cut_cylinder_becomes_disk():
    cyl = shapes.cylinder(segments=8, rows=2)
    assert compute_topology(cyl).euler_characteristic == 0
    cut = cut_along_seams(cyl)
    info = compute_topology(cut)
    assert info.euler_characteristic == 1 and info.n_boundary_loops == 1
    # the seam line has rows + 1 vertices, each duplicated once
    assert cut.n_vertices == cyl.n_vertices + 3
    # surface connectivity now equals UV connectivity: no seams remain
    assert not uv_seam_mask(cut, build_adjacency(cut), 1e-6).any()
    np.testing.assert_array_equal(cut.corners_3d(), cyl.corners_3d())


def test_cut_rejects_nonmanifold():
    fan = shapes.triple_fan()
    fan = fan.with_uv(fan.corners_3d()[:, :, :2])
    with pytest.raises(NonManifold):
        cut_along_seams(fan)


def test_chart_counts():
    assert chart_count(shapes.grid_disk(3, 3)) == 1
    assert chart_count(shapes.cube_islands()) == 6
    assert chart_count(shapes.cylinder()) == 1


def test_preprocess_variants():
    cube = shapes.cube_islands()
    (uncut,) = preprocess_mesh(cube, "uncut")
    assert uncut.n_vertices == 8 and compute_topology(uncut).n_boundary_loops == 0
    cut = preprocess_mesh(cube, "cut")
    assert len(cut) == 6
    assert all(compute_topology(p).euler_characteristic == 1 for p in cut)
    assert all(p.n_vertices == 4 for p in cut)
    # corners that differ in UV are never welded, so an exploded cube stays six squares
    assert [p.n_vertices for p in preprocess_mesh(unwelded(cube), "uncut")] == [4] * 6


def test_preprocess_cut_drops_nonmanifold_component():
    fan = shapes.triple_fan()
    fan = fan.with_uv(fan.corners_3d()[:, :, :2])
    assert preprocess_mesh(fan, "cut") == []
    assert len(preprocess_mesh(fan, "uncut")) == 1


def test_preprocess_unknown_variant():
    with pytest.raises(ValueError):
        preprocess_mesh(shapes.grid_disk(), "sliced")


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 12), st.integers(1, 4))
def test_cut_output_matches_uv_components(segments, rows):
    cut = cut_along_seams(shapes.cylinder(segments, rows))
    assert len(connected_components(cut)) == 1
    assert compute_topology(cut).euler_characteristic == 1


def _random_seamed(seed):
    """Grid whose UV map is cut into random vertical strips."""
    rng = np.random.default_rng(seed)
    mesh = shapes.grid_disk(6, 4, height=0.3, jitter=0.2, seed=seed)
    uv = mesh.uv.copy()
    strip = np.floor(mesh.corners_3d()[:, :, 0].mean(axis=1) * 6).astype(int)
    shift = rng.integers(0, 2, size=7)[strip] * 2.0
    uv[:, :, 0] += shift[:, None]
    return mesh.with_uv(uv)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_cut_preserves_geometry_and_raises_chi(seed):
    from uvbench.mesh import face_areas_3d
    mesh = _random_seamed(seed)
    cut = cut_along_seams(mesh)
    np.testing.assert_allclose(face_areas_3d(cut), face_areas_3d(mesh), rtol=0, atol=1e-12)
    assert compute_topology(cut).euler_characteristic >= compute_topology(mesh).euler_characteristic
    assert not uv_seam_mask(cut, build_adjacency(cut), 1e-6).any()
    assert len(connected_components(cut)) == chart_count(mesh)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_zero_epsilon_merge_is_idempotent(seed):
    config = PreprocessConfig(merge_epsilon_3d=0.0, merge_epsilon_uv=0.0)
    once = merge_close_vertices(unwelded(_random_seamed(seed)), config)
    twice = merge_close_vertices(once, config)
    np.testing.assert_array_equal(once.vertices, twice.vertices)
    np.testing.assert_array_equal(once.faces, twice.faces)
