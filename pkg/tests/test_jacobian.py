import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import jacobi_singular_values
from uvbench.errors import DegenerateTriangle
from uvbench.jacobian import (jacobian, jacobians, local_frame, local_frames,
                              singular_values, singular_values_batch, triangle_measures)
from uvbench import shapes


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


def test_frame_axis_aligned():
    f = local_frame([0, 0, 0], [2, 0, 0], [0, 1, 0])
    np.testing.assert_allclose(f, [[0, 0], [2, 0], [0, 1]], atol=1e-15)


def test_frame_rotation_invariant():
    rng = np.random.default_rng(1)
    p = np.array([[0, 0, 0], [2, 0, 0], [0, 1, 0]], dtype=float)
    for _ in range(20):
        q = p @ random_rotation(rng).T + rng.normal(size=3)
        np.testing.assert_allclose(local_frame(*q), [[0, 0], [2, 0], [0, 1]], atol=1e-12)


def test_frame_equilateral_in_arbitrary_plane():
    rng = np.random.default_rng(2)
    p = np.array([[0, 0, 0], [1, 0, 0], [0.5, math.sqrt(3) / 2, 0]])
    q = p @ random_rotation(rng).T + [3, -1, 2]
    np.testing.assert_allclose(local_frame(*q), [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]],
                               atol=1e-12)


def test_frame_degenerate():
    with pytest.raises(DegenerateTriangle):
        local_frame([0, 0, 0], [1, 0, 0], [2, 0, 0])
    with pytest.raises(DegenerateTriangle):
        local_frame([0, 0, 0], [0, 0, 0], [1, 1, 0])


def test_jacobian_identity_scale_mirror():
    f = local_frame([0, 0, 0], [2, 0, 0], [0.5, 1, 0])
    np.testing.assert_allclose(jacobian(f, f), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(jacobian(f, 2 * f), 2 * np.eye(2), atol=1e-15)
    mirrored = f * [-1, 1]
    assert np.linalg.det(jacobian(f, mirrored)) < 0


def test_batched_jacobian_matches_general_solve():
    rng = np.random.default_rng(3)
    tri = rng.normal(size=(50, 3, 3))
    uv = rng.normal(size=(50, 3, 2))
    frames = local_frames(tri)
    J = jacobians(frames, uv)
    for k in range(50):
        np.testing.assert_allclose(J[k], jacobian(frames[k], uv[k]), atol=1e-9)


def test_singular_value_examples():
    assert singular_values(np.eye(2)) == (1.0, 1.0, 1)
    assert singular_values(np.diag([3.0, 0.5])) == (3.0, 0.5, 1)
    assert singular_values(np.zeros((2, 2))) == (0.0, 0.0, 0)
    s1, s2, sign = singular_values([[0.0, 1.0], [1.0, 0.0]])
    assert (s1, s2, sign) == (1.0, 1.0, -1)


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, (2, 2), elements=st.floats(-1e3, 1e3)))
def test_singular_values_match_oracle(m):
    s1, s2, sign = singular_values(m)
    o1, o2 = jacobi_singular_values(m.tolist())
    scale = max(1.0, o1)
    assert abs(s1 - o1) <= 1e-10 * scale
    assert abs(s2 - o2) <= 1e-10 * scale
    assert s1 >= s2 >= 0
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    assert abs(s1 * s2 - abs(det)) <= 1e-10 * scale * scale
    if det != 0:
        assert sign == np.sign(det)


def test_measures_identity_map():
    mesh = shapes.grid_disk(3, 3)
    m = triangle_measures(mesh)
    np.testing.assert_allclose(m.sigma1, 1, atol=1e-12)
    np.testing.assert_allclose(m.sigma2, 1, atol=1e-12)
    assert (m.det_sign == 1).all()
    np.testing.assert_allclose(m.angles_uv, m.angles_3d, atol=1e-12)


def test_measures_flag_degenerate_faces():
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0]]
    uv = [[[0, 0], [1, 0], [0, 1]], [[0, 0], [1, 0], [0, 1]]]
    m = triangle_measures(shapes.TriMesh(v, [[0, 1, 2], [0, 1, 3]], uv))
    assert m.degenerate_3d.tolist() == [False, True]
    assert np.isnan(m.sigma1[1]) and m.angles_3d_degenerate[1]


def test_measures_collapsed_uv():
    mesh = shapes.single_triangle().with_uv([[[0, 0], [1, 1], [2, 2]]])
    m = triangle_measures(mesh)
    assert m.uv_collapsed[0] and m.sigma2[0] == pytest.approx(0, abs=1e-15)
    assert m.det_sign[0] == 0


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (8, 2, 2), elements=st.floats(-50, 50)))
def test_batch_equals_scalar(J):
    s1, s2, sign = singular_values_batch(J)
    for k in range(len(J)):
        assert (s1[k], s2[k], sign[k]) == singular_values(J[k])
