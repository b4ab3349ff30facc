"""Per-triangle Jacobians of the surface-to-UV map and their singular values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangle, MeshError
from .mesh import TriMesh, corner_angles, face_areas_3d, signed_areas_2d

#: Relative 3D area (fraction of the total surface area) below which a
#: triangle is skipped by the extreme-value metrics.
DEGENERATE_AREA = 1e-12


def local_frames(tri: np.ndarray) -> np.ndarray:
    """Isometric flattening of (N, 3, 3) triangles into (N, 3, 2).

    Corner 0 goes to the origin, corner 1 onto the positive x axis and
    corner 2 into the upper half plane. Degenerate rows yield non-finite values.
    """
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    len1 = np.linalg.norm(e1, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        x2 = np.einsum("nd,nd->n", e1, e2) / len1
        y2 = np.linalg.norm(np.cross(e1, e2), axis=1) / len1
    out = np.zeros((len(tri), 3, 2))
    out[:, 1, 0] = len1
    out[:, 2, 0] = x2
    out[:, 2, 1] = y2
    return out


def local_frame(p0, p1, p2) -> np.ndarray:
    """Flatten one 3D triangle into the plane, preserving edge lengths."""
    tri = np.asarray([p0, p1, p2], dtype=np.float64)[None]
    frame = local_frames(tri)[0]
    if not (np.all(np.isfinite(frame)) and frame[1, 0] > 0 and frame[2, 1] > 0):
        raise DegenerateTriangle("cannot build a local frame for a degenerate triangle")
    return frame


def jacobians(frames: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Linear parts (N, 2, 2) of the affine maps taking ``frames`` onto ``uv``.

    ``frames`` must be in the canonical layout produced by :func:`local_frames`.
    """
    x1 = frames[:, 1, 0]
    x2 = frames[:, 2, 0]
    y2 = frames[:, 2, 1]
    d1 = uv[:, 1] - uv[:, 0]
    d2 = uv[:, 2] - uv[:, 0]
    J = np.empty((len(frames), 2, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        J[:, :, 0] = d1 / x1[:, None]
        J[:, :, 1] = (d2 - d1 * (x2 / x1)[:, None]) / y2[:, None]
    return J


def jacobian(frame, uv) -> np.ndarray:
    """2x2 Jacobian taking the edge vectors of ``frame`` to those of ``uv``.

    ``frame`` may be any nondegenerate 2D triangle.
    """
    frame = np.asarray(frame, dtype=np.float64)
    uv = np.asarray(uv, dtype=np.float64)
    src = np.column_stack([frame[1] - frame[0], frame[2] - frame[0]])
    dst = np.column_stack([uv[1] - uv[0], uv[2] - uv[0]])
    return np.linalg.solve(src.T, dst.T).T


def singular_values_batch(J: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form singular values of (N, 2, 2) matrices.

    Returns ``(sigma1, sigma2, det_sign)`` with ``sigma1 >= sigma2 >= 0``.
    """
    a, b = J[:, 0, 0], J[:, 0, 1]
    c, d = J[:, 1, 0], J[:, 1, 1]
    E = 0.5 * (a + d)
    F = 0.5 * (a - d)
    G = 0.5 * (c + b)
    H = 0.5 * (c - b)
    Q = np.hypot(E, H)
    R = np.hypot(F, G)
    return Q + R, np.abs(Q - R), np.sign(a * d - b * c).astype(np.int64)


def singular_values(J) -> tuple[float, float, int]:
    s1, s2, sign = singular_values_batch(np.asarray(J, dtype=np.float64).reshape(1, 2, 2))
    return float(s1[0]), float(s2[0]), int(sign[0])


@dataclass(frozen=True, eq=False)
class TriangleMeasures:
    """Per-face quantities of one UV map, as arrays over faces.

    ``sigma1``/``sigma2`` are NaN on ``degenerate_3d`` faces. ``uv_collapsed``
    marks faces with zero UV area or degenerate UV angles; ``angles_uv`` is NaN
    there.
    """

    area_3d: np.ndarray
    area_uv: np.ndarray  # signed
    sigma1: np.ndarray
    sigma2: np.ndarray
    det_sign: np.ndarray
    angles_3d: np.ndarray
    angles_uv: np.ndarray
    degenerate_3d: np.ndarray
    angles_3d_degenerate: np.ndarray
    uv_collapsed: np.ndarray

    @property
    def n_faces(self) -> int:
        return len(self.area_3d)

    @property
    def abs_area_uv(self) -> np.ndarray:
        return np.abs(self.area_uv)


def triangle_measures(mesh: TriMesh, degenerate_area: float = DEGENERATE_AREA) -> TriangleMeasures:
    if mesh.uv is None:
        raise MeshError("mesh has no UV coordinates")
    tri = mesh.corners_3d()
    area_3d = face_areas_3d(mesh)
    area_uv = signed_areas_2d(mesh.uv)

    frames = local_frames(tri)
    J = jacobians(frames, mesh.uv)
    with np.errstate(invalid="ignore"):  # NaN rows of degenerate faces
        sigma1, sigma2, _ = singular_values_batch(J)
    degenerate = (area_3d < degenerate_area * area_3d.sum()) | ~np.all(
        np.isfinite(J), axis=(1, 2))
    sigma1[degenerate] = np.nan
    sigma2[degenerate] = np.nan

    angles_3d, deg_3d_angles = corner_angles(tri)
    angles_uv, deg_uv_angles = corner_angles(mesh.uv)
    collapsed = deg_uv_angles | (area_uv == 0)
    angles_uv[collapsed] = np.nan

    return TriangleMeasures(
        area_3d=area_3d,
        area_uv=area_uv,
        sigma1=sigma1,
        sigma2=sigma2,
        det_sign=np.sign(area_uv).astype(np.int64),
        angles_3d=angles_3d,
        angles_uv=angles_uv,
        degenerate_3d=degenerate,
        angles_3d_degenerate=deg_3d_angles,
        uv_collapsed=collapsed,
    )
