"""Per-mesh quality metrics of a UV map.

All functions taking :class:`TriangleMeasures` expect measures of a mesh
whose surface and UV map were both scaled to total area one
(:func:`uvbench.mesh.normalize_areas`); :func:`resolution` is the exception
and works on the raw mesh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import (AllDegenerate, CorrespondenceFailure, MeshError, RemeshedMesh,
                     ZeroArea, ZeroVariance)
from .jacobian import DEGENERATE_AREA, TriangleMeasures, triangle_measures
from .mesh import TriMesh, build_adjacency, face_areas_3d, normalize_areas, uv_seam_mask

REMESH_TOLERANCE = 1e-5
DEFAULT_EPS_UV = 1e-6


@dataclass(frozen=True)
class MeshMetrics:
    max_area_distortion: float
    avg_area_discrepancy: float
    min_singular_value: float
    max_singular_value: float
    pct_flipped: float
    max_angle_distortion: float
    avg_angle_discrepancy: float
    symmetric_dirichlet: float
    resolution: float
    artist_correlation: float | None
    remeshed: bool
    cut_length: float | None
    artist_cut_length_match: float | None

    @classmethod
    def column_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def area_distortion(area_3d, area_uv):
    """Per-triangle ``A/B + B/A - 2``; infinite when the UV area is zero."""
    a = np.asarray(area_3d, dtype=np.float64)
    b = np.abs(np.asarray(area_uv, dtype=np.float64))
    # a/b + b/a - 2 == (a - b)^2 / (a b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(b > 0, (a - b) ** 2 / (a * b), np.inf)


def angle_distortion(sigma1, sigma2):
    """Per-triangle ``s1/s2 + s2/s1 - 2``; infinite when ``s2`` is zero."""
    s1 = np.asarray(sigma1, dtype=np.float64)
    s2 = np.asarray(sigma2, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s2 > 0, (s1 - s2) ** 2 / (s1 * s2), np.inf)


def dirichlet_density(sigma1, sigma2):
    """Per-triangle symmetric Dirichlet integrand ``(s1^2 + s2^2 + s1^-2 + s2^-2) / 2``."""
    s1 = np.asarray(sigma1, dtype=np.float64)
    s2 = np.asarray(sigma2, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return 0.5 * (s1**2 + s2**2 + 1.0 / s1**2 + 1.0 / s2**2)


def _valid(m: TriangleMeasures) -> np.ndarray:
    valid = ~m.degenerate_3d
    if not valid.any():
        raise AllDegenerate("every triangle is degenerate in 3D")
    return valid


def max_area_distortion(m: TriangleMeasures) -> float:
    valid = _valid(m)
    return float(area_distortion(m.area_3d[valid], m.abs_area_uv[valid]).max())


def avg_area_discrepancy(m: TriangleMeasures) -> float:
    return float(np.abs(m.area_3d - m.abs_area_uv).sum() / m.area_3d.sum())


def singular_extrema(m: TriangleMeasures) -> tuple[float, float]:
    valid = _valid(m)
    return float(m.sigma2[valid].min()), float(m.sigma1[valid].max())


def pct_flipped(m: TriangleMeasures) -> float:
    if m.n_faces == 0:
        return 0.0
    x = 100.0 * np.count_nonzero(m.det_sign < 0) / m.n_faces
    return float(min(x, 100.0 - x))


def max_angle_distortion(m: TriangleMeasures) -> float:
    valid = _valid(m)
    return float(angle_distortion(m.sigma1[valid], m.sigma2[valid]).max())


def angle_discrepancies(m: TriangleMeasures) -> np.ndarray:
    """Per-face sum of absolute corner angle differences; 2*pi when collapsed."""
    e = np.abs(m.angles_3d - m.angles_uv).sum(axis=1)
    return np.where(m.uv_collapsed | m.angles_3d_degenerate, 2.0 * np.pi, e)


def avg_angle_discrepancy(m: TriangleMeasures) -> float:
    return float((angle_discrepancies(m) * m.area_3d).sum() / m.area_3d.sum())


def symmetric_dirichlet(m: TriangleMeasures) -> float:
    """Area-weighted symmetric Dirichlet energy; faces degenerate in 3D are skipped."""
    valid = ~m.degenerate_3d
    e = dirichlet_density(m.sigma1[valid], m.sigma2[valid])
    return float((m.area_3d[valid] * e).sum())


def fit_uv_to_unit_square(uv: np.ndarray) -> np.ndarray:
    """Translate and uniformly scale UVs so their bounding box fits [0, 1]^2."""
    flat = uv.reshape(-1, 2)
    lo = flat.min(axis=0)
    extent = float((flat.max(axis=0) - lo).max())
    if not extent > 0:
        raise ZeroArea("UV bounding box is degenerate")
    return (uv - lo) / extent


def resolution(mesh: TriMesh, degenerate_area: float = DEGENERATE_AREA) -> float:
    """Texture resolution needed for one texel per unit length everywhere.

    Uses the mesh at its original scale with the UV map fit to the unit square.
    """
    if mesh.uv is None:
        raise MeshError("mesh has no UV coordinates")
    m = triangle_measures(mesh.with_uv(fit_uv_to_unit_square(mesh.uv)), degenerate_area)
    valid = _valid(m)
    # max(1/s1, 1/s2) == 1/s2 since s1 >= s2
    with np.errstate(divide="ignore"):
        return float((1.0 / m.sigma2[valid]).max())


def correlation_score(cand: np.ndarray, ref: np.ndarray, weights: np.ndarray) -> float:
    """Area-weighted correlation distance between paired singular values.

    ``cand`` and ``ref`` are (N, 2) arrays of per-triangle singular value
    pairs; sample ``i`` of a triangle is compared with sample ``i`` of the
    reference. Returns ``|c_cr / (s_c s_r) - 1|``, 0 for perfect positive and 2
    for perfect negative correlation.
    """
    cand = np.asarray(cand, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)[:, None]
    norm = 2.0 * w.sum()
    mu_c = (w * cand).sum() / norm
    mu_r = (w * ref).sum() / norm
    dc = cand - mu_c
    dr = ref - mu_r
    c_cr = (w * dc * dr).sum() / norm
    s_c = math.sqrt((w * dc * dc).sum() / norm)
    s_r = math.sqrt((w * dr * dr).sum() / norm)
    # relative cutoff: equal samples leave roundoff-level variance
    if s_c <= 1e-12 * max(abs(mu_c), 1e-300) or s_r <= 1e-12 * max(abs(mu_r), 1e-300):
        raise ZeroVariance("singular values have zero variance")
    return float(abs(c_cr / (s_c * s_r) - 1.0))


def artist_correlation(cand: TriangleMeasures, ref: TriangleMeasures) -> float:
    if cand.n_faces != ref.n_faces:
        raise RemeshedMesh("triangle counts differ")
    valid = ~(cand.degenerate_3d | ref.degenerate_3d)
    if not valid.any():
        raise AllDegenerate("every triangle is degenerate in 3D")
    return correlation_score(
        np.column_stack([cand.sigma1[valid], cand.sigma2[valid]]),
        np.column_stack([ref.sigma1[valid], ref.sigma2[valid]]),
        cand.area_3d[valid],
    )


def detect_remeshed(cand: TriMesh, ref: TriMesh, tolerance: float = REMESH_TOLERANCE) -> bool:
    """Whether the candidate no longer shares vertices and faces with the reference.

    Positions are compared per coordinate in original model units.
    """
    if cand.n_vertices != ref.n_vertices or cand.n_faces != ref.n_faces:
        return True
    if not np.array_equal(cand.faces, ref.faces):
        return True
    if cand.n_vertices == 0:
        return False
    return bool(np.abs(cand.vertices - ref.vertices).max() > tolerance)


def _align_faces(cand: TriMesh, original: TriMesh, tolerance: float) -> TriMesh:
    """Rotate each candidate face so its corner k sits on original corner k."""
    if cand.n_faces != original.n_faces:
        raise CorrespondenceFailure(
            f"face counts differ ({cand.n_faces} vs {original.n_faces})")
    target = original.corners_3d()
    src = cand.corners_3d()
    rotation = np.full(cand.n_faces, -1)
    for r in (2, 1, 0):
        rolled = np.roll(src, -r, axis=1)
        ok = np.abs(rolled - target).max(axis=(1, 2)) <= tolerance
        rotation[ok] = r
    if np.any(rotation < 0):
        bad = int(np.flatnonzero(rotation < 0)[0])
        raise CorrespondenceFailure(f"candidate face {bad} matches no original face")
    idx = (np.arange(3)[None, :] + rotation[:, None]) % 3
    rows = np.arange(cand.n_faces)[:, None]
    return TriMesh(cand.vertices, cand.faces[rows, idx], cand.uv[rows, idx])


def cut_length(cand: TriMesh, original: TriMesh, eps_uv: float = DEFAULT_EPS_UV,
               tolerance: float = REMESH_TOLERANCE) -> float:
    """Total length of new cuts, on the original surface scaled to area one.

    The candidate may keep the original connectivity and express cuts through
    disagreeing corner UVs, or duplicate vertices along its cuts. Either way its
    faces must correspond to the original faces by index. An interior edge of the
    original counts as cut unless the candidate glues its faces with matching UVs.
    """
    if cand.uv is None:
        raise MeshError("candidate has no UV coordinates")
    aligned = _align_faces(cand, original, tolerance)
    adj = build_adjacency(original)
    cadj = build_adjacency(aligned)
    cseam = uv_seam_mask(aligned, cadj, eps_uv)

    rows = adj.edge_incidence
    cand_edge = cadj.corner_edge[rows[:, 0], rows[:, 1]]
    edge_of_row = np.repeat(np.arange(adj.n_edges), adj.valence)
    first = cand_edge[adj.edge_offsets[edge_of_row]]
    split = np.zeros(adj.n_edges, dtype=bool)
    np.logical_or.at(split, edge_of_row, (cand_edge != first) | cseam[cand_edge])
    cut = split & (adj.valence >= 2)

    total = float(face_areas_3d(original).sum())
    if not total > 0:
        raise ZeroArea("original mesh has zero area")
    e = adj.edges[cut]
    lengths = np.linalg.norm(original.vertices[e[:, 0]] - original.vertices[e[:, 1]], axis=1)
    return float(lengths.sum() / math.sqrt(total))


def artist_cut_match(c: float, c_art: float) -> float:
    return max(0.0, c - c_art)


def select_interesting(reports: Sequence[tuple[str, MeshMetrics | None]],
                       hand_picked: Iterable[str] = ()) -> list[str]:
    """Hand-picked ids plus the worst mesh for four comparison metrics.

    Ties go to the earliest mesh in ``reports`` order. Returned ids follow
    ``reports`` order, with unknown hand-picked ids appended.
    """
    chosen = set(hand_picked)
    for name in ("artist_correlation", "avg_area_discrepancy",
                 "avg_angle_discrepancy", "pct_flipped"):
        best_id, best = None, -math.inf
        for mesh_id, metrics in reports:
            value = None if metrics is None else getattr(metrics, name)
            if value is not None and value > best:
                best_id, best = mesh_id, value
        if best_id is not None:
            chosen.add(best_id)
    ordered = [mesh_id for mesh_id, _ in reports if mesh_id in chosen]
    ordered += sorted(chosen.difference(ordered))
    return list(dict.fromkeys(ordered))


def compute_metrics(cand: TriMesh, ref: TriMesh | None = None, variant: str = "cut",
                    tiny_area: float = 1e-8, eps_uv: float = DEFAULT_EPS_UV,
                    degenerate_area: float = DEGENERATE_AREA) -> MeshMetrics:
    """Full metric suite of ``cand`` against the reference map ``ref``.

    Comparison metrics are None when ``ref`` is missing or has no UVs, when
    the candidate is remeshed (correlation), or outside the uncut variant
    (cut lengths).
    """
    if cand.uv is None:
        raise MeshError("candidate has no UV coordinates")
    if not np.all(np.isfinite(cand.uv)):
        raise MeshError("non-finite texture coordinates")
    normalized, _ = normalize_areas(cand, tiny_area)
    m = triangle_measures(normalized, degenerate_area)
    s_min, s_max = singular_extrema(m)

    remeshed = False
    correlation = None
    c = c_match = None
    if ref is not None:
        remeshed = detect_remeshed(cand, ref)
        if ref.uv is not None and np.all(np.isfinite(ref.uv)):
            if not remeshed:
                try:
                    ref_n, _ = normalize_areas(ref, tiny_area)
                    correlation = artist_correlation(
                        m, triangle_measures(ref_n, degenerate_area))
                except (ZeroVariance, ZeroArea, AllDegenerate):
                    correlation = None
            if variant == "uncut":
                try:
                    c = cut_length(cand, ref, eps_uv)
                    c_match = artist_cut_match(c, cut_length(ref, ref, eps_uv))
                except (CorrespondenceFailure, ZeroArea):
                    c = c_match = None

    return MeshMetrics(
        max_area_distortion=max_area_distortion(m),
        avg_area_discrepancy=avg_area_discrepancy(m),
        min_singular_value=s_min,
        max_singular_value=s_max,
        pct_flipped=pct_flipped(m),
        max_angle_distortion=max_angle_distortion(m),
        avg_angle_discrepancy=avg_angle_discrepancy(m),
        symmetric_dirichlet=symmetric_dirichlet(m),
        resolution=resolution(cand, degenerate_area),
        artist_correlation=correlation,
        remeshed=remeshed,
        cut_length=c,
        artist_cut_length_match=c_match,
    )
