"""Dataset construction: merge close vertices, split components, cut along seams."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import MeshError, NonManifold, UVMismatch
from .mesh import TriMesh, build_adjacency, remove_unreferenced, uv_seam_mask
from .topology import graph_components, is_vertex_manifold, connected_components

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocessConfig:
    """Merge tolerances and component cap.

    ``merge_epsilon_3d`` of None means 1e-6 times the bounding-box diagonal.
    """

    merge_epsilon_3d: float | None = None
    merge_epsilon_uv: float = 1e-6
    max_components: int = 50

    def __post_init__(self):
        if self.merge_epsilon_3d is not None and self.merge_epsilon_3d < 0:
            raise ValueError("merge_epsilon_3d must be >= 0")
        if self.merge_epsilon_uv < 0:
            raise ValueError("merge_epsilon_uv must be >= 0")
        if self.max_components < 1:
            raise ValueError("max_components must be >= 1")

    def epsilon_3d(self, mesh: TriMesh) -> float:
        if self.merge_epsilon_3d is not None:
            return self.merge_epsilon_3d
        if mesh.n_vertices == 0:
            return 0.0
        diag = np.linalg.norm(mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0))
        return 1e-6 * float(diag)


def _labels_from_pairs(n: int, pairs: np.ndarray) -> np.ndarray:
    _, labels = graph_components(n, pairs[:, 0], pairs[:, 1])
    return labels


def _share_uv(mesh: TriMesh, pairs: np.ndarray, eps_uv: float) -> np.ndarray:
    """Per pair: some corner of one vertex lies within ``eps_uv`` of a corner of the other."""
    flat = mesh.faces.reshape(-1)
    uv = mesh.uv.reshape(-1, 2)
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=mesh.n_vertices)
    start = np.cumsum(counts) - counts
    i, j = pairs[:, 0], pairs[:, 1]
    n_combo = counts[i] * counts[j]
    pair_of = np.repeat(np.arange(len(pairs)), n_combo)
    local = np.arange(n_combo.sum()) - np.repeat(np.cumsum(n_combo) - n_combo, n_combo)
    cj = counts[j][pair_of]
    a = order[start[i][pair_of] + local // cj]
    b = order[start[j][pair_of] + local % cj]
    ok = np.zeros(len(pairs), dtype=bool)
    np.logical_or.at(ok, pair_of, np.linalg.norm(uv[a] - uv[b], axis=1) <= eps_uv)
    return ok


def _merge_conflicts(mesh: TriMesh, labels: np.ndarray, eps_uv: float) -> set[tuple[int, int]]:
    """Vertex pairs whose identification would glue corners with different UVs."""
    merged = labels[mesh.faces]
    alive = ((merged[:, 0] != merged[:, 1]) & (merged[:, 1] != merged[:, 2])
             & (merged[:, 0] != merged[:, 2]))
    faces = mesh.faces[alive]
    merged = merged[alive]
    uv = mesh.uv[alive]
    nxt = [1, 2, 0]
    A, B = merged.reshape(-1), merged[:, nxt].reshape(-1)
    a, b = faces.reshape(-1), faces[:, nxt].reshape(-1)
    ua, ub = uv.reshape(-1, 2), uv[:, nxt].reshape(-1, 2)
    swap = A > B
    A, B = np.where(swap, B, A), np.where(swap, A, B)
    a, b = np.where(swap, b, a), np.where(swap, a, b)
    ua, ub = np.where(swap[:, None], ub, ua), np.where(swap[:, None], ua, ub)

    order = np.lexsort((np.arange(len(A)), B, A))
    A, B, a, b, ua, ub = A[order], B[order], a[order], b[order], ua[order], ub[order]
    new_group = np.ones(len(A), dtype=bool)
    new_group[1:] = (A[1:] != A[:-1]) | (B[1:] != B[:-1])
    first = np.maximum.accumulate(np.where(new_group, np.arange(len(A)), 0))

    conflicts = set()
    for orig, uvs in ((a, ua), (b, ub)):
        differs = orig != orig[first]
        far = np.linalg.norm(uvs - uvs[first], axis=1) > eps_uv
        for r in np.flatnonzero(differs & far):
            i, j = int(orig[r]), int(orig[first[r]])
            conflicts.add((min(i, j), max(i, j)))
    return conflicts


def _split_cluster(members: list[int], candidates: set[tuple[int, int]],
                   forbidden: set[tuple[int, int]]) -> list[list[int]]:
    groups: list[list[int]] = []
    for v in members:
        for g in groups:
            if any((min(v, w), max(v, w)) in forbidden for w in g):
                continue
            if any((min(v, w), max(v, w)) in candidates for w in g):
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def merge_close_vertices(mesh: TriMesh, config: PreprocessConfig = PreprocessConfig()) -> TriMesh:
    """Merge vertices that are close in 3D and whose UVs agree where they get glued.

    A pair qualifies when the vertices are within the 3D tolerance and some
    corner UV of one lies within ``merge_epsilon_uv`` of a corner UV of the
    other. Qualifying pairs are still kept apart when merging would identify,
    across a shared edge, two corners whose UVs differ by more than
    ``merge_epsilon_uv``. Faces that collapse are removed.
    """
    if mesh.uv is None:
        raise MeshError("merging needs UV coordinates")
    n = mesh.n_vertices
    if n == 0:
        return mesh
    eps = config.epsilon_3d(mesh)
    pairs = cKDTree(mesh.vertices).query_pairs(eps, output_type="ndarray")
    if len(pairs):
        pairs = pairs[_share_uv(mesh, pairs, config.merge_epsilon_uv)]
    if len(pairs) == 0:
        return mesh
    pairs = np.sort(pairs, axis=1)
    candidates = {(int(i), int(j)) for i, j in pairs}
    labels = _labels_from_pairs(n, pairs)
    forbidden: set[tuple[int, int]] = set()
    while True:
        conflicts = _merge_conflicts(mesh, labels, config.merge_epsilon_uv) - forbidden
        if not conflicts:
            break
        forbidden |= conflicts
        bad_clusters = {labels[i] for i, _ in conflicts}
        next_label = labels.max() + 1
        for c in sorted(bad_clusters):
            members = [int(v) for v in np.flatnonzero(labels == c)]
            for g in _split_cluster(members, candidates, forbidden)[1:]:
                labels[g] = next_label
                next_label += 1

    # representatives are the smallest index of each cluster, kept in index order
    rep = np.full(labels.max() + 1, n, dtype=np.int64)
    np.minimum.at(rep, labels, np.arange(n))
    rep_of_vertex = rep[labels]
    keep = np.flatnonzero(rep_of_vertex == np.arange(n))
    new_id = np.full(n, -1, dtype=np.int64)
    new_id[keep] = np.arange(len(keep))
    faces = new_id[rep_of_vertex[mesh.faces]]
    alive = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
    if not alive.all():
        logger.debug("merge removed %d collapsed faces", int((~alive).sum()))
    return TriMesh(mesh.vertices[keep], faces[alive], mesh.uv[alive])


def split_and_cap(mesh: TriMesh, config: PreprocessConfig = PreprocessConfig()) -> list[TriMesh]:
    return connected_components(mesh)[:config.max_components]


def _cut(mesh: TriMesh, eps_uv: float) -> TriMesh:
    if mesh.n_faces == 0:
        return mesh
    adj = build_adjacency(mesh)
    seam = uv_seam_mask(mesh, adj, eps_uv)
    rows = adj.edge_incidence
    edge_of_row = np.repeat(np.arange(adj.n_edges), adj.valence)
    first_idx = adj.edge_offsets[edge_of_row]
    glue = (np.arange(len(rows)) != first_idx) & ~seam[edge_of_row]
    f1, k1 = rows[first_idx[glue], 0], rows[first_idx[glue], 1]
    f2 = rows[glue, 0]
    src, dst = [], []
    for kk1 in (k1, (k1 + 1) % 3):
        vertex = mesh.faces[f1, kk1]
        kk2 = np.argmax(mesh.faces[f2] == vertex[:, None], axis=1)
        src.append(3 * f1 + kk1)
        dst.append(3 * f2 + kk2)
    n_corners = 3 * mesh.n_faces
    _, labels = graph_components(n_corners, np.concatenate(src), np.concatenate(dst))

    corner_vertex = mesh.faces.reshape(-1)
    n_new = labels.max() + 1
    min_corner = np.full(n_new, n_corners, dtype=np.int64)
    np.minimum.at(min_corner, labels, np.arange(n_corners))
    orig = corner_vertex[min_corner]
    order = np.lexsort((min_corner, orig))
    new_id = np.empty(n_new, dtype=np.int64)
    new_id[order] = np.arange(n_new)

    corner_new = new_id[labels]
    uv = mesh.uv.reshape(-1, 2)
    anchor = np.empty((n_new, 2))
    anchor[corner_new] = uv  # any corner works as the anchor
    spread = np.linalg.norm(uv - anchor[corner_new], axis=1)
    if np.any(spread > 2 * eps_uv):
        raise UVMismatch("a vertex keeps conflicting UVs after cutting")
    return TriMesh(mesh.vertices[orig[order]], corner_new.reshape(-1, 3), mesh.uv)


def cut_along_seams(mesh: TriMesh, eps_uv: float = 1e-6) -> TriMesh:
    """Duplicate vertices so surface connectivity equals UV connectivity.

    An edge stays glued iff both incident faces agree on its corner UVs. Raises
    :class:`NonManifold` for nonmanifold input and :class:`UVMismatch` when a
    vertex still carries conflicting UVs afterwards.
    """
    if mesh.uv is None:
        raise MeshError("cutting needs UV coordinates")
    adj = build_adjacency(mesh)
    if np.any(adj.valence > 2) or not is_vertex_manifold(mesh, adj):
        raise NonManifold("mesh is not manifold")
    return _cut(mesh, eps_uv)


def chart_count(mesh: TriMesh, eps_uv: float = 1e-6) -> int:
    """Number of UV islands: connected pieces after cutting along all seams."""
    if mesh.uv is None:
        raise MeshError("chart count needs UV coordinates")
    return len(connected_components(_cut(mesh, eps_uv)))


def preprocess_mesh(mesh: TriMesh, variant: str = "uncut",
                    config: PreprocessConfig = PreprocessConfig()) -> list[TriMesh]:
    """Turn one triangulated source asset into dataset meshes.

    ``uncut`` yields the largest connected components after merging. ``cut``
    drops nonmanifold components, cuts the rest along their seams, and keeps
    the largest resulting pieces.
    """
    if variant not in ("cut", "uncut"):
        raise ValueError(f"unknown variant {variant!r}")
    merged = merge_close_vertices(remove_unreferenced(mesh), config)
    if variant == "uncut":
        return split_and_cap(merged, config)
    pieces: list[TriMesh] = []
    for component in connected_components(merged):
        try:
            cut = cut_along_seams(component, config.merge_epsilon_uv)
        except (NonManifold, UVMismatch) as exc:
            logger.info("excluding component with %d faces: %s", component.n_faces, exc)
            continue
        pieces.extend(connected_components(cut))
    pieces.sort(key=lambda m: -m.n_faces)
    return pieces[:config.max_components]

