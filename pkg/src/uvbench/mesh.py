"""Indexed triangle mesh with per-corner UVs, adjacency and area helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MeshError, ZeroArea

#: Sine threshold below which a triangle counts as collapsed for angle purposes.
ANGLE_DEGENERACY = 1e-14


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangle mesh with optional wedge UVs.

    Attributes:
        vertices: (V, 3) float positions.
        faces: (F, 3) int vertex indices; counterclockwise winding is the
            surface orientation.
        uv: (F, 3, 2) float texture coordinates, one per face corner, or None
            for a mesh without parameterization.
    """

    vertices: np.ndarray
    faces: np.ndarray
    uv: np.ndarray | None = None

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        faces = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise MeshError("face index out of range")
        if np.any((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
                  | (faces[:, 0] == faces[:, 2])):
            raise MeshError("face references the same vertex twice")
        uv = self.uv
        if uv is not None:
            uv = np.array(uv, dtype=np.float64)
            if uv.size != 6 * len(faces):
                raise MeshError(
                    f"expected {3 * len(faces)} uv corners, got {uv.size // 2}")
            uv = uv.reshape(-1, 3, 2)
            uv.setflags(write=False)
        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "uv", uv)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def has_uv(self) -> bool:
        return self.uv is not None

    def corners_3d(self) -> np.ndarray:
        """(F, 3, 3) positions of every face corner."""
        return self.vertices[self.faces]

    def with_uv(self, uv) -> TriMesh:
        return TriMesh(self.vertices, self.faces, uv)

    def scaled(self, position_scale: float = 1.0, uv_scale: float = 1.0) -> TriMesh:
        uv = None if self.uv is None else self.uv * uv_scale
        return TriMesh(self.vertices * position_scale, self.faces, uv)


@dataclass(frozen=True, eq=False)
class EdgeAdjacency:
    """Undirected edge and vertex-face incidence tables.

    Edges are sorted vertex pairs in lexicographic order. Corner ``k`` of face
    ``f`` owns the edge ``(faces[f, k], faces[f, (k + 1) % 3])``.
    """

    n_vertices: int
    edges: np.ndarray  # (E, 2), edges[:, 0] < edges[:, 1]
    corner_edge: np.ndarray  # (F, 3) edge id owned by each corner
    edge_offsets: np.ndarray  # (E + 1,)
    edge_incidence: np.ndarray  # (3F, 2) rows of (face, corner), grouped by edge
    vertex_offsets: np.ndarray  # (V + 1,)
    vertex_faces: np.ndarray  # (3F,) grouped by vertex

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def valence(self) -> np.ndarray:
        """Number of incident faces per edge."""
        return np.diff(self.edge_offsets)

    @property
    def boundary_mask(self) -> np.ndarray:
        return self.valence == 1

    def incident(self, edge: int) -> list[tuple[int, int]]:
        lo, hi = self.edge_offsets[edge], self.edge_offsets[edge + 1]
        return [(int(f), int(k)) for f, k in self.edge_incidence[lo:hi]]

    def faces_of_vertex(self, vertex: int) -> np.ndarray:
        return self.vertex_faces[self.vertex_offsets[vertex]:self.vertex_offsets[vertex + 1]]

    def find_edge(self, i: int, j: int) -> int:
        """Edge id of the undirected edge ``{i, j}``, or -1 if absent."""
        a, b = (i, j) if i < j else (j, i)
        keys = self.edges[:, 0] * self.n_vertices + self.edges[:, 1]
        pos = int(np.searchsorted(keys, a * self.n_vertices + b))
        if pos < len(keys) and keys[pos] == a * self.n_vertices + b:
            return pos
        return -1


def build_adjacency(mesh: TriMesh) -> EdgeAdjacency:
    faces = mesh.faces
    n_faces = len(faces)
    nv = mesh.n_vertices
    start = faces.reshape(-1)
    end = np.roll(faces, -1, axis=1).reshape(-1)
    pairs = np.stack([np.minimum(start, end), np.maximum(start, end)], axis=1)
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    edges = edges.reshape(-1, 2)
    inverse = inverse.reshape(-1)

    corner_ids = np.arange(3 * n_faces)
    order = np.lexsort((corner_ids, inverse))
    incidence = np.stack([order // 3, order % 3], axis=1)
    edge_offsets = np.zeros(len(edges) + 1, dtype=np.int64)
    np.cumsum(np.bincount(inverse, minlength=len(edges)), out=edge_offsets[1:])

    vorder = np.lexsort((corner_ids, start))
    vertex_offsets = np.zeros(nv + 1, dtype=np.int64)
    np.cumsum(np.bincount(start, minlength=nv), out=vertex_offsets[1:])

    return EdgeAdjacency(
        n_vertices=nv,
        edges=edges.astype(np.int64),
        corner_edge=inverse.reshape(n_faces, 3).astype(np.int64),
        edge_offsets=edge_offsets,
        edge_incidence=incidence.astype(np.int64),
        vertex_offsets=vertex_offsets,
        vertex_faces=(vorder // 3).astype(np.int64),
    )


def face_areas_3d(mesh: TriMesh) -> np.ndarray:
    p = mesh.corners_3d()
    return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def signed_areas_2d(tri: np.ndarray) -> np.ndarray:
    """Signed areas of (N, 3, 2) triangles, positive when counterclockwise."""
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def face_areas_uv(mesh: TriMesh) -> np.ndarray:
    if mesh.uv is None:
        raise MeshError("mesh has no UV coordinates")
    return signed_areas_2d(mesh.uv)


def triangle_area_3d(mesh: TriMesh, face: int) -> float:
    p0, p1, p2 = mesh.vertices[mesh.faces[face]]
    return 0.5 * float(np.linalg.norm(np.cross(p1 - p0, p2 - p0)))


def triangle_area_uv(mesh: TriMesh, face: int) -> float:
    """Signed UV area of one face; negative means flipped."""
    return float(signed_areas_2d(mesh.uv[face:face + 1])[0])


def corner_angles(tri: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior angles of (N, 3, d) triangles for d in {2, 3}.

    Returns ``(angles, degenerate)`` where ``angles[:, k]`` is the angle at
    corner ``k`` and ``degenerate`` flags triangles with a zero-length edge or
    (numerically) zero area. Angles of degenerate rows are NaN.
    """
    tri = np.asarray(tri, dtype=np.float64)
    a = np.roll(tri, -1, axis=1) - tri  # edge to next corner
    b = np.roll(tri, -2, axis=1) - tri  # edge to previous corner
    if tri.shape[-1] == 2:
        cross = np.abs(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    else:
        cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.einsum("nkd,nkd->nk", a, b)
    angles = np.arctan2(cross, dot)

    lengths = np.linalg.norm(a, axis=-1)
    longest = lengths.max(axis=1)
    degenerate = (lengths.min(axis=1) == 0) | (cross[:, 0] <= ANGLE_DEGENERACY * longest**2)
    angles[degenerate] = np.nan
    return angles, degenerate


def triangle_angles(points) -> tuple[float, float, float] | None:
    """Angles at the three corners of a 2D or 3D triangle, or None if degenerate."""
    angles, degenerate = corner_angles(np.asarray(points, dtype=np.float64)[None])
    if degenerate[0]:
        return None
    return tuple(float(x) for x in angles[0])


def normalize_areas(mesh: TriMesh, tiny_area: float = 1e-8) -> tuple[TriMesh, tuple[float, float]]:
    """Scale positions and UVs so both total areas equal one.

    UV area is the sum of absolute triangle areas. Returns the scaled mesh and
    the ``(position_scale, uv_scale)`` factors that were applied.
    """
    area_3d = float(face_areas_3d(mesh).sum())
    area_uv = float(np.abs(face_areas_uv(mesh)).sum())
    if not area_3d >= tiny_area:
        raise ZeroArea(f"total surface area {area_3d:g} below {tiny_area:g}")
    if not area_uv >= tiny_area:
        raise ZeroArea(f"total UV area {area_uv:g} below {tiny_area:g}")
    s3 = 1.0 / np.sqrt(area_3d)
    suv = 1.0 / np.sqrt(area_uv)
    return mesh.scaled(s3, suv), (float(s3), float(suv))


def remove_unreferenced(mesh: TriMesh) -> TriMesh:
    used = np.unique(mesh.faces)
    if len(used) == mesh.n_vertices:
        return mesh
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return TriMesh(mesh.vertices[used], remap[mesh.faces], mesh.uv)


def submesh(mesh: TriMesh, face_ids) -> TriMesh:
    """Mesh made of the given faces with compactly reindexed vertices.

    Vertices keep their relative order; unreferenced ones are dropped.
    """
    face_ids = np.asarray(face_ids, dtype=np.int64)
    uv = None if mesh.uv is None else mesh.uv[face_ids]
    return remove_unreferenced(TriMesh(mesh.vertices, mesh.faces[face_ids], uv))


def edge_corner_uvs(mesh: TriMesh, adjacency: EdgeAdjacency) -> np.ndarray:
    """UVs at both endpoints of every edge incidence, ordered by vertex id.

    Row ``r`` of the (3F, 2, 2) result belongs to ``adjacency.edge_incidence[r]``;
    ``[r, 0]`` is the UV at the smaller vertex id of the edge.
    """
    f = adjacency.edge_incidence[:, 0]
    k = adjacency.edge_incidence[:, 1]
    k_next = (k + 1) % 3
    uv_a = mesh.uv[f, k]
    uv_b = mesh.uv[f, k_next]
    swap = mesh.faces[f, k] > mesh.faces[f, k_next]
    lo = np.where(swap[:, None], uv_b, uv_a)
    hi = np.where(swap[:, None], uv_a, uv_b)
    return np.stack([lo, hi], axis=1)


def uv_seam_mask(mesh: TriMesh, adjacency: EdgeAdjacency, eps_uv: float) -> np.ndarray:
    """Per-edge flag: some incident face disagrees on the edge's corner UVs.

    Boundary edges are never seams. Two corners agree when their UV distance is
    at most ``eps_uv``.
    """
    if mesh.uv is None:
        raise MeshError("mesh has no UV coordinates")
    uvs = edge_corner_uvs(mesh, adjacency)
    counts = adjacency.valence
    edge_of_row = np.repeat(np.arange(adjacency.n_edges), counts)
    first = uvs[adjacency.edge_offsets[edge_of_row]]
    dist = np.linalg.norm(uvs - first, axis=2).max(axis=1)
    bad = ~(dist <= eps_uv)
    seam = np.zeros(adjacency.n_edges, dtype=bool)
    np.logical_or.at(seam, edge_of_row, bad)
    return seam & (counts >= 2)
