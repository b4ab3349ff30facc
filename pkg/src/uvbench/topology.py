"""Euler characteristic, genus, boundary structure, manifoldness and dataset tags."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .mesh import EdgeAdjacency, TriMesh, build_adjacency, submesh

SMALL_FACE_LIMIT = 100


@dataclass(frozen=True)
class TopologyInfo:
    n_vertices: int
    n_edges: int
    n_faces: int
    euler_characteristic: int
    n_boundary_loops: int
    n_boundary_faces: int
    genus: int | None
    vertex_manifold: bool
    edge_manifold: bool
    orientable: bool
    n_components: int

    @property
    def manifold(self) -> bool:
        return self.vertex_manifold and self.edge_manifold

    @property
    def boundary_face_fraction(self) -> float:
        return self.n_boundary_faces / self.n_faces if self.n_faces else 0.0


@dataclass(frozen=True)
class TagSet:
    disk: bool
    closed: bool
    manifold: bool
    small: bool


def graph_components(n: int, a: np.ndarray, b: np.ndarray) -> tuple[int, np.ndarray]:
    graph = coo_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n))
    return _cc(graph, directed=False)


def is_vertex_manifold(mesh: TriMesh, adj: EdgeAdjacency) -> bool:
    """Every vertex's incident faces form one fan, connected through shared edges.

    Corner ``(f, k)`` is node ``3f + k``; two faces sharing an edge link their
    corners at both endpoints. A vertex is manifold when all its corners end up
    in one connected component.
    """
    n_corners = 3 * mesh.n_faces
    if n_corners == 0:
        return True
    rows = adj.edge_incidence
    edge_of_row = np.repeat(np.arange(adj.n_edges), adj.valence)
    first = rows[adj.edge_offsets[edge_of_row]]
    keep = np.arange(len(rows)) != adj.edge_offsets[edge_of_row]
    f1, k1 = first[keep, 0], first[keep, 1]
    f2, k2 = rows[keep, 0], rows[keep, 1]
    src, dst = [], []
    for kk1 in (k1, (k1 + 1) % 3):
        vertex = mesh.faces[f1, kk1]
        # position of the same vertex inside the other face
        kk2 = np.argmax(mesh.faces[f2] == vertex[:, None], axis=1)
        src.append(3 * f1 + kk1)
        dst.append(3 * f2 + kk2)
    _, labels = graph_components(n_corners, np.concatenate(src), np.concatenate(dst))
    vertex_of_corner = mesh.faces.reshape(-1)
    pairs = np.unique(np.stack([vertex_of_corner, labels], axis=1), axis=0)
    return len(pairs) == len(np.unique(vertex_of_corner))


def _orientable(mesh: TriMesh, adj: EdgeAdjacency) -> bool:
    """Try to assign every face a flip bit so shared edges run in opposite directions."""
    n = mesh.n_faces
    flip = np.full(n, -1, dtype=np.int8)
    faces = mesh.faces
    neighbours: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    valence = adj.valence
    for e in np.flatnonzero(valence == 2):
        (f, k), (g, m) = adj.edge_incidence[adj.edge_offsets[e]:adj.edge_offsets[e] + 2]
        same_direction = int(faces[f, k] == faces[g, m])
        neighbours[f].append((g, same_direction))
        neighbours[g].append((f, same_direction))
    for seed in range(n):
        if flip[seed] >= 0:
            continue
        flip[seed] = 0
        queue = deque([seed])
        while queue:
            f = queue.popleft()
            for g, same in neighbours[f]:
                want = flip[f] ^ same
                if flip[g] < 0:
                    flip[g] = want
                    queue.append(g)
                elif flip[g] != want:
                    return False
    return True


def _face_components(mesh: TriMesh) -> tuple[int, np.ndarray]:
    """Components of faces linked through shared vertices; labels per face."""
    n = mesh.n_faces
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    f = mesh.faces
    nv = mesh.n_vertices
    # bipartite graph: faces 0..n-1, vertices n..n+nv-1
    a = np.repeat(np.arange(n), 3)
    b = n + f.reshape(-1)
    _, labels = graph_components(n + nv, a, b)
    face_labels = labels[:n]
    _, compact = np.unique(face_labels, return_inverse=True)
    return int(compact.max()) + 1, compact.reshape(-1)


def compute_topology(mesh: TriMesh, adjacency: EdgeAdjacency | None = None) -> TopologyInfo:
    """Topological summary of a mesh.

    Only vertices referenced by a face take part. Boundary loops are the
    independent cycles of the boundary-edge graph, which for a manifold mesh is
    the number of boundary curves.
    """
    adj = adjacency if adjacency is not None else build_adjacency(mesh)
    valence = adj.valence
    referenced = np.unique(mesh.faces)
    nv = len(referenced)
    ne = adj.n_edges
    nf = mesh.n_faces
    chi = nv - ne + nf

    boundary = valence == 1
    bedges = adj.edges[boundary]
    if len(bedges):
        bverts, inv = np.unique(bedges.reshape(-1), return_inverse=True)
        inv = inv.reshape(-1, 2)
        n_bcomp, _ = graph_components(len(bverts), inv[:, 0], inv[:, 1])
        n_loops = len(bedges) - len(bverts) + n_bcomp
    else:
        n_loops = 0

    bcorner = boundary[adj.corner_edge]
    n_boundary_faces = int(np.count_nonzero(bcorner.any(axis=1)))

    edge_manifold = bool(np.all(valence <= 2))
    vertex_manifold = is_vertex_manifold(mesh, adj)
    orientable = _orientable(mesh, adj)
    n_components, _ = _face_components(mesh)

    genus = None
    if n_components == 1 and edge_manifold and vertex_manifold and orientable:
        genus = (2 - n_loops - chi) // 2

    return TopologyInfo(
        n_vertices=nv,
        n_edges=ne,
        n_faces=nf,
        euler_characteristic=chi,
        n_boundary_loops=int(n_loops),
        n_boundary_faces=n_boundary_faces,
        genus=genus,
        vertex_manifold=vertex_manifold,
        edge_manifold=edge_manifold,
        orientable=orientable,
        n_components=n_components,
    )


def evaluate_tags(info: TopologyInfo, n_faces: int | None = None) -> TagSet:
    n_faces = info.n_faces if n_faces is None else n_faces
    return TagSet(
        disk=info.euler_characteristic == 1,
        closed=info.n_boundary_loops == 0,
        manifold=info.manifold,
        small=n_faces < SMALL_FACE_LIMIT,
    )


def connected_components(mesh: TriMesh) -> list[TriMesh]:
    """Split into vertex-connected pieces, largest first.

    Ties in face count are ordered by the smallest face index in the piece.
    """
    n, labels = _face_components(mesh)
    if n == 0:
        return []
    order = np.argsort(labels, kind="stable")
    groups = np.split(order, np.cumsum(np.bincount(labels, minlength=n))[:-1])
    groups.sort(key=lambda g: (-len(g), int(g[0])))
    return [submesh(mesh, g) for g in groups]
