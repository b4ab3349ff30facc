"""Naive Tutte embedding used as the built-in method under test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg

from .errors import NotADisk, SolverDiverged
from .mesh import TriMesh, build_adjacency
from .topology import compute_topology


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Uniform graph Laplacian restricted to interior vertices.

    ``rhs`` collects the fixed positions of boundary neighbours, one column
    per UV coordinate.
    """

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray


def boundary_loop(mesh: TriMesh) -> np.ndarray:
    """Boundary vertices of a consistently oriented disk, in winding order."""
    adj = build_adjacency(mesh)
    bcorners = np.argwhere(adj.boundary_mask[adj.corner_edge])
    start = mesh.faces[bcorners[:, 0], bcorners[:, 1]]
    end = mesh.faces[bcorners[:, 0], (bcorners[:, 1] + 1) % 3]
    nxt = dict(zip(start.tolist(), end.tolist()))
    if len(nxt) != len(start):
        raise NotADisk("boundary is not a simple loop")
    first = int(start.min())
    loop = [first]
    v = nxt[first]
    while v != first:
        loop.append(v)
        if len(loop) > len(start) or v not in nxt:
            raise NotADisk("boundary half-edges do not form one oriented loop")
        v = nxt[v]
    if len(loop) != len(start):
        raise NotADisk("mesh has more than one boundary loop")
    return np.array(loop, dtype=np.int64)


def circle_positions(mesh: TriMesh, loop: np.ndarray) -> np.ndarray:
    """Place the loop on the unit circle, spaced by cumulative edge length."""
    p = mesh.vertices[loop]
    seg = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    total = seg.sum()
    if not total > 0:
        raise NotADisk("boundary has zero length")
    t = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / total
    angle = 2.0 * np.pi * t
    return np.column_stack([np.cos(angle), np.sin(angle)])


def build_system(mesh: TriMesh, loop: np.ndarray, loop_uv: np.ndarray) -> LinearSystem:
    n = mesh.n_vertices
    edges = build_adjacency(mesh).edges
    is_boundary = np.zeros(n, dtype=bool)
    is_boundary[loop] = True
    interior = np.flatnonzero(~is_boundary & (np.bincount(mesh.faces.reshape(-1), minlength=n) > 0))
    local = np.full(n, -1, dtype=np.int64)
    local[interior] = np.arange(len(interior))
    fixed = np.zeros((n, 2))
    fixed[loop] = loop_uv

    i, j = edges[:, 0], edges[:, 1]
    degree = np.bincount(np.concatenate([i, j]), minlength=n).astype(np.float64)
    both = (local[i] >= 0) & (local[j] >= 0)
    rows = np.concatenate([local[i[both]], local[j[both]], local[interior]])
    cols = np.concatenate([local[j[both]], local[i[both]], local[interior]])
    vals = np.concatenate([-np.ones(2 * both.sum()), degree[interior]])
    m = len(interior)
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))

    rhs = np.zeros((m, 2))
    for a, b in ((i, j), (j, i)):
        sel = (local[a] >= 0) & is_boundary[b]
        np.add.at(rhs, local[a[sel]], fixed[b[sel]])
    return LinearSystem(matrix, rhs, interior, loop)


def solve_spd(system: LinearSystem, tol: float = 1e-10, max_iter: int | None = None) -> np.ndarray:
    """Conjugate gradients (Jacobi preconditioned) for every right-hand side.

    Raises :class:`SolverDiverged` unless the max-norm residual reaches ``tol``
    within ``max_iter`` iterations (default ten per unknown).
    """
    A = system.matrix
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, system.rhs.shape[1]))
    max_iter = 10 * n if max_iter is None else max_iter
    inv_diag = 1.0 / A.diagonal()
    M = LinearOperator((n, n), matvec=lambda x: inv_diag * x, dtype=np.float64)
    out = np.empty_like(system.rhs)
    for c in range(system.rhs.shape[1]):
        b = system.rhs[:, c]
        # the 2-norm bound implies the max-norm bound
        x, _ = cg(A, b, x0=np.zeros(n), rtol=0.0, atol=0.5 * tol, maxiter=max_iter, M=M)
        residual = np.abs(A @ x - b).max()
        if not residual <= tol:
            raise SolverDiverged(f"residual {residual:.3g} after {max_iter} iterations")
        out[:, c] = x
    return out


def tutte_embed(mesh: TriMesh) -> np.ndarray:
    """Per-corner UVs of the uniform-weight Tutte embedding of a disk.

    Returns a (F, 3, 2) array. The boundary goes to the unit circle.
    """
    info = compute_topology(mesh)
    if not (info.n_components == 1 and info.manifold and info.euler_characteristic == 1
            and info.n_boundary_loops == 1):
        raise NotADisk("Tutte embedding needs a connected manifold disk")
    loop = boundary_loop(mesh)
    if len(loop) < 3:
        raise NotADisk("boundary loop has fewer than 3 vertices")
    loop_uv = circle_positions(mesh, loop)
    system = build_system(mesh, loop, loop_uv)
    uv = np.zeros((mesh.n_vertices, 2))
    uv[loop] = loop_uv
    uv[system.interior] = solve_spd(system)
    return uv[mesh.faces]
