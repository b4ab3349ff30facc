"""Small synthetic meshes with known topology, used for self-tests and demos."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh


def planar_uv(mesh: TriMesh) -> np.ndarray:
    """Per-corner UVs equal to the x and y coordinates of each corner."""
    return mesh.corners_3d()[:, :, :2].copy()


def single_triangle() -> TriMesh:
    return TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


def tetrahedron() -> TriMesh:
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    f = [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]
    return TriMesh(v, f)


def _grid_faces(nx: int, ny: int, stride: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    a = (j * stride + i).ravel()
    b, c, d = a + 1, a + stride + 1, a + stride
    return np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])


def grid_disk(nx: int = 4, ny: int = 4, height: float = 0.0, jitter: float = 0.0,
              seed: int = 0, with_uv: bool = True) -> TriMesh:
    """Unit square grid of ``2 nx ny`` triangles, optionally a bumpy height field.

    ``jitter`` moves interior vertices in the plane by up to that fraction of a
    cell. With ``with_uv`` the UVs are the flat grid positions.
    """
    rng = np.random.default_rng(seed)
    x, y = np.meshgrid(np.linspace(0, 1, nx + 1), np.linspace(0, 1, ny + 1), indexing="xy")
    x, y = x.ravel(), y.ravel()
    interior = (x > 0) & (x < 1) & (y > 0) & (y < 1)
    if jitter:
        cell = min(1 / nx, 1 / ny)
        x = x + interior * rng.uniform(-jitter, jitter, x.size) * cell
        y = y + interior * rng.uniform(-jitter, jitter, y.size) * cell
    z = height * np.sin(np.pi * x) * np.sin(np.pi * y) * (1 + 0.3 * np.cos(5 * x + 3 * y))
    faces = _grid_faces(nx, ny, nx + 1)
    flat = TriMesh(np.column_stack([x, y, np.zeros_like(x)]), faces)
    mesh = TriMesh(np.column_stack([x, y, z]), faces)
    return mesh.with_uv(planar_uv(flat)) if with_uv else mesh


def polar_disk(rings: int = 5, sectors: int = 20, radius: float = 1.0) -> TriMesh:
    """Triangulated disk: a centre vertex plus concentric rings."""
    pts = [[0.0, 0.0, 0.0]]
    for r in range(1, rings + 1):
        t = 2 * np.pi * np.arange(sectors) / sectors
        rad = radius * r / rings
        pts.extend(np.column_stack([rad * np.cos(t), rad * np.sin(t), np.zeros(sectors)]))
    faces = []
    ring = lambda r, s: 1 + (r - 1) * sectors + s % sectors  # noqa: E731
    for s in range(sectors):
        faces.append([0, ring(1, s), ring(1, s + 1)])
    for r in range(1, rings):
        for s in range(sectors):
            a, b = ring(r, s), ring(r, s + 1)
            c, d = ring(r + 1, s + 1), ring(r + 1, s)
            faces.extend([[a, d, c], [a, c, b]])
    return TriMesh(np.array(pts), faces)


def hemisphere(rings: int = 5, sectors: int = 20) -> TriMesh:
    """Upper half of the unit sphere, built by lifting :func:`polar_disk`."""
    disk = polar_disk(rings, sectors)
    xy = disk.vertices[:, :2]
    r = np.linalg.norm(xy, axis=1)
    theta = r * np.pi / 2
    scale = np.divide(np.sin(theta), r, out=np.ones_like(r), where=r > 0)
    v = np.column_stack([xy * scale[:, None], np.cos(theta)])
    return TriMesh(v, disk.faces)


def annulus(rings: int = 2, sectors: int = 12, inner: float = 0.5) -> TriMesh:
    """Flat ring with two boundary loops."""
    r = np.linspace(inner, 1.0, rings + 1)
    t = 2 * np.pi * np.arange(sectors) / sectors
    rr, tt = np.meshgrid(r, t, indexing="ij")
    v = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel(),
                         np.zeros(rr.size)])
    faces = []
    for i in range(rings):
        for s in range(sectors):
            a, b = i * sectors + s, i * sectors + (s + 1) % sectors
            c, d = b + sectors, a + sectors
            faces.extend([[a, b, c], [a, c, d]])
    return TriMesh(v, faces)


def cylinder(segments: int = 8, rows: int = 2, height: float = 1.0) -> TriMesh:
    """Open tube with a UV seam along one vertical edge.

    Surface vertices are shared around the tube; the UV map unrolls it to
    ``[0, 1] x [0, height]``, so the faces next to the seam disagree on ``u``.
    """
    t = 2 * np.pi * np.arange(segments) / segments
    z = np.linspace(0, height, rows + 1)
    tt, zz = np.meshgrid(t, z, indexing="xy")
    v = np.column_stack([np.cos(tt).ravel(), np.sin(tt).ravel(), zz.ravel()])
    faces, uv = [], []
    for j in range(rows):
        for s in range(segments):
            a, b = j * segments + s, j * segments + (s + 1) % segments
            c, d = b + segments, a + segments
            u0, u1 = s / segments, (s + 1) / segments
            z0, z1 = z[j], z[j + 1]
            faces.extend([[a, b, c], [a, c, d]])
            uv.extend([[[u0, z0], [u1, z0], [u1, z1]], [[u0, z0], [u1, z1], [u0, z1]]])
    return TriMesh(v, faces, uv)


def torus(n: int = 4, m: int = 4, major: float = 2.0, minor: float = 0.7) -> TriMesh:
    """Closed ``n x m`` torus grid (genus one)."""
    u = 2 * np.pi * np.arange(n) / n
    w = 2 * np.pi * np.arange(m) / m
    uu, ww = np.meshgrid(u, w, indexing="ij")
    ring = major + minor * np.cos(ww)
    v = np.column_stack([(ring * np.cos(uu)).ravel(), (ring * np.sin(uu)).ravel(),
                         (minor * np.sin(ww)).ravel()])
    faces = []
    for i in range(n):
        for j in range(m):
            a, b = i * m + j, ((i + 1) % n) * m + j
            c, d = ((i + 1) % n) * m + (j + 1) % m, i * m + (j + 1) % m
            faces.extend([[a, b, c], [a, c, d]])
    return TriMesh(v, faces)


def triple_fan() -> TriMesh:
    """Three triangles sharing one edge: a nonmanifold edge."""
    v = [[0, 0, 0], [1, 0, 0], [0.5, 1, 0], [0.5, -1, 0], [0.5, 0, 1]]
    return TriMesh(v, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])


def bowtie() -> TriMesh:
    """Two triangles touching at a single vertex: edge-manifold, not vertex-manifold."""
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]
    return TriMesh(v, [[0, 1, 2], [0, 3, 4]])


def cube_islands() -> TriMesh:
    """Unit cube whose six sides are separate UV islands laid out in a row."""
    v = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    quads = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]]
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    faces, uv = [], []
    for k, (a, b, c, d) in enumerate(quads):
        sq = square * 0.9 + [k * 1.0, 0.0]
        faces.extend([[a, b, c], [a, c, d]])
        uv.extend([sq[[0, 1, 2]], sq[[0, 2, 3]]])
    return TriMesh(v, faces, uv)


def random_uv_mesh(n_faces: int, seed: int, flip_fraction: float | None = None) -> TriMesh:
    """Disjoint random triangles with random UVs.

    With ``flip_fraction`` that share of faces gets mirrored UVs, the rest keep
    their orientation; otherwise orientations are random.
    """
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(3 * n_faces, 3))
    faces = np.arange(3 * n_faces).reshape(-1, 3)
    uv = rng.normal(size=(n_faces, 3, 2))
    if flip_fraction is not None:
        area = ((uv[:, 1, 0] - uv[:, 0, 0]) * (uv[:, 2, 1] - uv[:, 0, 1])
                - (uv[:, 2, 0] - uv[:, 0, 0]) * (uv[:, 1, 1] - uv[:, 0, 1]))
        want = np.ones(n_faces)
        want[:int(round(flip_fraction * n_faces))] = -1
        uv[np.sign(area) != want, :, 0] *= -1
    return TriMesh(v, faces, uv)


def mirror_uv(mesh: TriMesh) -> TriMesh:
    """Reflect the UV map across the v axis."""
    uv = mesh.uv.copy()
    uv[..., 0] *= -1
    return mesh.with_uv(uv)
