"""Wavefront OBJ reading/writing, the corpus manifest, and CSV reports."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MalformedRecord, ManifestError, MeshError, MixedUVPresence, RemeshedMesh
from .mesh import TriMesh

logger = logging.getLogger(__name__)

KNOWN_DIRECTIVES = {"v", "vt", "vn", "vp", "f", "o", "g", "s", "l", "p",
                    "usemtl", "mtllib"}


@dataclass
class ObjDocument:
    """Raw OBJ content with indices resolved to 0-based.

    ``faces`` holds one ``(vertex_ids, texcoord_ids)`` pair per polygon;
    ``texcoord_ids`` is None for corners written without ``/vt``.
    """

    vertices: np.ndarray
    texcoords: np.ndarray
    faces: list[tuple[tuple[int, ...], tuple[int, ...] | None]]
    face_lines: list[int] = field(default_factory=list)
    source: str | None = None
    unknown_directives: int = 0

    @property
    def n_polygons(self) -> int:
        """Faces with more than three corners, which get fan-triangulated."""
        return sum(1 for v, _ in self.faces if len(v) > 3)


def _resolve(token: str, count: int, line: int) -> int:
    try:
        idx = int(token)
    except ValueError:
        raise MalformedRecord(line, f"bad index {token!r}") from None
    if idx > 0:
        idx -= 1
    elif idx < 0:
        idx += count
    else:
        raise MalformedRecord(line, "index 0 is not valid in OBJ")
    if not 0 <= idx < count:
        raise MalformedRecord(line, f"index {token} out of range")
    return idx


def parse_obj(text: str, source: str | None = None) -> ObjDocument:
    vertices: list[list[float]] = []
    texcoords: list[list[float]] = []
    faces: list[tuple[tuple[int, ...], tuple[int, ...] | None]] = []
    face_lines: list[int] = []
    unknown = 0
    pending = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = pending + raw.split("#", 1)[0]
        if line.endswith("\\"):
            pending = line[:-1] + " "
            continue
        pending = ""
        parts = line.split()
        if not parts:
            continue
        key, args = parts[0], parts[1:]
        if key == "v":
            if len(args) < 3:
                raise MalformedRecord(lineno, "vertex needs 3 coordinates")
            try:
                vertices.append([float(x) for x in args[:3]])
            except ValueError:
                raise MalformedRecord(lineno, "bad vertex coordinate") from None
        elif key == "vt":
            if not args:
                raise MalformedRecord(lineno, "texture coordinate needs a value")
            try:
                uv = [float(x) for x in args[:2]]
            except ValueError:
                raise MalformedRecord(lineno, "bad texture coordinate") from None
            texcoords.append(uv + [0.0] * (2 - len(uv)))
        elif key == "f":
            if len(args) < 3:
                raise MalformedRecord(lineno, "face needs at least 3 corners")
            vids, tids = [], []
            for corner in args:
                fields_ = corner.split("/")
                vids.append(_resolve(fields_[0], len(vertices), lineno))
                if len(fields_) > 1 and fields_[1]:
                    tids.append(_resolve(fields_[1], len(texcoords), lineno))
            if tids and len(tids) != len(vids):
                raise MalformedRecord(lineno, "face mixes corners with and without texcoords")
            faces.append((tuple(vids), tuple(tids) if tids else None))
            face_lines.append(lineno)
        elif key not in KNOWN_DIRECTIVES:
            unknown += 1
    if unknown:
        logger.warning("%s: ignored %d unknown OBJ directives", source or "<obj>", unknown)
    return ObjDocument(
        vertices=np.array(vertices, dtype=np.float64).reshape(-1, 3),
        texcoords=np.array(texcoords, dtype=np.float64).reshape(-1, 2),
        faces=faces,
        face_lines=face_lines,
        source=source,
        unknown_directives=unknown,
    )


def to_trimesh(doc: ObjDocument, drop_degenerate: bool = False) -> TriMesh:
    """Fan-triangulate polygons from their first corner and collect wedge UVs.

    Triangles that repeat a vertex raise :class:`MeshError` unless
    ``drop_degenerate`` is set, in which case they are skipped.
    """
    textured = [t is not None for _, t in doc.faces]
    if any(textured) and not all(textured):
        raise MixedUVPresence("some faces have texture coordinates and others do not")
    has_uv = bool(textured) and all(textured)
    tris: list[tuple[int, int, int]] = []
    uv_ids: list[tuple[int, int, int]] = []
    for vids, tids in doc.faces:
        for i in range(1, len(vids) - 1):
            tri = (vids[0], vids[i], vids[i + 1])
            if len(set(tri)) < 3:
                if drop_degenerate:
                    continue
                raise MeshError(f"face {tri} repeats a vertex")
            tris.append(tri)
            if has_uv:
                uv_ids.append((tids[0], tids[i], tids[i + 1]))
    faces = np.array(tris, dtype=np.int64).reshape(-1, 3)
    uv = doc.texcoords[np.array(uv_ids, dtype=np.int64).reshape(-1, 3)] if has_uv else None
    return TriMesh(doc.vertices, faces, uv)


def read_obj(path, drop_degenerate: bool = False) -> TriMesh:
    text = Path(path).read_text()
    return to_trimesh(parse_obj(text, str(path)), drop_degenerate)


def format_float(x: float) -> str:
    """Shortest round-trip decimal; lowercase ``inf``/``nan``."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def write_obj(mesh: TriMesh) -> str:
    """OBJ text with one ``vt`` record per distinct corner UV."""
    out = io.StringIO()
    for p in mesh.vertices:
        out.write("v " + " ".join(format_float(c) for c in p) + "\n")
    if mesh.uv is None:
        for f in mesh.faces + 1:
            out.write(f"f {f[0]} {f[1]} {f[2]}\n")
        return out.getvalue()
    flat = mesh.uv.reshape(-1, 2)
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    # number texcoords by first use so files read in corner order
    first_use = np.full(len(unique), len(flat))
    np.minimum.at(first_use, inverse.reshape(-1), np.arange(len(flat)))
    order = np.argsort(first_use, kind="stable")
    rank = np.empty(len(unique), dtype=np.int64)
    rank[order] = np.arange(len(unique))
    for t in unique[order]:
        out.write(f"vt {format_float(t[0])} {format_float(t[1])}\n")
    tids = rank[inverse.reshape(-1)].reshape(-1, 3) + 1
    for f, t in zip(mesh.faces + 1, tids):
        out.write(f"f {f[0]}/{t[0]} {f[1]}/{t[1]} {f[2]}/{t[2]}\n")
    return out.getvalue()


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


# --- manifest ---------------------------------------------------------------

MANIFEST_COLUMNS = ["id", "reference_path", "candidate_path", "variant",
                    "source_asset", "license"]


@dataclass(frozen=True)
class ManifestEntry:
    mesh_id: str
    reference_path: Path
    candidate_path: Path | None
    variant: str = "cut"
    source_asset: str = ""
    license: str = ""
    missing: bool = False


def read_manifest(path) -> list[ManifestEntry]:
    """Load a manifest; relative paths resolve against the manifest's directory."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return []
    missing_cols = set(MANIFEST_COLUMNS[:2]) - set(reader.fieldnames)
    if missing_cols:
        raise ManifestError(f"manifest lacks columns {sorted(missing_cols)}")
    base = path.parent
    entries = []
    seen = set()
    for row in reader:
        mesh_id = (row.get("id") or "").strip()
        if not mesh_id:
            raise ManifestError("manifest row without id")
        if mesh_id in seen:
            raise ManifestError(f"duplicate mesh id {mesh_id!r}")
        seen.add(mesh_id)
        ref = base / row["reference_path"].strip()
        cand_text = (row.get("candidate_path") or "").strip()
        cand = base / cand_text if cand_text else None
        variant = (row.get("variant") or "cut").strip() or "cut"
        if variant not in ("cut", "uncut"):
            raise ManifestError(f"{mesh_id}: unknown variant {variant!r}")
        missing = not ref.is_file() or (cand is not None and not cand.is_file())
        entries.append(ManifestEntry(mesh_id, ref, cand, variant,
                                     (row.get("source_asset") or "").strip(),
                                     (row.get("license") or "").strip(), missing))
    return entries


def write_manifest(entries: Iterable[ManifestEntry], base_dir=None) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MANIFEST_COLUMNS)

    def rel(p):
        if p is None:
            return ""
        if base_dir is not None:
            return os.path.relpath(p, base_dir)
        return str(p)

    for e in entries:
        writer.writerow([e.mesh_id, rel(e.reference_path), rel(e.candidate_path),
                         e.variant, e.source_asset, e.license])
    return out.getvalue()


# --- reports ----------------------------------------------------------------

REPORT_COLUMNS = [
    "filename", "n_vertices", "n_faces", "tag_disk", "tag_closed", "tag_manifold",
    "tag_small", "genus", "n_boundary_loops", "pct_boundary_faces",
    "max_area_distortion", "avg_area_discrepancy", "min_singular_value",
    "max_singular_value", "pct_flipped", "max_angle_distortion",
    "avg_angle_discrepancy", "symmetric_dirichlet", "resolution",
    "artist_correlation", "remeshed", "cut_length", "artist_cut_length_match",
]

TRIANGLE_COLUMNS = ["face_index", "cand_sigma1", "cand_sigma2", "ref_sigma1", "ref_sigma2"]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(float(value))


def write_report_csv(rows: Sequence) -> str:
    """Render report rows (anything with ``as_cells()``) under the fixed header."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        cells = row.as_cells()
        writer.writerow([format_cell(cells.get(c)) for c in REPORT_COLUMNS])
    return out.getvalue()


def read_report_csv(text: str) -> list[dict[str, float | str | None]]:
    """Parse a report back into dicts; empty cells become None."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed: dict[str, float | str | None] = {}
        for key, value in row.items():
            if key == "filename":
                parsed[key] = value
            else:
                parsed[key] = float(value) if value != "" else None
        rows.append(parsed)
    return rows


def write_triangle_csv(mesh_id: str, cand_sigmas, ref_sigmas, remeshed: bool = False) -> str:
    """Per-face singular value pairs of candidate and reference map."""
    cand = np.asarray(cand_sigmas, dtype=np.float64).reshape(-1, 2)
    ref = np.asarray(ref_sigmas, dtype=np.float64).reshape(-1, 2)
    if remeshed or len(cand) != len(ref):
        raise RemeshedMesh(f"{mesh_id}: triangles of candidate and reference do not correspond")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRIANGLE_COLUMNS)
    for i, (c, r) in enumerate(zip(cand, ref)):
        writer.writerow([i] + [format_float(x) for x in (*c, *r)])
    return out.getvalue()
