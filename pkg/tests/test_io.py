import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uvbench import shapes
from uvbench.errors import MalformedRecord, ManifestError, MeshError, MixedUVPresence, RemeshedMesh
from uvbench.io import (REPORT_COLUMNS, ManifestEntry, format_cell, parse_obj, read_manifest,
                        read_report_csv, to_trimesh, write_manifest, write_obj,
                        write_report_csv, write_triangle_csv)

TRI = "v 0 0 0\nv 1 0 0\nv 0 1 0\n"


def load(text, **kw):
    return to_trimesh(parse_obj(text), **kw)


def test_minimal_file():
    mesh = load(TRI + "f 1 2 3\n")
    assert mesh.n_faces == 1
    assert mesh.uv is None


def test_textured_file():
    mesh = load(TRI + "vt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n")
    np.testing.assert_array_equal(mesh.uv[0], [[0, 0], [1, 0], [0, 1]])


def test_negative_indices():
    mesh = load(TRI + "f -3 -2 -1\n")
    assert mesh.faces.tolist() == [[0, 1, 2]]


def test_normals_and_comments_ignored():
    text = TRI + "vn 0 0 1\n# comment\nvt 0 0\nvt 1 0\nvt 0 1 0\ns off\nf 1/1/1 2/2/1 3/3/1 # tail\n"
    mesh = load(text)
    assert mesh.n_faces == 1 and mesh.uv is not None


def test_line_continuation():
    mesh = load(TRI + "f 1 2 \\\n 3\n")
    assert mesh.faces.tolist() == [[0, 1, 2]]


def test_quad_fan():
    text = TRI + "v 1 1 0\nf 1 2 4 3\n"
    doc = parse_obj(text)
    assert doc.n_polygons == 1
    assert load(text).faces.tolist() == [[0, 1, 3], [0, 3, 2]]


def test_textured_polygon_gives_three_uvs_per_face():
    text = TRI + "v 1 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nf 1/1 2/2 4/3 3/4\n"
    mesh = load(text)
    assert mesh.uv.shape == (2, 3, 2)
    np.testing.assert_array_equal(mesh.uv[1], [[0, 0], [1, 1], [0, 1]])


def test_mixed_uv_presence():
    text = TRI + "v 1 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\nf 2 4 3\n"
    with pytest.raises(MixedUVPresence):
        load(text)


@pytest.mark.parametrize("bad", [
    "v 0 0\n",
    "v 0 0 x\n",
    TRI + "f 1 2\n",
    TRI + "f 1 2 7\n",
    TRI + "f 0 1 2\n",
    TRI + "f 1 2 a\n",
    TRI + "vt 0 0\nf 1/1 2/2 3/5\n",
    TRI + "vt 0 0\nf 1/1 2 3/1\n",
])
def test_malformed_records(bad):
    with pytest.raises(MalformedRecord) as info:
        parse_obj(bad)
    assert info.value.line >= 1


def test_repeated_vertex_face():
    with pytest.raises(MeshError):
        load(TRI + "f 1 1 2\n")
    assert load(TRI + "f 1 1 2\nf 1 2 3\n", drop_degenerate=True).n_faces == 1


def test_unknown_directive_counted(caplog):
    doc = parse_obj(TRI + "frobnicate 1\nf 1 2 3\n")
    assert doc.unknown_directives == 1
    assert "unknown" in caplog.text


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.floats(0, 1), st.integers(0, 1000))
def test_obj_round_trip(nx, ny, height, seed):
    mesh = shapes.grid_disk(nx, ny, height=height, jitter=0.4, seed=seed)
    back = load(write_obj(mesh))
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.faces, mesh.faces)
    np.testing.assert_array_equal(back.uv, mesh.uv)


def test_write_obj_deduplicates_texcoords():
    text = write_obj(shapes.grid_disk(2, 2))
    assert text.count("\nvt ") == 9
    assert write_obj(shapes.tetrahedron()).count("vt") == 0


def test_manifest_round_trip(tmp_path):
    (tmp_path / "a.obj").write_text(TRI + "f 1 2 3\n")
    entries = [ManifestEntry("a", tmp_path / "a.obj", None, "uncut", "src", "CC0")]
    (tmp_path / "m.csv").write_text(write_manifest(entries, tmp_path))
    back = read_manifest(tmp_path / "m.csv")
    assert back[0].mesh_id == "a"
    assert back[0].reference_path == tmp_path / "a.obj"
    assert back[0].candidate_path is None
    assert back[0].variant == "uncut" and not back[0].missing


def test_manifest_errors(tmp_path):
    with pytest.raises(ManifestError):
        read_manifest(tmp_path / "nope.csv")
    (tmp_path / "dup.csv").write_text("id,reference_path\na,x.obj\na,y.obj\n")
    with pytest.raises(ManifestError):
        read_manifest(tmp_path / "dup.csv")
    (tmp_path / "cols.csv").write_text("id\na\n")
    with pytest.raises(ManifestError):
        read_manifest(tmp_path / "cols.csv")
    (tmp_path / "empty.csv").write_text("")
    assert read_manifest(tmp_path / "empty.csv") == []


class _Row:
    def __init__(self, cells):
        self.cells = cells

    def as_cells(self):
        return self.cells


def test_report_header_only():
    assert write_report_csv([]) == ",".join(REPORT_COLUMNS) + "\n"


def test_report_failed_row_has_three_cells():
    text = write_report_csv([_Row({"filename": "m", "n_vertices": 4, "n_faces": 2})])
    row = list(csv.reader(io.StringIO(text)))[1]
    assert len(row) == len(REPORT_COLUMNS)
    assert [c for c in row if c] == ["m", "4", "2"]


def test_report_infinity_and_bools():
    text = write_report_csv([_Row({"filename": "m", "max_area_distortion": math.inf,
                                   "remeshed": False, "tag_disk": True})])
    row = dict(zip(REPORT_COLUMNS, list(csv.reader(io.StringIO(text)))[1]))
    assert row["max_area_distortion"] == "inf"
    assert row["remeshed"] == "0" and row["tag_disk"] == "1"
    back = read_report_csv(text)[0]
    assert back["max_area_distortion"] == math.inf and back["artist_correlation"] is None


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(0.1) == "0.1"
    assert format_cell(np.int64(3)) == "3"
    assert format_cell(np.float64(-math.inf)) == "-inf"


def test_triangle_csv():
    sig = np.array([[2.0, 1.0], [1.0, 0.5]])
    text = write_triangle_csv("m", sig, sig)
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == 3
    assert rows[1][1:3] == rows[1][3:5]
    with pytest.raises(RemeshedMesh):
        write_triangle_csv("m", sig, sig, remeshed=True)
    with pytest.raises(RemeshedMesh):
        write_triangle_csv("m", sig, sig[:1])
