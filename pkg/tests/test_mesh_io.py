"""Tests for OBJ/PLY reading and writing and the label sidecar."""

import json

import numpy as np
import pytest

from seamgraph.errors import MeshError
from seamgraph.mesh.io import (
    parse_obj,
    parse_ply,
    read_label_sidecar,
    write_label_sidecar,
    write_obj,
    write_ply,
)
from seamgraph.unwrap.parameterize import unwrap
from tests.fixtures import grid, icosphere, latlong_sphere

SQUARE_OBJ = b"""# two triangles
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
vn 0 0 1
f 1/1/1 2/2/1 3/3/1
f 1/1/1 3/3/1 4/4/1
"""


class TestParseObj:
    def test_texture_and_normal_forms(self):
        mesh = parse_obj(SQUARE_OBJ, name="square")
        assert mesh.name == "square"
        assert mesh.n_faces == 2
        assert mesh.corner_uvs.shape == (2, 3, 2)
        np.testing.assert_array_equal(mesh.corner_uvs[1], [[0, 0], [1, 1], [0, 1]])

    def test_plain_and_negative_indices(self):
        data = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n"
        mesh = parse_obj(data)
        np.testing.assert_array_equal(mesh.faces, [[0, 1, 2]])
        assert mesh.corner_uvs is None

    def test_quad_rejected_with_line(self):
        data = b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"
        with pytest.raises(MeshError, match="line 5") as info:
            parse_obj(data)
        assert info.value.line == 5

    def test_zero_index_rejected(self):
        with pytest.raises(MeshError, match="1-based"):
            parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")

    def test_index_out_of_range(self):
        with pytest.raises(MeshError, match="out of range"):
            parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n")

    def test_mixed_uv_faces_rejected(self):
        data = SQUARE_OBJ.replace(b"f 1/1/1 3/3/1 4/4/1", b"f 1 3 4")
        with pytest.raises(MeshError, match="some faces"):
            parse_obj(data)

    def test_no_faces(self):
        with pytest.raises(MeshError, match="zero faces"):
            parse_obj(b"v 0 0 0\n")

    def test_non_numeric_vertex(self):
        with pytest.raises(MeshError, match="line 1"):
            parse_obj(b"v 0 zero 0\n")


class TestWriteObj:
    def test_round_trip_identity(self):
        mesh = icosphere(2)
        back = parse_obj(write_obj(mesh), name=mesh.name)
        np.testing.assert_array_equal(back.vertices, mesh.vertices)
        np.testing.assert_array_equal(back.faces, mesh.faces)

    def test_label_polylines_are_skipped_on_read(self):
        mesh, labels = latlong_sphere(8, 4)
        text = write_obj(mesh, labels).decode()
        assert text.count("\nl ") == int(labels.sum())
        back = parse_obj(text.encode())
        np.testing.assert_array_equal(back.faces, mesh.faces)

    def test_atlas_uvs_written_per_side(self):
        mesh, labels = latlong_sphere(8, 4)
        atlas = unwrap(mesh, labels)
        back = parse_obj(write_obj(mesh, labels, atlas))
        np.testing.assert_allclose(back.corner_uvs, atlas.corner_uvs)


class TestPly:
    @pytest.mark.parametrize("binary", [False, True])
    def test_round_trip(self, binary):
        mesh = icosphere(1)
        back = parse_ply(write_ply(mesh, binary=binary))
        np.testing.assert_array_equal(back.vertices, mesh.vertices)
        np.testing.assert_array_equal(back.faces, mesh.faces)

    @pytest.mark.parametrize("binary", [False, True])
    def test_colors_do_not_disturb_geometry(self, binary):
        mesh = grid(2)
        colors = np.tile([[255, 0, 0]], (mesh.n_vertices, 1))
        back = parse_ply(write_ply(mesh, vertex_colors=colors, binary=binary))
        np.testing.assert_array_equal(back.faces, mesh.faces)

    def test_vertex_uvs_marked_uniform(self):
        data = b"""ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
property float s
property float t
element face 1
property list uchar int vertex_indices
end_header
0 0 0 0 0
1 0 0 1 0
0 1 0 0 1
3 0 1 2
"""
        mesh = parse_ply(data)
        assert mesh.uvs_vertex_uniform
        np.testing.assert_array_equal(mesh.corner_uvs[0], [[0, 0], [1, 0], [0, 1]])

    def test_not_ply(self):
        with pytest.raises(MeshError, match="not a PLY"):
            parse_ply(b"solid stl\n")

    def test_truncated_body(self):
        data = write_ply(grid(1))
        with pytest.raises(MeshError):
            parse_ply(data[: len(data) - 8])


class TestLabelSidecar:
    def test_round_trip(self):
        mesh, labels = latlong_sphere(8, 4)
        back = read_label_sidecar(mesh, write_label_sidecar(mesh, labels))
        np.testing.assert_array_equal(back, labels)

    def test_edge_mismatch(self):
        mesh, labels = latlong_sphere(8, 4)
        payload = json.loads(write_label_sidecar(mesh, labels))
        payload["edges"] = payload["edges"][:-1]
        with pytest.raises(MeshError, match="do not match"):
            read_label_sidecar(mesh, json.dumps(payload).encode())
