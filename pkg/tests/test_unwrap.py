"""Tests for Tutte parameterization and area distortion."""

import json

import numpy as np
import pytest

from seamgraph.errors import MeshError
from seamgraph.mesh.io import parse_ply
from seamgraph.unwrap.distortion import (
    avg_distortion,
    distortion_colors,
    distortion_json,
    face_distortion,
    face_distortion_from_uvs,
    signed_uv_areas,
    uv_areas,
    write_distortion_ply,
)
from seamgraph.unwrap.parameterize import boundary_loops, fallback_cut, tutte_embed, unwrap
from tests.fixtures import cylinder, grid, hemisphere, icosphere


def _no_labels(mesh):
    return np.zeros(mesh.n_edges, dtype=np.int8)


class TestBoundaryLoops:
    def test_grid_has_one_loop(self):
        loops = boundary_loops(grid(2))
        assert len(loops) == 1
        assert loops[0][0] == 0
        assert sorted(loops[0].tolist()) == [0, 1, 2, 3, 5, 6, 7, 8]

    def test_closed_mesh(self):
        assert boundary_loops(icosphere(0)) == []


class TestTutte:
    @pytest.mark.parametrize("weights", ["uniform", "mean_value"])
    def test_hemisphere_has_no_flips(self, weights):
        mesh = hemisphere()
        uv = tutte_embed(mesh, weights)
        signed = signed_uv_areas(uv[mesh.faces])
        assert (signed > 0).all() or (signed < 0).all()

    def test_boundary_on_unit_circle(self):
        mesh = hemisphere()
        uv = tutte_embed(mesh)
        loop = boundary_loops(mesh)[0]
        np.testing.assert_allclose(np.linalg.norm(uv[loop], axis=1), 1.0)

    def test_interior_is_neighbour_average(self):
        mesh = grid(4)
        uv = tutte_embed(mesh)
        for v in np.flatnonzero(~mesh.boundary_vertex_mask):
            nbrs = mesh.adjacency[v].indices
            np.testing.assert_allclose(uv[v], uv[nbrs].mean(axis=0), atol=1e-10)

    def test_closed_shell_rejected(self):
        with pytest.raises(MeshError, match="closed"):
            tutte_embed(icosphere(0))

    def test_unknown_weights(self):
        with pytest.raises(ValueError, match="unknown Tutte weights"):
            tutte_embed(grid(2), "cotangent")


class TestFallbackCut:
    def test_open_shell_needs_none(self):
        assert len(fallback_cut(grid(2))) == 0

    def test_closed_shell_path(self):
        mesh = icosphere(1)
        edges = fallback_cut(mesh)
        assert len(edges) >= 2
        assert len(np.unique(edges)) == len(edges)


class TestUnwrap:
    def test_uv_area_matches_surface(self):
        mesh = hemisphere()
        atlas = unwrap(mesh, _no_labels(mesh))
        assert uv_areas(atlas.corner_uvs).sum() == pytest.approx(mesh.face_areas().sum())
        assert atlas.warnings == []

    def test_cylinder_ground_truth_charts(self):
        mesh, labels = cylinder()
        atlas = unwrap(mesh, labels)
        assert len(atlas.shells) == 3
        assert atlas.approximate_count == 0
        assert atlas.face_distortion.shape == (mesh.n_faces,)
        assert (atlas.face_distortion > 0).all()

    def test_closed_shell_gets_fallback_warning(self):
        mesh = icosphere(1)
        atlas = unwrap(mesh, _no_labels(mesh))
        assert any("fallback" in w for w in atlas.warnings)
        assert atlas.shells[0].fallback_edges >= 2
        assert np.isfinite(atlas.face_distortion).all()

    def test_distortion_ignores_global_scale(self):
        mesh = hemisphere()
        atlas = unwrap(mesh, _no_labels(mesh))
        np.testing.assert_allclose(face_distortion(mesh, atlas), atlas.face_distortion)


class TestDistortion:
    def test_identity_layout_is_isometric(self):
        mesh = grid(4, size=3.0)
        corner_uvs = mesh.vertices[mesh.faces][:, :, :2]
        d = face_distortion_from_uvs(mesh, corner_uvs)
        np.testing.assert_allclose(d, 1.0, atol=1e-6)
        assert avg_distortion(d) < 1e-6

    def test_shape_checked(self):
        mesh = grid(2)
        with pytest.raises(ValueError):
            face_distortion_from_uvs(mesh, np.zeros((3, 3, 2)))

    def test_average(self):
        assert avg_distortion(np.array([0.5, 1.5])) == pytest.approx(0.5)
        assert avg_distortion(np.array([])) == 0.0

    def test_colors(self):
        colors = distortion_colors(np.array([1.0, 2.0, 0.5, 8.0]))
        assert colors.tolist() == [
            [255, 255, 255],
            [255, 0, 0],
            [0, 0, 255],
            [255, 0, 0],
        ]

    def test_ply_and_json(self):
        mesh = grid(2)
        d = np.linspace(0.5, 2.0, mesh.n_faces)
        ply = parse_ply(write_distortion_ply(mesh, d))
        assert ply.n_faces == mesh.n_faces
        assert ply.n_vertices == 3 * mesh.n_faces
        assert json.loads(distortion_json(d)) == pytest.approx(d.tolist())
