"""Tests for per-vertex features."""

import math

import numpy as np
import pytest

from seamgraph.errors import MeshError, NumericalError
from seamgraph.graph.features import (
    FEATURE_WIDTH,
    corner_angles,
    curvature_feature,
    gaussian_curvature,
    node_features,
    vertex_normals,
)
from seamgraph.mesh.core import Mesh
from tests.fixtures import grid, hemisphere, icosphere, triangle


class TestGaussianCurvature:
    @pytest.mark.parametrize("level", [0, 1, 2, 3])
    def test_gauss_bonnet_closed(self, level):
        total = gaussian_curvature(icosphere(level)).sum()
        assert total == pytest.approx(4.0 * math.pi, rel=1e-9)

    def test_flat_grid_interior_is_zero(self):
        mesh = grid(4)
        k = gaussian_curvature(mesh)
        np.testing.assert_allclose(k[~mesh.boundary_vertex_mask], 0.0, atol=1e-12)

    def test_disk_total_is_two_pi(self):
        for mesh in (grid(3), hemisphere()):
            assert gaussian_curvature(mesh).sum() == pytest.approx(2.0 * math.pi, rel=1e-9)

    def test_degenerate_face(self):
        mesh = Mesh(
            vertices=np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]]),
            faces=np.array([[0, 1, 2]]),
        )
        with pytest.raises(NumericalError) as info:
            gaussian_curvature(mesh)
        assert info.value.face == 0

    def test_corner_angles_sum_to_pi(self):
        np.testing.assert_allclose(corner_angles(icosphere(1)).sum(axis=1), math.pi)


class TestNormals:
    def test_icosphere_normals_point_outward(self):
        mesh = icosphere(2)
        n = vertex_normals(mesh)
        np.testing.assert_allclose(np.linalg.norm(n, axis=1), 1.0)
        assert (np.einsum("ij,ij->i", n, mesh.vertices) > 0.999).all()

    def test_isolated_vertex(self):
        base = triangle()
        mesh = Mesh(vertices=np.vstack([base.vertices, [[5.0, 5.0, 5.0]]]), faces=base.faces)
        with pytest.raises(MeshError, match="no incident faces"):
            vertex_normals(mesh)


class TestNodeFeatures:
    def test_layout(self):
        mesh = icosphere(1)
        x = node_features(mesh)
        assert x.shape == (mesh.n_vertices, FEATURE_WIDTH)
        assert np.abs(x[:, :3]).max() <= 1.0
        np.testing.assert_allclose(x[:, 6], curvature_feature(mesh))

    def test_scale_invariant(self):
        mesh = icosphere(1)
        big = mesh.with_vertices(mesh.vertices * 7.0 + 3.0)
        np.testing.assert_allclose(node_features(big), node_features(mesh), atol=1e-9)


class TestCurvatureFeature:
    def test_unit_rms(self):
        k = curvature_feature(icosphere(2))
        assert float(np.sqrt(np.mean(k**2))) == pytest.approx(1.0)

    def test_proportional_to_deficit(self):
        mesh = hemisphere()
        k = gaussian_curvature(mesh)
        scaled = curvature_feature(mesh)
        ratio = scaled[np.abs(k) > 1e-9] / k[np.abs(k) > 1e-9]
        np.testing.assert_allclose(ratio, ratio[0])
        assert ratio[0] > 0
