"""Vertex features and dual-graph construction."""

from .dual import DualGraph, build_dual, normalize_adjacency
from .features import (
    FEATURE_WIDTH,
    curvature_feature,
    gaussian_curvature,
    node_features,
    vertex_normals,
)

__all__ = [
    "FEATURE_WIDTH",
    "DualGraph",
    "build_dual",
    "curvature_feature",
    "gaussian_curvature",
    "node_features",
    "normalize_adjacency",
    "vertex_normals",
]
