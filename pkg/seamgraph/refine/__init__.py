"""Seam post-processing: skeletonization and distortion Steiner trees."""

from .skeleton import purge_tiny_shells, skeletonize, thin, vertex_probs
from .steiner import (
    SteinerResult,
    approx_steiner,
    collect_terminals,
    edge_weights,
    refine_dst,
    refine_labels,
)

__all__ = [
    "SteinerResult",
    "approx_steiner",
    "collect_terminals",
    "edge_weights",
    "purge_tiny_shells",
    "refine_dst",
    "refine_labels",
    "skeletonize",
    "thin",
    "vertex_probs",
]
