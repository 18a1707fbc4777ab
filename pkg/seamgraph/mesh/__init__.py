"""Mesh representation, file formats and seam topology."""

from .core import Mesh, SeamLabels, ShellPartition, validate_labels
from .io import (
    parse_obj,
    parse_ply,
    read_label_sidecar,
    write_label_sidecar,
    write_obj,
    write_ply,
)
from .topology import cut_mesh, cut_mesh_with_map, seams_from_uvs, shells_from_labels

__all__ = [
    "Mesh",
    "SeamLabels",
    "ShellPartition",
    "cut_mesh",
    "cut_mesh_with_map",
    "parse_obj",
    "parse_ply",
    "read_label_sidecar",
    "seams_from_uvs",
    "shells_from_labels",
    "validate_labels",
    "write_label_sidecar",
    "write_obj",
    "write_ply",
]
