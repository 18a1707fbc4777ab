"""Seamgraph: UV seam detection on triangle meshes with graph neural networks."""

from .engine import run_pipeline, run_split_study
from .errors import DecimationError, MeshError, NumericalError, SeamGraphError, StageError
from .mesh import Mesh, parse_obj, parse_ply, shells_from_labels
from .models import (
    DstConfig,
    EvalReport,
    MeshReport,
    ModelSpec,
    PipelineConfig,
    SkeletonConfig,
    TrainConfig,
)

__all__ = [
    "run_pipeline",
    "run_split_study",
    "DecimationError",
    "DstConfig",
    "EvalReport",
    "Mesh",
    "MeshError",
    "MeshReport",
    "ModelSpec",
    "NumericalError",
    "PipelineConfig",
    "SeamGraphError",
    "SkeletonConfig",
    "StageError",
    "TrainConfig",
    "parse_obj",
    "parse_ply",
    "shells_from_labels",
]
