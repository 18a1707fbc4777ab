"""Run configuration and report models.

Numeric containers (meshes, dual graphs, atlases) live next to the code that builds
them as plain dataclasses holding numpy arrays. Everything here is a pydantic model:
hyperparameters that must validate and serialize, and reports that end up as JSON.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

Arch = Literal["gcn", "gat", "sage", "gin"]
Aggregator = Literal["mean", "pool", "lstm", "gcn"]
Stage = Literal["skeletonize", "dst"]
SyntheticKind = Literal["cylinder", "capsule", "sphere_band", "lumpy_sphere"]


class ModelSpec(BaseModel):
    """Architecture of a seam classifier."""

    arch: Arch = "gat"
    in_features: int = Field(default=14, ge=1)
    hidden: int = Field(default=64, ge=1)
    layers: int = Field(default=3, ge=1)
    heads: int = Field(default=3, ge=1)  # GAT hidden blocks, concatenated
    out_heads: int = Field(default=5, ge=1)  # GAT last block, averaged
    attention_dropout: float = Field(default=0.2, ge=0.0, lt=1.0)
    aggregator: Aggregator = "mean"
    residual: bool = True


class TrainConfig(BaseModel):
    """Optimizer, loss weighting and early stopping."""

    learning_rate: float = Field(default=5e-4, gt=0)
    seam_weight: float = Field(default=100.0, gt=0)
    nonseam_weight: float = Field(default=1.0, gt=0)
    patience: int = Field(default=50, ge=1)
    max_epochs: int = Field(default=500, ge=1)
    rng_seed: int = Field(default=0, ge=0)
    binarize_threshold: float = Field(default=0.5, gt=0, lt=1)
    beta1: float = Field(default=0.9, gt=0, lt=1)
    beta2: float = Field(default=0.999, gt=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_loss: float


class TrainHistory(BaseModel):
    """Loss trajectory of one training run."""

    epochs: list[EpochRecord] = Field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = float("inf")
    stopped_early: bool = False


class SkeletonConfig(BaseModel):
    """Thinning and tiny-shell elimination thresholds."""

    candidate_fraction: float = Field(default=0.2, ge=0.05, le=0.5)
    max_orphan_distance: int = Field(default=3, ge=1)
    min_shell_faces: int = Field(default=2, ge=1)


class DstConfig(BaseModel):
    """Distortion Steiner tree refinement settings."""

    cut_threshold: float = Field(default=0.9, gt=0, lt=1)
    min_weight: float = Field(default=1e-6, gt=0, le=1)
    close_gaps: bool = True
    max_gap_edges: int = Field(default=4, ge=1)
    min_loop_edges: int = Field(default=4, ge=2)


class SyntheticParams(BaseModel):
    """Resolution and proportions of a generated shape."""

    segments: int = Field(default=16, ge=3)
    rings: int = Field(default=8, ge=2)
    radius: float = Field(default=1.0, gt=0)
    height: float = Field(default=2.0, gt=0)
    noise: float = Field(default=0.0, ge=0)


class EdgeMetrics(BaseModel):
    """Confusion counts and rates (percent) for one label comparison."""

    tp: int
    fp: int
    tn: int
    fn: int
    fpr: float | None
    tpr: float | None
    accuracy: float

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class MeshReport(BaseModel):
    """Evaluation of one mesh. Failures are recorded, never raised."""

    name: str
    edge_count: int = 0
    face_count: int = 0
    metrics: EdgeMetrics | None = None
    shell_count: int | None = None
    avg_distortion: float | None = None
    seam_length: float | None = None
    warnings: list[str] = Field(default_factory=list)
    errors: list[str] = Field(default_factory=list)


class EvalReport(BaseModel):
    """Aggregate evaluation over a test set."""

    schema_version: int = 1
    mesh_count: int = 0
    fpr: float | None = None
    tpr: float | None = None
    accuracy: float | None = None
    shell_count: float | None = None
    avg_distortion: float | None = None
    seam_length: float | None = None
    meshes: list[MeshReport] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
    errors: list[str] = Field(default_factory=list)


class SplitStudy(BaseModel):
    """One report per random split plus their mean row."""

    schema_version: int = 1
    seeds: list[int] = Field(default_factory=list)
    rows: list[EvalReport] = Field(default_factory=list)
    mean: EvalReport = Field(default_factory=EvalReport)


class PipelineConfig(BaseModel):
    """End-to-end run: train or load, predict, post-process, unwrap, evaluate."""

    train_dir: str | None = None
    val_dir: str | None = None
    test_dir: str | None = None
    checkpoint: str | None = None
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    augmented_dual: bool = False
    threshold: float = Field(default=0.5, gt=0, lt=1)
    stages: list[Stage] = Field(default_factory=lambda: ["skeletonize", "dst"])
    skeleton: SkeletonConfig = Field(default_factory=SkeletonConfig)
    dst: DstConfig = Field(default_factory=DstConfig)
    out_dir: str = "runs"
    seed: int = Field(default=0, ge=0)
    write_artifacts: bool = True

    @model_validator(mode="after")
    def _check_sources(self) -> PipelineConfig:
        if self.train_dir is None and self.checkpoint is None:
            raise ValueError("either train_dir or checkpoint must be given")
        if len(set(self.stages)) != len(self.stages):
            raise ValueError("stages must not repeat")
        return self
