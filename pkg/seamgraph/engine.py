"""Orchestrator: train or load a model, predict, post-process, unwrap and evaluate."""

from __future__ import annotations

import asyncio
import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import get_settings
from .errors import StageError
from .gnn.checkpoint import load_checkpoint, save_checkpoint
from .gnn.model import GnnModel, binarize, forward, init_model
from .gnn.training import TrainingSample, prepare_sample, train
from .mesh.core import Mesh, SeamLabels
from .mesh.io import write_obj
from .mesh.topology import shells_from_labels
from .models import EvalReport, MeshReport, PipelineConfig, SplitStudy
from .refine.skeleton import skeletonize
from .refine.steiner import refine_dst
from .toolkit.dataset import Dataset, LabeledMesh, load_dir
from .toolkit.metrics import metrics, pooled_metrics, seam_length
from .unwrap.distortion import avg_distortion, distortion_json, write_distortion_ply
from .unwrap.parameterize import unwrap

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
CHAINED_DST_THRESHOLD = 0.5
DEFAULT_SPLIT_SEEDS = (0, 1, 2, 3, 4)


@dataclass
class MeshOutcome:
    """One evaluated mesh plus the files to write for it."""

    report: MeshReport
    artifacts: dict[str, bytes] = field(default_factory=dict)


async def _in_thread(semaphore: asyncio.Semaphore, fn, *args, **kwargs):
    async with semaphore:
        return await asyncio.to_thread(fn, *args, **kwargs)


def chain_probabilities(probs: np.ndarray, labels: SeamLabels) -> np.ndarray:
    """Probability field for the next stage: 0.5 + 0.5·p on seams, 0 elsewhere."""
    return np.where(np.asarray(labels) == 1, 0.5 + 0.5 * np.asarray(probs), 0.0)


def post_process(
    mesh: Mesh,
    probs: np.ndarray,
    config: PipelineConfig,
    warnings: list[str],
) -> SeamLabels:
    """Binarize predictions and run the configured stages in order.

    With no stages this is plain thresholding. A DST stage that follows another
    stage works on the chained field and binarizes it at 0.5.
    """
    labels = binarize(probs, config.threshold)
    field_probs = probs
    for position, stage in enumerate(config.stages):
        try:
            if stage == "skeletonize":
                labels = skeletonize(mesh, field_probs, config.skeleton, warnings)
            else:
                dst = config.dst
                if position > 0:
                    dst = dst.model_copy(update={"cut_threshold": CHAINED_DST_THRESHOLD})
                atlas = unwrap(mesh, binarize(field_probs, dst.cut_threshold))
                result = refine_dst(mesh, field_probs, atlas.face_distortion, dst)
                warnings.extend(result.warnings)
                labels = result.labels
        except Exception as e:
            raise StageError(stage, str(e)) from e
        field_probs = chain_probabilities(probs, labels)
        logger.debug("%s: %s left %d seam edges", mesh.name, stage, int(labels.sum()))
    return labels


def _evaluate_single(
    model: GnnModel, item: LabeledMesh, config: PipelineConfig
) -> MeshOutcome:
    """Evaluate one mesh. Never raises; a failing stage is recorded by name."""
    mesh = item.mesh
    report = MeshReport(name=mesh.name, edge_count=mesh.n_edges, face_count=mesh.n_faces)
    outcome = MeshOutcome(report=report)

    try:
        sample = prepare_sample(mesh, item.labels, config.augmented_dual)
        probs = forward(model, sample.dual)
    except Exception as e:
        report.errors.append(f"predict: {e}")
        return outcome
    outcome.artifacts[f"{mesh.name}.probs.json"] = json.dumps(probs.tolist()).encode("utf-8")

    try:
        labels = post_process(mesh, probs, config, report.warnings)
    except StageError as e:
        report.errors.append(str(e))
        labels = binarize(probs, config.threshold)

    try:
        report.metrics = metrics(labels, item.labels)
        report.seam_length = seam_length(mesh, labels)
        report.shell_count = shells_from_labels(mesh, labels).shell_count
    except Exception as e:
        report.errors.append(f"metrics: {e}")

    try:
        atlas = unwrap(mesh, labels)
        report.avg_distortion = avg_distortion(atlas.face_distortion)
        report.warnings.extend(atlas.warnings)
        outcome.artifacts[f"{mesh.name}.obj"] = write_obj(mesh, labels, atlas)
        outcome.artifacts[f"{mesh.name}.distortion.json"] = distortion_json(
            atlas.face_distortion
        ).encode("utf-8")
        outcome.artifacts[f"{mesh.name}.distortion.ply"] = write_distortion_ply(
            mesh, atlas.face_distortion
        )
    except Exception as e:
        report.errors.append(f"unwrap: {e}")
        outcome.artifacts[f"{mesh.name}.obj"] = write_obj(mesh, labels)

    return outcome


def _mean(values: Sequence[float | int | None]) -> float | None:
    present = [float(v) for v in values if v is not None]
    return float(np.mean(present)) if present else None


def summarize(meshes: list[MeshReport]) -> EvalReport:
    """Rates from the pooled confusion counts; other columns are per-mesh means."""
    report = EvalReport(mesh_count=len(meshes), meshes=meshes)
    scored = [m.metrics for m in meshes if m.metrics is not None]
    if scored:
        pooled = pooled_metrics(scored)
        report.fpr, report.tpr, report.accuracy = pooled.fpr, pooled.tpr, pooled.accuracy
    report.shell_count = _mean([m.shell_count for m in meshes])
    report.avg_distortion = _mean([m.avg_distortion for m in meshes])
    report.seam_length = _mean([m.seam_length for m in meshes])
    report.errors = [f"{m.name}: {err}" for m in meshes for err in m.errors]
    return report


async def evaluate(
    model: GnnModel, items: Sequence[LabeledMesh], config: PipelineConfig
) -> tuple[EvalReport, list[MeshOutcome]]:
    """Evaluate meshes concurrently; results keep the input order."""
    semaphore = asyncio.Semaphore(get_settings().workers)
    outcomes = await asyncio.gather(
        *(_in_thread(semaphore, _evaluate_single, model, item, config) for item in items)
    )
    return summarize([o.report for o in outcomes]), list(outcomes)


def _samples(items: Sequence[LabeledMesh], config: PipelineConfig) -> list[TrainingSample]:
    return [prepare_sample(i.mesh, i.labels, config.augmented_dual) for i in items]


def fit(
    train_items: Sequence[LabeledMesh],
    val_items: Sequence[LabeledMesh],
    config: PipelineConfig,
) -> GnnModel:
    """Train a fresh model; the validation set falls back to the training set."""
    if not train_items:
        raise ValueError("training set is empty")
    if not val_items:
        logger.warning("No validation meshes; early stopping on the training set")
        val_items = train_items
    model = init_model(config.model, seed=config.seed)
    best, history = train(
        model, _samples(train_items, config), _samples(val_items, config), config.train
    )
    logger.info(
        "Trained %s for %d epochs; best validation loss %.6f at epoch %d",
        config.model.arch,
        len(history.epochs),
        history.best_val_loss,
        history.best_epoch,
    )
    return best


def _training_split(config: PipelineConfig) -> tuple[list[LabeledMesh], list[LabeledMesh]]:
    if config.train_dir is None:
        raise ValueError("train_dir is required for training")
    pool = load_dir(config.train_dir, "train")
    if config.val_dir is not None:
        return pool.split("train"), load_dir(config.val_dir, "val").split("val")
    if len(pool) < 2:
        return pool.split("train"), []
    resplit = pool.random_split(config.seed, val_fraction=0.15, test_fraction=0.0)
    return resplit.split("train"), resplit.split("val")


async def obtain_model(config: PipelineConfig) -> GnnModel:
    """Load the checkpoint when it exists, otherwise train (and save if a path is given)."""
    if config.checkpoint is not None and Path(config.checkpoint).exists():
        logger.info("Loading checkpoint %s", config.checkpoint)
        return load_checkpoint(config.checkpoint)
    if config.train_dir is None:
        raise FileNotFoundError(f"checkpoint not found: {config.checkpoint}")
    train_items, val_items = _training_split(config)
    model = await asyncio.to_thread(fit, train_items, val_items, config)
    if config.checkpoint is not None:
        save_checkpoint(model, config.checkpoint)
    return model


def write_outputs(
    out_dir: Path, report: EvalReport, outcomes: Sequence[MeshOutcome], model: GnnModel | None
) -> Path:
    """Write per-mesh artifacts, the model and the report; returns the report path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    mesh_dir = out_dir / "meshes"
    mesh_dir.mkdir(exist_ok=True)
    for outcome in outcomes:
        for name, data in outcome.artifacts.items():
            (mesh_dir / name).write_bytes(data)
    if model is not None:
        save_checkpoint(model, out_dir / "model.json")
    path = out_dir / REPORT_NAME
    path.write_text(report.model_dump_json(indent=2))
    return path


async def run_pipeline(config: PipelineConfig, model: GnnModel | None = None) -> EvalReport:
    """Run train/load → predict → post-process stages → unwrap → metrics.

    Per-mesh failures land in that mesh's ``errors`` as ``"<stage>: <message>"``
    and the run continues. Identical config and seed give identical reports.
    """
    if config.test_dir is None:
        raise ValueError("test_dir is required")
    test_items = load_dir(config.test_dir, "test").split("test")
    if not test_items:
        raise ValueError(f"no meshes found in {config.test_dir}")
    if model is None:
        model = await obtain_model(config)

    logger.info("Evaluating %d meshes with stages %s", len(test_items), config.stages)
    report, outcomes = await evaluate(model, test_items, config)
    if config.write_artifacts:
        path = write_outputs(Path(config.out_dir), report, outcomes, model)
        logger.info("Report written to %s", path)
    return report


def mean_report(rows: Sequence[EvalReport]) -> EvalReport:
    """Column means over split rows, skipping undefined entries."""
    out = EvalReport(mesh_count=sum(r.mesh_count for r in rows))
    for column in ("fpr", "tpr", "accuracy", "shell_count", "avg_distortion", "seam_length"):
        value = _mean([getattr(r, column) for r in rows])
        setattr(out, column, None if value is None or not math.isfinite(value) else value)
    return out


async def run_split_study(
    config: PipelineConfig,
    seeds: Sequence[int] = DEFAULT_SPLIT_SEEDS,
    val_fraction: float = 0.15,
    test_fraction: float = 0.15,
) -> SplitStudy:
    """Pool every configured directory, then train and test once per seeded split."""
    if not seeds:
        raise ValueError("seeds must contain at least one value")
    pool = Dataset()
    for directory in (config.train_dir, config.val_dir, config.test_dir):
        if directory is not None:
            pool = pool.merged(load_dir(directory))

    study = SplitStudy(seeds=list(seeds))
    for seed in seeds:
        split = pool.random_split(seed, val_fraction, test_fraction)
        seeded = config.model_copy(update={"seed": seed})
        model = await asyncio.to_thread(fit, split.split("train"), split.split("val"), seeded)
        row, _ = await evaluate(model, split.split("test"), seeded)
        study.rows.append(row)
        logger.info("Split %d: accuracy %s", seed, row.accuracy)
    study.mean = mean_report(study.rows)

    if config.write_artifacts:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "split_study.json").write_text(study.model_dump_json(indent=2))
    return study
