"""Command-line entry point: ``seamgraph <subcommand> ...``."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .config import get_settings
from .engine import fit, run_pipeline, run_split_study
from .errors import DecimationError, MeshError, NumericalError
from .gnn.checkpoint import load_checkpoint, save_checkpoint
from .gnn.model import binarize, forward
from .gnn.training import prepare_sample
from .mesh.core import Mesh
from .mesh.io import write_label_sidecar, write_obj
from .mesh.topology import shells_from_labels
from .models import (
    DstConfig,
    ModelSpec,
    PipelineConfig,
    SkeletonConfig,
    SyntheticParams,
    TrainConfig,
)
from .refine.skeleton import skeletonize
from .refine.steiner import refine_dst
from .toolkit.augment import augment
from .toolkit.dataset import from_pairs, load_dir, load_labeled, read_mesh
from .toolkit.decimate import decimate
from .toolkit.synthetic import synthetic_set
from .unwrap.distortion import avg_distortion, distortion_json, write_distortion_ply
from .unwrap.parameterize import unwrap

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _out_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out_dir or get_settings().out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _read_probs(path: str, mesh: Mesh) -> np.ndarray:
    probs = np.asarray(json.loads(Path(path).read_text()), dtype=np.float64)
    if probs.shape != (mesh.n_edges,):
        raise ValueError(f"{path}: expected {mesh.n_edges} probabilities, got {probs.shape}")
    return probs


def _echo(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _model_spec(args: argparse.Namespace) -> ModelSpec:
    return ModelSpec(arch=args.arch, aggregator=args.aggregator)


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        max_epochs=args.epochs,
        patience=args.patience,
        rng_seed=args.seed,
    )


def _skeleton_config(args: argparse.Namespace) -> SkeletonConfig:
    return SkeletonConfig(
        candidate_fraction=args.candidate_fraction,
        max_orphan_distance=args.orphan_distance,
        min_shell_faces=args.min_shell_faces,
    )


def cmd_train(args: argparse.Namespace) -> int:
    config = PipelineConfig(
        train_dir=args.train_dir,
        val_dir=args.val_dir,
        model=_model_spec(args),
        train=_train_config(args),
        augmented_dual=args.augmented,
        seed=args.seed,
    )
    train_items = load_dir(args.train_dir, "train").split("train")
    val_items = load_dir(args.val_dir, "val").split("val") if args.val_dir else []
    model = fit(train_items, val_items, config)
    path = save_checkpoint(model, args.checkpoint or _out_dir(args) / "model.json")
    _echo({"checkpoint": str(path), "parameters": model.parameter_count})
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_checkpoint(args.checkpoint)
    mesh = read_mesh(args.mesh)
    sample = prepare_sample(mesh, np.zeros(mesh.n_edges, dtype=np.int8), args.augmented)
    probs = forward(model, sample.dual)
    labels = binarize(probs, args.threshold)
    out = _out_dir(args)
    (out / f"{mesh.name}.probs.json").write_text(json.dumps(probs.tolist()))
    (out / f"{mesh.name}.labels.json").write_bytes(write_label_sidecar(mesh, labels))
    (out / f"{mesh.name}.obj").write_bytes(write_obj(mesh, labels))
    _echo({"mesh": mesh.name, "seam_edges": int(labels.sum()), "edges": mesh.n_edges})
    return EXIT_OK


def cmd_refine_dst(args: argparse.Namespace) -> int:
    mesh = read_mesh(args.mesh)
    probs = _read_probs(args.probs, mesh)
    config = DstConfig(cut_threshold=args.cut_threshold, close_gaps=not args.no_gap_closing)
    atlas = unwrap(mesh, binarize(probs, config.cut_threshold))
    result = refine_dst(mesh, probs, atlas.face_distortion, config)
    out = _out_dir(args)
    (out / f"{mesh.name}.labels.json").write_bytes(write_label_sidecar(mesh, result.labels))
    (out / f"{mesh.name}.steiner.json").write_text(result.to_json())
    _echo(
        {
            "mesh": mesh.name,
            "seam_edges": int(result.labels.sum()),
            "shells": shells_from_labels(mesh, result.labels).shell_count,
            "warnings": result.warnings,
        }
    )
    return EXIT_OK


def cmd_skeletonize(args: argparse.Namespace) -> int:
    mesh = read_mesh(args.mesh)
    probs = _read_probs(args.probs, mesh)
    warnings: list[str] = []
    labels = skeletonize(mesh, probs, _skeleton_config(args), warnings)
    out = _out_dir(args)
    (out / f"{mesh.name}.labels.json").write_bytes(write_label_sidecar(mesh, labels))
    _echo(
        {
            "mesh": mesh.name,
            "seam_edges": int(labels.sum()),
            "shells": shells_from_labels(mesh, labels).shell_count,
            "warnings": warnings,
        }
    )
    return EXIT_OK


def cmd_unwrap(args: argparse.Namespace) -> int:
    mesh, labels = load_labeled(args.mesh)
    atlas = unwrap(mesh, labels, args.weights)
    out = _out_dir(args)
    (out / f"{mesh.name}.obj").write_bytes(write_obj(mesh, labels, atlas))
    (out / f"{mesh.name}.distortion.json").write_text(distortion_json(atlas.face_distortion))
    (out / f"{mesh.name}.distortion.ply").write_bytes(
        write_distortion_ply(mesh, atlas.face_distortion)
    )
    _echo(
        {
            "mesh": mesh.name,
            "shells": len(atlas.shells),
            "avg_distortion": avg_distortion(atlas.face_distortion),
            "warnings": atlas.warnings,
        }
    )
    return EXIT_OK


def _pipeline_config(args: argparse.Namespace, **overrides) -> PipelineConfig:
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    else:
        base = {
            "model": _model_spec(args).model_dump(),
            "train": _train_config(args).model_dump(),
            "skeleton": _skeleton_config(args).model_dump(),
            "dst": DstConfig(cut_threshold=args.cut_threshold).model_dump(),
            "threshold": args.threshold,
            "augmented_dual": args.augmented,
            "seed": args.seed,
        }
        if args.stages is not None:
            base["stages"] = [s for s in args.stages.split(",") if s]
    for key in ("train_dir", "val_dir", "test_dir", "checkpoint", "out_dir"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    base.setdefault("out_dir", get_settings().out_dir)
    base.update(overrides)
    return PipelineConfig.model_validate(base)


def cmd_eval(args: argparse.Namespace) -> int:
    config = _pipeline_config(args, train_dir=None)
    report = asyncio.run(run_pipeline(config))
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = _pipeline_config(args)
    if args.split_seeds:
        seeds = [int(s) for s in args.split_seeds.split(",")]
        study = asyncio.run(run_split_study(config, seeds))
        print(study.mean.model_dump_json(indent=2))
    else:
        report = asyncio.run(run_pipeline(config))
        print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    mesh, labels = load_labeled(args.mesh)
    copies = augment(mesh, labels, args.count, args.noise_std, args.vertex_fraction, args.seed)
    root = from_pairs(copies).write_dir(_out_dir(args))
    _echo({"written": len(copies), "dir": str(root / "train")})
    return EXIT_OK


def cmd_decimate(args: argparse.Namespace) -> int:
    mesh, labels = load_labeled(args.mesh)
    out_mesh, out_labels = decimate(mesh, labels, args.target_faces)
    root = from_pairs([(out_mesh, out_labels)]).write_dir(_out_dir(args))
    _echo({"mesh": mesh.name, "faces": out_mesh.n_faces, "dir": str(root / "train")})
    return EXIT_OK


def cmd_gen_synth(args: argparse.Namespace) -> int:
    params = SyntheticParams(segments=args.segments, rings=args.rings, noise=args.noise)
    kinds = tuple(k for k in args.kinds.split(",") if k)
    pairs = synthetic_set(args.count, args.seed, kinds, params)
    root = from_pairs(pairs).write_dir(_out_dir(args))
    _echo({"written": len(pairs), "dir": str(root / "train")})
    return EXIT_OK


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", choices=["gcn", "gat", "sage", "gin"], default="gat")
    p.add_argument("--aggregator", choices=["mean", "pool", "lstm", "gcn"], default="mean")
    p.add_argument("--augmented", action="store_true", help="use the augmented dual graph")
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--patience", type=int, default=50)


def _add_refine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--cut-threshold", type=float, default=0.9)
    p.add_argument("--candidate-fraction", type=float, default=0.2)
    p.add_argument("--orphan-distance", type=int, default=3)
    p.add_argument("--min-shell-faces", type=int, default=2)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    _add_model_flags(p)
    _add_refine_flags(p)
    p.add_argument("--config", help="PipelineConfig JSON file; other flags override paths")
    p.add_argument("--test-dir")
    p.add_argument("--checkpoint")
    p.add_argument(
        "--stages", help="comma-separated post-process stages, e.g. skeletonize,dst"
    )


def _global_flags(default) -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand."""
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default)
    p.add_argument("--out-dir", default=default)
    p.add_argument("--log-level", default=default)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seamgraph",
        description="UV seam detection with graph neural networks",
        parents=[_global_flags(None)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(argparse.SUPPRESS)]

    p = sub.add_parser(
        "train", help="train a model on a labeled directory", parents=common
    )
    _add_model_flags(p)
    p.add_argument("--train-dir", required=True)
    p.add_argument("--val-dir")
    p.add_argument("--checkpoint", help="output path (default: <out-dir>/model.json)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser(
        "predict", help="predict seam probabilities for one mesh", parents=common
    )
    p.add_argument("mesh")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--augmented", action="store_true")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser(
        "refine-dst", help="rebuild seams as distortion Steiner trees", parents=common
    )
    p.add_argument("mesh")
    p.add_argument("--probs", required=True, help="JSON array of edge probabilities")
    p.add_argument("--cut-threshold", type=float, default=0.9)
    p.add_argument("--no-gap-closing", action="store_true")
    p.set_defaults(handler=cmd_refine_dst)

    p = sub.add_parser(
        "skeletonize", help="thin a probability field to 1-edge seams", parents=common
    )
    p.add_argument("mesh")
    p.add_argument("--probs", required=True, help="JSON array of edge probabilities")
    p.add_argument("--candidate-fraction", type=float, default=0.2)
    p.add_argument("--orphan-distance", type=int, default=3)
    p.add_argument("--min-shell-faces", type=int, default=2)
    p.set_defaults(handler=cmd_skeletonize)

    p = sub.add_parser(
        "unwrap", help="parameterize a labeled mesh and report distortion", parents=common
    )
    p.add_argument("mesh")
    p.add_argument("--weights", choices=["uniform", "mean_value"], default="uniform")
    p.set_defaults(handler=cmd_unwrap)

    p = sub.add_parser(
        "eval", help="evaluate a checkpoint on a test directory", parents=common
    )
    _add_run_flags(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser(
        "pipeline", help="train or load, predict, refine and evaluate", parents=common
    )
    _add_run_flags(p)
    p.add_argument("--train-dir")
    p.add_argument("--val-dir")
    p.add_argument("--split-seeds", help="comma-separated seeds for a random split study")
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser(
        "augment", help="write noisy copies of a labeled mesh", parents=common
    )
    p.add_argument("mesh")
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--noise-std", type=float, default=0.01)
    p.add_argument("--vertex-fraction", type=float, default=0.5)
    p.set_defaults(handler=cmd_augment)

    p = sub.add_parser(
        "decimate", help="QEM decimation that keeps seams intact", parents=common
    )
    p.add_argument("mesh")
    p.add_argument("--target-faces", type=int, required=True)
    p.set_defaults(handler=cmd_decimate)

    p = sub.add_parser(
        "gen-synth", help="generate synthetic shapes with known seams", parents=common
    )
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--kinds", default="cylinder,capsule")
    p.add_argument("--segments", type=int, default=16)
    p.add_argument("--rings", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(handler=cmd_gen_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.seed is None:
        args.seed = settings.seed
    try:
        return args.handler(args)
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    except (MeshError, DecimationError, ValidationError, ValueError, FileNotFoundError) as e:
        logger.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
