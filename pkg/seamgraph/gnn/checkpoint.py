"""Versioned JSON checkpoints with exact float round-trip."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from ..config import get_settings
from ..errors import NumericalError
from ..models import ModelSpec
from .model import GnnModel, init_model

CHECKPOINT_FORMAT = "seamgraph-checkpoint"
CHECKPOINT_VERSION = 1


class TensorPayload(BaseModel):
    shape: list[int]
    values: list[Any]


class CheckpointFile(BaseModel):
    format: str = CHECKPOINT_FORMAT
    version: int = CHECKPOINT_VERSION
    spec: ModelSpec
    params: dict[str, TensorPayload] = Field(default_factory=dict)


def dumps_checkpoint(model: GnnModel) -> str:
    """Serialize a model; Python's float repr makes the round trip exact."""
    if get_settings().float_check:
        for name, value in model.params.items():
            if not np.isfinite(value).all():
                raise NumericalError(f"parameter {name!r} is not finite")
    payload = CheckpointFile(
        spec=model.spec,
        params={
            name: TensorPayload(shape=list(value.shape), values=value.tolist())
            for name, value in model.params.items()
        },
    )
    return json.dumps(payload.model_dump(), indent=1)


def loads_checkpoint(text: str) -> GnnModel:
    """Parse a checkpoint and check it against the parameter layout of its spec."""
    payload = CheckpointFile.model_validate(json.loads(text))
    if payload.format != CHECKPOINT_FORMAT:
        raise ValueError(f"not a checkpoint file (format {payload.format!r})")
    if payload.version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.version}")

    expected = init_model(payload.spec).params
    if set(expected) != set(payload.params):
        missing = sorted(set(expected) - set(payload.params))
        extra = sorted(set(payload.params) - set(expected))
        raise ValueError(f"checkpoint parameters differ: missing {missing}, unexpected {extra}")

    params = {}
    for name, tensor in payload.params.items():
        value = np.asarray(tensor.values, dtype=np.float64).reshape(tensor.shape)
        if value.shape != expected[name].shape:
            raise ValueError(
                f"parameter {name!r} has shape {value.shape}, expected {expected[name].shape}"
            )
        params[name] = value
    return GnnModel(spec=payload.spec, params=params)


def save_checkpoint(model: GnnModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_checkpoint(model))
    return path


def load_checkpoint(path: str | Path) -> GnnModel:
    return loads_checkpoint(Path(path).read_text())
