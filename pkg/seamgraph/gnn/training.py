"""Inductive training loop: full-graph pass per mesh, Adam, early stopping."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from ..graph.dual import DualGraph, Orientation, build_dual
from ..graph.features import node_features
from ..mesh.core import Mesh, SeamLabels, validate_labels
from ..models import EpochRecord, TrainConfig, TrainHistory
from .model import GnnModel, evaluate_loss, loss_and_gradients

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TrainingSample:
    """One mesh ready for the network: its dual graph, labels and loss mask."""

    name: str
    dual: DualGraph
    labels: SeamLabels
    mask: np.ndarray


def prepare_sample(
    mesh: Mesh,
    labels: SeamLabels,
    augmented: bool = False,
    orientation: Orientation = "canonical",
    seed: int = 0,
) -> TrainingSample:
    """Build the dual of ``mesh``; boundary edges are left out of the loss."""
    labels = validate_labels(mesh, labels)
    dual = build_dual(mesh, node_features(mesh), augmented, orientation, seed)
    return TrainingSample(
        name=mesh.name, dual=dual, labels=labels, mask=~mesh.boundary_edge_mask
    )


def class_weights(config: TrainConfig) -> tuple[float, float]:
    return (config.nonseam_weight, config.seam_weight)


class EarlyStopping:
    """Track the best validation loss; signal a stop after ``patience`` idle epochs."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be at least 1")
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.idle = 0

    def update(self, epoch: int, loss: float) -> tuple[bool, bool]:
        """Return (improved, should_stop)."""
        if loss < self.best:
            self.best = loss
            self.best_epoch = epoch
            self.idle = 0
            return True, False
        self.idle += 1
        return False, self.idle >= self.patience


class Adam:
    """Adam with bias correction over a dict of parameter arrays."""

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig):
        self.lr = config.learning_rate
        self.beta1 = config.beta1
        self.beta2 = config.beta2
        self.eps = config.adam_eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        t = self.step_count
        correction1 = 1.0 - self.beta1**t
        correction2 = 1.0 - self.beta2**t
        for name in params:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            params[name] = params[name] - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def validation_loss(
    model: GnnModel, samples: Sequence[TrainingSample], config: TrainConfig
) -> float:
    weights = class_weights(config)
    losses = [evaluate_loss(model, s.dual, s.labels, weights, s.mask) for s in samples]
    return float(np.mean(losses))


def train(
    model: GnnModel,
    dataset: Sequence[TrainingSample],
    val_set: Sequence[TrainingSample],
    config: TrainConfig,
) -> tuple[GnnModel, TrainHistory]:
    """Train a copy of ``model`` and return the best-validation parameters.

    Meshes are visited in the given order every epoch, one Adam step each. Runs
    with the same seed and inputs produce identical parameters.
    """
    if not dataset:
        raise ValueError("training set is empty")
    if not val_set:
        raise ValueError("validation set is empty")

    rng = np.random.default_rng(config.rng_seed)
    weights = class_weights(config)
    current = model.copy()
    optimizer = Adam(current.params, config)
    stopper = EarlyStopping(config.patience)
    history = TrainHistory()
    best = current.copy()

    for epoch in range(1, config.max_epochs + 1):
        train_losses = []
        for sample in dataset:
            loss, grads = loss_and_gradients(
                current, sample.dual, sample.labels, weights, sample.mask, True, rng
            )
            if not math.isfinite(loss):
                raise NumericalError(
                    f"training loss diverged at epoch {epoch} on {sample.name!r}", epoch=epoch
                )
            optimizer.step(current.params, grads)
            train_losses.append(loss)

        val_loss = validation_loss(current, val_set, config)
        if not math.isfinite(val_loss):
            raise NumericalError(f"validation loss diverged at epoch {epoch}", epoch=epoch)
        train_loss = float(np.mean(train_losses))
        history.epochs.append(EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss))
        logger.debug("epoch %d: train %.6f val %.6f", epoch, train_loss, val_loss)

        improved, stop = stopper.update(epoch, val_loss)
        if improved:
            best = current.copy()
        if stop:
            history.stopped_early = True
            logger.info(
                "Early stop at epoch %d; best validation loss %.6f at epoch %d",
                epoch,
                stopper.best,
                stopper.best_epoch,
            )
            break

    history.best_epoch = stopper.best_epoch
    history.best_val_loss = stopper.best
    return best, history
