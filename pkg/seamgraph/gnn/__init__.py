"""Graph neural network seam classifier."""

from .checkpoint import dumps_checkpoint, load_checkpoint, loads_checkpoint, save_checkpoint
from .layers import gat_layer, gcn_layer, gin_layer, sage_layer
from .model import (
    GnnModel,
    binarize,
    forward,
    gradients,
    init_model,
    loss_and_gradients,
)
from .training import EarlyStopping, TrainingSample, prepare_sample, train

__all__ = [
    "EarlyStopping",
    "GnnModel",
    "TrainingSample",
    "binarize",
    "dumps_checkpoint",
    "forward",
    "gat_layer",
    "gcn_layer",
    "gin_layer",
    "gradients",
    "init_model",
    "load_checkpoint",
    "loads_checkpoint",
    "prepare_sample",
    "sage_layer",
    "save_checkpoint",
    "train",
]
