"""Seam classifier: residual GNN blocks followed by a two-logit head."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError
from ..graph.dual import DualGraph
from ..mesh.core import SeamLabels
from ..models import ModelSpec
from . import autodiff as ad
from .autodiff import Tensor
from .layers import gat_layer, gcn_layer, gin_layer, sage_layer

logger = logging.getLogger(__name__)

ParamArrays = dict[str, np.ndarray]


def block_widths(spec: ModelSpec) -> list[tuple[int, int]]:
    """(input width, output width) of every block."""
    widths = []
    d_in = spec.in_features
    for k in range(spec.layers):
        last = k == spec.layers - 1
        d_out = spec.hidden * spec.heads if spec.arch == "gat" and not last else spec.hidden
        widths.append((d_in, d_out))
        d_in = d_out
    return widths


def _glorot(
    rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, int] | None = None
) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


def _block_params(
    spec: ModelSpec, k: int, d_in: int, d_out: int, rng: np.random.Generator
) -> ParamArrays:
    prefix = f"block{k}."
    params: ParamArrays = {}
    if spec.arch == "gcn":
        params["weight"] = _glorot(rng, d_in, d_out)
    elif spec.arch == "gat":
        heads = spec.out_heads if k == spec.layers - 1 else spec.heads
        width = spec.hidden
        params["weight"] = _glorot(rng, d_in, heads * width)
        params["att_src"] = _glorot(rng, width, 1, shape=(width, heads))
        params["att_dst"] = _glorot(rng, width, 1, shape=(width, heads))
    elif spec.arch == "sage":
        if spec.aggregator == "gcn":
            params["weight"] = _glorot(rng, d_in, d_out)
        else:
            params["weight"] = _glorot(rng, 2 * d_in, d_out)
        if spec.aggregator == "pool":
            params["pool_weight"] = _glorot(rng, d_in, d_in)
            params["pool_bias"] = np.zeros((1, d_in))
        elif spec.aggregator == "lstm":
            params["lstm_wx"] = _glorot(rng, d_in, 4 * d_in)
            params["lstm_wh"] = _glorot(rng, d_in, 4 * d_in)
            params["lstm_bias"] = np.zeros((1, 4 * d_in))
    else:
        params["eps"] = np.zeros((1, 1))
        params["mlp_w1"] = _glorot(rng, d_in, spec.hidden)
        params["mlp_b1"] = np.zeros((1, spec.hidden))
        params["mlp_w2"] = _glorot(rng, spec.hidden, d_out)
        params["mlp_b2"] = np.zeros((1, d_out))
    if spec.residual and d_in != d_out:
        params["proj_weight"] = _glorot(rng, d_in, d_out)
        params["proj_bias"] = np.zeros((1, d_out))
    return {prefix + name: value for name, value in params.items()}


@dataclass
class GnnModel:
    """Architecture description plus named parameter arrays."""

    spec: ModelSpec
    params: ParamArrays = field(default_factory=dict)

    def copy(self) -> GnnModel:
        return GnnModel(self.spec.model_copy(), {k: v.copy() for k, v in self.params.items()})

    def tensors(self) -> dict[str, Tensor]:
        return {k: Tensor(v, requires_grad=True) for k, v in self.params.items()}

    @property
    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.params.values()))


def init_model(spec: ModelSpec, seed: int = 0) -> GnnModel:
    """Glorot-uniform weights, zero biases, ε = 0."""
    rng = np.random.default_rng(seed)
    params: ParamArrays = {}
    for k, (d_in, d_out) in enumerate(block_widths(spec)):
        params.update(_block_params(spec, k, d_in, d_out, rng))
    d_last = block_widths(spec)[-1][1]
    params["head.weight"] = _glorot(rng, d_last, 2)
    params["head.bias"] = np.zeros((1, 2))
    model = GnnModel(spec=spec, params=params)
    logger.debug("Initialized %s model with %d parameters", spec.arch, model.parameter_count)
    return model


def _block(
    spec: ModelSpec,
    k: int,
    dual: DualGraph,
    h: Tensor,
    params: dict[str, Tensor],
    training: bool,
    rng: np.random.Generator | None,
) -> Tensor:
    prefix = f"block{k}."
    local = {name[len(prefix):]: t for name, t in params.items() if name.startswith(prefix)}
    if spec.arch == "gcn":
        return gcn_layer(dual.normalized, h, local["weight"])
    if spec.arch == "gat":
        last = k == spec.layers - 1
        return gat_layer(
            dual,
            h,
            local,
            heads=spec.out_heads if last else spec.heads,
            concat=not last,
            dropout=spec.attention_dropout,
            rng=rng,
            training=training,
        )
    if spec.arch == "sage":
        return sage_layer(dual, h, local, spec.aggregator)
    return gin_layer(dual, h, local)


def logits(
    spec: ModelSpec,
    params: dict[str, Tensor],
    dual: DualGraph,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Per-dual-node logits (N, 2) as a differentiable tensor."""
    if dual.features.shape[1] != spec.in_features:
        raise ValueError(
            f"dual features have width {dual.features.shape[1]}, "
            f"model expects {spec.in_features}"
        )
    h = Tensor(dual.features)
    for k in range(spec.layers):
        out = _block(spec, k, dual, h, params, training, rng)
        if spec.residual:
            proj = f"block{k}.proj_weight"
            skip = h @ params[proj] + params[f"block{k}.proj_bias"] if proj in params else h
            out = out + skip
        h = out
    return h @ params["head.weight"] + params["head.bias"]


def node_probabilities(z: np.ndarray) -> np.ndarray:
    return ad.softmax_rows(z)[:, 1]


def to_edge_probabilities(dual: DualGraph, node_probs: np.ndarray) -> np.ndarray:
    """Average dual-node probabilities onto mesh edges."""
    total = np.bincount(dual.dual_to_edge, weights=node_probs, minlength=dual.edge_count)
    count = np.bincount(dual.dual_to_edge, minlength=dual.edge_count)
    return total / np.maximum(count, 1)


def forward(model: GnnModel, dual: DualGraph) -> np.ndarray:
    """Seam probability for every mesh edge, in edge order."""
    params = {k: Tensor(v) for k, v in model.params.items()}
    z = logits(model.spec, params, dual, training=False).value
    if not np.isfinite(z).all():
        raise NumericalError("model produced non-finite logits")
    return to_edge_probabilities(dual, node_probabilities(z))


def node_targets(dual: DualGraph, labels: SeamLabels) -> np.ndarray:
    return np.asarray(labels, dtype=np.int64)[dual.dual_to_edge]


def loss_and_gradients(
    model: GnnModel,
    dual: DualGraph,
    labels: SeamLabels,
    class_weights: tuple[float, float] = (1.0, 100.0),
    mask: np.ndarray | None = None,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Weighted cross-entropy over dual nodes and its exact parameter gradients.

    ``labels`` and ``mask`` are per mesh edge; ``class_weights`` is
    (non-seam weight, seam weight).
    """
    params = model.tensors()
    z = logits(model.spec, params, dual, training=training, rng=rng)
    node_mask = None if mask is None else np.asarray(mask, dtype=bool)[dual.dual_to_edge]
    loss = ad.weighted_cross_entropy(z, node_targets(dual, labels), class_weights, node_mask)
    loss.backward()
    grads = {
        name: t.grad if t.grad is not None else np.zeros_like(t.value)
        for name, t in params.items()
    }
    return float(loss.value), grads


def gradients(
    model: GnnModel,
    dual: DualGraph,
    labels: SeamLabels,
    class_weights: tuple[float, float] = (1.0, 100.0),
    mask: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    _, grads = loss_and_gradients(model, dual, labels, class_weights, mask)
    return grads


def evaluate_loss(
    model: GnnModel,
    dual: DualGraph,
    labels: SeamLabels,
    class_weights: tuple[float, float] = (1.0, 100.0),
    mask: np.ndarray | None = None,
) -> float:
    params = {k: Tensor(v) for k, v in model.params.items()}
    z = logits(model.spec, params, dual)
    node_mask = None if mask is None else np.asarray(mask, dtype=bool)[dual.dual_to_edge]
    loss = ad.weighted_cross_entropy(z, node_targets(dual, labels), class_weights, node_mask)
    return float(loss.value)


def binarize(probs: np.ndarray, threshold: float = 0.5) -> SeamLabels:
    """Label 1 where the seam probability reaches the threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return (np.asarray(probs) >= threshold).astype(np.int8)
