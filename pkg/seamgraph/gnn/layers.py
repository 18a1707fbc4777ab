"""Message-passing layers over a dual graph.

Every layer takes the node states ``h`` as a ``Tensor`` of shape (N, d_in) and a
mapping of parameter tensors, and returns the activated states (N, d_out).
Messages travel along the directed pairs ``(dual.senders[m], dual.receivers[m])``.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np
import scipy.sparse as sp

from ..graph.dual import DualGraph
from ..models import Aggregator
from . import autodiff as ad
from .autodiff import Tensor

Params = Mapping[str, Tensor]

ATTENTION_SLOPE = 0.2


def _check_width(h: Tensor, weight: Tensor, layer: str) -> None:
    if h.shape[1] != weight.shape[0]:
        raise ValueError(
            f"{layer}: input width {h.shape[1]} does not match weight rows {weight.shape[0]}"
        )


def gcn_layer(a_hat: sp.spmatrix, h: Tensor, weight: Tensor) -> Tensor:
    """ReLU(Â · H · W)."""
    _check_width(h, weight, "gcn")
    if a_hat.shape[1] != h.shape[0]:
        raise ValueError(f"gcn: adjacency has {a_hat.shape[1]} columns, states {h.shape[0]} rows")
    return ad.relu(ad.spmm(a_hat, h @ weight))


def _with_self_loops(dual: DualGraph) -> tuple[np.ndarray, np.ndarray]:
    loops = np.arange(dual.node_count)
    return (
        np.concatenate([dual.senders, loops]),
        np.concatenate([dual.receivers, loops]),
    )


def gat_layer(
    dual: DualGraph,
    h: Tensor,
    params: Params,
    heads: int,
    concat: bool,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> Tensor:
    """Multi-head graph attention over N(v) ∪ {v}, followed by ELU.

    ``weight`` is (d_in, heads·F); ``att_src`` and ``att_dst`` are (F, heads). Head
    outputs are concatenated when ``concat`` is set and averaged otherwise. Attention
    dropout is applied to the coefficients only while training.
    """
    weight = params["weight"]
    _check_width(h, weight, "gat")
    width = weight.shape[1] // heads
    senders, receivers = _with_self_loops(dual)
    n = dual.node_count
    z = h @ weight

    outputs: list[Tensor] = []
    for k in range(heads):
        zk = ad.slice_cols(z, k * width, (k + 1) * width)
        src = zk @ ad.slice_cols(params["att_src"], k, k + 1)
        dst = zk @ ad.slice_cols(params["att_dst"], k, k + 1)
        score = ad.leaky_relu(ad.gather(src, senders) + ad.gather(dst, receivers), ATTENTION_SLOPE)
        alpha = ad.segment_softmax(score, receivers, n)
        if training and dropout > 0:
            alpha = ad.dropout(alpha, dropout, rng or np.random.default_rng())
        outputs.append(ad.segment_sum(ad.mul(alpha, ad.gather(zk, senders)), receivers, n))

    if concat:
        combined = ad.concat(outputs, axis=1)
    else:
        combined = outputs[0]
        for extra in outputs[1:]:
            combined = combined + extra
        combined = combined * (1.0 / heads)
    return ad.elu(combined)


def _neighbor_sum(dual: DualGraph, h: Tensor) -> Tensor:
    return ad.segment_sum(ad.gather(h, dual.senders), dual.receivers, dual.node_count)


def _inverse(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    return np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)[:, None]


def _lstm_aggregate(dual: DualGraph, h: Tensor, params: Params) -> Tensor:
    """Run an LSTM over each node's neighbours in ascending index order.

    The final hidden state is the aggregate; nodes without neighbours get zeros.
    """
    n, width = h.shape
    position = np.arange(len(dual.senders)) - dual.adjacency.indptr[dual.receivers]
    state = Tensor(np.zeros((n, width)))
    cell = Tensor(np.zeros((n, width)))
    steps = int(dual.degree.max(initial=0))
    for t in range(steps):
        sel = np.flatnonzero(position == t)
        nodes = dual.receivers[sel]
        x = ad.segment_sum(ad.gather(h, dual.senders[sel]), nodes, n)
        active = np.zeros((n, 1))
        active[nodes] = 1.0
        gates = x @ params["lstm_wx"] + state @ params["lstm_wh"] + params["lstm_bias"]
        i = ad.sigmoid(ad.slice_cols(gates, 0, width))
        f = ad.sigmoid(ad.slice_cols(gates, width, 2 * width))
        g = ad.tanh(ad.slice_cols(gates, 2 * width, 3 * width))
        o = ad.sigmoid(ad.slice_cols(gates, 3 * width, 4 * width))
        new_cell = f * cell + i * g
        new_state = o * ad.tanh(new_cell)
        cell = ad.mul(new_cell, active) + ad.mul(cell, 1.0 - active)
        state = ad.mul(new_state, active) + ad.mul(state, 1.0 - active)
    return state


def sage_layer(dual: DualGraph, h: Tensor, params: Params, aggregator: Aggregator) -> Tensor:
    """GraphSAGE over the full neighbourhood.

    ``mean``, ``pool`` and ``lstm`` concatenate [h_v ‖ agg] before the linear map;
    ``gcn`` averages over N(v) ∪ {v} instead.
    """
    weight = params["weight"]
    if aggregator == "gcn":
        _check_width(h, weight, "sage")
        mixed = ad.mul(_neighbor_sum(dual, h) + h, _inverse(dual.degree + 1))
        return ad.relu(mixed @ weight)

    if aggregator == "mean":
        agg = ad.mul(_neighbor_sum(dual, h), _inverse(dual.degree))
    elif aggregator == "pool":
        pooled = ad.relu(h @ params["pool_weight"] + params["pool_bias"])
        agg = ad.segment_max(ad.gather(pooled, dual.senders), dual.receivers, dual.node_count)
    elif aggregator == "lstm":
        agg = _lstm_aggregate(dual, h, params)
    else:
        raise ValueError(f"unknown aggregator {aggregator!r}")
    combined = ad.concat([h, agg], axis=1)
    _check_width(combined, weight, "sage")
    return ad.relu(combined @ weight)


def gin_layer(dual: DualGraph, h: Tensor, params: Params) -> Tensor:
    """ReLU(MLP((1 + ε)·h_v + Σ_{u∈N(v)} h_u)) with a two-layer ReLU MLP."""
    _check_width(h, params["mlp_w1"], "gin")
    z = h + ad.mul(h, params["eps"]) + _neighbor_sum(dual, h)
    hidden = ad.relu(z @ params["mlp_w1"] + params["mlp_b1"])
    return ad.relu(hidden @ params["mlp_w2"] + params["mlp_b2"])
