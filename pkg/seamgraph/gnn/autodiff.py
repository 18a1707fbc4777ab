"""Minimal reverse-mode automatic differentiation over numpy arrays.

A ``Tensor`` records the operation that produced it. ``Tensor.backward`` walks the
recorded graph in reverse topological order and accumulates ``grad`` on every
tensor that requires it. Only the operations the GNN layers need are provided;
all of them work on 2-D arrays.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
import scipy.sparse as sp

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        value: np.ndarray | float,
        requires_grad: bool = False,
        parents: tuple[Tensor, ...] = (),
        backward: BackwardFn | None = None,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other: Tensor | np.ndarray | float) -> Tensor:
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Tensor | np.ndarray | float) -> Tensor:
        return add(self, mul(other, -1.0))

    def __mul__(self, other: Tensor | np.ndarray | float) -> Tensor:
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other: Tensor | np.ndarray) -> Tensor:
        return matmul(self, other)

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Accumulate gradients of this tensor into every upstream tensor."""
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))

        self.grad = np.ones_like(self.value) if grad is None else np.asarray(grad, float)
        for node in reversed(order):
            if node._backward is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._backward(node.grad), strict=True):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g


def lift(x: Tensor | np.ndarray | float) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor | np.ndarray | float, b: Tensor | np.ndarray | float) -> Tensor:
    a, b = lift(a), lift(b)
    return Tensor(
        a.value + b.value,
        parents=(a, b),
        backward=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def mul(a: Tensor | np.ndarray | float, b: Tensor | np.ndarray | float) -> Tensor:
    a, b = lift(a), lift(b)
    return Tensor(
        a.value * b.value,
        parents=(a, b),
        backward=lambda g: (
            _unbroadcast(g * b.value, a.shape),
            _unbroadcast(g * a.value, b.shape),
        ),
    )


def matmul(a: Tensor | np.ndarray, b: Tensor | np.ndarray) -> Tensor:
    a, b = lift(a), lift(b)
    return Tensor(
        a.value @ b.value,
        parents=(a, b),
        backward=lambda g: (g @ b.value.T, a.value.T @ g),
    )


def spmm(matrix: sp.spmatrix, x: Tensor) -> Tensor:
    """Constant sparse matrix times a dense tensor."""
    matrix = sp.csr_matrix(matrix)
    return Tensor(
        np.asarray(matrix @ x.value),
        parents=(x,),
        backward=lambda g: (np.asarray(matrix.T @ g),),
    )


def relu(x: Tensor) -> Tensor:
    mask = x.value > 0
    return Tensor(x.value * mask, parents=(x,), backward=lambda g: (g * mask,))


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    scale = np.where(x.value > 0, 1.0, slope)
    return Tensor(x.value * scale, parents=(x,), backward=lambda g: (g * scale,))


def elu(x: Tensor) -> Tensor:
    neg = np.expm1(np.minimum(x.value, 0.0))
    out = np.where(x.value > 0, x.value, neg)
    slope = np.where(x.value > 0, 1.0, neg + 1.0)
    return Tensor(out, parents=(x,), backward=lambda g: (g * slope,))


def sigmoid(x: Tensor) -> Tensor:
    out = 0.5 * (1.0 + np.tanh(0.5 * x.value))
    return Tensor(out, parents=(x,), backward=lambda g: (g * out * (1.0 - out),))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.value)
    return Tensor(out, parents=(x,), backward=lambda g: (g * (1.0 - out * out),))


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    tensors = tuple(tensors)
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def backward(g: np.ndarray) -> list[np.ndarray]:
        index = [slice(None)] * g.ndim
        parts = []
        for lo, hi in zip(bounds[:-1], bounds[1:], strict=True):
            index[axis] = slice(lo, hi)
            parts.append(g[tuple(index)])
        return parts

    return Tensor(
        np.concatenate([t.value for t in tensors], axis=axis),
        parents=tensors,
        backward=backward,
    )


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros_like(x.value)
        full[:, start:stop] = g
        return (full,)

    return Tensor(x.value[:, start:stop], parents=(x,), backward=backward)


def _selector(index: np.ndarray, n: int) -> sp.csr_matrix:
    """Sparse (n, len(index)) matrix summing rows that share an index."""
    m = len(index)
    return sp.csr_matrix((np.ones(m), (index, np.arange(m))), shape=(n, m))


def gather(x: Tensor, index: np.ndarray) -> Tensor:
    """Rows ``x[index]``; gradients of repeated rows add up."""
    index = np.asarray(index, dtype=np.int64)
    n = x.shape[0]
    return Tensor(
        x.value[index],
        parents=(x,),
        backward=lambda g: (np.asarray(_selector(index, n) @ g),),
    )


def segment_sum(x: Tensor, segments: np.ndarray, n: int) -> Tensor:
    """Sum rows of x into n buckets; empty buckets are zero."""
    segments = np.asarray(segments, dtype=np.int64)
    return Tensor(
        np.asarray(_selector(segments, n) @ x.value),
        parents=(x,),
        backward=lambda g: (g[segments],),
    )


def segment_max(x: Tensor, segments: np.ndarray, n: int) -> Tensor:
    """Column-wise max of rows per bucket; empty buckets are zero.

    Tied maxima share the incoming gradient equally.
    """
    segments = np.asarray(segments, dtype=np.int64)
    out = np.full((n,) + x.shape[1:], -np.inf)
    np.maximum.at(out, segments, x.value)
    empty = np.isneginf(out)
    out[empty] = 0.0
    winners = (x.value == out[segments]) & ~empty[segments]
    ties = np.zeros_like(out)
    np.add.at(ties, segments, winners.astype(np.float64))
    share = np.divide(
        winners, ties[segments], out=np.zeros_like(x.value), where=ties[segments] > 0
    )
    return Tensor(out, parents=(x,), backward=lambda g: (g[segments] * share,))


def segment_softmax(scores: Tensor, segments: np.ndarray, n: int) -> Tensor:
    """Softmax of rows within each bucket, column by column."""
    segments = np.asarray(segments, dtype=np.int64)
    peak = np.full((n,) + scores.shape[1:], -np.inf)
    np.maximum.at(peak, segments, scores.value)
    e = np.exp(scores.value - peak[segments])
    total = np.asarray(_selector(segments, n) @ e)
    alpha = e / total[segments]

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        weighted = np.asarray(_selector(segments, n) @ (alpha * g))
        return (alpha * (g - weighted[segments]),)

    return Tensor(alpha, parents=(scores,), backward=backward)


def dropout(x: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout with a mask drawn from ``rng``."""
    if rate <= 0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return mul(x, keep)


def weighted_cross_entropy(
    logits: Tensor,
    labels: np.ndarray,
    class_weights: Sequence[float],
    mask: np.ndarray | None = None,
) -> Tensor:
    """Mean over included rows of w[label] · (−log softmax(logits)[label])."""
    labels = np.asarray(labels, dtype=np.int64)
    rows = np.arange(len(labels))
    include = np.ones(len(labels), dtype=bool) if mask is None else np.asarray(mask, bool)
    count = max(int(include.sum()), 1)
    weights = np.asarray(class_weights, dtype=np.float64)[labels] * include

    shifted = logits.value - logits.value.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(np.sum(weights * -log_probs[rows, labels])) / count

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.exp(log_probs)
        grad[rows, labels] -= 1.0
        return (grad * (weights / count)[:, None] * g,)

    return Tensor(np.asarray(loss), parents=(logits,), backward=backward)


def softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)
