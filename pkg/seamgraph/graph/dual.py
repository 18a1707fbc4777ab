"""Line (dual) graph of a mesh, standard and augmented, and its GCN normalization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp

from ..mesh.core import Mesh

Orientation = Literal["canonical", "random"]


@dataclass(frozen=True, eq=False)
class DualGraph:
    """Graph whose nodes are mesh edges; nodes adjacent iff the edges share an endpoint.

    ``adjacency`` is a symmetric 0/1 CSR matrix with zero diagonal. Row v lists the
    neighbours of dual node v in ascending order, which is the order the message
    passing layers (and the LSTM aggregator) consume them in.
    """

    adjacency: sp.csr_matrix
    dual_to_edge: np.ndarray
    features: np.ndarray
    augmented: bool = False
    edge_count: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.edge_count < 0:
            object.__setattr__(self, "edge_count", int(self.dual_to_edge.max(initial=-1)) + 1)

    @classmethod
    def from_adjacency(
        cls, adjacency: sp.spmatrix | np.ndarray, features: np.ndarray
    ) -> DualGraph:
        """Wrap an arbitrary symmetric 0/1 adjacency, one node per 'edge'."""
        adj = _binary(sp.csr_matrix(adjacency, dtype=np.float64))
        return cls(
            adjacency=adj,
            dual_to_edge=np.arange(adj.shape[0]),
            features=np.asarray(features, dtype=np.float64),
        )

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def senders(self) -> np.ndarray:
        """Source node of every directed message (CSR column order)."""
        return self.adjacency.indices.astype(np.int64)

    @cached_property
    def receivers(self) -> np.ndarray:
        """Target node of every directed message."""
        return np.repeat(np.arange(self.node_count), np.diff(self.adjacency.indptr))

    @cached_property
    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    @cached_property
    def normalized(self) -> sp.csr_matrix:
        return normalize_adjacency(self)

    def to_json(self) -> str:
        """Debug dump: node → mesh edge map and the undirected dual edge list."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        return json.dumps(
            {
                "nodes": self.node_count,
                "augmented": self.augmented,
                "dual_to_edge": self.dual_to_edge.tolist(),
                "edges": np.column_stack([upper.row, upper.col]).tolist(),
            }
        )


def _edge_incidence(mesh: Mesh) -> sp.csr_matrix:
    e = mesh.n_edges
    rows = np.repeat(np.arange(e), 2)
    return sp.csr_matrix(
        (np.ones(2 * e), (rows, mesh.edges.reshape(-1))), shape=(e, mesh.n_vertices)
    )


def _binary(adj: sp.spmatrix) -> sp.csr_matrix:
    adj = sp.csr_matrix(adj)
    adj.setdiag(0)
    adj.eliminate_zeros()
    adj.data[:] = 1.0
    adj.sort_indices()
    return adj


def build_dual(
    mesh: Mesh,
    features: np.ndarray,
    augmented: bool = False,
    orientation: Orientation = "canonical",
    seed: int = 0,
) -> DualGraph:
    """Build the dual graph with node features [x_i ‖ x_j].

    Standard mode has one node per edge with (i, j) in canonical order, or in a
    seeded random order when ``orientation="random"``. Augmented mode has nodes
    e and E + e for edge e, carrying [x_i ‖ x_j] and [x_j ‖ x_i]; both copies are
    adjacent to each other and to every copy of every edge sharing an endpoint.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or len(features) != mesh.n_vertices:
        raise ValueError(
            f"features have {len(features)} rows but the mesh has {mesh.n_vertices} vertices"
        )
    incidence = _edge_incidence(mesh)
    standard = _binary(incidence @ incidence.T)
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]

    if not augmented:
        if orientation == "random":
            flip = np.random.default_rng(seed).random(mesh.n_edges) < 0.5
            i, j = np.where(flip, j, i), np.where(flip, i, j)
        node_features = np.hstack([features[i], features[j]])
        return DualGraph(
            adjacency=standard,
            dual_to_edge=np.arange(mesh.n_edges),
            features=node_features,
            augmented=False,
            edge_count=mesh.n_edges,
        )

    twins = sp.identity(mesh.n_edges, format="csr")
    block = standard + twins
    adjacency = _binary(sp.bmat([[standard, block], [block, standard]]))
    node_features = np.vstack(
        [np.hstack([features[i], features[j]]), np.hstack([features[j], features[i]])]
    )
    return DualGraph(
        adjacency=adjacency,
        dual_to_edge=np.concatenate([np.arange(mesh.n_edges), np.arange(mesh.n_edges)]),
        features=node_features,
        augmented=True,
        edge_count=mesh.n_edges,
    )


def normalize_adjacency(dual: DualGraph) -> sp.csr_matrix:
    """Â = D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I."""
    a_hat = dual.adjacency + sp.identity(dual.node_count, format="csr")
    d = np.asarray(a_hat.sum(axis=1)).reshape(-1)
    scale = sp.diags(1.0 / np.sqrt(d))
    return sp.csr_matrix(scale @ a_hat @ scale)
