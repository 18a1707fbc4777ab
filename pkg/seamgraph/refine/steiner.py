"""Distortion Steiner tree refinement of seam labels.

Each shell of the thresholded labels becomes a weighted graph whose terminals are
its seam vertices. An approximate Steiner tree through the shell connects them
along edges where the UV distortion jumps, and the union of those trees with the
seams already separating shells is the refined labelling.
"""

from __future__ import annotations

import heapq
import json
import logging
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from ..mesh.core import Mesh, SeamLabels, ShellPartition, validate_labels
from ..mesh.topology import shell_boundary_edges, shells_from_labels
from ..models import DstConfig

logger = logging.getLogger(__name__)

Edge = tuple[int, int]


def edge_weights(mesh: Mesh, distortion: np.ndarray, min_weight: float = 1e-6) -> np.ndarray:
    """l_e = 1 − |D_f1 − D_f2| clamped to [min_weight, 1]; boundary edges get 1."""
    distortion = np.asarray(distortion, dtype=np.float64)
    if distortion.shape != (mesh.n_faces,):
        raise ValueError(
            f"expected {mesh.n_faces} face distortion values, got shape {distortion.shape}"
        )
    f1 = mesh.edge_faces[:, 0]
    f2 = mesh.edge_faces[:, 1]
    interior = f2 >= 0
    raw = 1.0 - np.abs(distortion[f1] - distortion[np.maximum(f2, 0)])
    return np.where(interior, np.clip(raw, min_weight, 1.0), 1.0)


def seam_vertex_mask(mesh: Mesh, labels: SeamLabels) -> np.ndarray:
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[mesh.edges[np.asarray(labels) == 1].reshape(-1)] = True
    return mask


def collect_terminals(
    mesh: Mesh, labels: SeamLabels, shells: ShellPartition, shell: int
) -> np.ndarray:
    """Vertices of ``shell`` touching at least one seam edge, ascending."""
    labels = validate_labels(mesh, labels)
    in_shell = np.zeros(mesh.n_vertices, dtype=bool)
    in_shell[mesh.faces[shells.faces_of(shell)].reshape(-1)] = True
    return np.flatnonzero(in_shell & seam_vertex_mask(mesh, labels))


@dataclass(frozen=True, eq=False)
class ComponentGraph:
    """Weighted vertex graph of one shell plus its terminals."""

    shell: int
    graph: nx.Graph
    terminals: np.ndarray

    def pieces(self) -> list[tuple[nx.Graph, list[int]]]:
        """Connected pieces of the graph with the terminals they contain."""
        result = []
        for nodes in sorted(nx.connected_components(self.graph), key=min):
            terms = sorted(int(t) for t in self.terminals if int(t) in nodes)
            result.append((self.graph.subgraph(nodes), terms))
        return result


def component_graph(
    mesh: Mesh,
    labels: SeamLabels,
    shells: ShellPartition,
    shell: int,
    weights: np.ndarray,
    min_weight: float = 1e-6,
) -> ComponentGraph:
    """Edges of ``shell`` at l_e, with its seams and cut boundary at ``min_weight``."""
    labels = validate_labels(mesh, labels)
    f1 = mesh.edge_faces[:, 0]
    f2 = mesh.edge_faces[:, 1]
    s1 = shells.face_to_shell[f1]
    s2 = np.where(f2 >= 0, shells.face_to_shell[np.maximum(f2, 0)], -1)
    interior = (s1 == shell) & (s2 == shell)
    boundary = shell_boundary_edges(mesh, labels, shells) & ((s1 == shell) | (s2 == shell))

    graph = nx.Graph()
    for e in np.flatnonzero(interior | boundary).tolist():
        a, b = mesh.edges[e].tolist()
        w = float(weights[e]) if interior[e] and labels[e] == 0 else min_weight
        graph.add_edge(a, b, weight=w, edge=e)
    terminals = collect_terminals(mesh, labels, shells, shell)
    terminals = np.asarray([int(t) for t in terminals if int(t) in graph], dtype=np.int64)
    return ComponentGraph(shell=shell, graph=graph, terminals=terminals)


def dijkstra(graph: nx.Graph, source: int) -> tuple[dict[int, float], dict[int, int]]:
    """Shortest distances and predecessors; equal paths prefer smaller vertex ids."""
    dist = {source: 0.0}
    pred: dict[int, int] = {}
    done: set[int] = set()
    heap = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u in sorted(graph.adj[v]):
            if u in done:
                continue
            nd = d + graph.adj[v][u]["weight"]
            if u not in dist or nd < dist[u]:
                dist[u] = nd
                pred[u] = v
                heapq.heappush(heap, (nd, u))
            elif nd == dist[u] and v < pred.get(u, v):
                pred[u] = v
    return dist, pred


def _path(pred: dict[int, int], source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        path.append(pred[path[-1]])
    path.reverse()
    return path


def _key(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def tree_cost(graph: nx.Graph, edges: list[Edge]) -> float:
    return float(sum(graph.adj[a][b]["weight"] for a, b in edges))


def approx_steiner(graph: nx.Graph, terminals: list[int]) -> list[Edge]:
    """Metric-closure MST heuristic for the Steiner tree spanning ``terminals``.

    Shortest paths between all terminal pairs form a complete closure graph; its
    MST is expanded back into paths, the union is reduced to its MST, and
    non-terminal leaves are pruned. Returns sorted vertex pairs.
    """
    terminals = sorted(set(int(t) for t in terminals))
    if len(terminals) < 2:
        return []
    runs = {t: dijkstra(graph, t) for t in terminals}

    closure = nx.Graph()
    for i, a in enumerate(terminals):
        for b in terminals[i + 1:]:
            if b not in runs[a][0]:
                raise ValueError(f"terminals {a} and {b} lie in different components")
            closure.add_edge(a, b, weight=runs[a][0][b])
    closure_tree = nx.minimum_spanning_tree(closure, algorithm="kruskal")

    union = nx.Graph()
    for a, b in sorted(_key(a, b) for a, b in closure_tree.edges()):
        path = _path(runs[a][1], a, b)
        for u, v in zip(path[:-1], path[1:], strict=True):
            union.add_edge(u, v, weight=graph.adj[u][v]["weight"])
    tree = nx.minimum_spanning_tree(union, algorithm="kruskal")

    keep = set(terminals)
    leaves = [v for v in tree.nodes if tree.degree[v] == 1 and v not in keep]
    while leaves:
        tree.remove_nodes_from(leaves)
        leaves = [v for v in tree.nodes if tree.degree[v] == 1 and v not in keep]
    return sorted(_key(a, b) for a, b in tree.edges())


@dataclass
class SteinerResult:
    """Refined labels plus the per-shell trees and gap paths that produced them."""

    labels: SeamLabels
    trees: dict[int, list[int]] = field(default_factory=dict)
    gap_edges: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        """Debug dump of every tree as a list of mesh edge ids."""
        return json.dumps(
            {
                "trees": {str(s): edges for s, edges in sorted(self.trees.items())},
                "gap_edges": self.gap_edges,
                "warnings": self.warnings,
            }
        )


def _seam_hops(mesh: Mesh, seam: np.ndarray, source: int) -> np.ndarray:
    ends = mesh.edges[seam]
    n = mesh.n_vertices
    graph = sp.csr_matrix(
        (np.ones(len(ends)), (ends[:, 0], ends[:, 1])), shape=(n, n)
    )
    return shortest_path(graph, directed=False, unweighted=True, indices=source)


def _gap_path(
    mesh: Mesh,
    seam: np.ndarray,
    weights: np.ndarray,
    start: int,
    eligible: np.ndarray,
    max_edges: int,
) -> list[int] | None:
    """Cheapest non-seam path from ``start`` to an eligible vertex.

    Paths are ranked by hop count, then by total weight, then by target id, and
    may only pass through vertices without seams.
    """
    on_seam = seam_vertex_mask(mesh, seam.astype(np.int8))
    adjacency = mesh.adjacency
    best: dict[int, tuple[int, float]] = {start: (0, 0.0)}
    back: dict[int, tuple[int, int]] = {}
    heap = [(0, 0.0, start)]
    while heap:
        hops, length, v = heapq.heappop(heap)
        if best.get(v, (hops, length)) < (hops, length):
            continue
        if v != start and eligible[v]:
            path = []
            while v != start:
                prev, e = back[v]
                path.append(e)
                v = prev
            return path[::-1]
        if hops == max_edges or (v != start and on_seam[v]):
            continue
        for u in sorted(adjacency[v].indices.tolist()):
            e = mesh.edge_id(v, u)
            if seam[e] or mesh.boundary_edge_mask[e]:
                continue
            cost = (hops + 1, length + float(weights[e]))
            if u not in best or cost < best[u]:
                best[u] = cost
                back[u] = (v, e)
                heapq.heappush(heap, (cost[0], cost[1], u))
    return None


def close_gaps(
    mesh: Mesh,
    seam: np.ndarray,
    weights: np.ndarray,
    config: DstConfig,
) -> list[int]:
    """Join dangling seam ends to nearby seams; returns the added edge ids.

    A dangling end is a seam vertex off the mesh boundary with one seam edge. Valid
    targets lie on another seam piece or at least ``min_loop_edges`` seam hops
    away, so short spurs stay as they are. ``seam`` is updated in place.
    """
    added: list[int] = []
    boundary = mesh.boundary_vertex_mask
    while True:
        degree = np.bincount(mesh.edges[seam].reshape(-1), minlength=mesh.n_vertices)
        dangling = np.flatnonzero((degree == 1) & ~boundary)
        progress = False
        for v in dangling.tolist():
            degree = np.bincount(mesh.edges[seam].reshape(-1), minlength=mesh.n_vertices)
            if degree[v] != 1:
                continue
            hops = _seam_hops(mesh, seam, v)
            eligible = (degree > 0) & (hops >= config.min_loop_edges)
            eligible[v] = False
            path = _gap_path(mesh, seam, weights, v, eligible, config.max_gap_edges)
            if path is None:
                continue
            seam[path] = True
            added.extend(path)
            progress = True
        if not progress:
            return added


def refine_dst(
    mesh: Mesh,
    probs: np.ndarray,
    distortion: np.ndarray,
    config: DstConfig | None = None,
) -> SteinerResult:
    """Threshold, split into shells and rebuild each shell's seams as a Steiner tree."""
    config = config or DstConfig()
    if not 0.0 < config.cut_threshold < 1.0:
        raise ValueError(f"cut_threshold must lie in (0, 1), got {config.cut_threshold}")
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (mesh.n_edges,):
        raise ValueError(f"expected {mesh.n_edges} edge probabilities, got {probs.shape}")
    labels = (probs >= config.cut_threshold).astype(np.int8)
    weights = edge_weights(mesh, distortion, config.min_weight)
    shells = shells_from_labels(mesh, labels)
    cut_boundary = shell_boundary_edges(mesh, labels, shells)

    result = SteinerResult(labels=labels)
    seam = cut_boundary.copy()
    for s in range(shells.shell_count):
        component = component_graph(mesh, labels, shells, s, weights, config.min_weight)
        if len(component.terminals) < 2:
            continue
        tree_edges: list[int] = []
        pieces = [p for p in component.pieces() if p[1]]
        if len(pieces) > 1:
            result.warnings.append(f"shell {s}: terminals split across {len(pieces)} pieces")
        for piece, terminals in pieces:
            if len(terminals) < 2:
                continue
            for a, b in approx_steiner(piece, terminals):
                tree_edges.append(int(piece.adj[a][b]["edge"]))
        tree_edges.sort()
        result.trees[s] = tree_edges
        seam[tree_edges] = True

    if config.close_gaps:
        result.gap_edges = close_gaps(mesh, seam, weights, config)

    result.labels = seam.astype(np.int8)
    logger.debug(
        "DST on %r: %d trees, %d gap edges, %d seam edges",
        mesh.name,
        len(result.trees),
        len(result.gap_edges),
        int(seam.sum()),
    )
    return result


def refine_labels(
    mesh: Mesh,
    probs: np.ndarray,
    distortion: np.ndarray,
    cut_threshold: float | None = None,
    config: DstConfig | None = None,
) -> SeamLabels:
    """Refined seam labels; see ``refine_dst``."""
    config = config or DstConfig()
    if cut_threshold is not None:
        config = config.model_copy(update={"cut_threshold": cut_threshold})
    return refine_dst(mesh, probs, distortion, config).labels
