"""Thin thick seam regions to single-edge curves and remove tiny shells."""

from __future__ import annotations

import logging
from collections import deque

import networkx as nx
import numpy as np

from ..mesh.core import Mesh, SeamLabels, validate_labels
from ..mesh.topology import shells_from_labels
from ..models import SkeletonConfig

logger = logging.getLogger(__name__)


def vertex_probs(mesh: Mesh, probs: np.ndarray) -> np.ndarray:
    """Highest probability among the edges incident on each vertex."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (mesh.n_edges,):
        raise ValueError(f"expected {mesh.n_edges} edge probabilities, got {probs.shape}")
    out = np.zeros(mesh.n_vertices)
    np.maximum.at(out, mesh.edges[:, 0], probs)
    np.maximum.at(out, mesh.edges[:, 1], probs)
    return out


def select_candidates(vprobs: np.ndarray, fraction: float) -> list[int]:
    """Top ``fraction`` of vertices by probability, ties to the lower index.

    Vertices with zero probability are never candidates.
    """
    k = int(np.floor(fraction * len(vprobs)))
    order = np.lexsort((np.arange(len(vprobs)), -vprobs))[:k]
    return [int(v) for v in order if vprobs[v] > 0]


def _near_survivor(
    mesh: Mesh, start: int, alive: set[int], skip: int, max_distance: int
) -> bool:
    """Whether some vertex of ``alive`` other than ``skip`` is within reach of ``start``."""
    indptr, indices = mesh.adjacency.indptr, mesh.adjacency.indices
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        v, d = frontier.popleft()
        if v != skip and v in alive:
            return True
        if d == max_distance:
            continue
        for u in indices[indptr[v]:indptr[v + 1]].tolist():
            if u not in seen:
                seen.add(u)
                frontier.append((u, d + 1))
    return False


def _orphans_ok(
    mesh: Mesh, v: int, alive: set[int], removed: set[int], max_distance: int
) -> bool:
    """After dropping v, every removed vertex near it still has a survivor in range."""
    indptr, indices = mesh.adjacency.indptr, mesh.adjacency.indices
    affected = [v]
    seen = {v}
    frontier = deque([(v, 0)])
    while frontier:
        w, d = frontier.popleft()
        if d == max_distance:
            continue
        for u in indices[indptr[w]:indptr[w + 1]].tolist():
            if u not in seen:
                seen.add(u)
                frontier.append((u, d + 1))
                if u in removed:
                    affected.append(u)
    return all(_near_survivor(mesh, r, alive, v, max_distance) for r in affected)


def is_removable(
    mesh: Mesh,
    graph: nx.Graph,
    v: int,
    removed: set[int],
    max_distance: int,
    cut_vertices: set[int] | None = None,
) -> bool:
    """Whether candidate v may be dropped from the surviving set ``graph``.

    The component count must not change (v is neither isolated nor a cut vertex),
    v must not be a tip with a single surviving neighbour, and no removed vertex
    may end up farther than ``max_distance`` hops from the survivors.
    """
    if graph.degree[v] < 2:
        return False
    if cut_vertices is None:
        cut_vertices = set(nx.articulation_points(graph))
    if v in cut_vertices:
        return False
    return _orphans_ok(mesh, v, set(graph.nodes), removed, max_distance)


def candidate_graph(mesh: Mesh, vertices: list[int] | set[int]) -> nx.Graph:
    keep = np.zeros(mesh.n_vertices, dtype=bool)
    keep[list(vertices)] = True
    graph = nx.Graph()
    graph.add_nodes_from(sorted(int(v) for v in vertices))
    inside = keep[mesh.edges[:, 0]] & keep[mesh.edges[:, 1]]
    graph.add_edges_from(mesh.edges[inside].tolist())
    return graph


def thin_vertices(
    mesh: Mesh, vprobs: np.ndarray, candidates: list[int], max_distance: int
) -> tuple[nx.Graph, set[int]]:
    """Repeatedly drop the lowest-probability removable candidate.

    Returns the graph induced by the survivors and the set of removed vertices.
    """
    graph = candidate_graph(mesh, candidates)
    order = sorted(candidates, key=lambda v: (vprobs[v], v))
    removed: set[int] = set()
    while True:
        cut_vertices = set(nx.articulation_points(graph))
        for v in order:
            if v in removed:
                continue
            if is_removable(mesh, graph, v, removed, max_distance, cut_vertices):
                graph.remove_node(v)
                removed.add(v)
                break
        else:
            return graph, removed


def thin(mesh: Mesh, probs: np.ndarray, config: SkeletonConfig | None = None) -> SeamLabels:
    """Seam labels from the thinned candidate set.

    An edge is a seam when both endpoints survive and its probability is at least
    the lowest surviving vertex probability.
    """
    config = config or SkeletonConfig()
    probs = np.asarray(probs, dtype=np.float64)
    vprobs = vertex_probs(mesh, probs)
    candidates = select_candidates(vprobs, config.candidate_fraction)
    labels = np.zeros(mesh.n_edges, dtype=np.int8)
    if not candidates:
        return labels

    graph, removed = thin_vertices(mesh, vprobs, candidates, config.max_orphan_distance)
    alive = np.zeros(mesh.n_vertices, dtype=bool)
    alive[list(graph.nodes)] = True
    floor = float(vprobs[alive].min())
    both = alive[mesh.edges[:, 0]] & alive[mesh.edges[:, 1]]
    labels[both & (probs >= floor)] = 1
    logger.debug(
        "Thinned %d candidates of %r to %d vertices", len(candidates), mesh.name, alive.sum()
    )
    return labels


def _shell_neighbors(
    mesh: Mesh, labels: SeamLabels, face_to_shell: np.ndarray, shell: int
) -> dict[int, int]:
    """Neighbouring shells and the number of seam edges shared with each."""
    f1 = mesh.edge_faces[:, 0]
    f2 = mesh.edge_faces[:, 1]
    interior = (f2 >= 0) & (labels == 1)
    s1 = face_to_shell[f1[interior]]
    s2 = face_to_shell[f2[interior]]
    counts: dict[int, int] = {}
    for a, b in zip(s1.tolist(), s2.tolist(), strict=True):
        if a == b or shell not in (a, b):
            continue
        other = b if a == shell else a
        counts[other] = counts.get(other, 0) + 1
    return counts


def purge_tiny_shells(
    mesh: Mesh,
    labels: SeamLabels,
    min_shell_faces: int = 2,
    warnings: list[str] | None = None,
) -> SeamLabels:
    """Merge every shell of at most ``min_shell_faces`` faces into a neighbour.

    The neighbour sharing the most seam edges wins, then the larger one, then the
    lower index. Only the seams between the two are cleared, and shells are
    recomputed after each merge. Tiny shells without neighbours are left as they
    are and reported through ``warnings``.
    """
    labels = validate_labels(mesh, labels).copy()
    stranded: set[int] = set()
    while True:
        shells = shells_from_labels(mesh, labels)
        sizes = shells.sizes()
        first_face = np.full(shells.shell_count, mesh.n_faces)
        np.minimum.at(first_face, shells.face_to_shell, np.arange(mesh.n_faces))
        tiny = [
            s
            for s in range(shells.shell_count)
            if sizes[s] <= min_shell_faces and int(first_face[s]) not in stranded
        ]
        if not tiny:
            return labels

        s = tiny[0]
        neighbors = _shell_neighbors(mesh, labels, shells.face_to_shell, s)
        if not neighbors:
            stranded.add(int(first_face[s]))
            if warnings is not None:
                warnings.append(f"tiny shell at face {int(first_face[s])} has no neighbour")
            continue
        target = min(neighbors, key=lambda t: (-neighbors[t], -sizes[t], t))
        f1 = mesh.edge_faces[:, 0]
        f2 = mesh.edge_faces[:, 1]
        a = shells.face_to_shell[f1]
        b = np.where(f2 >= 0, shells.face_to_shell[np.maximum(f2, 0)], -1)
        shared = ((a == s) & (b == target)) | ((a == target) & (b == s))
        labels[shared & (labels == 1)] = 0
        logger.debug("Merged %d-face shell %d into shell %d", sizes[s], s, target)


def skeletonize(
    mesh: Mesh,
    probs: np.ndarray,
    config: SkeletonConfig | None = None,
    warnings: list[str] | None = None,
) -> SeamLabels:
    """Thin the probability field, then purge tiny shells."""
    config = config or SkeletonConfig()
    return purge_tiny_shells(mesh, thin(mesh, probs, config), config.min_shell_faces, warnings)
