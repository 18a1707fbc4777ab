"""Tests for distortion Steiner tree refinement."""

import itertools
import json

import networkx as nx
import numpy as np
import pytest

from seamgraph.mesh.core import Mesh
from seamgraph.mesh.topology import shells_from_labels
from seamgraph.models import DstConfig
from seamgraph.refine.steiner import (
    approx_steiner,
    collect_terminals,
    component_graph,
    dijkstra,
    edge_weights,
    refine_dst,
    refine_labels,
    tree_cost,
)
from seamgraph.unwrap.distortion import avg_distortion
from seamgraph.unwrap.parameterize import unwrap
from tests.fixtures import equator_edges, grid, latlong_sphere


def _square() -> Mesh:
    return Mesh(
        vertices=np.array([[0.0, 0, 0], [1.0, 0, 0], [1.0, 1, 0], [0.0, 1, 0]]),
        faces=np.array([[0, 1, 2], [0, 2, 3]]),
        name="square",
    )


def _random_instance(seed: int) -> tuple[nx.Graph, list[int]]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 11))
    graph = nx.Graph()
    for v in range(1, n):
        graph.add_edge(int(rng.integers(0, v)), v)
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < 0.3:
            graph.add_edge(a, b)
    for a, b in graph.edges:
        graph.edges[a, b]["weight"] = float(rng.uniform(0.1, 1.0))
    k = int(rng.integers(2, min(4, n) + 1))
    return graph, sorted(int(t) for t in rng.choice(n, size=k, replace=False))


def _optimal_cost(graph: nx.Graph, terminals: list[int]) -> float:
    """Exhaustive Steiner tree cost: the cheapest MST over terminal supersets."""
    others = [v for v in graph.nodes if v not in terminals]
    best = np.inf
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            sub = graph.subgraph(terminals + list(extra))
            if nx.is_connected(sub):
                mst = nx.minimum_spanning_tree(sub)
                best = min(best, mst.size(weight="weight"))
    return best


class TestEdgeWeights:
    @pytest.mark.parametrize(
        "d1,d2,expected",
        [(1.0, 1.0, 1.0), (1.5, 0.5, 1e-6), (2.3, 1.0, 1e-6), (1.2, 1.0, 0.8)],
    )
    def test_interior_edge(self, d1, d2, expected):
        mesh = _square()
        w = edge_weights(mesh, np.array([d1, d2]))
        assert w[mesh.edge_id(0, 2)] == pytest.approx(expected)

    def test_boundary_edges_get_one(self):
        mesh = _square()
        w = edge_weights(mesh, np.array([3.0, 0.1]))
        assert (w[mesh.boundary_edge_mask] == 1.0).all()

    def test_missing_distortion(self):
        with pytest.raises(ValueError, match="face distortion"):
            edge_weights(_square(), np.array([1.0]))


class TestTerminals:
    def test_dangling_path(self):
        mesh = grid(4)
        labels = np.zeros(mesh.n_edges, dtype=np.int8)
        labels[[mesh.edge_id(6, 7), mesh.edge_id(7, 8)]] = 1
        shells = shells_from_labels(mesh, labels)
        assert shells.shell_count == 1
        assert collect_terminals(mesh, labels, shells, 0).tolist() == [6, 7, 8]

    def test_no_seams(self):
        mesh = grid(2)
        labels = np.zeros(mesh.n_edges, dtype=np.int8)
        shells = shells_from_labels(mesh, labels)
        assert len(collect_terminals(mesh, labels, shells, 0)) == 0


class TestApproxSteiner:
    def test_two_terminals_is_shortest_path(self):
        graph = nx.Graph()
        graph.add_weighted_edges_from([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 5.0)])
        assert approx_steiner(graph, [0, 3]) == [(0, 1), (1, 2), (2, 3)]

    def test_star(self):
        graph = nx.Graph()
        graph.add_weighted_edges_from([(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
        edges = approx_steiner(graph, [1, 2, 3])
        assert edges == [(0, 1), (0, 2), (0, 3)]
        assert tree_cost(graph, edges) == pytest.approx(_optimal_cost(graph, [1, 2, 3]))

    def test_single_terminal(self):
        graph = nx.path_graph(3)
        nx.set_edge_attributes(graph, 1.0, "weight")
        assert approx_steiner(graph, [1]) == []

    def test_disconnected_terminals(self):
        graph = nx.Graph()
        graph.add_weighted_edges_from([(0, 1, 1.0), (2, 3, 1.0)])
        with pytest.raises(ValueError, match="different components"):
            approx_steiner(graph, [0, 3])

    def test_within_factor_two_of_optimum(self):
        for seed in range(100):
            graph, terminals = _random_instance(seed)
            edges = approx_steiner(graph, terminals)
            tree = nx.Graph(edges)
            assert all(graph.has_edge(a, b) for a, b in edges)
            assert nx.is_tree(tree)
            assert set(terminals) <= set(tree.nodes)
            cost = tree_cost(graph, edges)
            optimum = _optimal_cost(graph, terminals)
            assert optimum - 1e-12 <= cost <= 2.0 * optimum + 1e-12, seed

    def test_dijkstra_prefers_smaller_predecessor(self):
        graph = nx.Graph()
        graph.add_weighted_edges_from([(0, 2, 1.0), (0, 1, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
        dist, pred = dijkstra(graph, 0)
        assert dist[3] == 2.0
        assert pred[3] == 1


class TestRefine:
    def test_closed_equator_is_fixed_point(self):
        mesh, labels = latlong_sphere()
        refined = refine_labels(mesh, labels.astype(float), np.ones(mesh.n_faces))
        np.testing.assert_array_equal(refined, labels)
        again = refine_labels(mesh, refined.astype(float), np.ones(mesh.n_faces))
        np.testing.assert_array_equal(again, refined)

    def test_closes_equator_gap(self):
        mesh, labels = latlong_sphere()
        ring = equator_edges(mesh, labels)
        broken = labels.copy()
        broken[ring[3:5]] = 0
        assert shells_from_labels(mesh, broken).shell_count == 1
        result = refine_dst(mesh, broken.astype(float), np.ones(mesh.n_faces))
        assert len(result.gap_edges) > 0
        assert shells_from_labels(mesh, result.labels).shell_count == 2

    def test_gap_kept_without_closing(self):
        mesh, labels = latlong_sphere()
        broken = labels.copy()
        broken[equator_edges(mesh, labels)[3:5]] = 0
        config = DstConfig(close_gaps=False)
        result = refine_dst(mesh, broken.astype(float), np.ones(mesh.n_faces), config)
        assert result.gap_edges == []
        assert shells_from_labels(mesh, result.labels).shell_count == 1

    def test_spurious_edge_does_not_raise_distortion(self):
        mesh = grid(4)
        labels = np.zeros(mesh.n_edges, dtype=np.int8)
        labels[mesh.edge_id(6, 7)] = 1
        refined = refine_labels(mesh, labels.astype(float), np.ones(mesh.n_faces))
        before = avg_distortion(unwrap(mesh, labels).face_distortion)
        after = avg_distortion(unwrap(mesh, refined).face_distortion)
        assert after <= before + 1e-12

    def test_tree_dump(self):
        mesh, labels = latlong_sphere()
        result = refine_dst(mesh, labels.astype(float), np.ones(mesh.n_faces))
        payload = json.loads(result.to_json())
        assert set(payload) == {"trees", "gap_edges", "warnings"}
        assert set(payload["trees"]) == {"0", "1"}

    def test_rejects_bad_inputs(self):
        mesh = grid(2)
        with pytest.raises(ValueError, match="edge probabilities"):
            refine_dst(mesh, np.zeros(3), np.ones(mesh.n_faces))
        with pytest.raises(ValueError):
            refine_labels(mesh, np.zeros(mesh.n_edges), np.ones(mesh.n_faces), cut_threshold=1.0)

    def test_config_threshold_used_without_override(self):
        mesh, labels = latlong_sphere()
        probs = np.where(labels == 1, 0.5, 0.0)
        ones = np.ones(mesh.n_faces)
        low = refine_labels(mesh, probs, ones, config=DstConfig(cut_threshold=0.4))
        np.testing.assert_array_equal(low, labels)
        high = refine_labels(mesh, probs, ones, config=DstConfig(cut_threshold=0.6))
        assert not high.any()

    def test_explicit_threshold_overrides_config(self):
        mesh, labels = latlong_sphere()
        probs = np.where(labels == 1, 0.5, 0.0)
        config = DstConfig(cut_threshold=0.6)
        refined = refine_labels(mesh, probs, np.ones(mesh.n_faces), 0.4, config)
        np.testing.assert_array_equal(refined, labels)


class TestRefineUnwrapDistortion:
    def test_seam_edges_cost_min_weight(self):
        mesh, labels = latlong_sphere()
        broken = labels.copy()
        broken[equator_edges(mesh, labels)[3:5]] = 0
        distortion = unwrap(mesh, broken).face_distortion
        weights = edge_weights(mesh, distortion)
        shells = shells_from_labels(mesh, broken)
        component = component_graph(mesh, broken, shells, 0, weights)
        for _, _, data in component.graph.edges(data=True):
            if broken[data["edge"]] == 1:
                assert data["weight"] == 1e-6
            else:
                assert data["weight"] == weights[data["edge"]]

    def test_closed_equator_is_fixed_point(self):
        mesh, labels = latlong_sphere()
        distortion = unwrap(mesh, labels).face_distortion
        refined = refine_labels(mesh, labels.astype(float), distortion)
        np.testing.assert_array_equal(refined, labels)

    def test_gap_closed_and_distortion_drops(self):
        mesh, labels = latlong_sphere()
        broken = labels.copy()
        broken[equator_edges(mesh, labels)[3:5]] = 0
        before = unwrap(mesh, broken).face_distortion
        refined = refine_labels(mesh, broken.astype(float), before)
        np.testing.assert_array_equal(refined, labels)
        assert shells_from_labels(mesh, refined).shell_count == 2
        after = unwrap(mesh, refined).face_distortion
        assert avg_distortion(after) < avg_distortion(before)
