import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import close, edge_list, naive_modularity, random_graph, triangle, two_triangles
from streamclust.graph_io import MemoryGraph, NodeStream
from streamclust.modularity import ClusteringState, modularity, stream_pass_assign
from streamclust.quotient import (QuotientEdgeAccumulator, QuotientGraph, accumulate_edges, contract, finalize,
                                  identity_partition, project, quotient_modularity, relabel)


def build(g, labels):
    acc = QuotientEdgeAccumulator(g.n)
    for rec in g.records():
        accumulate_edges(rec, labels, acc)
    return acc, finalize(acc)


def volumes(g, labels):
    deg = g.degrees()
    out = {}
    for v, c in enumerate(labels):
        out[c] = out.get(c, 0) + int(deg[v])
    return out


class TestAccumulator:
    def test_two_triangles(self):
        acc, _ = build(two_triangles(), [0, 0, 0, 3, 3, 3])
        assert dict(acc.items()) == {(0, 0): 6, (3, 3): 6, (0, 3): 1}
        assert acc.members == {0: 3, 3: 3}

    def test_single_cluster_triangle(self):
        acc, _ = build(triangle(), [0, 0, 0])
        assert dict(acc.items()) == {(0, 0): 6}

    def test_bipartite_has_no_self_pairs(self):
        # 4-cycle 0-1-2-3 split into its two colour classes
        g = MemoryGraph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0])
        acc, _ = build(g, [0, 1, 0, 1])
        assert dict(acc.items()) == {(0, 1): 4}

    def test_keys_normalized_and_self_pairs_even(self):
        rng = np.random.default_rng(3)
        g = random_graph(40, 0.2, rng, max_weight=5)
        acc, _ = build(g, rng.integers(0, 40, size=40).tolist())
        for (a, b), w in acc.items():
            assert a <= b and w > 0
            if a == b:
                assert w % 2 == 0

    def test_hooked_into_stream_pass(self, write_graph):
        g = two_triangles()
        acc = QuotientEdgeAccumulator(g.n)
        with NodeStream(write_graph(g)) as s:
            state = stream_pass_assign(s, quotient_hook=acc)
        qg = finalize(acc)
        assert close(quotient_modularity(qg, identity_partition(qg)), modularity(state, g.records()))


class TestFinalize:
    def test_two_triangles(self):
        _, qg = build(two_triangles(), [0, 0, 0, 3, 3, 3])
        assert qg.n == 2
        assert qg.node_weight.tolist() == [3, 3]
        assert qg.self_loop.tolist() == [6, 6]
        assert qg.neighbors(0) == [(1, 1), (0, 6)]
        assert qg.degree.tolist() == [7, 7]
        assert qg.id_map.tolist() == [0, 3]

    def test_singletons_reproduce_input(self):
        g = random_graph(30, 0.2, np.random.default_rng(1), max_weight=4)
        _, qg = build(g, list(range(30)))
        assert not qg.self_loop.any()
        assert np.array_equal(qg.indptr, g.indptr)
        assert np.array_equal(qg.indices, g.indices)
        assert np.array_equal(qg.weights, g.weights)

    def test_single_cluster(self):
        g = two_triangles()
        _, qg = build(g, [0] * 6)
        assert qg.n == 1 and qg.num_edges == 0
        assert qg.self_loop.tolist() == [2 * g.total_weight]
        assert qg.degree.tolist() == [2 * g.total_weight]

    def test_isolated_clusters_kept(self):
        g = MemoryGraph.from_edges(4, [0], [1])
        _, qg = build(g, [0, 0, 2, 3])
        assert qg.n == 3
        assert qg.degree.tolist() == [2, 0, 0]
        assert qg.node_weight.sum() == 4

    @pytest.mark.parametrize("seed", range(5))
    def test_degree_and_weight_identities(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(60, 0.1, rng, max_weight=3)
        labels = rng.integers(0, 12, size=60).tolist()
        _, qg = build(g, labels)
        vol = volumes(g, labels)
        assert qg.degree.tolist() == [vol[int(c)] for c in qg.id_map]
        assert qg.total_weight == g.total_weight
        assert qg.node_weight.sum() == g.n


class TestQuotientModularity:
    def test_two_triangles(self):
        _, qg = build(two_triangles(), [0, 0, 0, 3, 3, 3])
        assert close(quotient_modularity(qg, [0, 1]), 5 / 14)
        assert close(quotient_modularity(qg, [0, 0]), 0.0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 200), k=st.integers(1, 30))
    def test_contraction_oracle(self, seed, n, k):
        rng = np.random.default_rng(seed)
        g = random_graph(n, min(1.0, 4.0 / n), rng, max_weight=3)
        if g.num_edges == 0:
            return
        labels = rng.integers(0, min(k, n), size=n).tolist()
        _, qg = build(g, labels)
        q = quotient_modularity(qg, identity_partition(qg))
        assert abs(q - naive_modularity(edge_list(g), labels)) <= 1e-9

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_expansion_oracle(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(50, 0.1, rng, max_weight=3)
        if g.num_edges == 0:
            return
        labels = rng.integers(0, 15, size=50).tolist()
        _, qg = build(g, labels)
        part = rng.integers(0, 5, size=qg.n)
        state = ClusteringState.from_assignments(labels, g.degrees().tolist(), g.total_weight)
        projected = project(qg, part, state)
        assert abs(modularity(projected, g.records()) - quotient_modularity(qg, part)) <= 1e-9


class TestProject:
    def setup_method(self):
        self.g = two_triangles()
        self.labels = [0, 0, 0, 3, 3, 3]
        _, self.qg = build(self.g, self.labels)
        self.state = ClusteringState.from_assignments(self.labels, self.g.degrees().tolist(), self.g.total_weight)

    def test_identity(self):
        out = project(self.qg, identity_partition(self.qg), self.state)
        assert relabel(out.assignments).tolist() == relabel(self.labels).tolist()
        out.check()
        assert out.volume[:2] == [7, 7] and out.size[:2] == [3, 3]

    def test_merge(self):
        out = project(self.qg, [4, 4], self.state)
        assert out.assignments == [0] * 6
        assert out.num_clusters == 1 and out.volume[0] == 14
        out.check()

    def test_rejects_partial_partition(self):
        with pytest.raises(ValueError):
            project(self.qg, [0], self.state)

    def test_needs_id_map(self):
        qg = QuotientGraph.from_memory_graph(self.g)
        with pytest.raises(ValueError):
            project(qg, identity_partition(qg), self.state)


class TestContract:
    def test_relabel_first_appearance(self):
        assert relabel([5, 2, 5, 9, 2]).tolist() == [0, 1, 0, 2, 1]

    def test_matches_accumulator(self):
        rng = np.random.default_rng(8)
        g = random_graph(40, 0.15, rng, max_weight=3)
        labels = rng.integers(0, 8, size=40)
        coarse, dense = contract(QuotientGraph.from_memory_graph(g), labels)
        _, qg = build(g, relabel(labels).tolist())
        assert np.array_equal(coarse.self_loop, qg.self_loop)
        assert np.array_equal(coarse.indptr, qg.indptr)
        assert np.array_equal(coarse.weights, qg.weights)
        assert coarse.node_weight.tolist() == np.bincount(dense).tolist()

    def test_two_level_contraction_preserves_modularity(self):
        rng = np.random.default_rng(12)
        g = random_graph(60, 0.1, rng, max_weight=2)
        base = QuotientGraph.from_memory_graph(g)
        p1 = rng.integers(0, 20, size=60)
        c1, l1 = contract(base, p1)
        p2 = rng.integers(0, 6, size=c1.n)
        c2, l2 = contract(c1, p2)
        expanded = l2[l1]
        assert close(quotient_modularity(c2, identity_partition(c2)), quotient_modularity(base, expanded))
        assert close(quotient_modularity(c1, p2), quotient_modularity(base, expanded))


def test_debug_dump_round_trips_weights(tmp_path):
    _, qg = build(two_triangles(), [0, 0, 0, 3, 3, 3])
    path = tmp_path / "q.graph"
    qg.write_metis(path)
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("%")]
    assert lines[0].split()[2] == "1"
    assert lines[1:] == ["2 1 1 6", "1 1 2 6"]
