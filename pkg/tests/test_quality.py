import networkx as nx
import numpy as np
import pytest
from conftest import dense_adjacency, naive_modularity, random_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from dynleiden.graph import build_graph, total_edge_weight
from dynleiden.quality import (
    audit_connectivity,
    delta_modularity,
    modularity,
    partition_stats,
)

TRIANGLES = [0, 0, 0, 1, 1, 1]


def to_networkx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.vertex_count))
    src, dst, w = g.to_edges()
    for a, b, x in zip(src, dst, w):
        if a < b:
            h.add_edge(int(a), int(b), weight=float(x))
    return h


class TestModularity:
    def test_barbell_triangles(self, barbell):
        assert modularity(barbell, TRIANGLES) == pytest.approx(0.357143, abs=1e-6)
        assert modularity(barbell, TRIANGLES) == pytest.approx(5 / 14, abs=1e-12)

    def test_single_community_is_zero(self, barbell):
        assert modularity(barbell, np.zeros(6, int)) == pytest.approx(0, abs=1e-15)

    def test_barbell_singletons(self, barbell):
        assert modularity(barbell, np.arange(6)) == pytest.approx(-34 / 196, abs=1e-12)

    def test_empty_graph(self):
        assert modularity(build_graph([], 3), [0, 1, 2]) == 0.0

    def test_two_triangles(self, two_triangles):
        assert modularity(two_triangles, TRIANGLES) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_networkx(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(2, 20)), 0.3, weighted=True)
        c = rng.integers(0, 4, size=g.vertex_count)
        if total_edge_weight(g) == 0:
            return
        comms = [set(np.flatnonzero(c == k).tolist()) for k in np.unique(c)]
        expect = nx.community.modularity(to_networkx(g), comms, weight="weight")
        assert modularity(g, c) == pytest.approx(expect, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_edge_fraction_counting(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(2, 16)), 0.35)
        if total_edge_weight(g) == 0:
            return
        c = rng.integers(0, 3, size=g.vertex_count)
        # unit weights: Q = sum_c [ e_c / M - (d_c / 2M)^2 ]
        src, dst, _ = g.to_edges()
        und = src < dst
        m = und.sum()
        deg = np.bincount(src, minlength=g.vertex_count)
        q = 0.0
        for k in np.unique(c):
            inside = np.sum((c[src[und]] == k) & (c[dst[und]] == k))
            q += inside / m - (deg[c == k].sum() / (2 * m)) ** 2
        assert modularity(g, c) == pytest.approx(q, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_self_loops_match_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(2, 12)), 0.4, weighted=True, loops=True)
        c = rng.integers(0, 3, size=g.vertex_count)
        assert modularity(g, c) == pytest.approx(naive_modularity(dense_adjacency(g), c), abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_relabel_invariance(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, 12, 0.3)
        c = rng.integers(0, 5, size=12)
        perm = rng.permutation(50)
        assert modularity(g, perm[c]) == pytest.approx(modularity(g, c), abs=1e-12)

    def test_range(self, corpus):
        rng = np.random.default_rng(0)
        for g in corpus:
            for _ in range(5):
                q = modularity(g, rng.integers(0, 10, size=g.vertex_count))
                assert -0.5 <= q <= 1


def move_oracle(g, c, i, target):
    """Inputs of the delta formula and the true Q difference of moving i."""
    c = np.asarray(c).copy()
    k = g.vertex_weights()
    m = total_edge_weight(g)
    nbrs, w = g.edges(i)
    d = c[i]
    k_c = float(np.sum(w[(c[nbrs] == target) & (nbrs != i)]))
    k_d = float(np.sum(w[(c[nbrs] == d) & (nbrs != i)]))
    sig_c = float(k[c == target].sum()) - (k[i] if target == d else 0.0)
    sig_d = float(k[c == d].sum())
    before = modularity(g, c)
    c[i] = target
    return (k_c, k_d, k[i], sig_c, sig_d, m), modularity(g, c) - before


class TestDeltaModularity:
    def test_barbell_move_vertex_two(self):
        dq = delta_modularity(1, 2, 3, 7, 7, 7)
        assert dq == pytest.approx(-23 / 98, abs=1e-12)
        assert dq == pytest.approx(0.122449 - 0.357143, abs=1e-6)

    def test_matches_q_difference_on_barbell(self, barbell):
        args, diff = move_oracle(barbell, [0, 0, 0, 3, 3, 3], 2, 3)
        assert args == (1, 2, 3, 7, 7, 7)
        assert delta_modularity(*args) == pytest.approx(diff, abs=1e-12)

    def test_staying_put_is_zero(self):
        # c = d: K_i->c = K_i->d and sigma_c = sigma_d - K_i
        assert delta_modularity(2, 2, 3, 4, 7, 7) == pytest.approx(0, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_equals_modularity_difference(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(2, 30)), 0.2, weighted=True)
        if total_edge_weight(g) == 0:
            return
        c = rng.integers(0, 5, size=g.vertex_count)
        i = int(rng.integers(g.vertex_count))
        target = int(rng.integers(0, 6))
        if target == c[i]:
            return
        args, diff = move_oracle(g, c, i, target)
        assert delta_modularity(*args) == pytest.approx(diff, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_antisymmetry(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, 15, 0.3)
        if total_edge_weight(g) == 0:
            return
        c = rng.integers(0, 4, size=15)
        i = int(rng.integers(15))
        src_comm, dst_comm = int(c[i]), int((c[i] + 1) % 4)
        fwd, _ = move_oracle(g, c, i, dst_comm)
        c2 = c.copy()
        c2[i] = dst_comm
        back, _ = move_oracle(g, c2, i, src_comm)
        assert delta_modularity(*fwd) == pytest.approx(-delta_modularity(*back), abs=1e-9)


class TestAudit:
    def test_barbell_triangles_connected(self, barbell):
        assert audit_connectivity(barbell, TRIANGLES) == []

    def test_two_isolated_vertices(self):
        assert audit_connectivity(build_graph([], 2), [4, 4]) == [4]

    def test_partial_path(self):
        g = build_graph([(0, 1, 1)], 3)
        assert audit_connectivity(g, [0, 0, 0]) == [0]

    def test_disconnected_via_outside_path(self, barbell):
        # 0 and 4 are linked only through vertices of another community
        assert audit_connectivity(barbell, [0, 1, 1, 1, 0, 2]) == [0]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_networkx_components(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, 14, 0.2)
        c = rng.integers(0, 3, size=14)
        h = to_networkx(g)
        expect = [
            int(k) for k in np.unique(c)
            if not nx.is_connected(h.subgraph(np.flatnonzero(c == k).tolist()))
        ]
        assert audit_connectivity(g, c) == expect


class TestPartitionStats:
    def test_barbell(self, barbell):
        s = partition_stats(barbell, TRIANGLES)
        assert s.community_count == 2
        assert s.sizes.tolist() == [3, 3]
        assert s.disconnected_count == 0
        assert s.size_histogram == {3: 2}
        assert s.modularity == pytest.approx(5 / 14)

    def test_singletons(self, barbell):
        s = partition_stats(barbell, np.arange(6))
        assert s.community_count == 6
        assert s.sizes.sum() == 6
