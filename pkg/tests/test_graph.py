import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynleiden.graph import (
    BatchUpdate,
    GraphError,
    apply_batch,
    build_graph,
    normalize_batch,
    total_edge_weight,
    validate_graph,
)


def adjacency_set(g):
    src, dst, w = g.to_edges()
    return {(int(a), int(b), float(x)) for a, b, x in zip(src, dst, w)}


edge_lists = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(1, 4)),
            max_size=30,
        ),
    )
)


class TestBuildGraph:
    def test_triangle_offsets(self, triangle):
        assert triangle.offsets.tolist() == [0, 2, 4, 6]
        assert triangle.vertex_count == 3
        assert triangle.edge_count == 3

    def test_one_direction_is_symmetrized(self):
        g = build_graph([(0, 1, 1)], 2)
        assert g.has_edge(0, 1) and g.has_edge(1, 0)

    def test_barbell_weighted_degrees(self, barbell):
        assert barbell.vertex_weights().tolist() == [2, 2, 3, 3, 2, 2]

    def test_duplicate_pair_keeps_last_weight(self):
        g = build_graph([(0, 1, 1), (1, 0, 5), (0, 1, 3)], 2)
        assert g.edge_weight(0, 1) == 3 and g.edge_weight(1, 0) == 3
        assert g.directed_edge_count == 2

    def test_out_of_range_id(self):
        with pytest.raises(GraphError):
            build_graph([(0, 3, 1)], 3)

    @pytest.mark.parametrize("w", [0.0, -1.0, float("nan")])
    def test_bad_weight(self, w):
        with pytest.raises(GraphError):
            build_graph([(0, 1, w)], 2)

    def test_self_loop_counted_once(self):
        g = build_graph([(0, 0, 4), (0, 1, 1)], 2)
        assert g.vertex_weights().tolist() == [5, 1]
        assert total_edge_weight(g) == 3.0

    def test_weights_are_float32(self, barbell):
        assert barbell.weights.dtype == np.float32
        assert barbell.neighbors.dtype == np.int32

    def test_isolated_vertices(self):
        g = build_graph([], 4)
        assert g.offsets.tolist() == [0, 0, 0, 0, 0]
        assert total_edge_weight(g) == 0

    @settings(max_examples=60, deadline=None)
    @given(edge_lists)
    def test_invariants_hold(self, data):
        n, edges = data
        g = build_graph(edges, n)
        validate_graph(g)
        np.testing.assert_allclose(g.vertex_weights().sum(), 2 * total_edge_weight(g))


class TestValidate:
    def test_detects_asymmetry(self, triangle):
        from dynleiden.graph import Graph

        bad = Graph(triangle.offsets, triangle.neighbors, triangle.weights.copy())
        bad.weights[0] = 7
        with pytest.raises(GraphError):
            validate_graph(bad)


class TestTotalEdgeWeight:
    def test_barbell(self, barbell):
        assert total_edge_weight(barbell) == 7

    def test_empty(self):
        assert total_edge_weight(build_graph([], 0)) == 0

    def test_weight_two_triangle(self):
        g = build_graph([(0, 1, 2), (1, 2, 2), (0, 2, 2)], 3)
        assert total_edge_weight(g) == 6


class TestApplyBatch:
    def test_delete_one_edge(self, barbell):
        g = apply_batch(barbell, BatchUpdate.from_edges(deletions=[(0, 1)]))
        assert g.vertex_weights().tolist() == [1, 1, 3, 3, 2, 2]

    def test_empty_batch_is_identity(self, barbell):
        g = apply_batch(barbell, BatchUpdate.empty())
        assert adjacency_set(g) == adjacency_set(barbell)
        assert np.array_equal(g.offsets, barbell.offsets)

    def test_insert_into_presized_vertex(self):
        g = build_graph([(0, 1, 1), (1, 2, 1), (0, 2, 1)], 4)
        g2 = apply_batch(g, BatchUpdate.from_edges(insertions=[(0, 3, 1)]))
        assert g2.degree(3) == 1
        assert g2.vertex_count == 4

    def test_invalid_records_are_skipped_and_counted(self, barbell, caplog):
        b = BatchUpdate.from_edges(deletions=[(0, 4)], insertions=[(0, 1, 1), (0, 5, 2)])
        g, skipped = apply_batch(barbell, b, return_skipped=True)
        # (0,4) absent: 2 records; (0,1) present: 2 records
        assert skipped == 4
        assert g.has_edge(0, 5) and g.edge_weight(5, 0) == 2
        assert g.edge_weight(0, 1) == 1
        assert "skipped" in caplog.text

    def test_repeated_records_are_counted(self, barbell):
        b = BatchUpdate(deletions=[(0, 1), (1, 0), (0, 1)])
        _, skipped = apply_batch(barbell, b, return_skipped=True)
        assert skipped == 1

    def test_out_of_range_batch(self, barbell):
        with pytest.raises(GraphError):
            apply_batch(barbell, BatchUpdate.from_edges(insertions=[(0, 9, 1)]))

    def test_normalize_reads_deletion_weights(self):
        g = build_graph([(0, 1, 3), (1, 2, 1)], 3)
        eff, skipped = normalize_batch(g, BatchUpdate.from_edges(deletions=[(0, 1)]))
        assert skipped == 0
        assert eff.is_symmetric()
        assert eff.deletion_weights.tolist() == [3, 3]

    def test_keeps_weight_dtype(self, barbell):
        g64 = build_graph([(0, 1, 1)], 3, dtype=np.float64)
        out = apply_batch(g64, BatchUpdate.from_edges(insertions=[(1, 2, 0.5)]))
        assert out.weights.dtype == np.float64
        assert apply_batch(barbell, BatchUpdate.empty()).weights.dtype == np.float32

    @settings(max_examples=60, deadline=None)
    @given(edge_lists, st.data())
    def test_inverse_round_trip(self, data, draw):
        n, edges = data
        g = build_graph(edges, n)
        src, dst, _ = g.to_edges()
        existing = sorted({(int(a), int(b)) for a, b in zip(src, dst) if a < b})
        dels = draw.draw(st.lists(st.sampled_from(existing), unique=True) if existing else st.just([]))
        absent = [
            (i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in set(existing)
        ]
        ins = draw.draw(st.lists(st.sampled_from(absent), unique=True) if absent else st.just([]))
        b = BatchUpdate.from_edges(
            deletions=dels, insertions=[(i, j, 2.0) for i, j in ins]
        ).with_deletion_weights(g)
        g1, skipped = apply_batch(g, b, return_skipped=True)
        assert skipped == 0
        validate_graph(g1)
        np.testing.assert_allclose(g1.vertex_weights().sum(), 2 * total_edge_weight(g1))
        g2 = apply_batch(g1, b.inverse())
        assert adjacency_set(g2) == adjacency_set(g)


class TestBatchUpdate:
    def test_from_edges_symmetric(self):
        b = BatchUpdate.from_edges(deletions=[(0, 1)], insertions=[(2, 3, 4.0)])
        assert b.is_symmetric()
        assert len(b) == 4

    def test_sorted_by_source(self):
        b = BatchUpdate(insertions=[(3, 1), (0, 2), (1, 0)], insertion_weights=[1, 2, 3])
        s = b.sorted_by_source()
        assert s.insertions[:, 0].tolist() == [0, 1, 3]
        assert s.insertion_weights.tolist() == [2, 3, 1]

    def test_weight_length_mismatch(self):
        with pytest.raises(ValueError):
            BatchUpdate(insertions=[(0, 1)], insertion_weights=[1, 2])
