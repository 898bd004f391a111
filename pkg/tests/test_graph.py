import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from nessbench.graph import (
    GraphError,
    build_graph,
    canonical_edges,
    edge_homophily,
    normalize_adjacency,
    spmm,
)

from conftest import random_graph


class TestBuildGraph:
    def test_two_nodes_symmetrized_with_loops(self):
        g = build_graph(np.zeros((2, 1)), [(0, 1)])
        assert g.adjacency.toarray().tolist() == [[1, 1], [1, 1]]

    def test_duplicate_orientations_fold(self):
        g = build_graph(np.zeros((3, 1)), [(0, 1), (1, 0)])
        assert g.edges.tolist() == [[0, 1]]
        a = g.adjacency
        assert a.nnz == 5
        assert np.all(a.diagonal() == 1)

    def test_out_of_range_reports_edge_index(self):
        with pytest.raises(GraphError, match="edge 2"):
            build_graph(np.zeros((3, 1)), [(0, 1), (1, 2), (2, 3)])

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite_features_rejected(self, bad):
        x = np.zeros((3, 2))
        x[1, 1] = bad
        with pytest.raises(GraphError, match="row 1"):
            build_graph(x, [(0, 1)])

    def test_input_self_loops_ignored(self):
        g = build_graph(np.zeros((3, 1)), [(1, 1), (0, 2)])
        assert g.edges.tolist() == [[0, 2]]

    def test_invariants_on_random_graph(self):
        g = random_graph(40, 0.15, 3, seed=0)
        a = g.adjacency
        assert (a != a.T).nnz == 0
        assert np.all(a.diagonal() == 1)
        assert set(np.unique(a.data)) == {1.0}
        assert np.all(np.diff(a.indices[a.indptr[0] : a.indptr[1]]) > 0)

    def test_rebuild_from_exported_edges_is_identical(self):
        g = random_graph(25, 0.3, 2, seed=1)
        again = build_graph(g.features, g.edges)
        assert (again.adjacency != g.adjacency).nnz == 0
        np.testing.assert_array_equal(again.edges, g.edges)

    def test_immutable(self):
        g = random_graph(5, 0.5, 2, seed=2)
        with pytest.raises(ValueError):
            g.features[0, 0] = 1.0


def test_canonical_edges_keeps_first_order_when_unsorted():
    e = canonical_edges([(3, 1), (0, 2), (1, 3), (2, 2)], sort=False)
    assert e.tolist() == [[1, 3], [0, 2]]


class TestNormalize:
    def test_single_edge(self):
        a = build_graph(np.zeros((2, 1)), [(0, 1)]).adjacency
        np.testing.assert_array_equal(normalize_adjacency(a).toarray(), np.full((2, 2), 0.5))

    def test_isolated_node_row_is_identity(self):
        a = build_graph(np.zeros((3, 1)), [(0, 1)]).adjacency
        row = normalize_adjacency(a).getrow(2)
        assert row.indices.tolist() == [2]
        assert row.data.tolist() == [1.0]

    def test_star(self):
        a = build_graph(np.zeros((4, 1)), [(0, 1), (0, 2), (0, 3)]).adjacency
        an = normalize_adjacency(a).toarray()
        expected = 1.0 / np.sqrt(4 * 2)
        np.testing.assert_allclose(an[0, 1:], expected, rtol=0, atol=1e-15)
        assert an[0, 0] == 0.25
        assert an[1, 1] == 0.5

    def test_bit_symmetric_and_diagonal(self):
        g = random_graph(50, 0.1, 1, seed=4)
        an = normalize_adjacency(g.adjacency)
        assert (an != an.T).nnz == 0
        deg = np.asarray(g.adjacency.sum(axis=1)).ravel()
        np.testing.assert_array_equal(an.diagonal(), 1.0 / deg)
        assert an.data.min() > 0 and an.data.max() <= 1.0


class TestSpmm:
    def test_identity_adjacency(self, rng):
        m = rng.normal(size=(5, 3))
        np.testing.assert_array_equal(spmm(sp.identity(5, format="csr"), m), m)

    def test_two_node(self):
        an = normalize_adjacency(build_graph(np.zeros((2, 1)), [(0, 1)]).adjacency)
        np.testing.assert_array_equal(spmm(an, np.eye(2)), np.full((2, 2), 0.5))

    def test_matches_dense_ten_nodes(self, rng):
        an = normalize_adjacency(random_graph(10, 0.4, 1, seed=5).adjacency)
        m = rng.normal(size=(10, 4))
        np.testing.assert_allclose(spmm(an, m), an.toarray() @ m, rtol=0, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(GraphError):
            spmm(sp.identity(3, format="csr"), np.ones((4, 2)))

    def test_deterministic(self, rng):
        an = normalize_adjacency(random_graph(30, 0.2, 1, seed=6).adjacency)
        m = rng.normal(size=(30, 7))
        assert np.array_equal(spmm(an, m), spmm(an, m))

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 50), p=st.floats(0.0, 1.0), seed=st.integers(0, 10_000))
    def test_dense_oracle_property(self, n, p, seed):
        an = normalize_adjacency(random_graph(n, p, 1, seed=seed).adjacency)
        m = np.random.default_rng(seed).normal(size=(n, 3))
        dense = an.toarray() @ m
        np.testing.assert_allclose(spmm(an, m), dense, rtol=1e-10, atol=1e-14)


class TestHomophily:
    def test_all_same_label(self):
        g = build_graph(np.zeros((4, 1)), [(0, 1), (1, 2), (2, 3)], [0, 0, 0, 0])
        assert edge_homophily(g) == 1.0

    def test_bipartite_different_labels(self):
        g = build_graph(np.zeros((4, 1)), [(0, 2), (0, 3), (1, 2), (1, 3)], [0, 0, 1, 1])
        assert edge_homophily(g) == 0.0

    def test_requires_labels(self):
        with pytest.raises(GraphError):
            edge_homophily(build_graph(np.zeros((2, 1)), [(0, 1)]))

    def test_counts_fraction(self):
        g = build_graph(np.zeros((4, 1)), [(0, 1), (1, 2), (2, 3)], [0, 0, 1, 1])
        assert edge_homophily(g) == pytest.approx(2 / 3)
