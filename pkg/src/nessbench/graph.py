"""Graph data model and the sparse kernels shared by the encoders.

Edge sets are plain ``(M, 2)`` int64 arrays holding canonical pairs
(``u < v``, no self-loops, no duplicates).  Adjacency matrices are CSR with
sorted column indices and a unit diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for malformed graph inputs."""


def canonical_edges(edges, sort: bool = True) -> np.ndarray:
    """Orient pairs as ``u < v``, drop self-loops and duplicates.

    With ``sort=False`` the first occurrence order is kept.
    """
    e = np.asarray(edges, dtype=np.int64)
    if e.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if e.ndim != 2 or e.shape[1] != 2:
        raise GraphError(f"edges must have shape (M, 2), got {e.shape}")
    e = np.sort(e, axis=1)
    e = e[e[:, 0] != e[:, 1]]
    uniq, first = np.unique(e, axis=0, return_index=True)
    if sort:
        return np.ascontiguousarray(uniq.reshape(-1, 2))
    return np.ascontiguousarray(e[np.sort(first)])


def edge_keys(edges: np.ndarray, num_nodes: int) -> np.ndarray:
    """Encode canonical pairs as scalar keys ``u * N + v``."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return edges[:, 0] * num_nodes + edges[:, 1]


def adjacency_from_edges(edges: np.ndarray, num_nodes: int) -> sp.csr_matrix:
    """Symmetric 0/1 CSR adjacency with every self-loop present."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    loops = np.arange(num_nodes, dtype=np.int64)
    rows = np.concatenate([edges[:, 0], edges[:, 1], loops])
    cols = np.concatenate([edges[:, 1], edges[:, 0], loops])
    data = np.ones(rows.shape[0], dtype=np.float64)
    a = sp.csr_matrix((data, (rows, cols)), shape=(num_nodes, num_nodes))
    a.sum_duplicates()
    a.data[:] = 1.0
    a.sort_indices()
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    features: np.ndarray
    adjacency: sp.csr_matrix
    edges: np.ndarray
    labels: np.ndarray | None = None

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def num_classes(self) -> int | None:
        if self.labels is None:
            return None
        return int(np.unique(self.labels).size)


def build_graph(features, edges, labels=None) -> Graph:
    """Construct a :class:`Graph` from raw features and an undirected edge list.

    Edges may arrive in either orientation and with duplicates; both are
    folded.  Self-loops in the input are ignored because every node gets one.
    """
    x = np.array(features, dtype=np.float64, copy=True)
    if x.ndim != 2:
        raise GraphError(f"features must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise GraphError(f"non-finite feature at row {bad[0]}, column {bad[1]}")
    n = x.shape[0]
    raw = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    out_of_range = np.flatnonzero((raw < 0).any(axis=1) | (raw >= n).any(axis=1))
    if out_of_range.size:
        i = int(out_of_range[0])
        raise GraphError(f"edge {i} ({raw[i, 0]}, {raw[i, 1]}) references a node outside [0, {n})")
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64).copy()
        if labels.shape != (n,):
            raise GraphError(f"expected {n} labels, got {labels.shape[0]}")
        labels.setflags(write=False)
    e = canonical_edges(raw)
    x.setflags(write=False)
    e.setflags(write=False)
    return Graph(features=x, adjacency=adjacency_from_edges(e, n), edges=e, labels=labels)


def normalize_adjacency(adjacency: sp.spmatrix) -> sp.csr_matrix:
    """Symmetric renormalization ``D^-1/2 A D^-1/2`` with self-loop degrees.

    Each entry is computed as ``1 / sqrt(d_i * d_j)`` so the result is
    bit-symmetric and the diagonal is exactly ``1 / d_i``.
    """
    a = sp.csr_matrix(adjacency, dtype=np.float64, copy=True)
    a.sort_indices()
    deg = np.asarray(a.sum(axis=1)).ravel()
    rows = np.repeat(np.arange(a.shape[0]), np.diff(a.indptr))
    a.data = a.data / np.sqrt(deg[rows] * deg[a.indices])
    return a


def spmm(adj: sp.csr_matrix, dense: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``adj @ dense``.

    Rows are accumulated in stored (ascending column) order, which makes the
    result reproducible bit for bit.
    """
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim != 2 or dense.shape[0] != adj.shape[1]:
        raise GraphError(f"cannot multiply {adj.shape} adjacency with {dense.shape} matrix")
    if not adj.has_sorted_indices:
        adj = adj.sorted_indices()
    return np.asarray(adj @ dense)


def edge_homophily(graph: Graph) -> float:
    """Fraction of (non-loop) edges joining nodes with the same label."""
    if graph.labels is None:
        raise GraphError("edge homophily needs node labels")
    if graph.num_edges == 0:
        raise GraphError("edge homophily is undefined on an edgeless graph")
    same = graph.labels[graph.edges[:, 0]] == graph.labels[graph.edges[:, 1]]
    return float(same.mean())
