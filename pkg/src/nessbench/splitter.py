"""Edge splits, static partitions, dynamic samplers, drop-edge, negatives.

Every function takes its randomness explicitly (a seed or a
``numpy.random.Generator``) so results are a pure function of inputs and
generator state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import ceil, comb

import numpy as np
import scipy.sparse as sp

from .graph import Graph, adjacency_from_edges, canonical_edges, edge_keys
from .rng import substream


class SplitError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Split:
    num_nodes: int
    train: np.ndarray
    val_pos: np.ndarray
    val_neg: np.ndarray
    test_pos: np.ndarray
    test_neg: np.ndarray
    seed: int = 0

    def positives(self) -> np.ndarray:
        return np.concatenate([self.train, self.val_pos, self.test_pos])

    def __eq__(self, other):
        if not isinstance(other, Split):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.seed == other.seed
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("train", "val_pos", "val_neg", "test_pos", "test_neg")
            )
        )


@dataclass(frozen=True, eq=False)
class Subgraph:
    """One view of the training graph: an edge subset plus all self-loops."""

    index: int
    edges: np.ndarray
    num_nodes: int

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        return adjacency_from_edges(self.edges, self.num_nodes)

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def mask(self) -> np.ndarray:
        """Boolean node mask of nodes touched by at least one edge."""
        touched = np.zeros(self.num_nodes, dtype=bool)
        touched[self.edges.ravel()] = True
        return touched


@dataclass(frozen=True, eq=False)
class Partition:
    subgraphs: tuple[Subgraph, ...]

    @property
    def k(self) -> int:
        return len(self.subgraphs)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and all(
            a.num_nodes == b.num_nodes and np.array_equal(a.edges, b.edges)
            for a, b in zip(self.subgraphs, other.subgraphs)
        )


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def negative_sample(forbidden, count: int, num_nodes: int, rng) -> np.ndarray:
    """Draw ``count`` distinct uniform non-edges ``(u < v)``.

    Rejection sampling is used while the pool of admissible pairs is large.
    When fewer than a quarter of all pairs are admissible, or rejection stalls,
    the admissible pool is enumerated and sampled without replacement.
    """
    rng = _as_generator(rng)
    n = int(num_nodes)
    total = comb(n, 2)
    forbidden_keys = np.unique(edge_keys(canonical_edges(forbidden), n)) if len(forbidden) else np.zeros(0, np.int64)
    available = total - forbidden_keys.size
    if count < 0 or count > available:
        raise SplitError(f"cannot draw {count} negatives: only {available} non-edges among {n} nodes")
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)

    if available >= total // 4 and total > 64:
        chosen = np.zeros(0, dtype=np.int64)
        for _ in range(64):
            need = count - chosen.size
            draw = rng.integers(0, n, size=(2 * need + 16, 2))
            draw = np.sort(draw, axis=1)
            draw = draw[draw[:, 0] != draw[:, 1]]
            keys = draw[:, 0] * n + draw[:, 1]
            keys = keys[~np.isin(keys, forbidden_keys)]
            keys = keys[~np.isin(keys, chosen)]
            # keep first occurrences, preserving draw order
            _, first = np.unique(keys, return_index=True)
            keys = keys[np.sort(first)]
            chosen = np.concatenate([chosen, keys[:need]])
            if chosen.size == count:
                return np.stack([chosen // n, chosen % n], axis=1)
    # Exhaustive fallback over the admissible pool.
    iu, ju = np.triu_indices(n, k=1)
    keys = iu.astype(np.int64) * n + ju
    keys = keys[~np.isin(keys, forbidden_keys)]
    picked = rng.choice(keys.size, size=count, replace=False)
    keys = keys[picked]
    return np.stack([keys // n, keys % n], axis=1)


def res_split(graph: Graph, ratios=(0.85, 0.05, 0.10), seed: int = 0) -> Split:
    """Random edge split into train/val/test positives with fixed negatives.

    Val and test counts are ``floor(ratio * |E|)``; train takes the rest.
    Negatives for val/test avoid every positive edge of the graph.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9 or ratios[0] <= 0:
        raise SplitError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    m = graph.num_edges
    if m < 10:
        raise SplitError(f"graph has {m} edges; at least 10 are needed for a split")
    n_val = int(np.floor(ratios[1] * m + 1e-9))
    n_test = int(np.floor(ratios[2] * m + 1e-9))
    if m - n_val - n_test < 1:
        raise SplitError("split leaves no training edges")
    rng = substream(seed, "split")
    order = rng.permutation(m)
    edges = graph.edges[order]
    test_pos = canonical_edges(edges[:n_test])
    val_pos = canonical_edges(edges[n_test : n_test + n_val])
    train = canonical_edges(edges[n_test + n_val :])
    n = graph.num_nodes
    test_neg = canonical_edges(negative_sample(graph.edges, n_test, n, rng))
    forbidden = np.concatenate([graph.edges, test_neg]) if n_test else graph.edges
    val_neg = canonical_edges(negative_sample(forbidden, n_val, n, rng))
    return Split(n, train, val_pos, val_neg, test_pos, test_neg, int(seed))


def _deal(edges: np.ndarray, k: int, num_nodes: int, rng: np.random.Generator) -> Partition:
    m = edges.shape[0]
    if k < 1:
        raise SplitError(f"K must be >= 1, got {k}")
    if k > m:
        raise SplitError(f"cannot partition {m} edges into {k} non-empty subgraphs")
    order = rng.permutation(m)
    # block i gets ceil/floor sizes: the first m % k blocks take one extra edge
    bounds = np.cumsum([0] + [m // k + (1 if i < m % k else 0) for i in range(k)])
    subgraphs = tuple(
        Subgraph(i, canonical_edges(edges[order[bounds[i] : bounds[i + 1]]]), num_nodes) for i in range(k)
    )
    return Partition(subgraphs)


def partition_k(train: np.ndarray, k: int, seed: int, num_nodes: int) -> Partition:
    """Static K-way edge-disjoint partition of the training edges."""
    return _deal(np.asarray(train, dtype=np.int64).reshape(-1, 2), int(k), num_nodes, substream(seed, "partition"))


def dynamic_res_partition(train: np.ndarray, k: int, rng, num_nodes: int) -> Partition:
    """A fresh K-way partition; callers invoke this once per epoch."""
    return _deal(np.asarray(train, dtype=np.int64).reshape(-1, 2), int(k), num_nodes, _as_generator(rng))


def dynamic_res_sample(train: np.ndarray, fraction: float, rng, num_nodes: int) -> Subgraph:
    """Uniform subset of ``ceil(fraction * |train|)`` training edges."""
    if not 0.0 < fraction <= 1.0:
        raise SplitError(f"fraction must be in (0, 1], got {fraction}")
    train = np.asarray(train, dtype=np.int64).reshape(-1, 2)
    m = train.shape[0]
    size = min(m, int(ceil(fraction * m - 1e-9)))
    pick = _as_generator(rng).choice(m, size=size, replace=False)
    return Subgraph(0, canonical_edges(train[pick]), num_nodes)


def drop_edges(subgraph: Subgraph, p: float, rng) -> Subgraph:
    """Keep each edge independently with probability ``1 - p``; loops stay."""
    if not 0.0 <= p < 1.0:
        raise SplitError(f"drop probability must be in [0, 1), got {p}")
    keep = _as_generator(rng).random(subgraph.num_edges) >= p
    if keep.all():
        return subgraph
    return Subgraph(subgraph.index, subgraph.edges[keep], subgraph.num_nodes)


# -- samplers compared against static RES partitions -------------------------


def sample_re(train: np.ndarray, size: int, rng, num_nodes: int) -> Subgraph:
    """Random-edge sampler: ``size`` edges drawn uniformly without replacement."""
    train = np.asarray(train, dtype=np.int64).reshape(-1, 2)
    if not 0 < size <= train.shape[0]:
        raise SplitError(f"edge budget {size} outside (0, {train.shape[0]}]")
    pick = _as_generator(rng).choice(train.shape[0], size=size, replace=False)
    return Subgraph(0, canonical_edges(train[pick]), num_nodes)


def sample_rn(train: np.ndarray, num_sampled_nodes: int, rng, num_nodes: int) -> Subgraph:
    """Random-node sampler: subgraph induced on a uniform node subset."""
    if not 0 < num_sampled_nodes <= num_nodes:
        raise SplitError(f"node budget {num_sampled_nodes} outside (0, {num_nodes}]")
    train = np.asarray(train, dtype=np.int64).reshape(-1, 2)
    chosen = np.zeros(num_nodes, dtype=bool)
    chosen[_as_generator(rng).choice(num_nodes, size=num_sampled_nodes, replace=False)] = True
    inside = chosen[train[:, 0]] & chosen[train[:, 1]]
    return Subgraph(0, train[inside].copy(), num_nodes)


def random_walk_with_jumps(
    train: np.ndarray,
    size: int,
    rng,
    num_nodes: int,
    jump_p: float = 0.1,
    max_steps: int | None = None,
    return_stats: bool = False,
):
    """Random walk with uniform restarts collecting traversed edges.

    Starts at a uniform node; each step jumps to a uniform node with
    probability ``jump_p`` (always, when the current node has no neighbour)
    and otherwise moves to a uniform neighbour, recording the edge.  Stops
    once ``size`` distinct edges are collected.
    """
    rng = _as_generator(rng)
    train = np.asarray(train, dtype=np.int64).reshape(-1, 2)
    if not 0 < size <= train.shape[0]:
        raise SplitError(f"edge budget {size} outside (0, {train.shape[0]}]")
    adj = sp.csr_matrix(
        (np.ones(2 * train.shape[0]), (np.r_[train[:, 0], train[:, 1]], np.r_[train[:, 1], train[:, 0]])),
        shape=(num_nodes, num_nodes),
    )
    adj.sort_indices()
    indptr, indices = adj.indptr, adj.indices
    max_steps = max_steps if max_steps is not None else 1000 * size + 10 * num_nodes
    seen: dict[int, None] = {}
    node = int(rng.integers(num_nodes))
    steps = jumps = forced = 0
    while len(seen) < size and steps < max_steps:
        steps += 1
        deg = indptr[node + 1] - indptr[node]
        if deg == 0:
            forced += 1
            node = int(rng.integers(num_nodes))
            continue
        if rng.random() < jump_p:
            jumps += 1
            node = int(rng.integers(num_nodes))
            continue
        nxt = int(indices[indptr[node] + rng.integers(deg)])
        u, v = (node, nxt) if node < nxt else (nxt, node)
        seen.setdefault(u * num_nodes + v, None)
        node = nxt
    keys = np.fromiter(seen, dtype=np.int64, count=len(seen))
    sub = Subgraph(0, canonical_edges(np.stack([keys // num_nodes, keys % num_nodes], axis=1)), num_nodes)
    if return_stats:
        return sub, {"steps": steps, "jumps": jumps, "forced_jumps": forced}
    return sub


def sample_rwj(train: np.ndarray, size: int, rng, num_nodes: int, jump_p: float = 0.1) -> Subgraph:
    """Random walk with jumps (edge budget ``size``)."""
    return random_walk_with_jumps(train, size, rng, num_nodes, jump_p=jump_p)


def check_partition(partition: Partition, train: np.ndarray, num_nodes: int) -> None:
    """Raise :class:`SplitError` unless the partition is disjoint, covering and balanced."""
    keys = [edge_keys(s.edges, num_nodes) for s in partition.subgraphs]
    allk = np.concatenate(keys) if keys else np.zeros(0, np.int64)
    if np.unique(allk).size != allk.size:
        raise SplitError("subgraphs share edges")
    if not np.array_equal(np.sort(allk), np.sort(edge_keys(canonical_edges(train), num_nodes))):
        raise SplitError("subgraphs do not cover the training edges exactly")
    sizes = [s.num_edges for s in partition.subgraphs]
    if sizes and max(sizes) - min(sizes) > 1:
        raise SplitError(f"unbalanced subgraph sizes {sizes}")
