"""Dataset files, synthetic SBM graphs and split/partition persistence.

Text formats
------------
features : one node per line, whitespace-separated reals (line i = node i)
edges    : one undirected edge per line, two 0-based integers
labels   : one integer per line

Split files are compact JSON::

    {"version":1,"num_nodes":N,"seed":S,"train":[[u,v],...],"val_pos":[...],
     "val_neg":[...],"test_pos":[...],"test_neg":[...],
     "partition":[[[u,v],...],...],"checksum":"<sha256>"}

The checksum is the SHA-256 of the same document serialized without the
``checksum`` key.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, GraphError, build_graph
from .splitter import Partition, Split, Subgraph

SPLIT_FORMAT_VERSION = 1


class DataError(ValueError):
    """Malformed or inconsistent input files."""


@dataclass(frozen=True)
class DatasetBundle:
    graph: Graph
    name: str
    source: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SbmParams:
    block_sizes: tuple[int, ...]
    intra_p: float
    inter_p: float
    feature_dim: int | None = None
    feature_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.block_sizes or min(self.block_sizes) <= 0:
            raise DataError(f"block sizes must be positive, got {self.block_sizes}")
        for name in ("intra_p", "inter_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DataError(f"{name} must lie in [0, 1], got {p}")
        if self.feature_noise < 0:
            raise DataError("feature_noise must be non-negative")
        if self.feature_dim is not None and self.feature_dim < len(self.block_sizes):
            raise DataError("feature_dim must be at least the number of blocks")


def _read_rows(path: Path, kind: str, parse) -> list:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                rows.append(parse(text.split()))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: malformed {kind} line ({exc})") from None
    return rows


def _parse_edge(tokens):
    if len(tokens) != 2:
        raise ValueError(f"expected 2 integers, found {len(tokens)} fields")
    return int(tokens[0]), int(tokens[1])


def _parse_label(tokens):
    if len(tokens) != 1:
        raise ValueError(f"expected 1 integer, found {len(tokens)} fields")
    return int(tokens[0])


def load_dataset(features_path, edges_path, labels_path=None, name: str | None = None) -> DatasetBundle:
    features_path, edges_path = Path(features_path), Path(edges_path)
    width: list[int] = []

    def parse_features(tokens):
        if not width:
            width.append(len(tokens))
        if len(tokens) != width[0]:
            raise ValueError(f"expected {width[0]} values as on the first row, found {len(tokens)}")
        return [float(v) for v in tokens]

    feats = _read_rows(features_path, "feature", parse_features)
    if not feats:
        raise DataError(f"{features_path}: no feature rows")
    edges = _read_rows(edges_path, "edge", _parse_edge)
    labels = None
    source = {"features": str(features_path), "edges": str(edges_path)}
    if labels_path is not None:
        labels = _read_rows(Path(labels_path), "label", _parse_label)
        source["labels"] = str(labels_path)
        if len(labels) != len(feats):
            raise DataError(f"{labels_path}: {len(labels)} labels for {len(feats)} feature rows")
    try:
        graph = build_graph(np.array(feats, dtype=np.float64), np.array(edges, dtype=np.int64).reshape(-1, 2), labels)
    except GraphError as exc:
        raise DataError(f"{edges_path}: {exc}") from None
    return DatasetBundle(graph, name or features_path.stem, source)


def row_normalize_features(graph: Graph) -> Graph:
    """Scale each feature row to unit L1 norm; all-zero rows stay zero."""
    x = np.array(graph.features)
    sums = np.abs(x).sum(axis=1, keepdims=True)
    x = np.divide(x, sums, out=np.zeros_like(x), where=sums > 0)
    return build_graph(x, graph.edges, graph.labels)


def _fmt_real(v: float) -> str:
    return repr(float(v))


def export_dataset(graph: Graph, directory, prefix: str = "graph") -> dict:
    """Write the three text files; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"features": directory / f"{prefix}.features", "edges": directory / f"{prefix}.edges"}
    with open(paths["features"], "w", encoding="utf-8") as fh:
        for row in graph.features:
            fh.write(" ".join(_fmt_real(v) for v in row) + "\n")
    with open(paths["edges"], "w", encoding="utf-8") as fh:
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")
    if graph.labels is not None:
        paths["labels"] = directory / f"{prefix}.labels"
        with open(paths["labels"], "w", encoding="utf-8") as fh:
            for y in graph.labels:
                fh.write(f"{y}\n")
    return paths


def generate_sbm(params: SbmParams) -> DatasetBundle:
    """Stochastic block model with block-indicator features.

    Features are the one-hot block id (padded with zero columns up to
    ``feature_dim``) plus uniform noise in ``[0, feature_noise]`` on every
    entry.  Labels are block ids.
    """
    rng = np.random.default_rng(params.seed)
    sizes = list(params.block_sizes)
    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], params.intra_p, params.inter_p)
    hit = rng.random(iu.size) < prob
    edges = np.stack([iu[hit], ju[hit]], axis=1)
    f = params.feature_dim or len(sizes)
    x = np.zeros((n, f))
    x[np.arange(n), labels] = 1.0
    if params.feature_noise > 0:
        x += rng.uniform(0.0, params.feature_noise, size=x.shape)
    name = "sbm-" + "x".join(str(s) for s in sizes)
    source = {
        "generator": "sbm",
        "block_sizes": sizes,
        "intra_p": params.intra_p,
        "inter_p": params.inter_p,
        "feature_dim": f,
        "feature_noise": params.feature_noise,
        "seed": params.seed,
    }
    return DatasetBundle(build_graph(x, edges, labels), name, source)


def expected_sbm_edges(params: SbmParams) -> tuple[float, float]:
    """Mean and standard deviation of the SBM edge count (sum of Bernoullis)."""
    sizes = np.asarray(params.block_sizes, dtype=float)
    intra = float(np.sum(sizes * (sizes - 1) / 2))
    n = sizes.sum()
    inter = n * (n - 1) / 2 - intra
    mean = intra * params.intra_p + inter * params.inter_p
    var = intra * params.intra_p * (1 - params.intra_p) + inter * params.inter_p * (1 - params.inter_p)
    return mean, float(np.sqrt(var))


# -- split persistence ---------------------------------------------------------


def _pairs(edges) -> list:
    return [[int(u), int(v)] for u, v in np.asarray(edges).reshape(-1, 2)]


def _dumps(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"))


def split_document(split: Split, partition: Partition | None) -> dict:
    doc = {
        "version": SPLIT_FORMAT_VERSION,
        "num_nodes": int(split.num_nodes),
        "seed": int(split.seed),
        "train": _pairs(split.train),
        "val_pos": _pairs(split.val_pos),
        "val_neg": _pairs(split.val_neg),
        "test_pos": _pairs(split.test_pos),
        "test_neg": _pairs(split.test_neg),
        "partition": [_pairs(s.edges) for s in partition.subgraphs] if partition is not None else [],
    }
    doc["checksum"] = hashlib.sha256(_dumps(doc).encode("utf-8")).hexdigest()
    return doc


def save_split(split: Split, partition: Partition | None, path) -> str:
    text = _dumps(split_document(split, partition)) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return text


def _edge_array(obj, key: str) -> np.ndarray:
    arr = np.asarray(obj, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError(f"split field {key!r} is not a list of pairs")
    return arr


def load_split(path) -> tuple[Split, Partition | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    if doc.get("version") != SPLIT_FORMAT_VERSION:
        raise DataError(f"{path}: unsupported split version {doc.get('version')!r}")
    checksum = doc.pop("checksum", None)
    if checksum != hashlib.sha256(_dumps(doc).encode("utf-8")).hexdigest():
        raise DataError(f"{path}: checksum mismatch")
    n = int(doc["num_nodes"])
    fields = {k: _edge_array(doc[k], k) for k in ("train", "val_pos", "val_neg", "test_pos", "test_neg")}
    for key, arr in fields.items():
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise DataError(f"{path}: {key} references nodes outside [0, {n})")
    split = Split(n, seed=int(doc["seed"]), **fields)
    blocks = doc.get("partition") or []
    partition = None
    if blocks:
        partition = Partition(tuple(Subgraph(i, _edge_array(b, "partition"), n) for i, b in enumerate(blocks)))
    return split, partition

