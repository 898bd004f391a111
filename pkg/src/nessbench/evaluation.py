"""Link-prediction metrics, test-time aggregation and subgraph analyses."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .encoders import EncoderParams, encoder_forward
from .losses import edge_logits

AGGREGATIONS = ("mean", "sum", "min", "max")


class MetricError(ValueError):
    pass


@dataclass
class MetricReport:
    auc: float
    ap: float
    n_pos: int
    n_neg: int
    threshold_accuracy: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _check_sides(pos, neg):
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise MetricError("both positive and negative scores are required")
    return pos, neg


def auc(pos_scores, neg_scores) -> float:
    """ROC AUC as the Mann-Whitney statistic, ties counted as one half."""
    pos, neg = _check_sides(pos_scores, neg_scores)
    ranks = rankdata(np.concatenate([pos, neg]), method="average")
    # rank sums are exact half-integers, so this equals wins + ties/2 exactly
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def average_precision(pos_scores, neg_scores) -> float:
    """Step-wise AP, sum of ``(R_n - R_{n-1}) * P_n`` over distinct thresholds."""
    pos, neg = _check_sides(pos_scores, neg_scores)
    scores = np.concatenate([pos, neg])
    labels = np.r_[np.ones(pos.size), np.zeros(neg.size)]
    order = np.argsort(-scores, kind="mergesort")
    scores, labels = scores[order], labels[order]
    cut = np.r_[np.flatnonzero(np.diff(scores)), scores.size - 1]
    tps = np.cumsum(labels)[cut]
    precision = tps / (cut + 1)
    recall = tps / pos.size
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def metric_report(pos_scores, neg_scores, threshold: float | None = 0.5) -> MetricReport:
    pos, neg = _check_sides(pos_scores, neg_scores)
    acc = None
    if threshold is not None:
        acc = float(((pos > threshold).sum() + (neg <= threshold).sum()) / (pos.size + neg.size))
    return MetricReport(auc(pos, neg), average_precision(pos, neg), int(pos.size), int(neg.size), acc)


def evaluate_embedding(z: np.ndarray, pos_edges, neg_edges) -> MetricReport:
    return metric_report(expit(edge_logits(z, pos_edges)), expit(edge_logits(z, neg_edges)))


def aggregate(embeddings, method: str = "mean") -> np.ndarray:
    """Elementwise reduction of per-subgraph embeddings into one joint embedding."""
    if len(embeddings) == 0:
        raise MetricError("nothing to aggregate")
    if method not in AGGREGATIONS:
        raise MetricError(f"unknown aggregation {method!r}; expected one of {AGGREGATIONS}")
    shapes = {np.shape(z) for z in embeddings}
    if len(shapes) != 1:
        raise MetricError(f"embeddings differ in shape: {sorted(shapes)}")
    stack = np.stack(embeddings)
    if method in ("min", "max"):
        return getattr(stack, method)(axis=0)
    # sorted reduction keeps the result independent of subgraph order
    total = np.sort(stack, axis=0).sum(axis=0) if len(embeddings) > 1 else stack[0].copy()
    return total / len(embeddings) if method == "mean" else total


# -- subgraph analyses ---------------------------------------------------------


def subgraph_mean_representation(z: np.ndarray, subgraph) -> np.ndarray:
    """Mean embedding over nodes touched by at least one edge of ``subgraph``."""
    mask = subgraph.mask()
    if not mask.any():
        raise MetricError(f"subgraph {subgraph.index} has no connected nodes")
    return z[mask].mean(axis=0)


def pairwise_pearson(vectors) -> tuple[np.ndarray, float]:
    """Pearson correlation matrix across coordinates and its off-diagonal mean.

    Entries involving a zero-variance vector are NaN and left out of the mean.
    """
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] < 2:
        raise MetricError("need K vectors of width >= 2")
    centered = v - v.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered**2).sum(axis=1))
    ok = norms > 0
    r = np.full((v.shape[0], v.shape[0]), np.nan)
    unit = centered[ok] / norms[ok, None]
    r[np.ix_(ok, ok)] = np.clip(unit @ unit.T, -1.0, 1.0)
    r[np.flatnonzero(ok), np.flatnonzero(ok)] = 1.0
    iu = np.triu_indices(v.shape[0], k=1)
    off = r[iu]
    off = off[~np.isnan(off)]
    return r, float(off.mean()) if off.size else float("nan")


def correct_predictions(z: np.ndarray, pos_edges, neg_edges, threshold: float = 0.5) -> np.ndarray:
    """Boolean vector over ``[pos; neg]`` items: classified correctly at ``threshold``."""
    ps = expit(edge_logits(z, pos_edges))
    ns = expit(edge_logits(z, neg_edges))
    return np.r_[ps > threshold, ns <= threshold]


def consensus(embeddings, pos_edges, neg_edges, threshold: float = 0.5) -> float:
    """Fraction of test items (positives and negatives) every view gets right."""
    if len(embeddings) < 2:
        raise MetricError("consensus needs at least two views")
    correct = np.logical_and.reduce([correct_predictions(z, pos_edges, neg_edges, threshold) for z in embeddings])
    return float(correct.mean())


def gradual_aggregation_curve(embeddings, pos_edges, neg_edges, method: str = "mean") -> list[float]:
    """AUC of the aggregate of the first ``m`` views for ``m = 1..K``."""
    return [evaluate_embedding(aggregate(embeddings[:m], method), pos_edges, neg_edges).auc for m in range(1, len(embeddings) + 1)]


def ensemble_baseline(embeddings, pos_edges, neg_edges) -> MetricReport:
    """Score-averaging ensemble: mean over views of ``sigmoid(z_u . z_v)``."""
    if len(embeddings) == 0:
        raise MetricError("no views given")
    ps = np.mean([expit(edge_logits(z, pos_edges)) for z in embeddings], axis=0)
    ns = np.mean([expit(edge_logits(z, neg_edges)) for z in embeddings], axis=0)
    return metric_report(ps, ns)


def aggregation_vs_direct(
    encoder: EncoderParams,
    x: np.ndarray,
    subgraph_adjs,
    full_adj,
    pos_edges,
    neg_edges,
    method: str = "mean",
) -> tuple[float, float, float]:
    """AUC from aggregated subgraph embeddings vs. encoding the full training graph.

    Both branches use the same ``encoder`` object.
    """
    agg = aggregate([encoder_forward(encoder, x, a) for a in subgraph_adjs], method)
    direct = encoder_forward(encoder, x, full_adj)
    auc_agg = evaluate_embedding(agg, pos_edges, neg_edges).auc
    auc_direct = evaluate_embedding(direct, pos_edges, neg_edges).auc
    return auc_agg, auc_direct, auc_agg - auc_direct


@dataclass
class SubgraphAnalysis:
    mean_representations: np.ndarray
    pearson: np.ndarray
    mean_pairwise_pearson: float
    consensus_ratio: float
    per_subgraph_auc: list[float]
    per_subgraph_accuracy: list[float]
    gradual_auc: list[float]
    ensemble_auc: float
    aggregate_auc: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mean_representations"] = self.mean_representations.tolist()
        out["pearson"] = [[None if np.isnan(v) else float(v) for v in row] for row in self.pearson]
        return out


def analyze_subgraphs(
    embeddings,
    partition,
    pos_edges,
    neg_edges,
    threshold: float = 0.5,
    representation: str = "joint",
) -> SubgraphAnalysis:
    """Run the correlation, consensus, gradual-aggregation and ensemble analyses.

    ``representation="joint"`` averages rows of the aggregated embedding over
    each subgraph's connected nodes; ``"subgraph"`` uses that subgraph's own
    embedding instead.
    """
    joint = aggregate(embeddings)
    if representation == "joint":
        reps = [subgraph_mean_representation(joint, s) for s in partition.subgraphs]
    elif representation == "subgraph":
        reps = [subgraph_mean_representation(z, s) for z, s in zip(embeddings, partition.subgraphs)]
    else:
        raise MetricError(f"unknown representation source {representation!r}")
    pearson, mean_r = pairwise_pearson(reps) if len(reps) > 1 else (np.ones((1, 1)), float("nan"))
    reports = [evaluate_embedding(z, pos_edges, neg_edges) for z in embeddings]
    acc = [float(correct_predictions(z, pos_edges, neg_edges, threshold).mean()) for z in embeddings]
    cons = consensus(embeddings, pos_edges, neg_edges, threshold) if len(embeddings) > 1 else acc[0]
    gradual = gradual_aggregation_curve(embeddings, pos_edges, neg_edges)
    return SubgraphAnalysis(
        mean_representations=np.asarray(reps),
        pearson=pearson,
        mean_pairwise_pearson=mean_r,
        consensus_ratio=cons,
        per_subgraph_auc=[r.auc for r in reports],
        per_subgraph_accuracy=acc,
        gradual_auc=gradual,
        ensemble_auc=ensemble_baseline(embeddings, pos_edges, neg_edges).auc,
        aggregate_auc=gradual[-1],
    )
