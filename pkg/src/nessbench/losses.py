"""Inner-product decoder, reconstruction BCE, NT-Xent and the total objective.

All losses are evaluated on logits with ``softplus`` so that saturated scores
never produce ``log(0)``.  Functions ending in ``_grad`` also return the
gradient with respect to their array inputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.special import expit, logsumexp

from .encoders import NORM_EPS, row_normalize_backward, row_normalize

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.5


class LossError(ValueError):
    pass


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


@dataclass
class EdgeScores:
    pos_logits: np.ndarray
    neg_logits: np.ndarray

    @property
    def pos_scores(self) -> np.ndarray:
        return expit(self.pos_logits)

    @property
    def neg_scores(self) -> np.ndarray:
        return expit(self.neg_logits)

    @property
    def n_pos(self) -> int:
        return self.pos_logits.shape[0]


@dataclass
class LossBreakdown:
    total: float
    recon: float
    contrastive: float
    per_subgraph: list[float] = field(default_factory=list)
    alpha: int = 0
    tau: float = DEFAULT_TAU


def edge_logits(z: np.ndarray, edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return np.einsum("ij,ij->i", z[edges[:, 0]], z[edges[:, 1]])


def decode_edges(z: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Link scores ``sigmoid(z_u . z_v)``."""
    return expit(edge_logits(z, edges))


def edge_logits_backward(z: np.ndarray, edges: np.ndarray, dlogits: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Accumulate ``d logit / d z`` contributions into ``out`` (allocated if None)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if out is None:
        out = np.zeros_like(z)
    u, v = edges[:, 0], edges[:, 1]
    np.add.at(out, u, dlogits[:, None] * z[v])
    np.add.at(out, v, dlogits[:, None] * z[u])
    return out


def score_edges(z: np.ndarray, pos: np.ndarray, neg: np.ndarray) -> EdgeScores:
    return EdgeScores(edge_logits(z, pos), edge_logits(z, neg))


def bce_term(scores: EdgeScores) -> float:
    """Balanced BCE ``-(1/2n) sum[log s_pos + log(1 - s_neg)]`` on logits."""
    n = scores.n_pos
    if n == 0:
        raise LossError("reconstruction needs at least one positive edge")
    if scores.neg_logits.shape[0] != n:
        raise LossError(f"expected {n} negative scores, got {scores.neg_logits.shape[0]}")
    return float((softplus(-scores.pos_logits).sum() + softplus(scores.neg_logits).sum()) / (2 * n))


def bce_term_grad(scores: EdgeScores) -> tuple[float, np.ndarray, np.ndarray]:
    value = bce_term(scores)
    n2 = 2 * scores.n_pos
    return value, -expit(-scores.pos_logits) / n2, expit(scores.neg_logits) / n2


def recon_loss(per_subgraph: list[EdgeScores]) -> tuple[float, list[float]]:
    """Mean of the per-subgraph balanced BCE terms."""
    if not per_subgraph:
        raise LossError("no subgraph scores given")
    terms = [bce_term(s) for s in per_subgraph]
    return float(np.mean(terms)), terms


def _ntxent_core(h_a: np.ndarray, h_b: np.ndarray, tau: float, intra_view: bool, with_grad: bool):
    if h_a.shape != h_b.shape or h_a.ndim != 2:
        raise LossError(f"projection shapes differ: {h_a.shape} vs {h_b.shape}")
    if tau <= 0:
        raise LossError(f"temperature must be positive, got {tau}")
    n = h_a.shape[0]
    ua, na = row_normalize(h_a)
    ub, nb = row_normalize(h_b)
    zero_rows = int((na < NORM_EPS).sum() + (nb < NORM_EPS).sum())
    if zero_rows:
        log.debug("NT-Xent: %d zero-norm projection rows; their similarities are set to 0", zero_rows)
    u = np.vstack([ua, ub])
    sim = (u @ u.T) / tau
    allowed = np.ones((2 * n, 2 * n), dtype=bool)
    if not intra_view:
        allowed[:n, :n] = False
        allowed[n:, n:] = False
    np.fill_diagonal(allowed, False)
    masked = np.where(allowed, sim, -np.inf)
    partner = np.r_[np.arange(n, 2 * n), np.arange(n)]
    rows = np.arange(2 * n)
    lse = logsumexp(masked, axis=1)
    per_anchor = lse - sim[rows, partner]
    value = float(per_anchor.sum() / (2 * n))
    if not with_grad:
        return value
    prob = np.exp(masked - lse[:, None])
    prob[rows, partner] -= 1.0
    dsim = prob / (2 * n)
    du = (dsim + dsim.T) @ u / tau
    return value, row_normalize_backward(ua, na, du[:n]), row_normalize_backward(ub, nb, du[n:])


def ntxent_pair(h_a: np.ndarray, h_b: np.ndarray, tau: float = DEFAULT_TAU, intra_view: bool = True) -> float:
    """NT-Xent between two views, averaged over both anchor directions.

    With ``intra_view=True`` the denominator for anchor ``i`` runs over all
    ``2N - 1`` other rows of ``[h_a; h_b]``; otherwise over the other view only.
    """
    return _ntxent_core(h_a, h_b, tau, intra_view, with_grad=False)


def ntxent_pair_grad(h_a, h_b, tau: float = DEFAULT_TAU, intra_view: bool = True):
    return _ntxent_core(h_a, h_b, tau, intra_view, with_grad=True)


def view_pairs(k: int) -> list[tuple[int, int]]:
    return list(combinations(range(k), 2))


def contrastive_loss(projections: list[np.ndarray], tau: float = DEFAULT_TAU, intra_view: bool = True) -> float:
    """Mean NT-Xent over all unordered pairs of views."""
    if len(projections) < 2:
        raise LossError("contrastive loss needs at least two views")
    pairs = view_pairs(len(projections))
    return float(sum(ntxent_pair(projections[a], projections[b], tau, intra_view) for a, b in pairs) / len(pairs))


def contrastive_loss_grad(projections, tau: float = DEFAULT_TAU, intra_view: bool = True):
    if len(projections) < 2:
        raise LossError("contrastive loss needs at least two views")
    pairs = view_pairs(len(projections))
    grads = [np.zeros_like(h) for h in projections]
    total = 0.0
    for a, b in pairs:
        value, ga, gb = ntxent_pair_grad(projections[a], projections[b], tau, intra_view)
        total += value
        grads[a] += ga / len(pairs)
        grads[b] += gb / len(pairs)
    return total / len(pairs), grads


def total_loss(recon: float, contrastive: float | None, alpha: int) -> float:
    if alpha not in (0, 1):
        raise LossError(f"alpha must be 0 or 1, got {alpha}")
    if alpha == 0:
        return recon
    return recon + contrastive
