"""One full-batch evaluation of the training objective and its exact gradient.

A *view* is what one subgraph contributes per epoch: the normalized
adjacency the encoder propagates over, the positive edges to reconstruct and
the negatives sampled for them.  All views share one set of encoder weights,
so per-view gradients are summed (in ascending view order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoders import EncoderParams, ProjectionParams, encode, encode_backward, project, project_backward
from .losses import (
    DEFAULT_TAU,
    LossBreakdown,
    LossError,
    bce_term_grad,
    contrastive_loss_grad,
    edge_logits_backward,
    score_edges,
    total_loss,
)


class NumericalError(FloatingPointError):
    pass


@dataclass
class View:
    adj: object
    pos: np.ndarray
    neg: np.ndarray
    weight: float = 1.0


@dataclass
class Gradients:
    encoder: list[np.ndarray]
    projection: list[np.ndarray] | None

    def tensors(self) -> list[np.ndarray]:
        return self.encoder + (self.projection or [])


def compute_gradients(
    encoder: EncoderParams,
    projection: ProjectionParams | None,
    x: np.ndarray,
    views: list[View],
    alpha: int = 0,
    tau: float = DEFAULT_TAU,
    intra_view: bool = True,
) -> tuple[LossBreakdown, Gradients, list[np.ndarray]]:
    """Evaluate ``L_t = L_r + alpha * L_c`` and its gradient w.r.t. all weights.

    Returns the loss breakdown, the gradients and the per-view embeddings.
    """
    k = len(views)
    if k == 0:
        raise LossError("no views to train on")
    if alpha == 1 and projection is None:
        raise LossError("contrastive branch requires projection parameters")

    embeddings, caches, per_view, dlogits = [], [], [], []
    for view in views:
        z, cache = encode(encoder, x, view.adj)
        scores = score_edges(z, view.pos, view.neg)
        value, dpos, dneg = bce_term_grad(scores)
        embeddings.append(z)
        caches.append(cache)
        per_view.append(value)
        dlogits.append((dpos, dneg))
    recon = float(sum(v.weight * l for v, l in zip(views, per_view)) / k)

    dzs = []
    for view, z, (dpos, dneg) in zip(views, embeddings, dlogits):
        scale = view.weight / k
        dz = edge_logits_backward(z, view.pos, dpos * scale)
        edge_logits_backward(z, view.neg, dneg * scale, out=dz)
        dzs.append(dz)

    contrastive = 0.0
    proj_grads = None
    if alpha == 1:
        if k < 2:
            raise LossError("contrastive branch requires at least two views")
        outs = [project(projection, z) for z in embeddings]
        contrastive, dhs = contrastive_loss_grad([h for h, _ in outs], tau, intra_view)
        proj_grads = [np.zeros_like(w) for w in projection.tensors()]
        for i, ((_, pcache), dh) in enumerate(zip(outs, dhs)):
            gp, dz = project_backward(projection, pcache, dh)
            for acc, g in zip(proj_grads, gp):
                acc += g
            dzs[i] += dz
    elif projection is not None:
        proj_grads = [np.zeros_like(w) for w in projection.tensors()]

    enc_grads = [np.zeros_like(w) for w in encoder.tensors()]
    for cache, dz in zip(caches, dzs):
        for acc, g in zip(enc_grads, encode_backward(encoder, cache, dz)):
            acc += g

    total = total_loss(recon, contrastive, alpha)
    if not np.isfinite(total):
        raise NumericalError(f"non-finite loss (recon={recon}, contrastive={contrastive})")
    breakdown = LossBreakdown(total, recon, contrastive, per_view, alpha, tau)
    return breakdown, Gradients(enc_grads, proj_grads), embeddings
