"""Full-batch training for NESS and the baseline regimes.

Modes
-----
ness  static K-way partition, drop-edge per epoch, mean-aggregated test embedding
sgae  whole training graph (with drop-edge), direct test embedding
ds    one fresh random edge subset per epoch (encode and reconstruct it)
fgae  encode the whole training graph, reconstruct a fresh random edge subset
dres  fresh K-way partition per epoch, direct test embedding

Each epoch is exactly one AdamW step on the total loss.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .encoders import KINDS, EncoderParams, ProjectionParams, encoder_forward, init_encoder, init_projection
from .evaluation import aggregate, evaluate_embedding
from .graph import Graph, adjacency_from_edges, normalize_adjacency
from .losses import DEFAULT_TAU, LossBreakdown, bce_term, score_edges
from .objective import NumericalError, View, compute_gradients
from .rng import substream
from .splitter import (
    Partition,
    Split,
    Subgraph,
    drop_edges,
    dynamic_res_partition,
    dynamic_res_sample,
    negative_sample,
    partition_k,
)

log = logging.getLogger(__name__)

MODES = ("ness", "sgae", "fgae", "ds", "dres")


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    mode: str = "ness"
    k: int = 4
    ds_fraction: float = 0.5
    encoder: str = "gnae"
    alpha: int = 0
    tau: float = DEFAULT_TAU
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    weight_decay: float = 0.0
    max_epochs: int = 500
    patience: int = 10
    drop_p: float = 0.2
    recon_target: str = "subgraph"
    select_on: str = "loss"
    aggregation: str = "mean"
    bias: bool = False
    intra_view_negatives: bool = True
    seed: int = 0

    def __post_init__(self):
        self.mode = self.mode.lower()
        self.encoder = self.encoder.lower()
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.encoder not in KINDS:
            raise ConfigError(f"unknown encoder {self.encoder!r}; expected one of {KINDS}")
        if self.alpha not in (0, 1):
            raise ConfigError(f"alpha must be 0 or 1, got {self.alpha}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.mode == "dres" and self.k < 2:
            raise ConfigError("dres needs k >= 2")
        if self.alpha == 1 and (self.mode not in ("ness", "dres") or self.k < 2):
            raise ConfigError("the contrastive branch needs a multi-view mode (ness/dres) with k >= 2")
        if not 0.0 < self.ds_fraction <= 1.0:
            raise ConfigError("ds_fraction must lie in (0, 1]")
        if not 0.0 <= self.drop_p < 1.0:
            raise ConfigError("drop_p must lie in [0, 1)")
        if self.recon_target not in ("subgraph", "full"):
            raise ConfigError("recon_target must be 'subgraph' or 'full'")
        if self.select_on not in ("loss", "auc"):
            raise ConfigError("select_on must be 'loss' or 'auc'")
        if self.tau <= 0 or self.lr <= 0 or self.max_epochs < 1 or self.patience < 1:
            raise ConfigError("tau, lr, max_epochs and patience must be positive")

    @property
    def uses_drop_edge(self) -> bool:
        return self.mode in ("ness", "sgae") and self.drop_p > 0

    @property
    def label(self) -> str:
        if self.mode == "ness":
            return f"NESS{self.k}"
        if self.mode == "dres":
            return f"DRES{self.k}"
        if self.mode == "ds":
            return f"DS{round(100 * self.ds_fraction)}"
        return self.mode.upper()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "TrainConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**values)


# -- optimizer -----------------------------------------------------------------


@dataclass
class AdamState:
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adamw_step(params, grads, state: AdamState, lr=0.01, betas=(0.9, 0.999), eps=1e-7, weight_decay=0.0) -> AdamState:
    """In-place AdamW update with decoupled weight decay and bias correction."""
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameters but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.step += 1
    b1, b2 = betas
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if weight_decay:
            p *= 1.0 - lr * weight_decay
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= (lr / c1) * m / (np.sqrt(v) / np.sqrt(c2) + eps)
    return state


# -- training ------------------------------------------------------------------


@dataclass
class EpochRecord:
    epoch: int
    loss: LossBreakdown
    val_loss: float
    val_auc: float
    wall_ms: float


@dataclass
class TrainResult:
    config: TrainConfig
    encoder: EncoderParams
    projection: ProjectionParams | None
    best_epoch: int
    history: list[EpochRecord]
    subgraph_embeddings: list[np.ndarray]
    embedding: np.ndarray
    partition: Partition | None
    stopped_early: bool = False

    @property
    def loss_history(self) -> list[LossBreakdown]:
        return [r.loss for r in self.history]

    @property
    def validation_history(self) -> list[float]:
        return [r.val_loss for r in self.history]

    @property
    def epochs_run(self) -> int:
        return len(self.history)


class TrainingDiverged(NumericalError):
    def __init__(self, message: str, history: list[EpochRecord]):
        super().__init__(message)
        self.history = history


def inference_embedding(config: TrainConfig, encoder: EncoderParams, x, full_adj, static_adjs) -> tuple[np.ndarray, list[np.ndarray]]:
    """Embedding used for validation/testing, plus the per-view embeddings."""
    if config.mode == "ness":
        views = [encoder_forward(encoder, x, a) for a in static_adjs]
        return aggregate(views, config.aggregation), views
    return encoder_forward(encoder, x, full_adj), []


def _check_inputs(config: TrainConfig, graph: Graph, split: Split, partition: Partition | None) -> None:
    if split.num_nodes != graph.num_nodes:
        raise ConfigError(f"split covers {split.num_nodes} nodes, graph has {graph.num_nodes}")
    if config.mode == "ness":
        if partition is not None and partition.k != config.k:
            raise ConfigError(f"partition has {partition.k} subgraphs but config.k = {config.k}")
    elif partition is not None:
        raise ConfigError(f"mode {config.mode!r} does not take a static partition")


def train(
    config: TrainConfig,
    graph: Graph,
    split: Split,
    partition: Partition | None = None,
    record_wall_clock: bool = False,
) -> TrainResult:
    """Train one model; ``partition`` defaults to ``partition_k(train, k, seed)`` in NESS mode."""
    config.validate()
    _check_inputs(config, graph, split, partition)
    n = graph.num_nodes
    x = graph.features
    seed = config.seed
    if config.mode == "ness" and partition is None:
        partition = partition_k(split.train, config.k, seed, n)

    init_rng = substream(seed, "init")
    encoder = init_encoder(config.encoder, graph.feature_dim, init_rng, bias=config.bias)
    projection = init_projection(init_rng, encoder.out_dim) if config.alpha == 1 else None
    params = encoder.tensors() + (projection.tensors() if projection else [])
    state = AdamState()
    drop_rng = substream(seed, "dropedge")
    neg_rng = substream(seed, "negsample")
    sampler_rng = substream(seed, "sampler")

    full_train = Subgraph(0, split.train, n)
    full_adj = normalize_adjacency(full_train.adjacency)
    static_adjs = [normalize_adjacency(s.adjacency) for s in partition.subgraphs] if partition is not None else []
    train_forbidden = split.train

    def negatives(count: int) -> np.ndarray:
        return negative_sample(train_forbidden, count, n, neg_rng)

    def epoch_views() -> list[View]:
        if config.mode == "fgae":
            target = dynamic_res_sample(split.train, config.ds_fraction, sampler_rng, n).edges
            return [View(full_adj, target, negatives(target.shape[0]))]
        if config.mode == "ness":
            subs = list(partition.subgraphs)
        elif config.mode == "sgae":
            subs = [full_train]
        elif config.mode == "ds":
            subs = [dynamic_res_sample(split.train, config.ds_fraction, sampler_rng, n)]
        else:
            subs = list(dynamic_res_partition(split.train, config.k, sampler_rng, n).subgraphs)
        views = []
        for sub in subs:
            seen = drop_edges(sub, config.drop_p, drop_rng) if config.mode in ("ness", "sgae") else sub
            adj = normalize_adjacency(seen.adjacency)
            target = split.train if config.recon_target == "full" else sub.edges
            views.append(View(adj, target, negatives(target.shape[0])))
        return views

    history: list[EpochRecord] = []
    best = (np.inf, -1)
    best_params = [p.copy() for p in params]
    stopped_early = False
    for epoch in range(config.max_epochs):
        t0 = time.perf_counter()
        views = epoch_views()
        try:
            # non-finite values are caught explicitly below, so silence the float warnings
            with np.errstate(over="ignore", invalid="ignore"):
                breakdown, grads, _ = compute_gradients(
                    encoder, projection, x, views, config.alpha, config.tau, config.intra_view_negatives
                )
            adamw_step(params, grads.tensors(), state, config.lr, (config.beta1, config.beta2), config.eps, config.weight_decay)
        except NumericalError as exc:
            raise TrainingDiverged(f"epoch {epoch}: {exc}", history) from exc
        with np.errstate(over="ignore", invalid="ignore"):
            z_eval, _ = inference_embedding(config, encoder, x, full_adj, static_adjs)
            val_scores = score_edges(z_eval, split.val_pos, split.val_neg) if split.val_pos.size else None
            val_loss = bce_term(val_scores) if val_scores is not None else breakdown.total
        if not np.isfinite(val_loss):
            raise TrainingDiverged(f"epoch {epoch}: non-finite validation loss", history)
        val_auc = evaluate_embedding(z_eval, split.val_pos, split.val_neg).auc if val_scores is not None else float("nan")
        wall = (time.perf_counter() - t0) * 1000.0 if record_wall_clock else 0.0
        history.append(EpochRecord(epoch, breakdown, val_loss, val_auc, wall))
        criterion = val_loss if config.select_on == "loss" else -val_auc
        if criterion < best[0]:
            best = (criterion, epoch)
            best_params = [p.copy() for p in params]
        elif epoch - best[1] >= config.patience:
            stopped_early = True
            break

    for p, b in zip(params, best_params):
        p[...] = b
    embedding, views = inference_embedding(config, encoder, x, full_adj, static_adjs)
    if config.mode == "dres":
        # per-view embeddings from one more dynamic partition, for analysis only
        views = [encoder_forward(encoder, x, normalize_adjacency(s.adjacency))
                 for s in dynamic_res_partition(split.train, config.k, sampler_rng, n).subgraphs]
    log.info("%s: best epoch %d of %d (val %.4f)", config.label, best[1], len(history), history[best[1]].val_loss)
    return TrainResult(config, encoder, projection, best[1], history, views, embedding, partition, stopped_early)


def full_training_adjacency(split: Split):
    return normalize_adjacency(adjacency_from_edges(split.train, split.num_nodes))
