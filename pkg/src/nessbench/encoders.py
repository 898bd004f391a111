"""GCN, linear and GNAE encoders plus the contrastive projection head.

Each model has a forward pass returning ``(output, cache)`` and a backward
pass mapping the output gradient to gradients for every weight, in the same
order as ``params.tensors()``.  Propagation matrices are the symmetric
normalized adjacencies from :func:`nessbench.graph.normalize_adjacency`, so
``A_hat.T == A_hat`` and the backward pass reuses ``spmm``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import spmm

KINDS = ("gcn", "lin", "gnae")
EMBED_DIM = 32
GCN_HIDDEN = 64
NORM_EPS = 1e-12


class ShapeError(ValueError):
    pass


@dataclass(eq=False)
class EncoderParams:
    kind: str
    weights: list[np.ndarray]
    biases: list[np.ndarray] | None = None

    def tensors(self) -> list[np.ndarray]:
        return [*self.weights, *(self.biases or [])]

    def names(self) -> list[str]:
        names = [f"encoder.weight{i}" for i in range(len(self.weights))]
        return names + [f"encoder.bias{i}" for i in range(len(self.biases or []))]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            self.kind,
            [w.copy() for w in self.weights],
            None if self.biases is None else [b.copy() for b in self.biases],
        )


@dataclass(eq=False)
class ProjectionParams:
    """Two-layer head ``relu(z @ P1) @ P2`` (bias-free)."""

    weights: list[np.ndarray] = field(default_factory=list)

    def tensors(self) -> list[np.ndarray]:
        return list(self.weights)

    def names(self) -> list[str]:
        return [f"projection.weight{i}" for i in range(len(self.weights))]

    def copy(self) -> "ProjectionParams":
        return ProjectionParams([w.copy() for w in self.weights])


def glorot(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_encoder(
    kind: str,
    in_dim: int,
    rng: np.random.Generator,
    hidden: int = GCN_HIDDEN,
    out_dim: int = EMBED_DIM,
    bias: bool = False,
) -> EncoderParams:
    kind = kind.lower()
    if kind == "gcn":
        dims = [(in_dim, hidden), (hidden, out_dim)]
    elif kind in ("lin", "gnae"):
        dims = [(in_dim, out_dim)]
    else:
        raise ValueError(f"unknown encoder kind {kind!r}; expected one of {KINDS}")
    weights = [glorot(a, b, rng) for a, b in dims]
    biases = [np.zeros(b) for _, b in dims] if bias else None
    return EncoderParams(kind, weights, biases)


def init_projection(rng: np.random.Generator, dim: int = EMBED_DIM, hidden: int = EMBED_DIM) -> ProjectionParams:
    return ProjectionParams([glorot(dim, hidden, rng), glorot(hidden, dim, rng)])


def _check_shapes(params: EncoderParams, x: np.ndarray, adj) -> None:
    if x.ndim != 2 or x.shape[1] != params.weights[0].shape[0]:
        raise ShapeError(f"features {x.shape} do not match first weight {params.weights[0].shape}")
    if adj.shape != (x.shape[0], x.shape[0]):
        raise ShapeError(f"adjacency {adj.shape} does not match {x.shape[0]} nodes")


def row_normalize(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """L2-normalize rows; rows with norm below 1e-12 map to zero."""
    norms = np.sqrt(np.einsum("ij,ij->i", h, h))
    safe = norms >= NORM_EPS
    out = np.zeros_like(h)
    out[safe] = h[safe] / norms[safe, None]
    return out, norms


def row_normalize_backward(hn: np.ndarray, norms: np.ndarray, grad: np.ndarray) -> np.ndarray:
    safe = norms >= NORM_EPS
    out = np.zeros_like(grad)
    dots = np.einsum("ij,ij->i", grad, hn)
    out[safe] = (grad[safe] - hn[safe] * dots[safe, None]) / norms[safe, None]
    return out


def encode(params: EncoderParams, x: np.ndarray, adj) -> tuple[np.ndarray, dict]:
    _check_shapes(params, x, adj)
    b = params.biases
    cache: dict = {"x": x, "adj": adj}
    if params.kind == "gcn":
        w1, w2 = params.weights
        pre = spmm(adj, x @ w1)
        if b is not None:
            pre = pre + b[0]
        hid = np.maximum(pre, 0.0)
        z = spmm(adj, hid @ w2)
        if b is not None:
            z = z + b[1]
        cache.update(pre=pre, hid=hid)
    elif params.kind == "lin":
        z = spmm(adj, x @ params.weights[0])
        if b is not None:
            z = z + b[0]
    elif params.kind == "gnae":
        h = x @ params.weights[0]
        if b is not None:
            h = h + b[0]
        hn, norms = row_normalize(h)
        z = spmm(adj, hn)
        cache.update(hn=hn, norms=norms)
    else:
        raise ValueError(f"unknown encoder kind {params.kind!r}")
    return z, cache


def encoder_forward(params: EncoderParams, x: np.ndarray, adj) -> np.ndarray:
    return encode(params, x, adj)[0]


def encode_backward(params: EncoderParams, cache: dict, dz: np.ndarray) -> list[np.ndarray]:
    x, adj = cache["x"], cache["adj"]
    has_bias = params.biases is not None
    if params.kind == "gcn":
        w2 = params.weights[1]
        g2 = spmm(adj, dz)
        dw2 = cache["hid"].T @ g2
        dpre = (g2 @ w2.T) * (cache["pre"] > 0)
        dw1 = x.T @ spmm(adj, dpre)
        grads = [dw1, dw2]
        if has_bias:
            grads += [dpre.sum(axis=0), dz.sum(axis=0)]
        return grads
    if params.kind == "lin":
        grads = [x.T @ spmm(adj, dz)]
        if has_bias:
            grads.append(dz.sum(axis=0))
        return grads
    dh = row_normalize_backward(cache["hn"], cache["norms"], spmm(adj, dz))
    grads = [x.T @ dh]
    if has_bias:
        grads.append(dh.sum(axis=0))
    return grads


def project(params: ProjectionParams, z: np.ndarray) -> tuple[np.ndarray, dict]:
    p1, p2 = params.weights
    if z.ndim != 2 or z.shape[1] != p1.shape[0]:
        raise ShapeError(f"embedding {z.shape} does not match projection input {p1.shape}")
    pre = z @ p1
    hid = np.maximum(pre, 0.0)
    return hid @ p2, {"z": z, "pre": pre, "hid": hid}


def projection_forward(params: ProjectionParams, z: np.ndarray) -> np.ndarray:
    return project(params, z)[0]


def project_backward(params: ProjectionParams, cache: dict, dh: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Returns ``([dP1, dP2], dz)``."""
    p1, p2 = params.weights
    dp2 = cache["hid"].T @ dh
    dpre = (dh @ p2.T) * (cache["pre"] > 0)
    return [cache["z"].T @ dpre, dp2], dpre @ p1.T


# -- checkpoints ---------------------------------------------------------------

CHECKPOINT_MAGIC = "nessbench-checkpoint"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, encoder: EncoderParams, projection: ProjectionParams | None = None, **meta) -> None:
    """JSON header line followed by little-endian float64 row-major payloads."""
    tensors = encoder.tensors() + (projection.tensors() if projection else [])
    names = encoder.names() + (projection.names() if projection else [])
    payload = b"".join(np.ascontiguousarray(t, dtype="<f8").tobytes() for t in tensors)
    header = {
        "format": CHECKPOINT_MAGIC,
        "version": 1,
        "kind": encoder.kind,
        "bias": encoder.biases is not None,
        "tensors": [{"name": n, "shape": list(t.shape)} for n, t in zip(names, tensors)],
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        **meta,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(payload)


def load_checkpoint(path) -> tuple[EncoderParams, ProjectionParams | None, dict]:
    raw = Path(path).read_bytes()
    head, sep, payload = raw.partition(b"\n")
    try:
        header = json.loads(head.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointError(f"{path}: unreadable checkpoint header") from None
    if not sep or header.get("format") != CHECKPOINT_MAGIC or header.get("version") != 1:
        raise CheckpointError(f"{path}: not a version-1 checkpoint")
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise CheckpointError(f"{path}: payload hash mismatch (file corrupted or tampered)")
    tensors, offset = {}, 0
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        nbytes = 8 * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(payload):
            raise CheckpointError(f"{path}: payload truncated at {spec['name']}")
        tensors[spec["name"]] = np.frombuffer(payload, dtype="<f8", count=nbytes // 8, offset=offset).reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(payload):
        raise CheckpointError(f"{path}: {len(payload) - offset} trailing payload bytes")
    weights = [tensors[k] for k in sorted(tensors) if k.startswith("encoder.weight")]
    biases = [tensors[k] for k in sorted(tensors) if k.startswith("encoder.bias")] if header.get("bias") else None
    proj = [tensors[k] for k in sorted(tensors) if k.startswith("projection.weight")]
    return EncoderParams(header["kind"], weights, biases), (ProjectionParams(proj) if proj else None), header
