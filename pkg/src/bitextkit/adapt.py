"""Margin-based contrastive training of a linear adapter over frozen
embeddings.

The loss for a pair (x1, x2) with label y (1 positive, 0 negative) is

    L = 1/2 * [ y * D^2 + (1 - y) * max(0, m - D)^2 ],   D = cosine distance,

with plain constant-rate gradient descent on an adapter x -> normalize(Wx + b)
applied to the source side. W starts at the identity, so the untrained
adapter is a no-op and pre/post comparisons are meaningful. At the hinge
corner (y = 0, D = m) the zero-branch (sub)gradient is used.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (DimensionMismatch, SchemaError, TooFewPairs, ZeroVector)
from .miner import SentencePair, embed_map
from .vecmath import as_vector, cosine_distance, l2_normalize

_NORM_EPS = 1e-30


@dataclass(frozen=True)
class LossParams:
    margin: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.margin <= 2.0:
            raise ValueError(f"margin must be in (0, 2], got {self.margin}")


@dataclass(frozen=True)
class ContrastiveExample:
    x1: np.ndarray
    x2: np.ndarray
    y: int

    def __post_init__(self):
        object.__setattr__(self, "x1", as_vector(self.x1))
        object.__setattr__(self, "x2", as_vector(self.x2))
        if self.x1.shape != self.x2.shape:
            raise DimensionMismatch(f"{self.x1.shape} vs {self.x2.shape}")
        if self.y not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.y}")


def contrastive_loss(example: ContrastiveExample, params: LossParams = LossParams()) -> float:
    d = cosine_distance(example.x1, example.x2)
    if example.y == 1:
        return 0.5 * d * d
    hinge = max(0.0, params.margin - d)
    return 0.5 * hinge * hinge


def contrastive_loss_grad(example: ContrastiveExample,
                          params: LossParams = LossParams()) -> tuple[np.ndarray, np.ndarray]:
    """(dL/dx1, dL/dx2) by the chain rule through the cosine distance."""
    x1, x2, y = example.x1, example.x2, example.y
    n1 = float(np.linalg.norm(x1))
    n2 = float(np.linalg.norm(x2))
    if n1 < _NORM_EPS or n2 < _NORM_EPS:
        raise ZeroVector("gradient undefined for zero vectors")
    cos = float(np.dot(x1, x2)) / (n1 * n2)
    d = 1.0 - cos
    dl_dd = y * d - (1 - y) * max(0.0, params.margin - d)
    # dcos/dx1 = x2/(n1 n2) - cos * x1/n1^2 ; dD = -dcos
    dcos_dx1 = x2 / (n1 * n2) - cos * x1 / (n1 * n1)
    dcos_dx2 = x1 / (n1 * n2) - cos * x2 / (n2 * n2)
    return -dl_dd * dcos_dx1, -dl_dd * dcos_dx2


def derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    """A permutation of range(n) with no fixed points, drawn from `rng`."""
    if n < 2:
        raise TooFewPairs("a derangement needs at least 2 elements")
    for _ in range(1000):
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm
    return np.roll(np.arange(n), 1)  # unreachable in practice; still a derangement


def negative_pairing(n_pairs: int, seed: int) -> np.ndarray:
    """Seeded derangement used for negative sampling; deterministic per seed."""
    return derangement(n_pairs, np.random.default_rng(seed))


def sample_negatives(pairs: Sequence[SentencePair],
                     vectors: Mapping[str, np.ndarray],
                     seed: int) -> list[ContrastiveExample]:
    """Negative examples pairing each source sentence with the translation of
    a different pair (a derangement, so never its own translation)."""
    assign = negative_pairing(len(pairs), seed)
    return [
        ContrastiveExample(x1=vectors[pairs[i].src_text],
                           x2=vectors[pairs[int(j)].tgt_text], y=0)
        for i, j in enumerate(assign)
    ]


@dataclass(frozen=True)
class Adapter:
    weight: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch(f"adapter weight must be square, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("adapter weight contains NaN or Inf")
        object.__setattr__(self, "weight", w)
        if self.bias is not None:
            b = as_vector(self.bias)
            if b.shape[0] != w.shape[0]:
                raise DimensionMismatch(f"bias dim {b.shape[0]} vs weight {w.shape[0]}")
            object.__setattr__(self, "bias", b)

    @classmethod
    def identity(cls, dim: int) -> "Adapter":
        return cls(weight=np.eye(dim), bias=np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    def apply(self, v) -> np.ndarray:
        v = as_vector(v)
        if v.shape[0] != self.dim:
            raise DimensionMismatch(f"vector dim {v.shape[0]} vs adapter {self.dim}")
        out = self.weight @ v
        if self.bias is not None:
            out = out + self.bias
        return l2_normalize(out)

    def apply_rows(self, matrix) -> np.ndarray:
        arr = np.asarray(matrix, dtype=np.float64)
        out = arr @ self.weight.T
        if self.bias is not None:
            out = out + self.bias
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        if np.any(norms < _NORM_EPS):
            raise ZeroVector("adapter maps a row to the zero vector")
        return out / norms


def apply_adapter(adapter: Adapter, v) -> np.ndarray:
    """normalize(W v + b); unit output keeps downstream cosine semantics."""
    return adapter.apply(v)


def save_adapter(adapter: Adapter, path, seed: int | None = None,
                 config: dict | None = None) -> None:
    bias = adapter.bias if adapter.bias is not None else np.zeros(adapter.dim)
    doc = {
        "dimension": adapter.dim,
        "seed": seed,
        "config": config or {},
        "weight_b64": base64.b64encode(
            np.ascontiguousarray(adapter.weight, dtype="<f4").tobytes()).decode("ascii"),
        "bias_b64": base64.b64encode(
            np.ascontiguousarray(bias, dtype="<f4").tobytes()).decode("ascii"),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")


def load_adapter(path) -> Adapter:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        dim = int(doc["dimension"])
        weight = np.frombuffer(base64.b64decode(doc["weight_b64"]), dtype="<f4")
        bias = np.frombuffer(base64.b64decode(doc["bias_b64"]), dtype="<f4")
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise SchemaError(f"bad adapter checkpoint {path}: {exc}") from exc
    if weight.size != dim * dim or bias.size != dim:
        raise SchemaError(f"adapter checkpoint {path}: payload sizes do not match dimension")
    return Adapter(weight=weight.reshape(dim, dim).astype(np.float64),
                   bias=bias.astype(np.float64))


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    epochs: int = 3
    learning_rate: float = 1e-6
    eval_every_steps: int = 500
    dev_fraction: float = 0.01
    seed: int = 0
    lr_override: float | None = None  # desk-scale runs use larger rates

    def __post_init__(self):
        if min(self.batch_size, self.epochs, self.eval_every_steps) < 1:
            raise ValueError("batch_size, epochs and eval_every_steps must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.dev_fraction < 0.5:
            raise ValueError(f"dev_fraction must be in (0, 0.5), got {self.dev_fraction}")
        if self.lr_override is not None and self.lr_override <= 0:
            raise ValueError(f"lr_override must be positive, got {self.lr_override}")

    @property
    def effective_lr(self) -> float:
        return self.lr_override if self.lr_override is not None else self.learning_rate


@dataclass(frozen=True)
class LogRow:
    step: int
    train_loss: float | None  # None before the first update
    dev_loss: float
    is_best: bool


MIN_TRAIN_PAIRS = 200


def _batch_loss_and_grads(w, b, u, v, y, margin):
    """Vectorized loss mean and (dW, db) over one batch of raw pairs.

    The adapter maps the source side only: x1 = normalize(W u + b), x2 = v.
    """
    z = u @ w.T + b
    nz = np.linalg.norm(z, axis=1, keepdims=True)
    if np.any(nz < _NORM_EPS):
        raise ZeroVector("adapter maps an embedding to the zero vector")
    x1 = z / nz
    vhat = v / np.linalg.norm(v, axis=1, keepdims=True)
    cos = np.einsum("ij,ij->i", x1, vhat)
    d = 1.0 - cos
    hinge = np.maximum(0.0, margin - d)
    loss = 0.5 * np.mean(y * d * d + (1 - y) * hinge * hinge)
    dl_dd = y * d - (1 - y) * hinge
    dl_dz = (-dl_dd / nz.ravel())[:, None] * (vhat - cos[:, None] * x1)
    dw = dl_dz.T @ u / u.shape[0]
    db = np.mean(dl_dz, axis=0)
    return float(loss), dw, db


def _eval_loss(w, b, u, v, y, margin) -> float:
    loss, _, _ = _batch_loss_and_grads(w, b, u, v, y, margin)
    return loss


def train_adapter(positives: Sequence[SentencePair], provider, cfg: TrainConfig,
                  loss_params: LossParams = LossParams(),
                  ) -> tuple[Adapter, list[LogRow]]:
    """Gradient-descent training with the best-dev-loss checkpoint returned.

    Deterministic given cfg.seed: the dev split is the tail of a seeded
    shuffle, fresh negatives are drawn per epoch from the same stream, and
    the dev set keeps one fixed negative assignment across evaluations.
    """
    n = len(positives)
    if n < MIN_TRAIN_PAIRS:
        raise TooFewPairs(f"need at least {MIN_TRAIN_PAIRS} pairs, got {n}")
    vectors = embed_map(provider, [p.src_text for p in positives] +
                        [p.tgt_text for p in positives])
    dim = next(iter(vectors.values())).shape[0]

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    dev_n = max(1, math.ceil(cfg.dev_fraction * n))
    dev_pairs = [positives[int(i)] for i in order[n - dev_n:]]
    train_pairs = [positives[int(i)] for i in order[:n - dev_n]]

    def stack(pairs, side):
        return np.stack([vectors[getattr(p, side)] for p in pairs])

    dev_u_pos, dev_v_pos = stack(dev_pairs, "src_text"), stack(dev_pairs, "tgt_text")
    dev_assign = derangement(len(dev_pairs), rng) if len(dev_pairs) >= 2 else None
    if dev_assign is not None:
        dev_u = np.vstack([dev_u_pos, dev_u_pos])
        dev_v = np.vstack([dev_v_pos, dev_v_pos[dev_assign]])
        dev_y = np.concatenate([np.ones(dev_n), np.zeros(dev_n)])
    else:
        dev_u, dev_v, dev_y = dev_u_pos, dev_v_pos, np.ones(dev_n)

    train_u = stack(train_pairs, "src_text")
    train_v = stack(train_pairs, "tgt_text")

    w = np.eye(dim)
    b = np.zeros(dim)
    lr = cfg.effective_lr
    margin = loss_params.margin

    log: list[LogRow] = []
    best_w, best_b = w.copy(), b.copy()
    best_dev = _eval_loss(w, b, dev_u, dev_v, dev_y, margin)
    log.append(LogRow(step=0, train_loss=None, dev_loss=best_dev, is_best=True))

    step = 0
    since_eval: list[float] = []
    for _ in range(cfg.epochs):
        assign = derangement(len(train_pairs), rng)
        u = np.vstack([train_u, train_u])
        v = np.vstack([train_v, train_v[assign]])
        y = np.concatenate([np.ones(len(train_pairs)), np.zeros(len(train_pairs))])
        shuffle = rng.permutation(u.shape[0])
        u, v, y = u[shuffle], v[shuffle], y[shuffle]

        for lo in range(0, u.shape[0], cfg.batch_size):
            hi = lo + cfg.batch_size
            loss, dw, db = _batch_loss_and_grads(w, b, u[lo:hi], v[lo:hi], y[lo:hi], margin)
            w = w - lr * dw
            b = b - lr * db
            step += 1
            since_eval.append(loss)
            if step % cfg.eval_every_steps == 0:
                dev = _eval_loss(w, b, dev_u, dev_v, dev_y, margin)
                is_best = dev < best_dev
                if is_best:
                    best_dev, best_w, best_b = dev, w.copy(), b.copy()
                log.append(LogRow(step=step, train_loss=float(np.mean(since_eval)),
                                  dev_loss=dev, is_best=is_best))
                since_eval = []

    if step % cfg.eval_every_steps != 0:
        dev = _eval_loss(w, b, dev_u, dev_v, dev_y, margin)
        is_best = dev < best_dev
        if is_best:
            best_dev, best_w, best_b = dev, w.copy(), b.copy()
        train_mean = float(np.mean(since_eval)) if since_eval else None
        log.append(LogRow(step=step, train_loss=train_mean, dev_loss=dev, is_best=is_best))

    return Adapter(weight=best_w, bias=best_b), log


def write_training_log(path, rows: Sequence[LogRow], header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("step,train_loss,dev_loss,is_best\n")
        for r in rows:
            train = "" if r.train_loss is None else f"{r.train_loss:.10g}"
            fh.write(f"{r.step},{train},{r.dev_loss:.10g},{int(r.is_best)}\n")
