from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import Example, PointerGenerator, loss_and_grads, make_example

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 1000
    batch_size: int = 8
    learning_rate: float = 0.005
    clip_norm: float = 2.0
    seed: int = 0
    coverage_start: float = 0.8   # fraction of steps trained before the coverage loss switches on
    max_src_len: int = 400
    max_tgt_len: int = 100


def prepare(model: PointerGenerator, pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
            cfg: TrainConfig) -> list[Example]:
    out = []
    for src, tgt in pairs:
        if not src or not tgt:
            raise ValueError("source and target must be non-empty")
        out.append(make_example(model.vocab, src[: cfg.max_src_len], tgt[: cfg.max_tgt_len]))
    return out


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    norm = float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def train(model: PointerGenerator, dataset: Sequence[tuple[Sequence[str], Sequence[str]]],
          cfg: TrainConfig = TrainConfig(),
          callback: Callable[[int, float], None] | None = None) -> PointerGenerator:
    """Adam on the batch-mean sequence loss; returns a new trained model.

    Batches walk a fresh permutation of the data each epoch. ``callback(step,
    batch_loss)`` runs after every update.
    """
    if not dataset:
        raise ValueError("empty dataset")
    model = model.copy()
    examples = prepare(model, dataset, cfg)
    rng = np.random.default_rng(cfg.seed)
    b1, b2, eps = 0.9, 0.999, 1e-8
    m = {k: np.zeros_like(v) for k, v in model.params.items()}
    v = {k: np.zeros_like(v) for k, v in model.params.items()}
    cov_from = int(cfg.coverage_start * cfg.steps)
    order = rng.permutation(len(examples))
    cursor = 0
    for step in range(1, cfg.steps + 1):
        cov_weight = model.config.cov_weight if step > cov_from else 0.0
        batch = []
        while len(batch) < min(cfg.batch_size, len(examples)):
            if cursor == len(order):
                order, cursor = rng.permutation(len(examples)), 0
            batch.append(examples[order[cursor]])
            cursor += 1
        total = 0.0
        grads = {k: np.zeros_like(v) for k, v in model.params.items()}
        for ex in batch:
            loss, g = loss_and_grads(model, ex, cov_weight)
            total += loss
            for k in grads:
                grads[k] += g[k]
        loss = total / len(batch)
        if not np.isfinite(loss):
            raise FloatingPointError(f"non-finite loss {loss} at step {step}")
        for k in grads:
            grads[k] /= len(batch)
        clip_by_global_norm(grads, cfg.clip_norm)
        lr_t = cfg.learning_rate * np.sqrt(1 - b2 ** step) / (1 - b1 ** step)
        for k, w in model.params.items():
            g = grads[k]
            m[k] *= b1
            m[k] += (1 - b1) * g
            v[k] *= b2
            v[k] += (1 - b2) * g * g
            w -= lr_t * m[k] / (np.sqrt(v[k]) + eps)
        if callback is not None:
            callback(step, loss)
        if step % 100 == 0:
            log.info("step %d  loss %.4f", step, loss)
    return model
