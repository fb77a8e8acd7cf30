"""Skip-gram with negative sampling, trained single-threaded for reproducibility.

The inner loop is compiled with numba. ``sgns_loss`` and ``sgns_gradients``
restate one update in plain numpy so the kernel can be checked against
finite differences.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .spaces import EmbeddingSpace

__all__ = [
    "SGNSConfig",
    "sgns_loss",
    "sgns_gradients",
    "sgns_step",
    "train_sgns",
]


@dataclass(frozen=True)
class SGNSConfig:
    dim: int = 100
    window: int = 10
    negatives: int = 5
    epochs: int = 30
    learning_rate: float = 0.025
    min_learning_rate: float = 0.025 * 1e-4
    # Sample the effective window uniformly from 1..window per position, as word2vec does.
    shrink_window: bool = True
    ns_exponent: float = 0.75

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.epochs < 1 or self.negatives < 0:
            raise ValueError(f"invalid SGNS configuration {self}")


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_loss(w: np.ndarray, c: np.ndarray, negs: np.ndarray) -> float:
    """-log s(w.c) - sum_k log s(-w.n_k) for one (target, context, negatives) triple."""
    loss = -np.log(_sigmoid(w @ c))
    for n in negs:
        loss -= np.log(_sigmoid(-(w @ n)))
    return float(loss)


def sgns_gradients(w: np.ndarray, c: np.ndarray, negs: np.ndarray):
    """Analytic gradients of :func:`sgns_loss` w.r.t. ``w``, ``c`` and each negative."""
    g_pos = _sigmoid(w @ c) - 1.0
    g_negs = _sigmoid(negs @ w)
    grad_w = g_pos * c + g_negs @ negs
    grad_c = g_pos * w
    grad_negs = g_negs[:, None] * w[None, :]
    return grad_w, grad_c, grad_negs


@numba.njit(cache=True, fastmath=True)
def _update(W, C, center, context, negs, n_neg, lr, work):
    """One SGD step on the pair (center, context); returns nothing, mutates W and C."""
    d = W.shape[1]
    for k in range(d):
        work[k] = 0.0
    for s in range(n_neg + 1):
        if s == 0:
            target = context
            label = 1.0
        else:
            target = negs[s - 1]
            label = 0.0
        dot = 0.0
        for k in range(d):
            dot += W[center, k] * C[target, k]
        g = (label - 1.0 / (1.0 + np.exp(-dot))) * lr
        for k in range(d):
            work[k] += g * C[target, k]
        for k in range(d):
            C[target, k] += g * W[center, k]
    for k in range(d):
        W[center, k] += work[k]


_LCG_MUL = np.uint64(25214903917)
_LCG_ADD = np.uint64(11)


@numba.njit(cache=True)
def _train(W, C, tokens, starts, table, epochs, window, shrink, n_neg, lr0, lr_min, seed):
    # word2vec's 64-bit linear congruential generator; high bits used for draws.
    state = np.uint64(seed)
    d = W.shape[1]
    work = np.zeros(d)
    negs = np.zeros(max(n_neg, 1), dtype=np.int64)
    n_tokens = tokens.shape[0]
    total = epochs * n_tokens
    done = 0
    table_size = table.shape[0]
    for _ in range(epochs):
        for s in range(starts.shape[0] - 1):
            lo, hi = starts[s], starts[s + 1]
            for i in range(lo, hi):
                lr = lr0 * (1.0 - done / (total + 1.0))
                if lr < lr_min:
                    lr = lr_min
                done += 1
                span = window
                if shrink:
                    state = state * _LCG_MUL + _LCG_ADD
                    span = window - np.int64((state >> np.uint64(16)) % np.uint64(window))
                center = tokens[i]
                for j in range(max(lo, i - span), min(hi, i + span + 1)):
                    if j == i:
                        continue
                    context = tokens[j]
                    m = 0
                    while m < n_neg:
                        state = state * _LCG_MUL + _LCG_ADD
                        neg = table[np.int64((state >> np.uint64(16)) % np.uint64(table_size))]
                        if neg != context:
                            negs[m] = neg
                            m += 1
                    _update(W, C, center, context, negs, n_neg, lr, work)


def sgns_step(W, C, center, context, negs, lr):
    """Apply the compiled single-pair update in place (exposed for testing)."""
    negs = np.asarray(negs, dtype=np.int64)
    _update(W, C, center, context, negs, len(negs), lr, np.zeros(W.shape[1]))


TABLE_SIZE = 1_000_000


def _unigram_table(counts: np.ndarray, exponent: float, size: int = TABLE_SIZE) -> np.ndarray:
    """Word ids laid out in proportion to count**exponent, for O(1) negative draws."""
    weights = counts ** exponent
    bounds = np.round(np.cumsum(weights) / weights.sum() * size).astype(np.int64)
    return np.repeat(np.arange(len(counts), dtype=np.int32), np.diff(bounds, prepend=0))


def _seed32(seed: int) -> int:
    return int(np.random.SeedSequence(seed).generate_state(1)[0])


def train_sgns(
    sentences: Sequence[Sequence[str]],
    config: SGNSConfig = SGNSConfig(),
    seed: int = 0,
) -> EmbeddingSpace:
    """Train SGNS and return the target-word (input) vectors."""
    counts = Counter(w for s in sentences for w in s)
    if not counts:
        raise ValueError("cannot train on an empty corpus")
    vocab = tuple(sorted(counts, key=lambda w: (-counts[w], w)))
    index = {w: i for i, w in enumerate(vocab)}
    tokens = np.fromiter((index[w] for s in sentences for w in s), dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum([len(s) for s in sentences])]).astype(np.int64)

    table = _unigram_table(np.array([counts[w] for w in vocab], dtype=np.float64), config.ns_exponent)

    rng = np.random.Generator(np.random.PCG64(seed))
    d = config.dim
    W = (rng.random((len(vocab), d)) - 0.5) / d
    C = np.zeros((len(vocab), d))
    if len(vocab) > 1:
        _train(
            W, C, tokens, starts, table, config.epochs, config.window,
            config.shrink_window, config.negatives, config.learning_rate,
            config.min_learning_rate, _seed32(seed),
        )
    provenance = {
        "model": "SGNS", "dim": d, "window": config.window, "negatives": config.negatives,
        "epochs": config.epochs, "learning_rate": config.learning_rate,
        "shrink_window": config.shrink_window, "ns_exponent": config.ns_exponent,
        "subsampling": "none", "seed": seed, "init": "uniform(-0.5/d, 0.5/d)",
    }
    return EmbeddingSpace(vocab, W, provenance)
