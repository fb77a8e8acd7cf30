"""Change measures comparing one word's representations across two spaces."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .spaces import EmbeddingSpace

__all__ = ["DEFAULT_KNN", "cosine_distance", "lnd", "neighbors"]

DEFAULT_KNN = 25


def _lookup(space: EmbeddingSpace, word: str) -> np.ndarray:
    if word not in space:
        raise KeyError(f"{word!r} not in vocabulary")
    v = space.vector(word)
    if not np.any(v):
        raise ValueError(f"{word!r} has a zero vector")
    return v


def _cos(u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def cosine_distance(a: EmbeddingSpace, b: EmbeddingSpace, word: str, word_b: str | None = None) -> float:
    """1 - cos between ``word`` in ``a`` and ``word_b`` (default: the same word) in ``b``."""
    u, v = _lookup(a, word), _lookup(b, word_b or word)
    return float(np.clip(1.0 - _cos(u, v), 0.0, 2.0))


def _similarities(space: EmbeddingSpace, word: str, rows: np.ndarray) -> np.ndarray:
    unit = space.unit_vectors()
    v = unit[space.index[word]]
    sims = unit[rows] @ v.T
    if sp.issparse(sims):
        sims = sims.toarray()
    return np.asarray(sims, dtype=float).ravel()


def neighbors(space: EmbeddingSpace, word: str, candidates: list[str], k: int) -> list[str]:
    """The ``k`` candidates most cosine-similar to ``word``; ties broken by candidate order."""
    rows = np.array([space.index[c] for c in candidates], dtype=np.int64)
    sims = _similarities(space, word, rows)
    order = np.lexsort((np.arange(len(candidates)), -sims))
    return [candidates[i] for i in order[:k]]


def lnd(
    a: EmbeddingSpace,
    b: EmbeddingSpace,
    word: str,
    k_nn: int = DEFAULT_KNN,
    word_b: str | None = None,
    exclude: frozenset[str] = frozenset(),
) -> float:
    """Local neighborhood distance: compare the word's similarities to the union of its neighbors."""
    word_b = word_b or word
    _lookup(a, word)
    _lookup(b, word_b)
    skip = {word, word_b} | set(exclude)
    shared = [w for w in a.vocab if w in b.index and w not in skip]
    if len(shared) < k_nn:
        raise ValueError(f"only {len(shared)} shared words, need {k_nn}")
    union = set(neighbors(a, word, shared, k_nn)) | set(neighbors(b, word_b, shared, k_nn))
    # Stable order makes the result independent of set iteration.
    hood = [w for w in shared if w in union]
    s_a = _similarities(a, word, np.array([a.index[w] for w in hood]))
    s_b = _similarities(b, word_b, np.array([b.index[w] for w in hood]))
    na, nb = np.linalg.norm(s_a), np.linalg.norm(s_b)
    if na == 0 or nb == 0:
        raise ValueError(f"{word!r} has no similarity to its neighborhood")
    return float(np.clip(1.0 - s_a @ s_b / (na * nb), 0.0, 2.0))
