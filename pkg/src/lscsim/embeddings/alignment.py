"""Aligning two embedding spaces so that vectors of the same word become comparable."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .spaces import EmbeddingSpace

__all__ = [
    "MARKER",
    "align_ci",
    "procrustes_rotation",
    "align_op",
    "word_injection",
    "injected",
]

MARKER = "@"


def align_ci(a: EmbeddingSpace, b: EmbeddingSpace) -> tuple[EmbeddingSpace, EmbeddingSpace]:
    """Restrict two count-based spaces to their shared context columns, in sorted order."""
    if a.columns is None or b.columns is None:
        raise ValueError("column intersection needs spaces with named columns")
    shared = sorted(set(a.columns) & set(b.columns))
    if not shared:
        raise ValueError("spaces share no context columns")

    def restrict(space):
        pos = {c: i for i, c in enumerate(space.columns)}
        cols = [pos[c] for c in shared]
        prov = dict(space.provenance, alignment="CI")
        return EmbeddingSpace(space.vocab, space.vectors[:, cols], prov, columns=tuple(shared))

    return restrict(a), restrict(b)


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return np.divide(m, norms, out=np.zeros_like(m, dtype=float), where=norms > 0)


def procrustes_rotation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Orthogonal R minimizing ||a - b R||_F for row-paired matrices ``a`` and ``b``."""
    u, _, vt = np.linalg.svd(b.T @ a)
    return u @ vt


def align_op(a: EmbeddingSpace, b: EmbeddingSpace) -> EmbeddingSpace:
    """Rotate ``b`` onto ``a`` by orthogonal Procrustes over the shared vocabulary.

    Rows are length-normalized and mean-centered before solving; the rotation
    is applied to the length-normalized (uncentered) rows of ``b``.
    """
    if a.sparse or b.sparse:
        raise ValueError("orthogonal Procrustes needs dense spaces")
    if a.dim != b.dim:
        raise ValueError(f"dimensionalities differ ({a.dim} vs {b.dim})")
    shared = [w for w in a.vocab if w in b.index]
    if not shared:
        raise ValueError("spaces share no vocabulary")
    a_unit = _normalize_rows(a.vectors)
    b_unit = _normalize_rows(b.vectors)
    a_sh = a_unit[[a.index[w] for w in shared]]
    b_sh = b_unit[[b.index[w] for w in shared]]
    rotation = procrustes_rotation(a_sh - a_sh.mean(axis=0), b_sh - b_sh.mean(axis=0))
    prov = dict(b.provenance, alignment="OP", shared_vocab=len(shared))
    aligned = EmbeddingSpace(b.vocab, b_unit @ rotation, prov)
    aligned.rotation = rotation
    return aligned


def injected(word: str, side: int) -> str:
    return f"{word}{MARKER}{side}"


def word_injection(
    c1: Iterable[Sequence[str]],
    c2: Iterable[Sequence[str]],
    targets: Iterable[str],
) -> tuple[list[list[str]], dict[str, tuple[str, str]]]:
    """Concatenate both corpora, renaming target tokens by the corpus they came from."""
    targets = sorted(set(targets))
    if not targets:
        raise ValueError("word injection needs at least one target")
    for t in targets:
        if MARKER in t:
            raise ValueError(f"target {t!r} contains the marker character {MARKER!r}")
    renaming = {t: (injected(t, 1), injected(t, 2)) for t in targets}
    first = {t: r[0] for t, r in renaming.items()}
    second = {t: r[1] for t, r in renaming.items()}
    combined = [[first.get(w, w) for w in s] for s in c1]
    combined += [[second.get(w, w) for w in s] for s in c2]
    return combined, renaming
