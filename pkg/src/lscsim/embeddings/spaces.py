"""Co-occurrence counting, PPMI weighting and truncated SVD."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

__all__ = [
    "CooccurrenceMatrix",
    "EmbeddingSpace",
    "read_sentences",
    "build_count_matrix",
    "ppmi",
    "svd_reduce",
    "as_space",
]

# Below this size a dense LAPACK decomposition is cheaper than ARPACK.
_DENSE_SVD_LIMIT = 2000


def read_sentences(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as f:
        return [line.split() for line in f]


@dataclass
class CooccurrenceMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    matrix: sp.csr_matrix
    window: int

    def __post_init__(self):
        if self.matrix.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match vocabularies")


@dataclass
class EmbeddingSpace:
    """Word vectors indexed by vocabulary.

    ``vectors`` is a dense array or, for count-based spaces, a sparse CSR
    matrix whose columns are the context words in ``columns``.
    """

    vocab: tuple[str, ...]
    vectors: np.ndarray | sp.csr_matrix
    provenance: dict = field(default_factory=dict)
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        self.vocab = tuple(self.vocab)
        if self.vectors.shape[0] != len(self.vocab):
            raise ValueError("one vector per vocabulary word required")
        if self.vectors.shape[1] == 0:
            raise ValueError("vectors must have at least one dimension")
        if self.columns is not None and len(self.columns) != self.vectors.shape[1]:
            raise ValueError("column vocabulary does not match vector width")
        self.index = {w: i for i, w in enumerate(self.vocab)}
        if len(self.index) != len(self.vocab):
            raise ValueError("duplicate vocabulary entries")
        self._unit = None

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def sparse(self) -> bool:
        return sp.issparse(self.vectors)

    def __contains__(self, word):
        return word in self.index

    def __len__(self):
        return len(self.vocab)

    def vector(self, word: str) -> np.ndarray:
        row = self.vectors[self.index[word]]
        return row.toarray().ravel() if self.sparse else np.asarray(row, dtype=float)

    def unit_vectors(self):
        """Rows scaled to unit length (zero rows stay zero); cached."""
        if self._unit is None:
            if self.sparse:
                norms = np.sqrt(np.asarray(self.vectors.multiply(self.vectors).sum(axis=1)).ravel())
                inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
                self._unit = sp.diags(inv) @ self.vectors
                self._unit = self._unit.tocsr()
            else:
                norms = np.linalg.norm(self.vectors, axis=1)
                inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
                self._unit = self.vectors * inv[:, None]
        return self._unit


def _vocabulary(sentences: Sequence[Sequence[str]]) -> tuple[str, ...]:
    return tuple(sorted({w for s in sentences for w in s}))


def build_count_matrix(sentences: Iterable[Sequence[str]], window: int = 10) -> CooccurrenceMatrix:
    """Symmetric-window co-occurrence counts that never cross sentence boundaries."""
    sentences = [list(s) for s in sentences]
    if not any(sentences):
        raise ValueError("cannot count co-occurrences in an empty corpus")
    if window < 1:
        raise ValueError("window must be positive")
    vocab = _vocabulary(sentences)
    index = {w: i for i, w in enumerate(vocab)}
    ids = np.fromiter((index[w] for s in sentences for w in s), dtype=np.int64)
    sent = np.repeat(np.arange(len(sentences)), [len(s) for s in sentences])
    rows, cols = [], []
    for offset in range(1, window + 1):
        same = sent[offset:] == sent[:-offset]
        left, right = ids[:-offset][same], ids[offset:][same]
        rows += [left, right]
        cols += [right, left]
    n = len(vocab)
    if rows:
        r, c = np.concatenate(rows), np.concatenate(cols)
    else:
        r = c = np.zeros(0, dtype=np.int64)
    matrix = sp.coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    return CooccurrenceMatrix(vocab, vocab, matrix, window)


def ppmi(m: CooccurrenceMatrix) -> CooccurrenceMatrix:
    """Positive pointwise mutual information (natural log) of a count matrix."""
    counts = m.matrix.tocoo()
    total = counts.sum()
    if total <= 0:
        raise ValueError("PPMI needs a matrix with positive total count")
    row_sums = np.asarray(m.matrix.sum(axis=1)).ravel()
    col_sums = np.asarray(m.matrix.sum(axis=0)).ravel()
    pmi = np.log(counts.data * total / (row_sums[counts.row] * col_sums[counts.col]))
    keep = pmi > 0
    out = sp.coo_matrix(
        (pmi[keep], (counts.row[keep], counts.col[keep])), shape=m.matrix.shape
    ).tocsr()
    return CooccurrenceMatrix(m.rows, m.cols, out, m.window)


def _fix_signs(u: np.ndarray, vt: np.ndarray):
    # Make the largest-magnitude entry of each left singular vector positive.
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1
    return u * signs, vt * signs[:, None]


def svd_reduce(m: CooccurrenceMatrix, d: int) -> "EmbeddingSpace":
    """Rows of U_d * S_d from the rank-``d`` truncated SVD of the matrix."""
    rows, cols = m.matrix.shape
    if not 0 < d <= min(rows, cols):
        raise ValueError(f"d={d} must lie in [1, {min(rows, cols)}]")
    if d >= min(rows, cols) - 1 or min(rows, cols) <= _DENSE_SVD_LIMIT:
        u, s, vt = np.linalg.svd(m.matrix.toarray(), full_matrices=False)
        u, s, vt = u[:, :d], s[:d], vt[:d]
    else:
        # A fixed start vector keeps ARPACK deterministic.
        v0 = np.full(min(rows, cols), 1.0 / np.sqrt(min(rows, cols)))
        u, s, vt = svds(m.matrix.astype(np.float64), k=d, v0=v0, solver="arpack")
        order = np.argsort(-s, kind="stable")
        u, s, vt = u[:, order], s[order], vt[order]
    u, vt = _fix_signs(u, vt)
    return EmbeddingSpace(m.rows, u * s, {"model": "SVD", "dim": d, "window": m.window})


def as_space(m: CooccurrenceMatrix, model: str) -> EmbeddingSpace:
    """Wrap a sparse matrix as a space whose dimensions are its context words."""
    return EmbeddingSpace(m.rows, m.matrix.tocsr(), {"model": model, "window": m.window}, columns=m.cols)
