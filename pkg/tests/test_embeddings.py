import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.linalg import orthogonal_procrustes
from scipy.stats import ortho_group

from lscsim.embeddings import (
    CooccurrenceMatrix,
    EmbeddingSpace,
    SGNSConfig,
    align_ci,
    align_op,
    build_count_matrix,
    cosine_distance,
    lnd,
    ppmi,
    procrustes_rotation,
    svd_reduce,
    train_sgns,
    word_injection,
)
from lscsim.embeddings.sgns import sgns_gradients, sgns_loss, sgns_step
from lscsim.embeddings.spaces import as_space


def dense(m):
    return m.matrix.toarray()


def cell(m, r, c):
    return dense(m)[m.rows.index(r), m.cols.index(c)]


def matrix(values, names=None):
    values = np.asarray(values, dtype=float)
    names = names or tuple("abcdefghij"[: values.shape[0]])
    return CooccurrenceMatrix(names, names, sp.csr_matrix(values), 10)


class TestCountMatrix:
    def test_three_tokens(self):
        m = build_count_matrix([["a", "b", "c"]], window=10)
        for x, y in [("a", "b"), ("a", "c"), ("b", "c")]:
            assert cell(m, x, y) == 1 and cell(m, y, x) == 1
        assert np.trace(dense(m)) == 0

    def test_single_token(self):
        m = build_count_matrix([["a"]])
        assert dense(m).sum() == 0

    def test_sentence_boundary(self):
        m = build_count_matrix([["a", "b"], ["a", "c"]])
        assert cell(m, "b", "c") == 0
        assert cell(m, "a", "b") == 1 and cell(m, "a", "c") == 1

    def test_window_limit(self):
        m = build_count_matrix([["a", "x", "x", "b"]], window=2)
        assert cell(m, "a", "b") == 0
        assert cell(m, "x", "x") == 2

    def test_brute_force(self):
        rng = np.random.default_rng(0)
        sents = [[f"w{x}" for x in rng.integers(0, 6, rng.integers(1, 15))] for _ in range(20)]
        m = build_count_matrix(sents, window=3)
        expected = np.zeros((len(m.rows), len(m.cols)))
        idx = {w: i for i, w in enumerate(m.rows)}
        for s in sents:
            for i, w in enumerate(s):
                for j, c in enumerate(s):
                    if i != j and abs(i - j) <= 3:
                        expected[idx[w], idx[c]] += 1
        np.testing.assert_array_equal(dense(m), expected)
        np.testing.assert_array_equal(expected, expected.T)

    def test_empty(self):
        with pytest.raises(ValueError):
            build_count_matrix([[]])


class TestPpmi:
    def test_independence(self):
        assert dense(ppmi(matrix(np.ones((2, 2))))).sum() == 0

    def test_diagonal(self):
        out = dense(ppmi(matrix([[2, 0], [0, 2]])))
        np.testing.assert_allclose(out, [[math.log(2), 0], [0, math.log(2)]])

    def test_single_cell(self):
        assert dense(ppmi(matrix([[0, 3], [0, 0]]))).sum() == 0

    def test_non_negative_and_sparse_pattern(self):
        rng = np.random.default_rng(1)
        counts = rng.integers(0, 4, (12, 12)) * (rng.random((12, 12)) < 0.5)
        out = dense(ppmi(matrix(counts, tuple(f"w{i}" for i in range(12)))))
        assert (out >= 0).all()
        assert (out[counts == 0] == 0).all()

    def test_formula(self):
        counts = np.array([[1, 3], [2, 4]], dtype=float)
        total = counts.sum()
        expected = np.maximum(0, np.log(counts * total / np.outer(counts.sum(1), counts.sum(0))))
        np.testing.assert_allclose(dense(ppmi(matrix(counts))), expected)


class TestSvd:
    def test_rank_one(self):
        x = np.outer([1.0, 2, 3], [4.0, 5, 6])
        space = svd_reduce(matrix(x), 1)
        # Vectors are U S, so U S (U S)^T = X X^T.
        np.testing.assert_allclose(space.vectors @ space.vectors.T, x @ x.T, atol=1e-9)

    def test_identity_rows_orthogonal(self):
        space = svd_reduce(matrix(np.eye(5)), 5)
        unit = space.unit_vectors()
        np.testing.assert_allclose(unit @ unit.T, np.eye(5), atol=1e-12)

    def test_eckart_young(self):
        rng = np.random.default_rng(2)
        x = rng.random((50, 50))
        names = tuple(f"w{i}" for i in range(50))
        space = svd_reduce(CooccurrenceMatrix(names, names, sp.csr_matrix(x), 10), 30)
        # Best achievable error from the eigenvalues of X^T X, an independent route.
        eig = np.sort(np.linalg.eigvalsh(x.T @ x))[::-1]
        optimal = math.sqrt(eig[30:].clip(min=0).sum())
        # Reconstruct the rank-30 approximation by projecting X onto span(U S).
        basis, _ = np.linalg.qr(space.vectors)
        ours = np.linalg.norm(x - basis @ (basis.T @ x))
        assert ours <= optimal + 1e-8
        for _ in range(20):
            q, _ = np.linalg.qr(rng.normal(size=(50, 30)))
            assert np.linalg.norm(x - q @ (q.T @ x)) >= ours - 1e-9

    def test_full_rank_preserves_dot_products(self):
        rng = np.random.default_rng(3)
        x = rng.random((8, 6))
        names_r = tuple(f"r{i}" for i in range(8))
        names_c = tuple(f"c{i}" for i in range(6))
        space = svd_reduce(CooccurrenceMatrix(names_r, names_c, sp.csr_matrix(x), 10), 6)
        np.testing.assert_allclose(space.vectors @ space.vectors.T, x @ x.T, atol=1e-8)

    def test_sparse_solver_agrees_with_dense(self):
        n = 2100
        x = sp.random(n, n, density=0.002, random_state=5, format="csr")
        names = tuple(f"w{i}" for i in range(n))
        space = svd_reduce(CooccurrenceMatrix(names, names, x, 10), 5)
        s_ref = np.linalg.svd(x.toarray(), compute_uv=False)[:5]
        np.testing.assert_allclose(np.linalg.norm(space.vectors, axis=0), s_ref, rtol=1e-6)

    def test_deterministic(self):
        x = np.random.default_rng(6).random((30, 30))
        a = svd_reduce(matrix(x, tuple(f"w{i}" for i in range(30))), 10)
        b = svd_reduce(matrix(x, tuple(f"w{i}" for i in range(30))), 10)
        np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_d_too_large(self):
        with pytest.raises(ValueError):
            svd_reduce(matrix(np.eye(3)), 4)


class TestSgns:
    def _triple(self, seed=0, d=8, k=5):
        rng = np.random.default_rng(seed)
        return rng.normal(size=d), rng.normal(size=d), rng.normal(size=(k, d))

    def test_gradient_finite_differences(self):
        # Ten-word vocabulary: one target, one context, five negatives drawn from it.
        rng = np.random.default_rng(0)
        vectors_in = rng.normal(scale=0.5, size=(10, 6))
        vectors_out = rng.normal(scale=0.5, size=(10, 6))
        w, c, negs = vectors_in[0], vectors_out[1], vectors_out[[2, 4, 5, 7, 9]]
        grad_w, grad_c, grad_negs = sgns_gradients(w, c, negs)
        h = 1e-6

        def fd(f, x):
            g = np.zeros_like(x)
            for i in np.ndindex(x.shape):
                e = np.zeros_like(x)
                e[i] = h
                g[i] = (f(x + e) - f(x - e)) / (2 * h)
            return g

        num_w = fd(lambda x: sgns_loss(x, c, negs), w)
        num_c = fd(lambda x: sgns_loss(w, x, negs), c)
        num_n = fd(lambda x: sgns_loss(w, c, x), negs)
        for analytic, numeric in [(grad_w, num_w), (grad_c, num_c), (grad_negs, num_n)]:
            rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
            assert rel < 1e-4

    def test_kernel_step_is_gradient_step(self):
        rng = np.random.default_rng(1)
        W = rng.normal(scale=0.3, size=(10, 6))
        C = rng.normal(scale=0.3, size=(10, 6))
        negs = [3, 4, 6, 8, 9]
        lr = 0.05
        grad_w, grad_c, grad_negs = sgns_gradients(W[0], C[2], C[negs])
        W2, C2 = W.copy(), C.copy()
        sgns_step(W2, C2, 0, 2, negs, lr)
        np.testing.assert_allclose(W2[0], W[0] - lr * grad_w, atol=1e-12)
        np.testing.assert_allclose(C2[2], C[2] - lr * grad_c, atol=1e-12)
        np.testing.assert_allclose(C2[negs], C[negs] - lr * grad_negs, atol=1e-12)

    def test_topic_blocks(self):
        rng = np.random.default_rng(7)
        block_a = [f"a{i}" for i in range(10)]
        block_b = [f"b{i}" for i in range(10)]
        sents = [list(rng.choice(block_a if i % 2 else block_b, 8)) for i in range(600)]
        space = train_sgns(sents, SGNSConfig(dim=20, epochs=5, window=4), seed=1)
        unit = space.unit_vectors()
        ia = [space.index[w] for w in block_a]
        ib = [space.index[w] for w in block_b]
        sims = unit @ unit.T
        within = np.mean([sims[i, j] for blk in (ia, ib) for i in blk for j in blk if i != j])
        across = np.mean(sims[np.ix_(ia, ib)])
        assert within > across

    def test_deterministic(self):
        sents = [["a", "b", "c", "d"], ["b", "c", "e"], ["a", "e", "d", "c", "b"]] * 5
        cfg = SGNSConfig(dim=5, epochs=3, window=2)
        a, b = train_sgns(sents, cfg, seed=3), train_sgns(sents, cfg, seed=3)
        assert a.vocab == b.vocab
        np.testing.assert_array_equal(a.vectors, b.vectors)
        c = train_sgns(sents, cfg, seed=4)
        assert not np.array_equal(a.vectors, c.vectors)

    def test_empty(self):
        with pytest.raises(ValueError):
            train_sgns([[]], SGNSConfig(dim=5))


def space(vectors, vocab=None, columns=None):
    vectors = np.asarray(vectors, dtype=float)
    vocab = vocab or tuple(f"w{i}" for i in range(vectors.shape[0]))
    return EmbeddingSpace(vocab, vectors, columns=columns)


class TestAlignCi:
    def _sparse(self, cols, seed):
        x = sp.csr_matrix(np.random.default_rng(seed).random((3, len(cols))))
        return EmbeddingSpace(("x", "y", "z"), x, columns=tuple(cols))

    def test_identical(self):
        a, b = self._sparse("abc", 0), self._sparse("abc", 1)
        a2, b2 = align_ci(a, b)
        np.testing.assert_array_equal(a2.vectors.toarray(), a.vectors.toarray())
        assert a2.columns == b2.columns == ("a", "b", "c")

    def test_partial(self):
        a, b = self._sparse("abc", 0), self._sparse("bcd", 1)
        a2, b2 = align_ci(a, b)
        assert a2.columns == b2.columns == ("b", "c")
        np.testing.assert_array_equal(a2.vectors.toarray(), a.vectors.toarray()[:, 1:])
        np.testing.assert_array_equal(b2.vectors.toarray(), b.vectors.toarray()[:, :2])

    def test_disjoint(self):
        with pytest.raises(ValueError):
            align_ci(self._sparse("ab", 0), self._sparse("cd", 1))


class TestAlignOp:
    def test_identity(self):
        a = space(np.random.default_rng(0).normal(size=(20, 5)))
        aligned = align_op(a, a)
        np.testing.assert_allclose(aligned.rotation, np.eye(5), atol=1e-9)

    def test_recovers_random_rotation(self):
        rng = np.random.default_rng(1)
        a = space(rng.normal(size=(40, 10)))
        q = ortho_group.rvs(10, random_state=2)
        aligned = align_op(a, space(a.vectors @ q))
        for w in a.vocab:
            assert cosine_distance(a, aligned, w) < 1e-6

    def test_2d_rotation(self):
        theta = math.radians(30)
        rot = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
        a = space(np.random.default_rng(3).normal(size=(15, 2)))
        aligned = align_op(a, space(a.vectors @ rot))
        back = np.array([[math.cos(-theta), math.sin(-theta)], [-math.sin(-theta), math.cos(-theta)]])
        np.testing.assert_allclose(aligned.rotation, back, atol=1e-6)

    def test_matches_scipy(self):
        rng = np.random.default_rng(4)
        x, y = rng.normal(size=(30, 6)), rng.normal(size=(30, 6))
        ours = procrustes_rotation(x, y)
        ref, _ = orthogonal_procrustes(y, x)
        np.testing.assert_allclose(ours, ref, atol=1e-10)

    def test_shared_vocab_only(self):
        rng = np.random.default_rng(5)
        a = space(rng.normal(size=(5, 3)), vocab=("a", "b", "c", "d", "e"))
        b = space(rng.normal(size=(5, 3)), vocab=("x", "y", "z", "u", "v"))
        with pytest.raises(ValueError):
            align_op(a, b)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 12))
    def test_rotation_orthogonal(self, seed, d):
        rng = np.random.default_rng(seed)
        n = rng.integers(1, 30)
        aligned = align_op(space(rng.normal(size=(n, d))), space(rng.normal(size=(n, d))))
        np.testing.assert_allclose(aligned.rotation.T @ aligned.rotation, np.eye(d), atol=1e-6)


class TestWordInjection:
    def test_counts(self):
        c1 = [["the", "plant", "grows"], ["a", "plant"]]
        c2 = [["plant", "plant"], ["big", "plant"]]
        combined, renaming = word_injection(c1, c2, ["plant"])
        flat = [w for s in combined for w in s]
        assert flat.count("plant@1") == 2 and flat.count("plant@2") == 3 and "plant" not in flat
        assert renaming == {"plant": ("plant@1", "plant@2")}
        assert len(combined) == 4

    def test_empty_targets(self):
        with pytest.raises(ValueError):
            word_injection([["a"]], [["b"]], [])

    def test_absent_target(self):
        combined, _ = word_injection([["a", "b"]], [["c"]], ["zzz"])
        assert combined == [["a", "b"], ["c"]]

    def test_marker_in_target(self):
        with pytest.raises(ValueError):
            word_injection([["a"]], [["b"]], ["a@b"])


class TestCosineDistance:
    def test_values(self):
        a = space([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]], vocab=("x", "y", "z"))
        b = space([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]], vocab=("x", "y", "z"))
        assert cosine_distance(a, b, "x") == 0.0
        assert cosine_distance(a, b, "y") == pytest.approx(1.0)
        assert cosine_distance(a, b, "z") == pytest.approx(2.0)

    def test_missing_or_zero(self):
        a = space([[1.0, 0.0], [0.0, 0.0]], vocab=("x", "y"))
        with pytest.raises(KeyError):
            cosine_distance(a, a, "nope")
        with pytest.raises(ValueError):
            cosine_distance(a, a, "y")

    def test_shared_rotation_invariance(self):
        rng = np.random.default_rng(8)
        a, b = rng.normal(size=(10, 6)), rng.normal(size=(10, 6))
        q = ortho_group.rvs(6, random_state=9)
        for w in space(a).vocab:
            before = cosine_distance(space(a), space(b), w)
            after = cosine_distance(space(a @ q), space(b @ q), w)
            assert after == pytest.approx(before, abs=1e-9)

    def test_sparse_spaces(self):
        a = as_space(build_count_matrix([["a", "b", "c"], ["a", "c"]]), "COUNT")
        assert cosine_distance(a, a, "a") == pytest.approx(0.0, abs=1e-12)


def brute_lnd(a, b, word, k):
    """Direct restatement of the local-neighborhood definition on dense arrays."""
    vocab = [w for w in a.vocab if w != word and w in b.index]

    def cos(u, v):
        return u @ v / (np.linalg.norm(u) * np.linalg.norm(v))

    def top(space):
        sims = [(-cos(space.vector(word), space.vector(w)), i, w) for i, w in enumerate(vocab)]
        return {w for _, _, w in sorted(sims)[:k]}

    hood = [w for w in vocab if w in top(a) | top(b)]
    s_a = np.array([cos(a.vector(word), a.vector(w)) for w in hood])
    s_b = np.array([cos(b.vector(word), b.vector(w)) for w in hood])
    return 1 - cos(s_a, s_b)


class TestLnd:
    def test_identical(self):
        a = space(np.random.default_rng(0).normal(size=(40, 5)))
        assert lnd(a, a, "w0", k_nn=10) == pytest.approx(0.0, abs=1e-12)

    def test_global_rotation_ignored(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 5))
        q = ortho_group.rvs(5, random_state=3)
        assert lnd(space(x), space(x @ q), "w3", k_nn=10) == pytest.approx(0.0, abs=1e-12)

    def test_swapped_neighbor_brute_force(self):
        va = [[1, 0, 0], [0.9, 0.1, 0], [0.5, 0.5, 0], [0, 1, 0], [0, 0, 1]]
        vb = [[1, 0, 0], [0.5, 0.5, 0], [0.9, 0.1, 0], [0, 1, 0], [0.2, 0, 1]]
        a, b = space(va), space(vb)
        for k in (1, 2, 3, 4):
            assert lnd(a, b, "w0", k_nn=k) == pytest.approx(brute_lnd(a, b, "w0", k), abs=1e-12)
        assert lnd(a, b, "w0", k_nn=2) > 0

    def test_random_brute_force(self):
        rng = np.random.default_rng(5)
        a, b = space(rng.normal(size=(30, 4))), space(rng.normal(size=(30, 4)))
        for w in ("w0", "w7", "w19"):
            assert lnd(a, b, w, k_nn=6) == pytest.approx(brute_lnd(a, b, w, 6), abs=1e-12)

    def test_insufficient_vocabulary(self):
        a = space(np.random.default_rng(0).normal(size=(5, 3)))
        with pytest.raises(ValueError):
            lnd(a, a, "w0", k_nn=25)

    def test_sparse(self):
        a = as_space(build_count_matrix([["a", "b", "c", "d"], ["a", "c", "e"], ["b", "e", "d"]]), "COUNT")
        assert lnd(a, a, "a", k_nn=2) == pytest.approx(0.0, abs=1e-12)
