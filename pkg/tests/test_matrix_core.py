import numpy as np
import pytest

from specavg import (
    DegenerateGapWarning,
    DenseSymmetric,
    NoConvergence,
    ShapeMismatch,
    SparseCSR,
    ZeroMatrix,
    fix_sign,
    hadamard,
    leading_singular_triplet,
    norms,
    numerical_rank,
    spectral_norm,
    top_k_eigen,
)

from conftest import random_symmetric
from oracles import jacobi_eigh, jacobi_spectral_norm, naive_norms


class TestDenseSymmetric:
    def test_symmetrized_exactly(self):
        a = random_symmetric(6, 0)
        a[0, 1] += 1e-10  # sub-tolerance asymmetry
        m = DenseSymmetric(a)
        assert np.array_equal(m.a, m.a.T)

    def test_rejects_asymmetric(self):
        a = np.arange(9, dtype=float).reshape(3, 3)
        with pytest.raises(ValueError):
            DenseSymmetric(a)

    def test_rejects_rectangular(self):
        with pytest.raises(ShapeMismatch):
            DenseSymmetric(np.zeros((2, 3)))

    def test_immutable(self):
        m = DenseSymmetric(np.eye(3))
        with pytest.raises(ValueError):
            m.a[0, 0] = 2.0


class TestSparseCSR:
    def test_from_coo_and_invariants(self):
        s = SparseCSR.from_coo(3, 4, [2, 0, 0], [1, 3, 0], [5.0, 6.0, 7.0])
        assert s.row_ptr.tolist() == [0, 2, 2, 3]
        assert s.col_idx.tolist() == [0, 3, 1]
        assert s.values.tolist() == [7.0, 6.0, 5.0]
        assert s.nnz == 3
        # strictly increasing within rows, nondecreasing ptr
        assert np.all(np.diff(s.row_ptr) >= 0)

    def test_stored_zero_pruned(self):
        s = SparseCSR.from_coo(2, 2, [0, 1], [0, 1], [0.0, 2.0])
        assert s.nnz == 1
        assert s.to_dense()[0, 0] == 0.0

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError):
            SparseCSR.from_coo(2, 2, [0, 0], [1, 1], [1.0, 2.0])

    def test_matvec_matches_dense(self):
        gen = np.random.default_rng(3)
        dense = gen.standard_normal((5, 7))
        dense[gen.random((5, 7)) < 0.5] = 0.0
        rows, cols = np.nonzero(dense)
        s = SparseCSR.from_coo(5, 7, rows, cols, dense[rows, cols])
        x = gen.standard_normal(7)
        y = gen.standard_normal(5)
        np.testing.assert_allclose(s.matvec(x), dense @ x, atol=1e-14)
        np.testing.assert_allclose(s.rmatvec(y), dense.T @ y, atol=1e-14)


class TestTopKEigen:
    def test_diagonal(self):
        pairs = top_k_eigen(DenseSymmetric(np.diag([3.0, 2.0, 1.0])), 2)
        assert pairs[0].value == pytest.approx(3.0, abs=1e-10)
        assert pairs[1].value == pytest.approx(2.0, abs=1e-10)
        np.testing.assert_allclose(np.abs(pairs[0].vector), [1, 0, 0],
                                   atol=1e-8)
        np.testing.assert_allclose(np.abs(pairs[1].vector), [0, 1, 0],
                                   atol=1e-8)

    def test_rank_one(self):
        n = 4
        m = DenseSymmetric(np.ones((n, n)) / n)
        pair = top_k_eigen(m, 1)[0]
        assert pair.value == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(pair.vector, np.full(n, 0.5), atol=1e-8)

    def test_matches_jacobi_oracle(self):
        a = random_symmetric(8, 42)
        vals, vecs = jacobi_eigh(a)
        pairs = top_k_eigen(DenseSymmetric(a), 3, tol=1e-12)
        for j, pair in enumerate(pairs):
            assert pair.value == pytest.approx(vals[j], abs=1e-8)
            overlap = abs(pair.vector @ vecs[:, j])
            assert overlap == pytest.approx(1.0, abs=1e-8)

    def test_algebraic_order_with_negative_dominant(self):
        # largest |eigenvalue| is negative: power iteration alone would
        # return it first; the contract wants algebraic order
        a = np.diag([-5.0, 2.0, 1.0])
        pairs = top_k_eigen(DenseSymmetric(a), 1)
        assert pairs[0].value == pytest.approx(2.0, abs=1e-9)

    def test_residual_contract(self):
        a = random_symmetric(12, 7)
        m = DenseSymmetric(a)
        tol = 1e-11
        pairs = top_k_eigen(m, 2, tol=tol)
        radius = spectral_norm(a)  # tolerance is relative to this scale
        for pair in pairs:
            resid = np.linalg.norm(a @ pair.vector - pair.value * pair.vector)
            assert resid <= tol * radius * 1.2
            assert resid == pytest.approx(pair.residual_norm, abs=1e-15)
            assert abs(np.linalg.norm(pair.vector) - 1.0) < 1e-12

    def test_sign_convention(self):
        a = random_symmetric(9, 11)
        pair = top_k_eigen(DenseSymmetric(a), 1)[0]
        i = np.argmax(np.abs(pair.vector))
        assert pair.vector[i] > 0

    def test_degenerate_gap_warns(self):
        a = np.diag([2.0, 1.0, 1.0 + 1e-13, 0.5])
        with pytest.warns(DegenerateGapWarning):
            top_k_eigen(DenseSymmetric(a), 2)

    def test_no_convergence_raises(self):
        a = random_symmetric(20, 1)
        with pytest.raises(NoConvergence):
            top_k_eigen(DenseSymmetric(a), 1, tol=1e-14, max_iter=3)

    def test_zero_matrix(self):
        pairs = top_k_eigen(DenseSymmetric(np.zeros((3, 3))), 2)
        assert [p.value for p in pairs] == [0.0, 0.0]

    def test_sparse_input(self):
        a = random_symmetric(10, 3)
        a[np.abs(a) < 0.8] = 0.0
        a = 0.5 * (a + a.T)
        rows, cols = np.nonzero(a)
        s = SparseCSR.from_coo(10, 10, rows, cols, a[rows, cols])
        vals, _ = jacobi_eigh(a)
        pair = top_k_eigen(s, 1, tol=1e-12)[0]
        assert pair.value == pytest.approx(vals[0], abs=1e-8)


class TestSpectralNorm:
    def test_zero(self):
        assert spectral_norm(np.zeros((4, 4))) == 0.0

    def test_diagonal(self):
        assert spectral_norm(np.diag([-5.0, 2.0])) == pytest.approx(5.0,
                                                                    rel=1e-9)

    def test_matches_jacobi_oracle(self):
        gen = np.random.default_rng(6)
        a = gen.standard_normal((6, 6))
        assert spectral_norm(a) == pytest.approx(jacobi_spectral_norm(a),
                                                 rel=1e-8)

    def test_rectangular(self):
        gen = np.random.default_rng(8)
        a = gen.standard_normal((4, 9))
        assert spectral_norm(a) == pytest.approx(jacobi_spectral_norm(a),
                                                 rel=1e-8)

    def test_bracketed_by_other_norms(self):
        a = random_symmetric(7, 9)
        s = spectral_norm(a)
        nn = norms(a)
        assert s >= nn["entrywise_max"] - 1e-10
        assert s <= nn["frobenius"] + 1e-10


class TestNorms:
    def test_identity(self):
        nn = norms(np.eye(3))
        assert nn["frobenius"] == pytest.approx(np.sqrt(3.0))
        assert nn["entrywise_max"] == 1.0

    def test_ones(self):
        nn = norms(np.ones((2, 2)))
        assert nn["frobenius"] == pytest.approx(2.0)
        assert nn["entrywise_max"] == 1.0

    def test_matches_naive(self):
        gen = np.random.default_rng(12)
        a = gen.standard_normal((5, 5))
        expect = naive_norms(a)
        got = norms(a)
        assert got["frobenius"] == pytest.approx(expect["frobenius"],
                                                 rel=1e-14)
        assert got["entrywise_max"] == expect["entrywise_max"]

    def test_sparse_with_implicit_zeros(self):
        s = SparseCSR.from_coo(3, 3, [0], [1], [-4.0])
        nn = norms(s)
        assert nn["frobenius"] == 4.0
        assert nn["entrywise_max"] == 4.0


class TestNumericalRank:
    def test_identity(self):
        assert numerical_rank(np.eye(7)) == pytest.approx(7.0, abs=1e-6)

    def test_rank_one(self):
        u = np.array([1.0, 2.0, 2.0]) / 3.0
        assert numerical_rank(np.outer(u, u)) == pytest.approx(1.0, abs=1e-8)

    def test_direct_formula(self):
        assert numerical_rank(np.diag([2.0, 1.0, 1.0])) == pytest.approx(
            1.5, abs=1e-8
        )

    def test_range(self):
        gen = np.random.default_rng(2)
        a = gen.standard_normal((6, 4))
        r = numerical_rank(a)
        assert 1.0 - 1e-6 <= r <= 4.0 + 1e-6

    def test_zero_matrix(self):
        with pytest.raises(ZeroMatrix):
            numerical_rank(np.zeros((3, 3)))


class TestHadamard:
    def test_identity_masks_diagonal(self):
        a = random_symmetric(4, 5)
        out = hadamard(DenseSymmetric(a), DenseSymmetric(np.eye(4)))
        np.testing.assert_allclose(out.a, np.diag(np.diag(a)), atol=1e-15)

    def test_zero_annihilates(self):
        a = random_symmetric(3, 5)
        out = hadamard(a, np.zeros((3, 3)))
        assert np.all(out == 0.0)

    def test_rank_one_mask_is_diagonal_scaling(self):
        # u u^T o C == D_u C D_u
        gen = np.random.default_rng(17)
        u = gen.standard_normal(6)
        c = random_symmetric(6, 18)
        left = hadamard(np.outer(u, u), c)
        d = np.diag(u)
        np.testing.assert_allclose(left, d @ c @ d, atol=1e-14)

    def test_sparse_dense_stays_sparse(self):
        s = SparseCSR.from_coo(2, 2, [0, 1], [1, 0], [2.0, 3.0])
        dense = np.array([[1.0, 5.0], [0.0, 1.0]])
        out = hadamard(s, dense)
        assert isinstance(out, SparseCSR)
        np.testing.assert_allclose(out.to_dense(),
                                   [[0.0, 10.0], [0.0, 0.0]])

    def test_sparse_sparse(self):
        s1 = SparseCSR.from_coo(2, 2, [0, 1], [1, 1], [2.0, 3.0])
        s2 = SparseCSR.from_coo(2, 2, [0, 0], [0, 1], [4.0, 5.0])
        out = hadamard(s1, s2)
        assert isinstance(out, SparseCSR)
        np.testing.assert_allclose(out.to_dense(),
                                   [[0.0, 10.0], [0.0, 0.0]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            hadamard(np.zeros((2, 2)), np.zeros((3, 3)))


class TestFixSign:
    def test_flips_negative_peak(self):
        v = np.array([0.1, -0.9, 0.3])
        np.testing.assert_array_equal(fix_sign(v), -v)

    def test_tie_breaks_lowest_index(self):
        v = np.array([-0.5, 0.5])
        assert fix_sign(v)[0] == 0.5

    def test_idempotent(self):
        gen = np.random.default_rng(1)
        v = gen.standard_normal(10)
        np.testing.assert_array_equal(fix_sign(fix_sign(v)),
                                      fix_sign(v))


class TestSingularTriplet:
    def test_matches_jacobi(self):
        gen = np.random.default_rng(14)
        a = gen.standard_normal((5, 8))
        sigma, u, v = leading_singular_triplet(a, tol=1e-12)
        assert sigma == pytest.approx(jacobi_spectral_norm(a), rel=1e-8)
        np.testing.assert_allclose(a @ v, sigma * u, atol=1e-7)
        np.testing.assert_allclose(a.T @ u, sigma * v, atol=1e-7)
        assert u[np.argmax(np.abs(u))] > 0
