import numpy as np
import pytest

from specavg import (
    OutsidePerturbativeRegime,
    SampleConfig,
    SpectralModel,
    draw_sample,
    exact_eigenvector,
    expand,
    reduced_resolvent,
    regularized_vector,
    second_order_vector,
    separation,
    spectral_norm,
)

from conftest import random_symmetric
from oracles import brute_force_separation, dense_reduced_resolvent


def two_by_two_model():
    return SpectralModel([2.0, 1.0], np.eye(2))


def random_model(n, lam, seed):
    gen = np.random.default_rng(seed)
    q, _ = np.linalg.qr(gen.standard_normal((n, len(lam))))
    return SpectralModel(np.asarray(lam, dtype=float), q)


def scaled_residual(model, scale, seed):
    """A symmetric perturbation with ||E|| about `scale`."""
    e = random_symmetric(model.n, seed)
    return e * (scale / spectral_norm(e))


class TestReducedResolvent:
    def test_two_by_two(self):
        res = reduced_resolvent(two_by_two_model(), 1)
        np.testing.assert_allclose(res.dense(), [[0.0, 0.0], [0.0, -1.0]],
                                   atol=1e-15)

    def test_annihilates_u_k(self):
        model = random_model(10, [3.0, 1.5, 0.5], seed=2)
        for k in (1, 2, 3):
            res = reduced_resolvent(model, k)
            out = res.apply(model.vector(k))
            assert np.linalg.norm(out) <= 1e-12

    def test_apply_matches_dense_assembly(self):
        model = random_model(6, [2.0, 1.0, -0.5], seed=3)
        res = reduced_resolvent(model, 2)
        dense = dense_reduced_resolvent(model.eigenvalues,
                                        model.eigenvectors, 2, model.n)
        gen = np.random.default_rng(0)
        for _ in range(5):
            x = gen.standard_normal(6)
            np.testing.assert_allclose(res.apply(x), dense @ x, atol=1e-12)

    def test_implicit_zero_block(self):
        model = random_model(8, [2.0, 1.0], seed=4)
        res = reduced_resolvent(model, 1)
        dense = dense_reduced_resolvent(model.eigenvalues,
                                        model.eigenvectors, 1, model.n)
        x = np.random.default_rng(1).standard_normal(8)
        np.testing.assert_allclose(res.apply(x), dense @ x, atol=1e-12)

    def test_norm_is_inverse_separation(self):
        model = random_model(7, [2.0, 0.9, 0.1], seed=5)
        for k in (1, 2, 3):
            res = reduced_resolvent(model, k)
            assert res.norm == pytest.approx(1.0 / model.separation(k))
            assert spectral_norm(res.dense()) == pytest.approx(
                res.norm, rel=1e-9
            )


class TestSeparation:
    def test_examples(self):
        model = SpectralModel([3.0, 1.0, 0.0], np.eye(3))
        assert separation(model, 1) == 2.0
        assert separation(model, 2) == 1.0

    def test_matches_brute_force(self):
        model = random_model(9, [4.0, 2.5, 1.0, -0.5], seed=6)
        for k in range(1, 5):
            assert separation(model, k) == pytest.approx(
                brute_force_separation(model.eigenvalues, k, model.n)
            )


class TestExpand:
    def test_zero_perturbation(self):
        model = random_model(6, [2.0, 1.0], seed=7)
        exp = expand(model, 1, np.zeros((6, 6)), lambda_s=2.0, order=1)
        np.testing.assert_allclose(exp.corrected, model.vector(1),
                                   atol=1e-14)
        assert exp.error_budget == 0.0

    def test_gauge_identity(self):
        # (corrected - u) is orthogonal to u
        model = random_model(12, [2.0, 1.0, 0.5], seed=8)
        e = scaled_residual(model, 0.15, seed=9)
        v_s, lam_s = exact_eigenvector(model, 1, e)
        for order in (0, 1, 2):
            exp = expand(model, 1, e, lambda_s=lam_s, order=order)
            inner = (exp.corrected - model.vector(1)) @ model.vector(1)
            assert abs(inner) <= 1e-10

    def test_theorem_bound_small_case(self):
        model = random_model(8, [2.0, 1.0, 0.3], seed=10)
        e = scaled_residual(model, 0.2, seed=11)
        v_exact, lam_s = exact_eigenvector(model, 1, e, gauge="ratio")
        exp = expand(model, 1, e, lambda_s=lam_s, order=0)
        err = np.linalg.norm(v_exact - exp.corrected)
        assert err <= exp.error_budget

    def test_budget_monotone_in_order(self):
        model = random_model(8, [2.0, 1.0], seed=12)
        e = scaled_residual(model, 0.2, seed=13)
        budgets = [expand(model, 1, e, lambda_s=None, order=j).error_budget
                   for j in range(4)]
        assert all(np.diff(budgets) < 0)

    def test_outside_regime_raises(self):
        model = random_model(6, [1.0, 0.9], seed=14)
        e = scaled_residual(model, 0.2, seed=15)  # 2*0.2/0.1 = 4 >= 1
        with pytest.raises(OutsidePerturbativeRegime):
            expand(model, 1, e, lambda_s=1.0)

    def test_delta_of_u_equals_REu(self):
        # R E u = Delta u since R u = 0
        model = random_model(9, [2.0, 1.1, 0.4], seed=16)
        e = scaled_residual(model, 0.1, seed=17)
        exp = expand(model, 1, e, lambda_s=2.05, order=0)
        u = model.vector(1)
        res = reduced_resolvent(model, 1)
        np.testing.assert_allclose(
            exp.delta_op.apply(u), res.apply(e @ u), atol=1e-12
        )

    def test_delta_dense_matches_apply(self):
        model = random_model(7, [2.0, 0.8], seed=18)
        e = scaled_residual(model, 0.1, seed=19)
        exp = expand(model, 1, e, lambda_s=2.02, order=1)
        dense = exp.delta_op.dense()
        x = np.random.default_rng(2).standard_normal(7)
        np.testing.assert_allclose(exp.delta_op.apply(x), dense @ x,
                                   atol=1e-12)

    def test_budget_holds_over_draw_bank(self):
        # theorem, not a tail bound: zero violations in the regime
        model = random_model(30, [1.0, 0.4, 0.15], seed=20)
        m = model.assemble()
        checked = 0
        for seed in range(40):
            draw = draw_sample(_dense(m), SampleConfig(p=0.85, seed=seed))
            e = draw.s.to_dense() - m
            theta = 2.0 * spectral_norm(e) / model.separation(1)
            if theta >= 0.8:
                continue
            checked += 1
            v_exact, lam_s = exact_eigenvector(model, 1, e)
            for j in (0, 1, 2):
                exp = expand(model, 1, e, lambda_s=lam_s, order=j)
                err = np.linalg.norm(v_exact - exp.corrected)
                assert err <= exp.error_budget
        assert checked >= 20


def _dense(a):
    from specavg import DenseSymmetric

    return DenseSymmetric(a)


class TestSecondOrder:
    def test_zero_perturbation(self):
        model = random_model(6, [2.0, 1.0], seed=21)
        np.testing.assert_allclose(
            second_order_vector(model, np.zeros((6, 6))),
            model.vector(1), atol=1e-14,
        )

    def test_matches_explicit_formula(self):
        model = random_model(8, [2.0, 1.0, 0.5], seed=22)
        e = scaled_residual(model, 0.1, seed=23)
        u = model.vector(1)
        res = reduced_resolvent(model, 1)
        gamma = float(u @ (e @ u))
        w = res.apply(e @ u)
        explicit = u - w + res.apply(e @ w - gamma * w)
        np.testing.assert_allclose(second_order_vector(model, e), explicit,
                                   atol=1e-13)

    def test_third_order_agreement_with_exact_shift(self):
        # difference from expand(order=1, exact lambda_S) shrinks like t^3
        model = random_model(10, [1.0, 0.5, 0.2], seed=24)
        e0 = scaled_residual(model, 0.1, seed=25)
        diffs, quad_errs = [], []
        ts = [1.0, 0.5, 0.25]
        for t in ts:
            e = t * e0
            v_exact, lam_s = exact_eigenvector(model, 1, e)
            with_shift = expand(model, 1, e, lambda_s=lam_s, order=1)
            approx = second_order_vector(model, e)
            diffs.append(np.linalg.norm(with_shift.corrected - approx))
            # u^T E u approximates the true shift to O(||E||^2)
            gamma_true = lam_s - model.eigenvalue(1)
            gamma_quad = float(model.vector(1) @ (e @ model.vector(1)))
            quad_errs.append(abs(gamma_true - gamma_quad))
        slope = np.polyfit(np.log(ts), np.log(diffs), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.45)
        slope_gamma = np.polyfit(np.log(ts), np.log(quad_errs), 1)[0]
        assert slope_gamma == pytest.approx(2.0, abs=0.35)


class TestRegularized:
    def test_zero_perturbation_both_branches(self):
        model = random_model(6, [2.0, 1.0], seed=26)
        v = regularized_vector(model, 1, np.zeros((6, 6)), lambda_s=2.0,
                               eps=0.5)
        np.testing.assert_allclose(v, model.vector(1), atol=1e-12)

    def test_small_eps_returns_exact(self):
        model = random_model(8, [2.0, 1.0], seed=27)
        e = scaled_residual(model, 0.1, seed=28)
        v_exact, lam_s = exact_eigenvector(model, 1, e)
        v = regularized_vector(model, 1, e, lambda_s=lam_s, eps=1e-8)
        np.testing.assert_allclose(v, v_exact, atol=1e-10)

    def test_fallback_branch_formula(self):
        # eps so large the conditioning test fails: output must be the
        # explicit second-order polynomial, assembled densely here
        model = random_model(7, [2.0, 1.2], seed=29)
        e = scaled_residual(model, 0.15, seed=30)
        lam_s = exact_eigenvector(model, 1, e)[1]
        v = regularized_vector(model, 1, e, lambda_s=lam_s, eps=10.0)
        res = dense_reduced_resolvent(model.eigenvalues, model.eigenvectors,
                                      1, model.n)
        gamma = lam_s - model.eigenvalue(1)
        delta = res @ (e - gamma * np.eye(7))
        u = model.vector(1)
        expected = u - res @ e @ u + delta @ res @ e @ u
        np.testing.assert_allclose(v, expected, atol=1e-12)

    def test_eps_must_be_positive(self):
        model = random_model(5, [2.0, 1.0], seed=31)
        with pytest.raises(ValueError):
            regularized_vector(model, 1, np.zeros((5, 5)), 2.0, eps=0.0)
