import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import central_diff_grad
from restartkit import InputError
from restartkit.oracles import (
    BoxQP,
    LassoProblem,
    LogSumExp,
    Quadratic,
    eval_grad,
    eval_value,
    from_dict,
    gen_boxqp,
    gen_lasso,
    gen_logsumexp,
    gen_quadratic,
    load_problem,
    project_box,
    save_problem,
    soft_threshold,
    to_dict,
)
from restartkit.solvers import SolverConfig, accel_projected_gradient, accelerated_scheme1, ista
from restartkit.restart import parse_policy

finite = st.floats(-1e3, 1e3, allow_nan=False)
vec = arrays(np.float64, 6, elements=finite)


class TestEval:
    def test_identity_quadratic_minimum(self):
        assert eval_value(Quadratic.from_matrix(np.eye(2)), np.zeros(2)) == 0.0

    def test_diag_quadratic_value_and_grad(self):
        qd = Quadratic.from_matrix(np.diag([1.0, 4.0]))
        assert eval_value(qd, np.ones(2)) == pytest.approx(2.5, abs=1e-15)
        np.testing.assert_allclose(eval_grad(qd, np.ones(2)), [1.0, 4.0], atol=1e-15)

    def test_trivial_logsumexp_is_zero(self):
        lse = LogSumExp(np.zeros((1, 3)), np.zeros(1), 1.0)
        assert eval_value(lse, np.array([1.0, -2.0, 3.0])) == 0.0

    def test_dimension_mismatch(self):
        qd = Quadratic.from_matrix(np.eye(3))
        with pytest.raises(InputError):
            eval_value(qd, np.zeros(2))
        with pytest.raises(InputError):
            eval_grad(qd, np.zeros(4))

    def test_logsumexp_weights_sum_to_one(self):
        lse = gen_logsumexp(5, 30, 0.1, seed=3)
        x = np.random.default_rng(0).standard_normal(5)
        w = lse.weights(x)
        assert w.sum() == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(lse.grad(x), lse.A.T @ w, rtol=1e-13)

    def test_logsumexp_finite_for_large_arguments(self):
        lse = gen_logsumexp(4, 10, 0.01, seed=1)
        assert math.isfinite(lse.value(np.full(4, 1e4)))

    def test_logsumexp_midpoint_convex(self, rng):
        lse = gen_logsumexp(6, 40, 0.5, seed=2)
        for _ in range(50):
            u, v = rng.standard_normal((2, 6)) * 3
            assert lse.value(0.5 * (u + v)) <= 0.5 * (lse.value(u) + lse.value(v)) + 1e-12

    def test_lasso_value_nonnegative(self, rng):
        prob = gen_lasso(40, 20, 5, 0.5, 0.1, seed=0)
        for _ in range(20):
            assert prob.value(rng.standard_normal(40)) >= 0.0

    @pytest.mark.parametrize(
        "make",
        [
            lambda: gen_quadratic(15, 50.0, 0, with_linear=True),
            lambda: gen_logsumexp(8, 30, 0.5, 0),
            lambda: gen_boxqp(12, 100.0, 0),
        ],
    )
    def test_finite_difference_gradient(self, make, rng):
        obj = make()
        for _ in range(10):
            x = rng.standard_normal(obj.n)
            g = obj.grad(x)
            fd = central_diff_grad(obj.value, x)
            assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1.0)

    def test_lasso_smooth_gradient_fd(self, rng):
        prob = gen_lasso(20, 10, 3, 1.0, 0.1, 0)

        def smooth(x):
            r = prob.A @ x - prob.b
            return 0.5 * r @ r

        x = rng.standard_normal(20)
        g = prob.smooth_grad(x)
        assert np.linalg.norm(central_diff_grad(smooth, x) - g) <= 1e-6 * np.linalg.norm(g)


class TestProx:
    def test_soft_threshold_examples(self):
        np.testing.assert_array_equal(soft_threshold(np.array([3.0, -0.5, -2.0]), 1.0), [2.0, 0.0, -1.0])
        x = np.array([0.3, -7.0, 0.0])
        np.testing.assert_array_equal(soft_threshold(x, 0.0), x)

    def test_soft_threshold_negative_alpha(self):
        with pytest.raises(InputError):
            soft_threshold(np.ones(2), -0.1)

    @settings(max_examples=200, deadline=None)
    @given(vec, vec, st.floats(0, 50))
    def test_soft_threshold_nonexpansive(self, u, v, alpha):
        d = np.linalg.norm(soft_threshold(u, alpha) - soft_threshold(v, alpha))
        assert d <= np.linalg.norm(u - v) * (1 + 1e-12) + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(vec, st.floats(0, 50))
    def test_soft_threshold_matches_formula(self, v, alpha):
        ref = np.sign(v) * np.maximum(np.abs(v) - alpha, 0.0)
        np.testing.assert_array_equal(soft_threshold(v, alpha), ref)

    def test_project_box_examples(self):
        a, b = -np.ones(1), np.ones(1)
        assert project_box(np.array([1.5]), a, b)[0] == 1.0
        assert project_box(np.array([0.2]), a, b)[0] == 0.2

    def test_project_box_bad_bounds(self):
        with pytest.raises(InputError):
            project_box(np.zeros(2), np.array([0.0, 1.0]), np.array([1.0, 1.0]))

    @settings(max_examples=200, deadline=None)
    @given(vec, vec)
    def test_project_box_idempotent_nonexpansive(self, u, v):
        a, b = np.full(6, -2.0), np.full(6, 3.0)
        pu, pv = project_box(u, a, b), project_box(v, a, b)
        np.testing.assert_array_equal(project_box(pu, a, b), pu)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) * (1 + 1e-12) + 1e-12
        assert np.all((a <= pu) & (pu <= b))


class TestGenerators:
    def test_quadratic_default_condition(self):
        qd = gen_quadratic(200, 1.0 / 4.1e-5, seed=0)
        assert qd.mu / qd.L == pytest.approx(4.1e-5, rel=1e-12)

    @pytest.mark.parametrize("spectrum", ["loguniform", "linear"])
    def test_quadratic_reported_extremes(self, spectrum):
        qd = gen_quadratic(60, 1e4, seed=7, spectrum=spectrum)
        ev = np.linalg.eigvalsh(qd.A)
        assert qd.mu == pytest.approx(ev[0], rel=1e-9)
        assert qd.L == pytest.approx(ev[-1], rel=1e-9)
        assert np.all(np.diff(qd.eigvals) >= 0)

    def test_quadratic_loguniform_spacing(self):
        qd = gen_quadratic(11, 1e5, seed=0)
        np.testing.assert_allclose(np.log10(qd.eigvals), np.linspace(-5, 0, 11), atol=1e-12)

    def test_quadratic_cond_one(self):
        qd = gen_quadratic(8, 1.0, seed=0)
        np.testing.assert_allclose(qd.A, np.eye(8), atol=1e-13)
        assert qd.mu == qd.L

    def test_quadratic_linear_term(self):
        qd = gen_quadratic(30, 100.0, seed=4, with_linear=True)
        np.testing.assert_allclose(qd.grad(qd.x_star), 0.0, atol=1e-12)
        assert qd.f_star < 0

    def test_quadratic_rejects_bad_args(self):
        with pytest.raises(InputError):
            gen_quadratic(1, 10.0, 0)
        with pytest.raises(InputError):
            gen_quadratic(5, 0.5, 0)
        with pytest.raises(InputError):
            gen_quadratic(5, 10.0, 0, spectrum="cubic")

    def test_quadratic_requires_symmetric_pd(self):
        with pytest.raises(InputError):
            Quadratic.from_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(InputError):
            Quadratic(np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros(2), np.ones(2), np.eye(2))

    @pytest.mark.parametrize(
        "make",
        [
            lambda s: gen_quadratic(20, 1e3, s, with_linear=True),
            lambda s: gen_logsumexp(5, 20, 0.1, s),
            lambda s: gen_lasso(30, 10, 4, 1.0, 0.1, s),
            lambda s: gen_boxqp(10, 1e3, s),
        ],
    )
    def test_generators_deterministic(self, make):
        a, b, c = make(5), make(5), make(6)
        da, db, dc = to_dict(a), to_dict(b), to_dict(c)
        assert json.dumps(da) == json.dumps(db)
        assert json.dumps(da["data"]) != json.dumps(dc["data"])

    def test_logsumexp_rejects_rho(self):
        with pytest.raises(InputError):
            gen_logsumexp(3, 5, 0.0, 0)

    def test_logsumexp_minimum_is_finite(self):
        lse = gen_logsumexp(20, 100, 1.0, seed=0)
        cfg = SolverConfig(step_size="backtracking", max_iters=3000, restart=parse_policy("grad"))
        tr = accelerated_scheme1(lse, np.zeros(20), cfg)
        assert np.linalg.norm(lse.grad(tr.final_x)) < 1e-8

    def test_lasso_structure(self):
        prob = gen_lasso(100, 40, 7, 1.0, 0.1, seed=3)
        assert np.count_nonzero(prob.x_true) == 7
        assert prob.A.shape == (40, 100)
        with pytest.raises(InputError):
            gen_lasso(5, 4, 6, 1.0, 0.1, 0)

    def test_lasso_zero_signal(self):
        prob = gen_lasso(50, 20, 0, 1.0, 0.1, seed=1)
        np.testing.assert_array_equal(prob.A @ prob.x_true, 0.0)
        big = LassoProblem(prob.A, prob.b, float(np.abs(prob.A.T @ prob.b).max()) * 1.01)
        tr = ista(big, np.zeros(50), SolverConfig(max_iters=20))
        np.testing.assert_array_equal(tr.final_x, 0.0)

    def test_boxqp_condition_and_bounds(self):
        qp = gen_boxqp(80, 1e7, seed=0)
        ev = np.linalg.eigvalsh(qp.Q)
        assert ev[-1] / ev[0] == pytest.approx(1e7, rel=1e-6)
        assert qp.eigvals[-1] / qp.eigvals[0] == pytest.approx(1e7, rel=1e-9)
        np.testing.assert_array_equal(qp.lo, -1.0)
        np.testing.assert_array_equal(qp.hi, 1.0)

    def test_boxqp_rejects_bounds(self):
        with pytest.raises(InputError):
            BoxQP(np.eye(2), np.zeros(2), np.ones(2), np.ones(2))

    @pytest.mark.slow
    def test_boxqp_default_instance_active_count(self):
        qp = gen_boxqp(500, 1e7, seed=0)
        cfg = SolverConfig(max_iters=20000, tol=1e-10, restart=parse_policy("grad"))
        tr = accel_projected_gradient(qp, np.zeros(500), cfg)
        assert 10 <= qp.active_count(tr.final_x) <= 99


class TestSerialization:
    @pytest.mark.parametrize(
        "make",
        [
            lambda: gen_quadratic(12, 1e3, 2, with_linear=True),
            lambda: gen_logsumexp(5, 20, 0.1, 2),
            lambda: gen_lasso(30, 10, 4, 1.0, 0.1, 2),
            lambda: gen_boxqp(10, 1e3, 2),
        ],
    )
    def test_round_trip_bitwise(self, make, tmp_path, rng):
        prob = make()
        path = tmp_path / "p.json"
        save_problem(prob, path)
        back = load_problem(path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"type", "seed", "params", "data"}
        for _ in range(5):
            x = rng.standard_normal(prob.n)
            assert back.value(x) == prob.value(x)

    def test_unknown_type(self):
        with pytest.raises(InputError):
            from_dict({"type": "cone", "data": {}})
        with pytest.raises(InputError):
            to_dict(object())
