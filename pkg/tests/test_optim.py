import numpy as np
import pytest

from pysrc.helpers.geometry import poincare
from pysrc.helpers.graddiff import ops
from pysrc.helpers.graddiff.tensor import backward, forward
from pysrc.helpers.models.params import ParamTensor, euclidean, manifold_ball
from pysrc.helpers.optim.adam import AdamConfig, OptimState, adam_step
from pysrc.helpers.optim.optimizer import Optimizer, OptimizerConfig, global_norm
from pysrc.helpers.optim.radam import radam_step, row_state, transport_momentum


class TestAdam:
    def test_zero_gradient_keeps_values(self):
        values = np.array([1.0, -2.0])
        out = adam_step(values, np.zeros(2), OptimState.zeros(2), AdamConfig())
        np.testing.assert_array_equal(out.values, values)
        assert out.state.t == 1

    def test_first_step_closed_form(self):
        g = np.array([0.3, -4.0, 1e-3])
        config = AdamConfig(lr=0.01)
        out = adam_step(np.zeros(3), g, OptimState.zeros(3), config)
        np.testing.assert_allclose(out.values, -0.01 * g / (np.abs(g) + 1e-8), rtol=1e-12)
        np.testing.assert_allclose(out.values, -0.01 * np.sign(g), rtol=1e-4)

    def test_quadratic_bowl(self):
        p = np.array([1.0, -2.0, 0.5])
        state = OptimState.zeros(3)
        config = AdamConfig(lr=0.05)
        for _ in range(500):
            out = adam_step(p, 2.0 * p, state, config)
            p, state = out.values, out.state
        assert np.linalg.norm(p) < 1e-3

    def test_non_finite_gradient_is_rejected(self):
        state = OptimState.zeros(2)
        out = adam_step(np.ones(2), np.array([np.nan, 1.0]), state, AdamConfig())
        assert not out.accepted
        assert out.state is state


def distance_sq_grad(p, target, c):
    _, tape = forward(lambda p: ops.sum(poincare.poincare_distance(p, target, c) ** 2), {"p": p})
    return backward(tape)["p"]


class TestRiemannianAdam:
    def test_first_step_at_origin(self):
        c = 1.0
        lr = 0.01
        egrad = np.array([[0.6, -0.8]])
        out = radam_step(np.zeros((1, 2)), egrad, row_state(np.zeros((1, 2))), AdamConfig(lr=lr), c)
        # the origin metric factor 1/λ² = 1/4 halves the Euclidean step
        expected = -np.tanh(np.sqrt(c) * lr / 2) / np.sqrt(c) * egrad / np.linalg.norm(egrad)
        np.testing.assert_allclose(out.values, expected, rtol=1e-6)

    def test_zero_gradient_keeps_point(self, rng):
        p = poincare.project_to_ball(rng.normal(size=(3, 2)), 1.0) * 0.5
        out = radam_step(p, np.zeros_like(p), row_state(p), AdamConfig(), 1.0)
        np.testing.assert_allclose(out.values, p, atol=1e-15)
        assert out.state.t == 1

    def test_euclidean_limit_is_half_step_adam(self, rng):
        p_r = rng.uniform(-0.5, 0.5, size=(2, 3))
        p_a = p_r.copy()
        s_r = row_state(p_r, per_coordinate_v=True)
        s_a = OptimState.zeros(p_a.shape)
        for _ in range(5):
            g = rng.normal(size=(2, 3))
            r = radam_step(p_r, g, s_r, AdamConfig(lr=0.01), 1e-10, per_coordinate_v=True)
            a = adam_step(p_a, g, s_a, AdamConfig(lr=0.005))
            p_r, s_r, p_a, s_a = r.values, r.state, a.values, a.state
        np.testing.assert_allclose(p_r, p_a, atol=1e-6)

    def test_geodesic_descent(self):
        c = 1.0
        target = np.array([[0.3, -0.2]])
        p = np.zeros((1, 2))
        state = row_state(p)
        for _ in range(300):
            out = radam_step(p, distance_sq_grad(p, target, c), state, AdamConfig(lr=0.1), c)
            p, state = out.values, out.state
        assert poincare.poincare_distance(p, target, c).item() < 1e-3

    def test_rows_stay_inside_ball(self, rng):
        c = 2.0
        p = np.zeros((4, 3))
        state = row_state(p)
        for _ in range(50):
            out = radam_step(p, rng.normal(size=(4, 3)) * 100.0, state, AdamConfig(lr=0.5), c)
            p, state = out.values, out.state
            assert np.all(c * np.sum(p * p, axis=-1) <= (1 - 1e-3) ** 2 + 1e-12)

    def test_row_scalar_second_moment(self):
        assert row_state(np.zeros((4, 3))).v.shape == (4, 1)
        assert row_state(np.zeros((4, 3)), per_coordinate_v=True).v.shape == (4, 3)

    def test_deterministic(self, rng):
        p = rng.uniform(-0.3, 0.3, size=(2, 2))
        g = rng.normal(size=(2, 2))
        a = radam_step(p, g, row_state(p), AdamConfig(), 1.0)
        b = radam_step(p, g, row_state(p), AdamConfig(), 1.0)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.state.m, b.state.m)


class TestTransport:
    def test_same_point(self, rng):
        x = rng.uniform(-0.4, 0.4, size=(5, 2))
        m = rng.normal(size=(5, 2))
        np.testing.assert_allclose(transport_momentum(m, x, x, 1.0), m, atol=1e-12)

    def test_riemannian_norm_preserved(self, rng):
        c = 1.5
        x = rng.uniform(-0.4, 0.4, size=(30, 3))
        y = rng.uniform(-0.4, 0.4, size=(30, 3))
        m = rng.normal(size=(30, 3))
        for approx in (False, True):
            out = transport_momentum(m, x, y, c, approx=approx)
            np.testing.assert_allclose(
                poincare.conformal_factor(y, c) * np.linalg.norm(out, axis=-1, keepdims=True),
                poincare.conformal_factor(x, c) * np.linalg.norm(m, axis=-1, keepdims=True),
                rtol=1e-8,
            )

    def test_euclidean_limit(self, rng):
        x = rng.uniform(-0.4, 0.4, size=(5, 2))
        y = rng.uniform(-0.4, 0.4, size=(5, 2))
        m = rng.normal(size=(5, 2))
        np.testing.assert_allclose(transport_momentum(m, x, y, 1e-8), m, atol=1e-6)


def mixed_params():
    return {
        "W": ParamTensor("W", np.ones((2, 3)), euclidean()),
        "b": ParamTensor("b", np.zeros(3), manifold_ball(1.0)),
    }


class TestOptimizer:
    def test_dispatch_by_space(self):
        params = mixed_params()
        opt = Optimizer(params, OptimizerConfig(lr=0.01))
        report = opt.step(params, {"W": np.ones((2, 3)), "b": np.array([0.5, 0.0, -0.5])})
        assert report.accepted
        np.testing.assert_allclose(params["W"].values, 1.0 - 0.01, rtol=1e-6)
        assert params["b"].values[1] == 0.0
        assert params["b"].values[0] < 0 < params["b"].values[2]
        assert opt.states["b"].v.shape == (1,)
        assert opt.t == 1

    def test_non_finite_gradient_rejects_the_whole_step(self):
        params = mixed_params()
        opt = Optimizer(params, OptimizerConfig(lr=0.01))
        report = opt.step(params, {"W": np.ones((2, 3)), "b": np.array([np.inf, 0.0, 0.0])})
        assert not report.accepted
        assert report.rejected == ["b"]
        np.testing.assert_array_equal(params["W"].values, np.ones((2, 3)))
        assert opt.t == 0

    def test_global_norm_clipping(self):
        params = {"W": ParamTensor("W", np.zeros(4))}
        opt = Optimizer(params, OptimizerConfig(lr=0.01, clip_norm=5.0))
        grad = np.array([6.0, 8.0, 0.0, 0.0])
        report = opt.step(params, {"W": grad})
        assert report.clipped
        assert report.grad_norm == pytest.approx(10.0)
        np.testing.assert_allclose(opt.states["W"].m, 0.1 * grad / 2.0)

    def test_clipping_disabled(self):
        params = {"W": ParamTensor("W", np.zeros(2))}
        opt = Optimizer(params, OptimizerConfig(clip_norm=0.0))
        report = opt.step(params, {"W": np.array([300.0, 400.0])})
        assert not report.clipped
        np.testing.assert_allclose(opt.states["W"].m, [30.0, 40.0])

    def test_state_arrays_roundtrip(self):
        params = mixed_params()
        opt = Optimizer(params, OptimizerConfig(lr=0.01))
        opt.step(params, {"W": np.ones((2, 3)), "b": np.array([0.5, 0.0, -0.5])})
        fresh = Optimizer(params, OptimizerConfig(lr=0.01))
        fresh.load_state_arrays(opt.state_arrays(), opt.t)
        assert fresh.t == 1
        for name in params:
            np.testing.assert_array_equal(fresh.states[name].m, opt.states[name].m)

    def test_global_norm(self):
        assert global_norm({"a": np.array([3.0]), "b": np.array([[4.0]])}) == pytest.approx(5.0)
