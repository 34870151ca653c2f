import numpy as np
import pytest

from radiocov.errors import ContractViolation, NumericError
from radiocov.tensorcore import (
    Adam,
    Parameter,
    concat_backward,
    concat_channels,
    conv2d_backward,
    conv2d_direct,
    conv2d_forward,
    mae_loss,
    maxpool2d_backward,
    maxpool2d_forward,
    relu_backward,
    relu_forward,
    rmse_metric,
    sigmoid_backward,
    sigmoid_forward,
    transposed_conv2d_backward,
    transposed_conv2d_forward,
)

from gradcheck import check_against_fd, numeric_gradient, relative_error


class TestConvForward:
    def test_1x1_identity_kernel(self):
        x = np.random.default_rng(0).normal(size=(1, 1, 5, 5))
        w = np.ones((1, 1, 1, 1))
        assert np.allclose(conv2d_forward(x, w, np.zeros(1)), x)

    def test_matches_direct_oracle(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(1, 3, 5, 5)).astype(np.float32)
        w = rng.normal(size=(2, 3, 3, 3)).astype(np.float32)
        b = rng.normal(size=2).astype(np.float32)
        fast = conv2d_forward(x, w, b)
        direct = conv2d_direct(x, w, b)
        assert np.max(np.abs(fast - direct)) < 1e-5

    @pytest.mark.parametrize("stride,padding,k", [(1, "same", 3), (2, "same", 5),
                                                  (1, "valid", 3), (2, "same", 4),
                                                  (1, "same", 2)])
    def test_oracle_across_configs(self, stride, padding, k):
        rng = np.random.default_rng(k * 10 + stride)
        x = rng.normal(size=(2, 2, 8, 8))
        w = rng.normal(size=(3, 2, k, k))
        b = rng.normal(size=3)
        assert np.allclose(
            conv2d_forward(x, w, b, stride, padding),
            conv2d_direct(x, w, b, stride, padding),
            atol=1e-10,
        )

    @pytest.mark.parametrize("k", [1, 3, 5, 7])
    def test_same_padding_preserves_dims(self, k):
        x = np.zeros((1, 2, 9, 9))
        w = np.zeros((4, 2, k, k))
        assert conv2d_forward(x, w, None).shape == (1, 4, 9, 9)

    def test_channel_mismatch_reports_both_shapes(self):
        with pytest.raises(ContractViolation, match=r"\(1, 3, 4, 4\).*\(2, 2, 3, 3\)"):
            conv2d_forward(np.zeros((1, 3, 4, 4)), np.zeros((2, 2, 3, 3)), None)

    def test_valid_padding_requires_large_input(self):
        with pytest.raises(ContractViolation):
            conv2d_forward(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 3, 3)), None, 1, "valid")


class TestConvGradients:
    @pytest.mark.parametrize("stride,padding", [(1, "same"), (2, "same"), (1, "valid")])
    def test_weight_and_input_gradients(self, stride, padding):
        rng = np.random.default_rng(42)
        x = rng.normal(size=(2, 2, 6, 6))
        w = rng.normal(size=(3, 2, 3, 3))
        b = rng.normal(size=3)
        r = rng.normal(size=conv2d_forward(x, w, b, stride, padding).shape)

        def loss():
            return float(np.sum(conv2d_forward(x, w, b, stride, padding) * r))

        dx, dw, db = conv2d_backward(r, x, w, stride, padding)
        check_against_fd(dw, loss, w)
        check_against_fd(dx, loss, x)
        check_against_fd(db, loss, b)

    def test_gradient_with_cached_cols(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(1, 2, 5, 5))
        w = rng.normal(size=(2, 2, 3, 3))
        aux = {}
        y = conv2d_forward(x, w, None, aux=aux)
        r = rng.normal(size=y.shape)
        dx_a, dw_a, _ = conv2d_backward(r, x, w, aux=aux)
        dx_b, dw_b, _ = conv2d_backward(r, x, w)
        assert np.allclose(dx_a, dx_b) and np.allclose(dw_a, dw_b)


class TestTransposedConv:
    def test_output_shape_doubles(self):
        x = np.zeros((1, 1, 2, 2))
        w = np.zeros((1, 3, 2, 2))
        assert transposed_conv2d_forward(x, w, None).shape == (1, 3, 4, 4)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_adjoint_identity(self, k):
        rng = np.random.default_rng(k)
        ci, co, h = 3, 4, 8
        x = rng.normal(size=(2, ci, h, h))
        w = rng.normal(size=(co, ci, k, k))
        y = rng.normal(size=(2, co, h // 2, h // 2))
        lhs = float(np.sum(conv2d_forward(x, w, None, 2, "same") * y))
        rhs = float(np.sum(x * transposed_conv2d_forward(y, w, None)))
        assert abs(lhs - rhs) < 1e-4 * max(1.0, abs(lhs))

    @pytest.mark.parametrize("k", [2, 4, 6])
    def test_gradients(self, k):
        rng = np.random.default_rng(k + 100)
        x = rng.normal(size=(1, 2, 3, 3))
        w = rng.normal(size=(2, 3, k, k))
        b = rng.normal(size=3)
        r = rng.normal(size=(1, 3, 6, 6))

        def loss():
            return float(np.sum(transposed_conv2d_forward(x, w, b) * r))

        dx, dw, db = transposed_conv2d_backward(r, x, w)
        check_against_fd(dw, loss, w)
        check_against_fd(dx, loss, x)
        check_against_fd(db, loss, b)

    def test_stride_other_than_two_rejected(self):
        with pytest.raises(ContractViolation):
            transposed_conv2d_forward(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 2)), None, 3)


class TestMaxPool:
    def test_constant_input(self):
        x = np.full((1, 2, 4, 4), 3.5)
        assert np.all(maxpool2d_forward(x) == 3.5)

    def test_single_window(self):
        x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
        assert maxpool2d_forward(x)[0, 0, 0, 0] == 4.0

    def test_odd_dims_rejected(self):
        with pytest.raises(ContractViolation):
            maxpool2d_forward(np.zeros((1, 1, 5, 4)))

    def test_gradient_routes_to_argmax(self):
        rng = np.random.default_rng(8)
        # distinct values avoid FD at ties
        x = rng.permutation(64).astype(np.float64).reshape(1, 1, 8, 8) * 0.37
        r = rng.normal(size=(1, 1, 4, 4))

        def loss():
            return float(np.sum(maxpool2d_forward(x) * r))

        dx = maxpool2d_backward(r, x)
        check_against_fd(dx, loss, x)

    def test_tie_breaks_to_first_index(self):
        x = np.zeros((1, 1, 2, 2))
        dx = maxpool2d_backward(np.ones((1, 1, 1, 1)), x)
        assert dx[0, 0, 0, 0] == 1.0 and dx.sum() == 1.0


class TestActivationsAndConcat:
    def test_relu_values(self):
        out = relu_forward(np.array([-1.0, 2.0]))
        assert out[0] == 0.0 and out[1] == 2.0

    def test_relu_gradient(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(2, 3, 4, 4))
        x = np.where(np.abs(x) < 0.1, x + 0.5, x)  # stay off the kink
        r = rng.normal(size=x.shape)

        def loss():
            return float(np.sum(relu_forward(x) * r))

        check_against_fd(relu_backward(r, x), loss, x)

    def test_sigmoid_gradient(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(1, 2, 3, 3))
        r = rng.normal(size=x.shape)

        def loss():
            return float(np.sum(sigmoid_forward(x) * r))

        err = relative_error(sigmoid_backward(r, x), numeric_gradient(loss, x))
        assert err < 1e-4

    def test_concat_order_preserved(self):
        a = np.full((1, 3, 2, 2), 1.0)
        b = np.full((1, 5, 2, 2), 2.0)
        out = concat_channels([a, b])
        assert out.shape == (1, 8, 2, 2)
        assert np.all(out[:, :3] == 1.0) and np.all(out[:, 3:] == 2.0)

    def test_concat_mismatch_rejected(self):
        with pytest.raises(ContractViolation):
            concat_channels([np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 3, 3))])

    def test_concat_backward_splits(self):
        g = np.arange(16, dtype=np.float64).reshape(1, 4, 2, 2)
        parts = concat_backward(g, [1, 3])
        assert parts[0].shape == (1, 1, 2, 2) and parts[1].shape == (1, 3, 2, 2)
        assert np.array_equal(np.concatenate(parts, axis=1), g)


class TestLosses:
    def test_identical_tensors(self):
        x = np.random.default_rng(0).normal(size=(2, 1, 4, 4))
        loss, grad = mae_loss(x, x.copy())
        assert loss == 0.0 and np.all(grad == 0.0)

    def test_ones_vs_zeros(self):
        loss, _ = mae_loss(np.ones((2, 3)), np.zeros((2, 3)))
        assert loss == 1.0

    def test_matches_scalar_loop(self):
        rng = np.random.default_rng(6)
        p = rng.normal(size=(2, 1, 5, 5))
        t = rng.normal(size=(2, 1, 5, 5))
        loss, _ = mae_loss(p, t)
        manual = 0.0
        for v1, v2 in zip(p.ravel(), t.ravel()):
            manual += abs(float(v1) - float(v2))
        assert abs(loss - manual / p.size) < 1e-6

    def test_gradient_is_scaled_sign(self):
        p = np.array([[2.0, -1.0, 0.0]])
        t = np.zeros((1, 3))
        _, grad = mae_loss(p, t)
        assert np.allclose(grad, np.array([[1.0, -1.0, 0.0]]) / 3.0)

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolation):
            mae_loss(np.zeros((1, 2)), np.zeros((2, 1)))

    def test_rmse(self):
        assert rmse_metric(np.ones((2, 2)), np.zeros((2, 2))) == pytest.approx(1.0)


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        p = Parameter(np.array([1.0, -2.0], dtype=np.float32), "w")
        opt = Adam([p])
        opt.step()
        assert opt.t == 1
        assert np.array_equal(p.value, np.array([1.0, -2.0], dtype=np.float32))

    def test_first_step_magnitude_matches_hand_formula(self):
        p = Parameter(np.array([0.0]), "w")
        opt = Adam([p], lr=0.001)
        p.grad[...] = 1.0
        opt.step()
        # bias-corrected first step: lr * m_hat / (sqrt(v_hat) + eps) with
        # m_hat = 1, v_hat = 1 exactly.
        expected = -0.001 * 1.0 / (1.0 + 1e-8)
        assert p.value[0] == pytest.approx(expected, rel=1e-9)

    def test_descends_quadratic(self):
        p = Parameter(np.array([1.0]), "w")
        opt = Adam([p], lr=0.01)
        for _ in range(100):
            p.grad[...] = 2.0 * p.value
            opt.step()
        assert abs(p.value[0]) < 0.5

    def test_nan_gradient_aborts(self):
        p = Parameter(np.array([1.0]), "w")
        opt = Adam([p])
        p.grad[...] = np.nan
        with pytest.raises(NumericError):
            opt.step()

    def test_moments_shaped_like_params(self):
        p = Parameter(np.zeros((3, 4), dtype=np.float32), "w")
        opt = Adam([p])
        assert opt.m[0].shape == (3, 4) and opt.v[0].shape == (3, 4)


class TestFiniteness:
    def test_float32_pipeline_stays_finite(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(2, 3, 8, 8)).astype(np.float32)
        w = rng.normal(size=(4, 3, 3, 3)).astype(np.float32)
        y = conv2d_forward(x, w, np.zeros(4, dtype=np.float32))
        y = relu_forward(y)
        y = maxpool2d_forward(y)
        assert y.dtype == np.float32
        assert np.isfinite(y).all()
