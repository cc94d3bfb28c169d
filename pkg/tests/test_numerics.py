"""Softmax, LSTM cell, Adam and gradient-checker behavior."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lenvae.numerics import (
    AdamState, MissingGradientError, NonFiniteLossError, ParamStore, Tensor,
    adam_step, grad_check, init_lstm_weights, lstm_cell_forward, mul,
    softmax, sum_all,
)


# ---------------------------------------------------------------------------
# softmax
# ---------------------------------------------------------------------------

def test_softmax_uniform():
    np.testing.assert_allclose(softmax(np.zeros(3)), np.full(3, 1 / 3), atol=1e-15)


def test_softmax_large_logits_no_overflow():
    out = softmax(np.array([1000.0, 1000.0]))
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out, [0.5, 0.5], atol=1e-15)


def test_softmax_against_high_precision():
    # independent evaluation of e^x / sum e^x at 50 digits
    logits = [1.0, 2.0, 3.0]
    with mpmath.workdps(50):
        exps = [mpmath.e ** x for x in logits]
        total = sum(exps)
        expected = np.array([float(e / total) for e in exps])
    np.testing.assert_allclose(softmax(np.array(logits)), expected, rtol=1e-14)


def test_softmax_empty_errors():
    with pytest.raises(ValueError):
        softmax(np.array([]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=12),
       st.floats(min_value=-100, max_value=100))
def test_softmax_shift_invariance(logits, shift):
    base = softmax(np.array(logits))
    shifted = softmax(np.array(logits) + shift)
    assert np.abs(base - shifted).max() < 1e-12
    assert abs(base.sum() - 1.0) < 1e-12
    assert (base >= 0).all()


# ---------------------------------------------------------------------------
# LSTM cell
# ---------------------------------------------------------------------------

def test_lstm_zero_weights_zero_output():
    x = Tensor(np.random.default_rng(0).standard_normal((3, 4)))
    h0 = Tensor(np.zeros((3, 2)))
    c0 = Tensor(np.zeros((3, 2)))
    w = Tensor(np.zeros((6, 8)))
    b = Tensor(np.zeros(8))
    h, c = lstm_cell_forward(x, h0, c0, w, b)
    np.testing.assert_array_equal(h.data, np.zeros((3, 2)))
    np.testing.assert_array_equal(c.data, np.zeros((3, 2)))


def test_lstm_hand_evaluated_two_unit_cell():
    # one input, two hidden units, hand-set weights; gate order i, f, g, o
    x_val, h_val, c_val = 0.5, np.array([0.1, -0.2]), np.array([0.3, 0.4])
    w = np.zeros((3, 8))
    w[0, :] = [0.2, -0.1, 0.4, 0.3, 0.5, -0.5, 0.1, 0.2]   # input row
    w[1, :] = [0.1, 0.2, -0.3, 0.4, -0.2, 0.3, 0.2, -0.1]  # h[0] row
    w[2, :] = [-0.4, 0.1, 0.2, -0.2, 0.3, 0.1, -0.3, 0.4]  # h[1] row
    b = np.array([0.01, 1.0, -0.02, 0.03, 0.04, 1.0, 0.05, -0.05])

    pre = np.array([x_val, h_val[0], h_val[1]]) @ w + b
    sig = lambda v: 1.0 / (1.0 + math.exp(-v))
    i = np.array([sig(pre[0]), sig(pre[1])])
    f = np.array([sig(pre[2]), sig(pre[3])])
    g = np.array([math.tanh(pre[4]), math.tanh(pre[5])])
    o = np.array([sig(pre[6]), sig(pre[7])])
    c_expected = f * c_val + i * g
    h_expected = o * np.tanh(c_expected)

    h, c = lstm_cell_forward(Tensor(np.array([[x_val]])), Tensor(h_val[None, :]),
                             Tensor(c_val[None, :]), Tensor(w), Tensor(b))
    np.testing.assert_allclose(c.data[0], c_expected, rtol=1e-12)
    np.testing.assert_allclose(h.data[0], h_expected, rtol=1e-12)


def test_lstm_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    store = ParamStore()
    w_init, b_init = init_lstm_weights(rng, in_dim=3, hidden=2)
    store.add("w", rng.standard_normal(w_init.shape))
    store.add("b", rng.standard_normal(b_init.shape))
    store.add("x", rng.standard_normal((2, 3)))
    store.add("h0", rng.standard_normal((2, 2)))
    store.add("c0", rng.standard_normal((2, 2)))

    def loss_fn(p):
        h, c = lstm_cell_forward(p["x"], p["h0"], p["c0"], p["w"], p["b"])
        return sum_all(mul(h, h))

    assert grad_check(loss_fn, store, eps=1e-5) < 1e-4


def test_lstm_shape_mismatch_names_offender():
    x = Tensor(np.zeros((1, 3)))
    h = Tensor(np.zeros((1, 2)))
    c = Tensor(np.zeros((1, 2)))
    with pytest.raises(ValueError, match="lstm weight w"):
        lstm_cell_forward(x, h, c, Tensor(np.zeros((4, 8))), Tensor(np.zeros(8)))
    with pytest.raises(ValueError, match="lstm bias b"):
        lstm_cell_forward(x, h, c, Tensor(np.zeros((5, 8))), Tensor(np.zeros(7)))
    with pytest.raises(ValueError, match="c_prev"):
        lstm_cell_forward(x, h, Tensor(np.zeros((1, 3))), Tensor(np.zeros((5, 8))),
                          Tensor(np.zeros(8)))


def test_lstm_forget_bias_initialized_to_one():
    w, b = init_lstm_weights(np.random.default_rng(0), in_dim=4, hidden=3)
    np.testing.assert_array_equal(b[3:6], np.ones(3))
    np.testing.assert_array_equal(b[:3], np.zeros(3))
    np.testing.assert_array_equal(b[6:], np.zeros(6))
    assert np.abs(w).max() <= 0.08


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

def test_adam_zero_gradients_keep_parameters():
    store = ParamStore()
    t = store.add("p", np.array([1.0, -2.0]))
    state = AdamState.for_params(store)
    t.grad = np.zeros(2)
    adam_step(store, state)
    np.testing.assert_array_equal(t.data, [1.0, -2.0])
    assert state.step == 1


def test_adam_first_step_hand_value():
    # constant gradient 1 on a scalar: after bias correction the first update
    # is exactly -lr / (1 + eps)
    lr, eps = 0.01, 1e-8
    store = ParamStore()
    t = store.add("p", np.array([0.5]))
    state = AdamState.for_params(store, learning_rate=lr, eps=eps)
    t.grad = np.array([1.0])
    adam_step(store, state)
    np.testing.assert_allclose(t.data, [0.5 - lr / (1.0 + eps)], rtol=1e-15)
    assert t.grad is None  # zeroed afterwards


def test_adam_two_steps_descend_quadratic():
    store = ParamStore()
    t = store.add("p", np.array([3.0]))
    state = AdamState.for_params(store, learning_rate=0.1)

    def loss_and_grad():
        loss = sum_all(mul(t, t))
        store.zero_grads()
        loss.backward()
        return float(loss.data)

    first = loss_and_grad()
    adam_step(store, state)
    second = loss_and_grad()
    adam_step(store, state)
    third = float(sum_all(mul(t, t)).data)
    assert second < first and third < second


def test_adam_missing_gradient_errors():
    store = ParamStore()
    store.add("p", np.array([1.0]))
    state = AdamState.for_params(store)
    with pytest.raises(MissingGradientError, match="p"):
        adam_step(store, state)


# ---------------------------------------------------------------------------
# grad_check behavior
# ---------------------------------------------------------------------------

def test_grad_check_quadratic_is_tiny():
    store = ParamStore()
    store.add("p", np.random.default_rng(0).standard_normal(5))
    err = grad_check(lambda s: sum_all(mul(s["p"], s["p"])), store, eps=1e-5)
    assert err < 1e-8


def test_grad_check_detects_corrupted_backward():
    store = ParamStore()
    store.add("p", np.random.default_rng(0).standard_normal(4) + 2.0)

    def corrupt_square(t):
        out_data = t.data * t.data

        def bw(g):
            grad = 2.0 * t.data * g
            grad[0] *= 2.0  # deliberately doubled entry
            if t.grad is None:
                t.grad = np.zeros_like(t.data)
            t.grad += grad
        return Tensor(out_data, (t,), bw)

    err = grad_check(lambda s: sum_all(corrupt_square(s["p"])), store, eps=1e-5)
    assert err > 0.1


def test_grad_check_nonfinite_loss_errors():
    store = ParamStore()
    store.add("p", np.array([1.0]))

    def bad_loss(s):
        return Tensor(np.asarray(np.nan))

    with pytest.raises(NonFiniteLossError):
        grad_check(bad_loss, store, eps=1e-5)


def test_param_store_rejects_duplicates_and_tracks_order():
    store = ParamStore()
    store.add("b", np.zeros(1))
    store.add("a", np.zeros(1))
    with pytest.raises(ValueError):
        store.add("a", np.zeros(1))
    assert store.names() == ["b", "a"]
