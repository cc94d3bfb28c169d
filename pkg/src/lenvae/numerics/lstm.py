"""One LSTM cell step, differentiable, batch-first.

Gates are packed into a single (in_dim + hidden, 4*hidden) weight matrix in
the order input, forget, candidate, output. The forget-gate bias is
initialized to 1.0 (standard stabilizer); all other biases to 0; weights
uniform in +-0.08.
"""

import numpy as np

from .tensor import Tensor, add, concat_cols, matmul, mul, sigmoid, slice_cols, tanh_

INIT_SCALE = 0.08


def lstm_cell_forward(x: Tensor, h_prev: Tensor, c_prev: Tensor, w: Tensor, b: Tensor):
    """One step: returns (h, c), both (B, H).

    x (B, I); h_prev, c_prev (B, H); w (I+H, 4H); b (4H,).
    """
    if x.data.ndim != 2 or h_prev.data.ndim != 2:
        raise ValueError("lstm_cell_forward expects rank-2 x and h_prev")
    hidden = h_prev.data.shape[1]
    expected_rows = x.data.shape[1] + hidden
    if w.data.shape != (expected_rows, 4 * hidden):
        raise ValueError(
            f"lstm weight w: expected shape {(expected_rows, 4 * hidden)}, got {w.data.shape}"
        )
    if b.data.shape != (4 * hidden,):
        raise ValueError(f"lstm bias b: expected shape {(4 * hidden,)}, got {b.data.shape}")
    if c_prev.data.shape != h_prev.data.shape:
        raise ValueError(
            f"lstm cell state c_prev: expected shape {h_prev.data.shape}, got {c_prev.data.shape}"
        )

    gates = add(matmul(concat_cols([x, h_prev]), w), b)
    i = sigmoid(slice_cols(gates, 0, hidden))
    f = sigmoid(slice_cols(gates, hidden, 2 * hidden))
    g = tanh_(slice_cols(gates, 2 * hidden, 3 * hidden))
    o = sigmoid(slice_cols(gates, 3 * hidden, 4 * hidden))
    c = add(mul(f, c_prev), mul(i, g))
    h = mul(o, tanh_(c))
    return h, c


def init_lstm_weights(rng: np.random.Generator, in_dim: int, hidden: int, dtype=np.float64):
    """Freshly initialized (w, b) arrays for one cell."""
    w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(in_dim + hidden, 4 * hidden)).astype(dtype)
    b = np.zeros(4 * hidden, dtype=dtype)
    b[hidden:2 * hidden] = 1.0  # forget gate
    return w, b
