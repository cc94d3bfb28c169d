"""Reverse-mode differentiable arrays for the layer set this model needs.

A ``Tensor`` wraps a numpy array (float64 by default; float32 works behind the
same interface) and remembers which operation produced it. ``Tensor.backward``
walks the recorded operations in reverse and accumulates gradients into every
leaf that contributed. The op set is deliberately small: the affine maps, gate
nonlinearities, row gathers and cross-entropy reductions that the encoder,
decoder and losses are built from. Constant inputs (masks, noise, index
arrays) enter through ``*_const`` variants or plain numpy arguments and never
receive gradients.
"""

import numpy as np

__all__ = [
    "Tensor", "leaf", "zeros",
    "matmul", "add", "sub", "mul", "neg", "scale", "add_scalar",
    "mul_const", "sigmoid", "tanh_", "exp_",
    "concat_cols", "slice_cols", "gather_rows",
    "sum_all", "sum_cols", "affine",
    "cross_entropy_rows", "weighted_cross_entropy_rows", "sampled_logits",
    "softmax", "log_softmax_rows",
]


class Tensor:
    """Value plus gradient slot plus a record of where the value came from."""

    __slots__ = ("data", "grad", "_parents", "_backward", "_constant")

    def __init__(self, data, _parents=(), _backward=None, constant=False):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = _parents
        self._backward = _backward
        self._constant = constant  # skip gradient accumulation into this leaf

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, leaf={self._backward is None})"

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """Accumulate d(self)/d(leaf) into every contributing leaf's ``grad``.

        ``self`` must be a scalar (size-1) tensor.
        """
        if self.data.size != 1:
            raise ValueError(f"backward() needs a scalar loss, got shape {self.data.shape}")
        order = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)


def _toposort(root):
    # iterative post-order DFS: parents appear before children in the result
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def _accum(t, g):
    if t._constant:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (reverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def leaf(data):
    """Wrap an array as a gradient-receiving leaf."""
    return Tensor(np.asarray(data, dtype=np.float64))


def zeros(shape, dtype=np.float64):
    """Constant zero leaf (no gradient is accumulated into it)."""
    return Tensor(np.zeros(shape, dtype=dtype), constant=True)


# ---------------------------------------------------------------------------
# elementwise and linear ops
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data @ b.data

    def bw(g):
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)

    return Tensor(out_data, (a, b), bw)


def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def bw(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return Tensor(out_data, (a, b), bw)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data - b.data

    def bw(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))

    return Tensor(out_data, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def bw(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return Tensor(out_data, (a, b), bw)


def neg(a: Tensor) -> Tensor:
    def bw(g):
        _accum(a, -g)

    return Tensor(-a.data, (a,), bw)


def scale(a: Tensor, k: float) -> Tensor:
    """Multiply by a python scalar (no gradient to ``k``)."""
    k = float(k)

    def bw(g):
        _accum(a, g * k)

    return Tensor(a.data * k, (a,), bw)


def add_scalar(a: Tensor, k: float) -> Tensor:
    def bw(g):
        _accum(a, g)

    return Tensor(a.data + float(k), (a,), bw)


def mul_const(a: Tensor, c: np.ndarray) -> Tensor:
    """Elementwise multiply by a constant array (masks, noise); no grad to ``c``."""
    c = np.asarray(c)

    def bw(g):
        _accum(a, _unbroadcast(g * c, a.data.shape))

    return Tensor(a.data * c, (a,), bw)


def sigmoid(a: Tensor) -> Tensor:
    # overflow-free: sigmoid(x) = (1 + tanh(x/2)) / 2
    out_data = 0.5 * (1.0 + np.tanh(0.5 * a.data))

    def bw(g):
        _accum(a, g * out_data * (1.0 - out_data))

    return Tensor(out_data, (a,), bw)


def tanh_(a: Tensor) -> Tensor:
    out_data = np.tanh(a.data)

    def bw(g):
        _accum(a, g * (1.0 - out_data * out_data))

    return Tensor(out_data, (a,), bw)


def exp_(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)

    def bw(g):
        _accum(a, g * out_data)

    return Tensor(out_data, (a,), bw)


# ---------------------------------------------------------------------------
# shape ops
# ---------------------------------------------------------------------------

def concat_cols(parts) -> Tensor:
    """Concatenate rank-2 tensors along axis 1."""
    parts = list(parts)
    widths = [p.data.shape[1] for p in parts]
    out_data = np.concatenate([p.data for p in parts], axis=1)

    def bw(g):
        off = 0
        for p, w in zip(parts, widths):
            _accum(p, g[:, off:off + w])
            off += w

    return Tensor(out_data, tuple(parts), bw)


def slice_cols(a: Tensor, lo: int, hi: int) -> Tensor:
    out_data = a.data[:, lo:hi]

    def bw(g):
        full = np.zeros_like(a.data)
        full[:, lo:hi] = g
        _accum(a, full)

    return Tensor(out_data, (a,), bw)


def gather_rows(table: Tensor, idx: np.ndarray) -> Tensor:
    """Row lookup ``table[idx]``; scatter-adds gradients back into the table."""
    idx = np.asarray(idx, dtype=np.intp)
    out_data = table.data[idx]

    def bw(g):
        if table._constant:
            return
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, idx, g)

    return Tensor(out_data, (table,), bw)


# ---------------------------------------------------------------------------
# reductions and losses
# ---------------------------------------------------------------------------

def sum_all(a: Tensor) -> Tensor:
    out_data = np.asarray(a.data.sum())

    def bw(g):
        _accum(a, np.full_like(a.data, float(g)))

    return Tensor(out_data, (a,), bw)


def sum_cols(a: Tensor) -> Tensor:
    """(B, N) -> (B,) row sums."""
    out_data = a.data.sum(axis=1)

    def bw(g):
        _accum(a, np.repeat(g[:, None], a.data.shape[1], axis=1))

    return Tensor(out_data, (a,), bw)


def affine(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return add(matmul(x, w), b)


def _logsumexp_rows(x):
    m = x.max(axis=1, keepdims=True)
    return m[:, 0] + np.log(np.exp(x - m).sum(axis=1))


def _softmax_rows(x):
    m = x.max(axis=1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy_rows(logits: Tensor, targets: np.ndarray, weights: np.ndarray) -> Tensor:
    """sum_b weights[b] * (logsumexp(logits[b]) - logits[b, targets[b]]).

    ``targets`` int (B,), ``weights`` float (B,) constants.
    """
    targets = np.asarray(targets, dtype=np.intp)
    weights = np.asarray(weights, dtype=logits.data.dtype)
    rows = np.arange(logits.data.shape[0])
    per_row = _logsumexp_rows(logits.data) - logits.data[rows, targets]
    out_data = np.asarray((weights * per_row).sum())

    def bw(g):
        gl = _softmax_rows(logits.data) * weights[:, None]
        gl[rows, targets] -= weights
        _accum(logits, gl * float(g))

    return Tensor(out_data, (logits,), bw)


def weighted_cross_entropy_rows(logits: Tensor, counts: np.ndarray) -> Tensor:
    """sum_b [ n_b * logsumexp(logits[b]) - sum_w counts[b,w] * logits[b,w] ]
    with n_b = counts[b].sum(); the bag-of-words loss kernel.
    """
    counts = np.asarray(counts, dtype=logits.data.dtype)
    n = counts.sum(axis=1)
    out_data = np.asarray((n * _logsumexp_rows(logits.data)).sum() - (counts * logits.data).sum())

    def bw(g):
        gl = _softmax_rows(logits.data) * n[:, None] - counts
        _accum(logits, gl * float(g))

    return Tensor(out_data, (logits,), bw)


def sampled_logits(h: Tensor, w: Tensor, b: Tensor, ids: np.ndarray) -> Tensor:
    """Per-row gathered output logits: out[r, k] = h[r] . w[:, ids[r, k]] + b[ids[r, k]].

    ``h`` (B, H), ``w`` (H, V), ``b`` (V,), ``ids`` int (B, K). Avoids forming
    the full (B, V) logit matrix when only K columns per row are scored.
    """
    ids = np.asarray(ids, dtype=np.intp)
    wg = w.data[:, ids]                       # (H, B, K)
    out_data = np.einsum("bh,hbk->bk", h.data, wg) + b.data[ids]

    def bw(g):
        _accum(h, np.einsum("bk,hbk->bh", g, wg))
        nb, k = ids.shape
        flat_ids = ids.reshape(nb * k)
        if not w._constant:
            contrib = g.reshape(nb * k, 1) * np.repeat(h.data, k, axis=0)   # (B*K, H)
            gw_t = np.zeros((w.data.shape[1], w.data.shape[0]), dtype=w.data.dtype)
            np.add.at(gw_t, flat_ids, contrib)
            _accum(w, gw_t.T)
        if not b._constant:
            if b.grad is None:
                b.grad = np.zeros_like(b.data)
            np.add.at(b.grad, flat_ids, g.reshape(nb * k))

    return Tensor(out_data, (h, w, b), bw)


# ---------------------------------------------------------------------------
# plain-array helpers (no gradients)
# ---------------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax of a rank-1 array (max-subtraction before exp)."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1:
        raise ValueError(f"softmax expects a rank-1 array, got shape {logits.shape}")
    if logits.size == 0:
        raise ValueError("softmax of an empty array is undefined")
    e = np.exp(logits - logits.max())
    return e / e.sum()


def log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise log softmax of a rank-2 array."""
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
