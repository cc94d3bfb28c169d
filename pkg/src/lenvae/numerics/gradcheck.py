"""Finite-difference gradient checking and record/replay noise freezing."""

import numpy as np

from .params import ParamStore


class NonFiniteLossError(RuntimeError):
    pass


class ReplayRng:
    """Record draws from a base generator, replay them on later passes.

    A loss function whose stochastic nodes draw through a ReplayRng becomes a
    deterministic function of the parameters: the first evaluation records
    every draw, and ``rewind()`` at the start of each subsequent evaluation
    makes it replay the identical sequence. Mimics the two Generator methods
    the model uses.
    """

    def __init__(self, base: np.random.Generator):
        self._base = base
        self._tape = []
        self._pos = 0

    def rewind(self):
        self._pos = 0

    def _next(self, kind, size, draw):
        if self._pos < len(self._tape):
            rec_kind, rec_size, value = self._tape[self._pos]
            if rec_kind != kind or rec_size != size:
                raise RuntimeError(
                    f"replay mismatch at draw {self._pos}: recorded {rec_kind}{rec_size}, "
                    f"requested {kind}{size}"
                )
            self._pos += 1
            return value
        value = draw()
        self._tape.append((kind, size, value))
        self._pos += 1
        return value

    def standard_normal(self, size):
        return self._next("normal", tuple(np.atleast_1d(size)), lambda: self._base.standard_normal(size))

    def random(self, size):
        return self._next("uniform", tuple(np.atleast_1d(size)), lambda: self._base.random(size))


def grad_check(loss_function, params: ParamStore, eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_function(params)`` must return a scalar Tensor and be deterministic
    given the parameter values (freeze stochastic draws with ReplayRng). The
    error for each parameter entry is |analytic - numeric| divided by
    max(|analytic|, |numeric|, 1e-8); the maximum over all entries of all
    parameters is returned.
    """
    params.zero_grads()
    loss = loss_function(params)
    if not np.isfinite(loss.data).all():
        raise NonFiniteLossError(f"loss is not finite: {loss.data}")
    loss.backward()
    analytic = {}
    for name, t in params.items():
        analytic[name] = np.zeros_like(t.data) if t.grad is None else t.grad.copy()
    params.zero_grads()

    worst = 0.0
    for name, t in params.items():
        flat = t.data.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lo_hi = float(loss_function(params).data)
            flat[i] = orig - eps
            lo_lo = float(loss_function(params).data)
            flat[i] = orig
            if not (np.isfinite(lo_hi) and np.isfinite(lo_lo)):
                raise NonFiniteLossError(f"loss not finite while perturbing {name}[{i}]")
            numeric = (lo_hi - lo_lo) / (2.0 * eps)
            denom = max(abs(a_flat[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(a_flat[i] - numeric) / denom)
    return worst
