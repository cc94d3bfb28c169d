"""Linear probe: how much sentence-length information the latent carries.

Fits ordinary least squares from posterior means to word counts and compares
held-out R-squared between a model trained with the length countdown input
and one trained without it. The model that never saw an explicit length
signal has to store length in its latent to reconstruct, so its R-squared
should come out higher.
"""

from dataclasses import dataclass

import numpy as np

from .model import HyperParams, encode
from .numerics import ParamStore
from .textpipe import Vocabulary, make_batch

# R-squared reported for large-corpus (DUC-2004 / Gigaword) runs; the
# ordering (without > with) is what reproduces at desk scale, not the values.
LARGE_SCALE_PROBE_R2 = {
    "with_length_input": {"duc2004": 0.41, "gigaword": 0.54},
    "without_length_input": {"duc2004": 0.59, "gigaword": 0.72},
}

SINGULAR_TOL = 1e-10
RIDGE = 1e-8


@dataclass
class LinearFit:
    weights: np.ndarray
    intercept: float
    ridged: bool

    def predict(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.intercept


def fit_linear_regression(x: np.ndarray, y: np.ndarray) -> LinearFit:
    """OLS with intercept via normal equations; ridge 1e-8 fallback when the
    normal matrix is singular within tolerance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, dim = x.shape
    if n < dim + 1:
        raise ValueError(f"need at least {dim + 1} examples for {dim} dimensions, got {n}")
    design = np.concatenate([x, np.ones((n, 1))], axis=1)
    normal = design.T @ design
    rhs = design.T @ y
    singular_values = np.linalg.svd(normal, compute_uv=False)
    ridged = singular_values[-1] <= SINGULAR_TOL * max(singular_values[0], 1.0)
    if ridged:
        normal = normal + RIDGE * np.eye(dim + 1)
    solution = np.linalg.solve(normal, rhs)
    return LinearFit(weights=solution[:-1], intercept=float(solution[-1]), ridged=ridged)


def r_squared(predictions: np.ndarray, targets: np.ndarray) -> float:
    """1 - SS_residual / SS_total; undefined (error) for constant targets."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError("predictions and targets must have equal length")
    if targets.size < 2:
        raise ValueError("need at least 2 examples")
    ss_total = float(((targets - targets.mean()) ** 2).sum())
    if ss_total == 0.0:
        raise ValueError("R-squared is undefined for constant targets")
    ss_residual = float(((targets - predictions) ** 2).sum())
    return 1.0 - ss_residual / ss_total


def encode_latents(sentences, params: ParamStore, hp: HyperParams,
                   batch_size: int = 256) -> np.ndarray:
    """Posterior means (zero-noise latents) for a list of TokenizedSentence."""
    rows = []
    for start in range(0, len(sentences), batch_size):
        batch = make_batch(sentences[start:start + batch_size], hp.vocab_size)
        rows.append(encode(batch, params, hp).mu.data)
    return np.concatenate(rows, axis=0)


@dataclass
class ProbeResult:
    r2_with: float
    r2_without: float
    r2_with_train: float
    r2_without_train: float
    ridged: bool

    def render(self) -> str:
        lines = ["{:<24} {:>8}".format("R^2 (length probe)", "test"),
                 "{:<24} {:>8.2f}".format("with length input", self.r2_with),
                 "{:<24} {:>8.2f}".format("without length input", self.r2_without)]
        return "\n".join(lines) + "\n"


def probe_experiment(params_with: ParamStore, hp_with: HyperParams,
                     params_without: ParamStore, hp_without: HyperParams,
                     sentences, seed: int = 0, test_fraction: float = 0.2) -> ProbeResult:
    """Fit length regressions on both models' latents over the same split."""
    lengths = np.array([s.word_count for s in sentences], dtype=np.float64)
    order = np.random.default_rng(seed).permutation(len(sentences))
    n_test = max(1, int(round(test_fraction * len(sentences))))
    test_idx, train_idx = order[:n_test], order[n_test:]

    results = {}
    ridged = False
    for key, params, hp in (("with", params_with, hp_with),
                            ("without", params_without, hp_without)):
        latents = encode_latents(sentences, params, hp)
        fit = fit_linear_regression(latents[train_idx], lengths[train_idx])
        ridged = ridged or fit.ridged
        results[key] = (r_squared(fit.predict(latents[test_idx]), lengths[test_idx]),
                        r_squared(fit.predict(latents[train_idx]), lengths[train_idx]))
    return ProbeResult(r2_with=results["with"][0], r2_without=results["without"][0],
                       r2_with_train=results["with"][1],
                       r2_without_train=results["without"][1], ridged=ridged)
