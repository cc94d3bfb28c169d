"""Training loop: KL-weight annealing, word dropout, metrics log, checkpoints."""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import checkpoint as ckpt
from .model import HyperParams, decoder_targets, init_params, total_loss
from .numerics import AdamState, ParamStore, adam_step, clip_grad_norm
from .textpipe import BOS_ID, PAD_ID, UNK_ID, Vocabulary, encode_batch


class TrainingDivergedError(RuntimeError):
    """Raised when a loss component stops being finite; names the component."""


@dataclass
class TrainConfig:
    batch_size: int = 64
    total_steps: int = 2000
    anneal_kind: str = "linear"       # or "logistic"
    anneal_horizon: int = 1000
    word_drop_p: float = 0.20
    dropout_keep: float = 0.87
    learning_rate: float = 0.002
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 5.0
    seed: int = 0
    checkpoint_interval: int = 1000
    lenemb: bool = True

    def __post_init__(self):
        if not 0.0 <= self.word_drop_p <= 1.0:
            raise ValueError("word_drop_p must be in [0, 1]")
        if not 0.0 <= self.dropout_keep <= 1.0:
            raise ValueError("dropout_keep must be in [0, 1]")
        if self.anneal_horizon > self.total_steps:
            raise ValueError("anneal_horizon must be <= total_steps")
        if self.anneal_horizon < 1:
            raise ValueError("anneal_horizon must be >= 1")
        if self.anneal_kind not in ("linear", "logistic"):
            raise ValueError(f"unknown anneal_kind {self.anneal_kind!r}")


def kl_anneal_weight(step: int, config: TrainConfig) -> float:
    """Monotone weight in [0, 1]: 0 at step 0, 1 at and beyond the horizon."""
    if step < 0:
        raise ValueError("step must be >= 0")
    horizon = config.anneal_horizon
    if step >= horizon:
        return 1.0
    frac = step / horizon
    if config.anneal_kind == "linear":
        return frac
    # logistic, renormalized so the endpoints are exactly 0 and 1
    steep = 12.0
    def sig(x):
        return 1.0 / (1.0 + math.exp(-x))
    lo, hi = sig(-steep / 2.0), sig(steep / 2.0)
    return (sig(steep * (frac - 0.5)) - lo) / (hi - lo)


def word_dropout(decoder_input_ids: np.ndarray, p: float, rng) -> np.ndarray:
    """Independently replace previous-word inputs by UNK with probability p.

    BOS and PAD positions are never replaced. The caller's targets are a
    separate array and stay untouched.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("dropout probability must be in [0, 1]")
    if p == 0.0:
        return decoder_input_ids
    drop = rng.random(decoder_input_ids.shape) < p
    protected = (decoder_input_ids == BOS_ID) | (decoder_input_ids == PAD_ID)
    out = decoder_input_ids.copy()
    out[drop & ~protected] = UNK_ID
    return out


@dataclass
class MetricsLog:
    """Per-step loss components; rendered as CSV with a header line."""

    HEADER = "step,kl_weight,kl_value,reconstruction,bow,total"
    records: list = field(default_factory=list)

    def append(self, step, kl_weight, kl_value, reconstruction, bow, total):
        if self.records and step <= self.records[-1][0]:
            raise ValueError("metrics steps must be strictly increasing")
        self.records.append((step, kl_weight, kl_value, reconstruction, bow, total))

    def to_csv(self) -> str:
        lines = [self.HEADER]
        for step, kl_w, kl_v, rec, bow, tot in self.records:
            lines.append(f"{step},{kl_w!r},{kl_v!r},{rec!r},{bow!r},{tot!r}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_csv())


@dataclass
class TrainResult:
    params: ParamStore
    hyperparams: HyperParams
    metrics: MetricsLog
    checkpoint_paths: list


def train(sentences, vocab: Vocabulary, hp: HyperParams, config: TrainConfig,
          out_dir=None, log_every: int = 1) -> TrainResult:
    """Train on encoded sentences; deterministic given (sentences, config, seed).

    During training the length countdown starts at each example's true word
    count. Writes interval checkpoints, a final checkpoint and the metrics
    CSV into ``out_dir`` when given.
    """
    if hp.vocab_size != vocab.size:
        raise ValueError(f"hp.vocab_size {hp.vocab_size} != vocabulary size {vocab.size}")
    if hp.lenemb != config.lenemb:
        raise ValueError("hp.lenemb and config.lenemb disagree")
    max_words = max(s.word_count for s in sentences)
    if hp.lenemb and hp.max_len_index < max_words:
        raise ValueError(
            f"max_len_index {hp.max_len_index} < longest sentence {max_words}")

    rng = np.random.default_rng(config.seed)
    params = init_params(hp, rng)
    adam = AdamState.for_params(params, learning_rate=config.learning_rate,
                                beta1=config.adam_beta1, beta2=config.adam_beta2,
                                eps=config.adam_eps)
    metrics = MetricsLog()
    checkpoint_paths = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    step = 0
    batches = []
    while step < config.total_steps:
        if not batches:
            batches = encode_batch(sentences, vocab, config.batch_size, rng)
        batch = batches.pop(0)

        kl_w = kl_anneal_weight(step, config)
        dec_in, _, _ = decoder_targets(batch)
        dec_in = word_dropout(dec_in, config.word_drop_p, rng)
        loss, comps = total_loss(batch, params, hp, kl_w, "train", rng,
                                 dropout_keep=config.dropout_keep,
                                 decoder_inputs=dec_in)
        for name, value in comps.items():
            if not np.isfinite(value):
                raise TrainingDivergedError(
                    f"non-finite {name} component at step {step}: {value}")
        loss.backward()
        clip_grad_norm(params, config.grad_clip)
        adam_step(params, adam)

        if step % log_every == 0 or step == config.total_steps - 1:
            metrics.append(step, kl_w, comps["kl"], comps["reconstruction"],
                           comps["bow"], comps["total"])
        step += 1
        if out_dir is not None and step % config.checkpoint_interval == 0 \
                and step < config.total_steps:
            path = os.path.join(out_dir, f"ckpt_{step:06d}.lvae")
            ckpt.checkpoint_save(path, params, hp, vocab, step)
            checkpoint_paths.append(path)

    if out_dir is not None:
        path = os.path.join(out_dir, "final.lvae")
        ckpt.checkpoint_save(path, params, hp, vocab, step)
        checkpoint_paths.append(path)
        metrics.save(os.path.join(out_dir, "metrics.csv"))
    return TrainResult(params=params, hyperparams=hp, metrics=metrics,
                       checkpoint_paths=checkpoint_paths)
