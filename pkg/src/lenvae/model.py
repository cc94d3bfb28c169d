"""Latent-variable sentence autoencoder with a length-countdown input.

Encoder: bidirectional LSTM over embedded tokens; the per-step forward and
backward states are concatenated and averaged over the true (non-PAD) steps;
two affine maps produce the posterior mean and log-variance. Decoder: a stack
of LSTM layers stepped with [previous-token embedding, z, length embedding]
as input (layers above the first also see the lower layer's hidden state),
the first layer's cell state initialized from an affine map of z. The length
embedding indexes a learned table by a per-step countdown that starts at the
desired output length and decrements to 0. Losses: per-token reconstruction
cross-entropy (sampled in training mode, full softmax in eval mode), the
closed-form KL against a standard-normal prior, and a bag-of-words auxiliary
loss predicting the input's token counts from z.
"""

from dataclasses import dataclass, replace

import numpy as np

from .numerics import (
    ParamStore, Tensor, add, add_scalar, affine, concat_cols,
    cross_entropy_rows, exp_, gather_rows, init_lstm_weights, leaf,
    lstm_cell_forward, mul, mul_const, sampled_logits, scale, sub, sum_all,
    sum_cols, tanh_, weighted_cross_entropy_rows, zeros,
)
from .textpipe import BOS_ID, EOS_ID, PAD_ID, Batch

WEIGHT_INIT_SCALE = 0.08


@dataclass(frozen=True)
class HyperParams:
    """Architecture sizes. Desk-scale defaults; ``paper_scale`` holds the
    published large-corpus configuration."""

    vocab_size: int
    cell_size: int = 32
    embed_size: int = 32
    latent_dim: int = 16
    bow_width: int = 32
    len_embed_size: int = 8
    decoder_layers: int = 2
    max_len_index: int = 30
    softmax_samples: int = 32
    lenemb: bool = True

    def __post_init__(self):
        for name in ("vocab_size", "cell_size", "embed_size", "latent_dim",
                     "bow_width", "len_embed_size", "decoder_layers",
                     "max_len_index", "softmax_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"HyperParams.{name} must be positive")

    @classmethod
    def paper_scale(cls, vocab_size: int, lenemb: bool = True) -> "HyperParams":
        return cls(vocab_size=vocab_size, cell_size=243, embed_size=254,
                   latent_dim=124, bow_width=236, len_embed_size=50,
                   decoder_layers=2, max_len_index=30, softmax_samples=1000,
                   lenemb=lenemb)

    def without_lenemb(self) -> "HyperParams":
        return replace(self, lenemb=False)


@dataclass
class LatentParams:
    """Per-sentence posterior: mean, log-variance, and (once sampled) z."""

    mu: Tensor
    logvar: Tensor
    z: Tensor | None = None


def init_params(hp: HyperParams, rng: np.random.Generator, dtype=np.float64) -> ParamStore:
    """Fresh parameters: weights uniform +-0.08, biases 0, forget-gate bias 1."""
    def uniform(*shape):
        return rng.uniform(-WEIGHT_INIT_SCALE, WEIGHT_INIT_SCALE, size=shape).astype(dtype)

    p = ParamStore()
    p.add("embed.W", uniform(hp.vocab_size, hp.embed_size))
    for name in ("enc_fwd", "enc_bwd"):
        w, b = init_lstm_weights(rng, hp.embed_size, hp.cell_size, dtype)
        p.add(f"{name}.W", w)
        p.add(f"{name}.b", b)
    p.add("mu.W", uniform(2 * hp.cell_size, hp.latent_dim))
    p.add("mu.b", np.zeros(hp.latent_dim, dtype=dtype))
    p.add("logvar.W", uniform(2 * hp.cell_size, hp.latent_dim))
    p.add("logvar.b", np.zeros(hp.latent_dim, dtype=dtype))
    p.add("dec_init.W", uniform(hp.latent_dim, hp.cell_size))
    p.add("dec_init.b", np.zeros(hp.cell_size, dtype=dtype))
    step_in = hp.embed_size + hp.latent_dim + hp.len_embed_size
    for layer in range(hp.decoder_layers):
        in_dim = step_in if layer == 0 else hp.cell_size + step_in
        w, b = init_lstm_weights(rng, in_dim, hp.cell_size, dtype)
        p.add(f"dec_l{layer}.W", w)
        p.add(f"dec_l{layer}.b", b)
    if hp.lenemb:
        p.add("len_table.W", uniform(hp.max_len_index + 1, hp.len_embed_size))
    p.add("out.W", uniform(hp.cell_size, hp.vocab_size))
    p.add("out.b", np.zeros(hp.vocab_size, dtype=dtype))
    p.add("bow_h.W", uniform(hp.latent_dim, hp.bow_width))
    p.add("bow_h.b", np.zeros(hp.bow_width, dtype=dtype))
    p.add("bow_out.W", uniform(hp.bow_width, hp.vocab_size))
    p.add("bow_out.b", np.zeros(hp.vocab_size, dtype=dtype))
    return p


# ---------------------------------------------------------------------------
# encoder
# ---------------------------------------------------------------------------

def _reverse_within_length(ids: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Per row, reverse the first ``length`` entries and keep PAD at the end."""
    n, width = ids.shape
    cols = lengths[:, None] - 1 - np.arange(width)[None, :]
    valid = cols >= 0
    out = np.full_like(ids, PAD_ID)
    rows = np.repeat(np.arange(n)[:, None], width, axis=1)
    out[valid] = ids[rows[valid], cols[valid]]
    return out


def encoder_mean(batch: Batch, params: ParamStore, hp: HyperParams) -> Tensor:
    """(B, 2*cell) mean over true steps of the concatenated bi-LSTM states."""
    ids, lengths = batch.ids, batch.lengths
    n, width = ids.shape
    step_mask = (np.arange(width)[None, :] < lengths[:, None]).astype(np.float64)
    inv_len = (1.0 / np.maximum(lengths, 1)).astype(np.float64)[:, None]

    sums = []
    for direction, dir_ids in (("enc_fwd", ids), ("enc_bwd", _reverse_within_length(ids, lengths))):
        h = zeros((n, hp.cell_size))
        c = zeros((n, hp.cell_size))
        total = None
        for t in range(width):
            emb = gather_rows(params["embed.W"], dir_ids[:, t])
            h, c = lstm_cell_forward(emb, h, c, params[f"{direction}.W"], params[f"{direction}.b"])
            masked = mul_const(h, step_mask[:, t:t + 1])
            total = masked if total is None else add(total, masked)
        sums.append(mul_const(total, inv_len))
    return concat_cols(sums)


def encode(batch: Batch, params: ParamStore, hp: HyperParams) -> LatentParams:
    mean = encoder_mean(batch, params, hp)
    mu = affine(mean, params["mu.W"], params["mu.b"])
    logvar = affine(mean, params["logvar.W"], params["logvar.b"])
    return LatentParams(mu=mu, logvar=logvar)


def reparameterize(latent: LatentParams, eps: np.ndarray) -> Tensor:
    """z = mu + exp(logvar / 2) * eps, with ``eps`` treated as a constant."""
    sigma = exp_(scale(latent.logvar, 0.5))
    z = add(latent.mu, mul_const(sigma, np.asarray(eps, dtype=np.float64)))
    latent.z = z
    return z


def kl_divergence(latent: LatentParams) -> Tensor:
    """(B,) closed-form KL(q || standard normal) per example, always >= 0."""
    term = add_scalar(
        sub(sub(latent.logvar, mul(latent.mu, latent.mu)), exp_(latent.logvar)), 1.0)
    return scale(sum_cols(term), -0.5)


# ---------------------------------------------------------------------------
# length countdown
# ---------------------------------------------------------------------------

@dataclass
class LengthSchedule:
    """Countdown over desired output length: starts at ``initial``, decrements
    by one per emitted word, floors at 0."""

    initial: np.ndarray  # (B,) int
    step: int = 0

    def current(self) -> np.ndarray:
        return np.maximum(self.initial - self.step, 0)

    def advance(self) -> None:
        self.step += 1


def length_embed(schedule: LengthSchedule, params: ParamStore, hp: HyperParams) -> Tensor:
    """(B, len_embed_size) table row for each sentence's current countdown value.

    Countdown values beyond the table clamp to the last row.
    """
    idx = np.minimum(schedule.current(), hp.max_len_index)
    return gather_rows(params["len_table.W"], idx)


def zero_length_input(n: int, hp: HyperParams) -> Tensor:
    """Constant zero stand-in for the length embedding (length control off)."""
    return zeros((n, hp.len_embed_size))


# ---------------------------------------------------------------------------
# decoder
# ---------------------------------------------------------------------------

def init_decoder_state(z: Tensor, params: ParamStore, hp: HyperParams) -> list:
    """Per-layer (h, c); layer 0's cell state is an affine map of z."""
    n = z.data.shape[0]
    state = [(zeros((n, hp.cell_size)), affine(z, params["dec_init.W"], params["dec_init.b"]))]
    for _ in range(1, hp.decoder_layers):
        state.append((zeros((n, hp.cell_size)), zeros((n, hp.cell_size))))
    return state


def decoder_stack_step(z: Tensor, prev_emb: Tensor, len_emb: Tensor, state: list,
                       params: ParamStore, hp: HyperParams):
    """One step through all layers; returns (top hidden, new state)."""
    step_input = concat_cols([prev_emb, z, len_emb])
    new_state = []
    below = None
    for layer in range(hp.decoder_layers):
        layer_in = step_input if layer == 0 else concat_cols([below, step_input])
        h_prev, c_prev = state[layer]
        h, c = lstm_cell_forward(layer_in, h_prev, c_prev,
                                 params[f"dec_l{layer}.W"], params[f"dec_l{layer}.b"])
        new_state.append((h, c))
        below = h
    return below, new_state


def decode_step(z: Tensor, prev_emb: Tensor, len_emb: Tensor, state: list,
                params: ParamStore, hp: HyperParams, *,
                dropout_mask: np.ndarray | None = None):
    """Returns (vocabulary logits (B, V), new state).

    ``dropout_mask`` (already scaled by 1/keep) regularizes the top hidden
    activations during training; pass None for inference/eval.
    """
    hidden, new_state = decoder_stack_step(z, prev_emb, len_emb, state, params, hp)
    if dropout_mask is not None:
        hidden = mul_const(hidden, dropout_mask)
    logits = affine(hidden, params["out.W"], params["out.b"])
    return logits, new_state


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def bow_loss(z: Tensor, bow_counts: np.ndarray, params: ParamStore, hp: HyperParams) -> Tensor:
    """Batch-mean of -sum_w count_w * log softmax(logits)_w from a tanh layer on z."""
    hidden = tanh_(affine(z, params["bow_h.W"], params["bow_h.b"]))
    logits = affine(hidden, params["bow_out.W"], params["bow_out.b"])
    n = z.data.shape[0]
    return scale(weighted_cross_entropy_rows(logits, bow_counts), 1.0 / n)


def draw_negatives(rng, vocab_size: int, sample_count: int, targets: np.ndarray) -> np.ndarray:
    """(B, sample_count) uniform draws without replacement, excluding each
    row's target. With sample_count == V-1 this is a permutation of all
    non-target ids."""
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    if sample_count > vocab_size - 1:
        raise ValueError(
            f"sample_count {sample_count} exceeds vocab_size-1 = {vocab_size - 1}")
    n = targets.shape[0]
    draws = np.argsort(rng.random((n, vocab_size - 1)), axis=1)[:, :sample_count]
    return draws + (draws >= targets[:, None])


def sampled_softmax_loss(out_w: Tensor, out_b: Tensor, hidden: Tensor, target: int,
                         sample_count: int, rng) -> Tensor:
    """Cross-entropy estimate over {target} + sampled negatives, one position.

    ``hidden`` (1, H) or (H,). With sample_count == V-1 the estimate equals
    the full softmax cross-entropy.
    """
    if hidden.data.ndim == 1:
        hidden = Tensor(hidden.data[None, :], (hidden,),
                        lambda g, _h=hidden: _accum_row(_h, g))
    targets = np.array([target], dtype=np.intp)
    negs = draw_negatives(rng, out_w.data.shape[1], sample_count, targets)
    ids = np.concatenate([targets[:, None], negs], axis=1)
    logits = sampled_logits(hidden, out_w, out_b, ids)
    return cross_entropy_rows(logits, np.zeros(1, dtype=np.intp), np.ones(1))


def _accum_row(t, g):
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g[0]


def decoder_targets(batch: Batch):
    """Teacher-forcing arrays: inputs (B, T+1) starting with BOS, targets
    (B, T+1) ending with EOS, and the (B, T+1) loss mask."""
    ids, lengths = batch.ids, batch.lengths
    n, width = ids.shape
    dec_in = np.full((n, width + 1), PAD_ID, dtype=np.intp)
    dec_in[:, 0] = BOS_ID
    dec_in[:, 1:] = ids
    targets = np.full((n, width + 1), PAD_ID, dtype=np.intp)
    targets[:, :width] = ids
    targets[np.arange(n), lengths] = EOS_ID
    mask = (np.arange(width + 1)[None, :] <= lengths[:, None]).astype(np.float64)
    return dec_in, targets, mask


def tiny_gradcheck_instance(index: int):
    """A small full-model loss for finite-difference checking.

    Returns (params, loss_fn) with frozen noise so ``loss_fn`` is a
    deterministic function of the parameters. V=7, cell 4, latent 3, two
    decoder layers, weights uniform in +-1. The instances are pre-screened
    (see GRADCHECK_SEEDS) so that every nonzero parameter gradient is large
    enough (>= ~4e-6) to be resolved by a float64 central difference at step
    1e-5; below that magnitude the relative-error quotient measures rounding
    noise rather than correctness.
    """
    from .numerics import ReplayRng, grad_check  # noqa: F401 (grad_check re-exported use)

    seed = GRADCHECK_SEEDS[index % len(GRADCHECK_SEEDS)]
    hp = HyperParams(vocab_size=7, cell_size=4, embed_size=5, latent_dim=3,
                     bow_width=6, len_embed_size=3, decoder_layers=2,
                     max_len_index=8, softmax_samples=3)
    rng = np.random.default_rng(1000 + seed)
    params = init_params(hp, rng)
    for _, t in params.items():
        t.data[:] = rng.uniform(-1.0, 1.0, size=t.data.shape)
    batch = Batch(ids=np.array([[5, 6, 5], [6, 5, PAD_ID]], dtype=np.intp),
                  lengths=np.array([3, 2], dtype=np.intp),
                  bow=np.array([[0, 0, 0, 0, 0, 2, 1],
                                [0, 0, 0, 0, 0, 1, 1]], dtype=np.float64))
    eps_noise = np.random.default_rng(3000 + seed).standard_normal((2, hp.latent_dim))
    replay = ReplayRng(np.random.default_rng(2000 + seed))

    def loss_fn(p):
        replay.rewind()
        loss, _ = total_loss(batch, p, hp, kl_weight=0.7, mode="train", rng=replay,
                             dropout_keep=0.87, eps=eps_noise)
        return loss

    return params, loss_fn


# Screened instance seeds for tiny_gradcheck_instance; re-screen (scan the
# minimum nonzero gradient magnitude) if the model's draw order changes.
GRADCHECK_SEEDS = (2, 4, 5, 13, 18, 25, 28, 34, 35, 39)


def total_loss(batch: Batch, params: ParamStore, hp: HyperParams, kl_weight: float,
               mode: str, rng=None, *, dropout_keep: float = 1.0,
               decoder_inputs: np.ndarray | None = None,
               eps: np.ndarray | None = None):
    """Scalar objective and its components for one batch.

    mode "train": sampled-softmax reconstruction, hidden-state dropout at
    ``dropout_keep``, noise drawn from ``rng`` unless ``eps`` is supplied.
    mode "eval": full-softmax reconstruction, no dropout, eps defaults to 0.

    ``decoder_inputs`` overrides the teacher-forcing inputs (the training
    loop passes the word-dropped version); targets are always the clean ones.

    Returns (loss Tensor, components dict with reconstruction / kl / bow /
    total floats; kl is the unweighted batch-mean KL value).
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    if not 0.0 <= kl_weight <= 1.0:
        raise ValueError(f"kl_weight must be in [0, 1], got {kl_weight}")
    training = mode == "train"
    n = batch.ids.shape[0]

    latent = encode(batch, params, hp)
    if eps is None:
        eps = rng.standard_normal((n, hp.latent_dim)) if training \
            else np.zeros((n, hp.latent_dim))
    z = reparameterize(latent, eps)
    kl_mean = scale(sum_all(kl_divergence(latent)), 1.0 / n)

    dec_in, targets, mask = decoder_targets(batch)
    if decoder_inputs is not None:
        dec_in = decoder_inputs
    schedule = LengthSchedule(initial=batch.lengths.copy())
    state = init_decoder_state(z, params, hp)
    sample_count = min(hp.softmax_samples, hp.vocab_size - 1)

    recon_sum = None
    for t in range(dec_in.shape[1]):
        prev_emb = gather_rows(params["embed.W"], dec_in[:, t])
        len_emb = length_embed(schedule, params, hp) if hp.lenemb \
            else zero_length_input(n, hp)
        hidden, state = decoder_stack_step(z, prev_emb, len_emb, state, params, hp)
        if training and dropout_keep < 1.0:
            keep_mask = (rng.random((n, hp.cell_size)) < dropout_keep) / dropout_keep
            hidden = mul_const(hidden, keep_mask)
        if training:
            negs = draw_negatives(rng, hp.vocab_size, sample_count, targets[:, t])
            ids_t = np.concatenate([targets[:, t:t + 1], negs], axis=1)
            logits_t = sampled_logits(hidden, params["out.W"], params["out.b"], ids_t)
            ce = cross_entropy_rows(logits_t, np.zeros(n, dtype=np.intp), mask[:, t])
        else:
            logits_t = affine(hidden, params["out.W"], params["out.b"])
            ce = cross_entropy_rows(logits_t, targets[:, t], mask[:, t])
        recon_sum = ce if recon_sum is None else add(recon_sum, ce)
        schedule.advance()
    reconstruction = scale(recon_sum, 1.0 / n)

    bow = bow_loss(z, batch.bow, params, hp)
    total = add(add(reconstruction, scale(kl_mean, kl_weight)), bow)
    components = {
        "reconstruction": float(reconstruction.data),
        "kl": float(kl_mean.data),
        "bow": float(bow.data),
        "total": float(total.data),
    }
    return total, components
