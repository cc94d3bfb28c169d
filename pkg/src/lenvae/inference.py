"""Beam-search decoding with a controllable length countdown.

The countdown's starting value is the knob: the input's own word count for
plain reconstruction, or any smaller number to ask the decoder to compress.
Inference uses z = mu (zero noise), so decoding is deterministic. The
countdown biases the decoder toward stopping but never forces termination;
end-of-sentence stays an ordinary predicted token.
"""

from dataclasses import dataclass, field

import numpy as np

from .checkpoint import IncompatibleCheckpointError
from .model import (
    HyperParams, decode_step, encode, init_decoder_state, reparameterize,
    zero_length_input,
)
from .numerics import ParamStore, Tensor, gather_rows, log_softmax_rows
from .textpipe import BOS_ID, EOS_ID, PAD_ID, TokenizedSentence, Vocabulary, make_batch, normalize

NATURAL = "natural"


@dataclass
class DecodeRequest:
    """What to decode and how hard to squeeze it.

    desired_length: target word count for the countdown, or NATURAL to use
    the input's own word count.
    """

    desired_length: int | str = 20
    beam_width: int = 8
    max_tokens: int = 40
    sentence: str | None = None

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.desired_length != NATURAL and int(self.desired_length) < 0:
            raise ValueError("desired_length must be >= 0 or 'natural'")


@dataclass
class Hypothesis:
    """One partial decode: emitted ids, score, recurrent state, countdown."""

    ids: list = field(default_factory=list)
    log_prob: float = 0.0
    state: list = field(default_factory=list)   # per layer (h, c) arrays
    remaining: int = 0
    finished: bool = False


@dataclass
class BeamResult:
    ids: list
    log_prob: float
    truncated: bool = False


def _state_to_arrays(state):
    return [(h.data, c.data) for h, c in state]


def beam_search(z: np.ndarray, request: DecodeRequest, params: ParamStore,
                hp: HyperParams, initial_length: int,
                forbidden_ids=(PAD_ID, BOS_ID)) -> BeamResult:
    """Highest cumulative-log-probability sequence under the decoder.

    ``z`` is a (latent_dim,) vector. Live hypotheses expand in lockstep; a
    hypothesis that emits EOS moves to the completed pool and is never
    extended. Search stops once the best completed score cannot be beaten by
    any live hypothesis (token log-probabilities are <= 0, so scores only
    fall) or at ``max_tokens``; hypotheses still alive at the horizon compete
    with the pool at their cumulative score. No length normalization is
    applied. ``truncated=True`` marks a winner that never emitted EOS.

    ``forbidden_ids`` are never proposed (padding/control tokens); pass ()
    to rank the raw full vocabulary.
    """
    z_row = Tensor(np.asarray(z, dtype=np.float64)[None, :])
    init_state = _state_to_arrays(init_decoder_state(z_row, params, hp))
    beams = [Hypothesis(state=init_state, remaining=initial_length)]
    completed: list[Hypothesis] = []
    forbidden = [i for i in forbidden_ids if i < hp.vocab_size]

    for step in range(request.max_tokens):
        n = len(beams)
        prev_ids = np.array([b.ids[-1] if b.ids else BOS_ID for b in beams], dtype=np.intp)
        z_batch = Tensor(np.repeat(np.asarray(z, dtype=np.float64)[None, :], n, axis=0))
        state = [(Tensor(np.stack([b.state[l][0][0] for b in beams])),
                  Tensor(np.stack([b.state[l][1][0] for b in beams])))
                 for l in range(hp.decoder_layers)]
        prev_emb = gather_rows(params["embed.W"], prev_ids)
        if hp.lenemb:
            idx = np.array([min(b.remaining, hp.max_len_index) for b in beams], dtype=np.intp)
            len_emb = gather_rows(params["len_table.W"], idx)
        else:
            len_emb = zero_length_input(n, hp)
        logits, new_state = decode_step(z_batch, prev_emb, len_emb, state, params, hp)
        log_probs = log_softmax_rows(logits.data)
        if forbidden:
            log_probs[:, forbidden] = -np.inf
        rows_state = _state_to_arrays(new_state)

        candidates = []
        for r, beam in enumerate(beams):
            scores = beam.log_prob + log_probs[r]
            for v in np.argsort(scores)[::-1][:request.beam_width + 1]:
                if not np.isfinite(scores[v]):
                    continue
                candidates.append((float(scores[v]), r, int(v)))
        candidates.sort(key=lambda t: (-t[0], t[1], t[2]))

        next_beams = []
        for score, r, v in candidates[:request.beam_width]:
            row_state = [(rows_state[l][0][r:r + 1], rows_state[l][1][r:r + 1])
                         for l in range(hp.decoder_layers)]
            hyp = Hypothesis(ids=beams[r].ids + [v], log_prob=score, state=row_state,
                             remaining=max(beams[r].remaining - 1, 0),
                             finished=(v == EOS_ID))
            if hyp.finished:
                completed.append(hyp)
            else:
                next_beams.append(hyp)
        if not next_beams and not completed:
            break  # nothing expandable; fall through with the previous live set
        beams = next_beams
        if not beams:
            break
        if completed:
            best_done = max(c.log_prob for c in completed)
            if best_done >= max(b.log_prob for b in beams):
                break

    candidates_final = completed + beams  # live-at-horizon hypotheses count
    best = max(candidates_final, key=lambda h: h.log_prob)
    return BeamResult(ids=best.ids, log_prob=best.log_prob, truncated=not best.finished)


def _encode_mu(sentence_ids: list, params: ParamStore, hp: HyperParams) -> np.ndarray:
    batch = make_batch([TokenizedSentence(sentence_ids, "")], hp.vocab_size)
    latent = encode(batch, params, hp)
    z = reparameterize(latent, np.zeros((1, hp.latent_dim)))
    return z.data[0]


def detokenize(ids, vocab: Vocabulary) -> str:
    """Ids to surface text; the terminal EOS (if any) is stripped."""
    if ids and ids[-1] == EOS_ID:
        ids = ids[:-1]
    return " ".join(vocab.token_of(i) for i in ids)


def summarize(sentence: str, desired_length, params: ParamStore, hp: HyperParams,
              vocab: Vocabulary, beam_width: int = 8, max_tokens: int = 40) -> str:
    """Decode a shortened (or same-length) version of one sentence.

    ``desired_length`` is a word count, or NATURAL for the input's own count.
    Requesting a specific length from a model trained without the length
    table is an incompatibility error.
    """
    tokens = normalize(sentence)
    if not tokens:
        raise ValueError("cannot summarize an empty sentence")
    if desired_length == NATURAL:
        length = len(tokens)
    else:
        length = int(desired_length)
        if not hp.lenemb:
            raise IncompatibleCheckpointError(
                "model was trained without length embeddings; only "
                "desired_length='natural' decoding is possible")
    request = DecodeRequest(desired_length=desired_length, beam_width=beam_width,
                            max_tokens=max_tokens, sentence=sentence)
    mu = _encode_mu(vocab.encode(tokens), params, hp)
    result = beam_search(mu, request, params, hp, initial_length=length)
    return detokenize(result.ids, vocab)


def reconstruct(sentence: str, params: ParamStore, hp: HyperParams,
                vocab: Vocabulary, beam_width: int = 8, max_tokens: int = 40) -> str:
    """Decode at the input's natural length (no shortening)."""
    return summarize(sentence, NATURAL, params, hp, vocab,
                     beam_width=beam_width, max_tokens=max_tokens)
