"""Annealing, word dropout, the training loop and its determinism."""

import numpy as np
import pytest

from lenvae.model import HyperParams, total_loss
from lenvae.textpipe import (
    BOS_ID, PAD_ID, UNK_ID, build_vocab, default_toy_grammar,
    encode_sentences, generate_toy_corpus, make_batch, normalize,
)
from lenvae.training import (
    MetricsLog, TrainConfig, TrainingDivergedError, kl_anneal_weight, train,
    word_dropout,
)


# ---------------------------------------------------------------------------
# annealing
# ---------------------------------------------------------------------------

def test_linear_anneal_endpoints_and_midpoint():
    cfg = TrainConfig(total_steps=200, anneal_horizon=100)
    assert kl_anneal_weight(0, cfg) == 0.0
    assert kl_anneal_weight(50, cfg) == 0.5
    assert kl_anneal_weight(100, cfg) == 1.0
    assert kl_anneal_weight(10_000, cfg) == 1.0


def test_logistic_anneal_monotone_and_bounded():
    cfg = TrainConfig(total_steps=1000, anneal_horizon=700, anneal_kind="logistic")
    values = [kl_anneal_weight(s, cfg) for s in range(0, 1000)]
    assert values[0] == 0.0
    assert values[700] == 1.0
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def test_anneal_rejects_negative_step_and_bad_config():
    cfg = TrainConfig(total_steps=10, anneal_horizon=5)
    with pytest.raises(ValueError):
        kl_anneal_weight(-1, cfg)
    with pytest.raises(ValueError):
        TrainConfig(total_steps=10, anneal_horizon=20)
    with pytest.raises(ValueError):
        TrainConfig(anneal_kind="cosine")
    with pytest.raises(ValueError):
        TrainConfig(word_drop_p=1.5)


# ---------------------------------------------------------------------------
# word dropout
# ---------------------------------------------------------------------------

def _decoder_inputs():
    rows = np.array([[BOS_ID, 7, 8, 9, PAD_ID],
                     [BOS_ID, 9, 8, PAD_ID, PAD_ID]], dtype=np.intp)
    return rows


def test_word_dropout_identity_at_zero():
    ids = _decoder_inputs()
    out = word_dropout(ids, 0.0, np.random.default_rng(0))
    np.testing.assert_array_equal(out, ids)


def test_word_dropout_all_at_one_protects_bos_and_pad():
    ids = _decoder_inputs()
    out = word_dropout(ids, 1.0, np.random.default_rng(0))
    assert (out[:, 0] == BOS_ID).all()
    assert (out[ids == PAD_ID] == PAD_ID).all()
    content = ids[(ids != BOS_ID) & (ids != PAD_ID)]
    assert (out[(ids != BOS_ID) & (ids != PAD_ID)] == UNK_ID).all()
    assert content.size > 0


def test_word_dropout_rate_matches_probability():
    rng = np.random.default_rng(123)
    ids = np.full((1000, 100), 7, dtype=np.intp)
    out = word_dropout(ids, 0.2, rng)
    rate = float((out == UNK_ID).mean())
    assert abs(rate - 0.2) < 0.01


def test_word_dropout_leaves_input_array_untouched():
    ids = _decoder_inputs()
    original = ids.copy()
    word_dropout(ids, 0.7, np.random.default_rng(1))
    np.testing.assert_array_equal(ids, original)


# ---------------------------------------------------------------------------
# metrics log
# ---------------------------------------------------------------------------

def test_metrics_log_requires_increasing_steps():
    log = MetricsLog()
    log.append(0, 0.0, 0.1, 2.0, 1.0, 3.0)
    log.append(1, 0.1, 0.1, 2.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        log.append(1, 0.2, 0.1, 2.0, 1.0, 3.0)
    text = log.to_csv()
    assert text.splitlines()[0] == MetricsLog.HEADER
    assert len(text.splitlines()) == 3


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def _toy_setup(n_sentences=300, seed=0):
    lines = generate_toy_corpus(default_toy_grammar(), n_sentences, seed=seed)
    tokens = [normalize(line) for line in lines]
    vocab = build_vocab(tokens, top_k=100)
    sentences = encode_sentences(tokens, vocab)
    hp = HyperParams(vocab_size=vocab.size, cell_size=16, embed_size=16,
                     latent_dim=8, bow_width=16, len_embed_size=4,
                     decoder_layers=1, max_len_index=30, softmax_samples=16)
    return sentences, vocab, hp


def _eval_loss(sentences, vocab, hp, params, n=64):
    batch = make_batch(sentences[:n], vocab.size)
    eps = np.zeros((batch.ids.shape[0], hp.latent_dim))
    _, comps = total_loss(batch, params, hp, 1.0, "eval", eps=eps)
    return comps["total"]


def test_train_descends_on_toy_corpus():
    sentences, vocab, hp = _toy_setup()
    cfg = TrainConfig(batch_size=32, total_steps=200, anneal_horizon=100, seed=3)
    import lenvae.model as model_mod
    start_params = model_mod.init_params(hp, np.random.default_rng(cfg.seed))
    before = _eval_loss(sentences, vocab, hp, start_params)
    result = train(sentences, vocab, hp, cfg)
    after = _eval_loss(sentences, vocab, hp, result.params)
    assert after < before


def test_train_is_bit_deterministic():
    sentences, vocab, hp = _toy_setup(120)
    cfg = TrainConfig(batch_size=32, total_steps=25, anneal_horizon=10, seed=11)
    a = train(sentences, vocab, hp, cfg)
    b = train(sentences, vocab, hp, cfg)
    assert a.metrics.to_csv() == b.metrics.to_csv()
    for name, t in a.params.items():
        np.testing.assert_array_equal(t.data, b.params[name].data)


def test_train_kl_value_rises_after_annealing_engages():
    # qualitative curve shape: near zero while the weight is tiny, then a
    # clear rise once annealing engages
    sentences, vocab, hp = _toy_setup(400, seed=5)
    cfg = TrainConfig(batch_size=32, total_steps=300, anneal_horizon=150, seed=7)
    result = train(sentences, vocab, hp, cfg)
    kl_values = [rec[2] for rec in result.metrics.records]
    early = float(np.mean(kl_values[:10]))
    peak = float(np.max(kl_values[10:]))
    assert early < 0.01
    assert peak > 10 * early and peak > 0.1


@pytest.mark.filterwarnings("ignore:invalid value encountered")
@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_train_aborts_on_nonfinite_with_component_name():
    sentences, vocab, hp = _toy_setup(60)
    cfg = TrainConfig(batch_size=16, total_steps=5, anneal_horizon=2, seed=0,
                      learning_rate=1e30)  # guaranteed blow-up
    with pytest.raises(TrainingDivergedError, match="component"):
        train(sentences, vocab, hp, cfg)


def test_train_validates_vocab_size_and_length_table():
    sentences, vocab, hp = _toy_setup(50)
    bad_hp = HyperParams(vocab_size=vocab.size + 1, cell_size=8, embed_size=8,
                         latent_dim=4, bow_width=8, len_embed_size=4,
                         decoder_layers=1, max_len_index=30, softmax_samples=8)
    with pytest.raises(ValueError, match="vocab"):
        train(sentences, vocab, bad_hp, TrainConfig(total_steps=2, anneal_horizon=1))
    short_table = HyperParams(vocab_size=vocab.size, cell_size=8, embed_size=8,
                              latent_dim=4, bow_width=8, len_embed_size=4,
                              decoder_layers=1, max_len_index=2, softmax_samples=8)
    with pytest.raises(ValueError, match="max_len_index"):
        train(sentences, vocab, short_table, TrainConfig(total_steps=2, anneal_horizon=1))
