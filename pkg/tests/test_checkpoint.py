"""Checkpoint round trips and typed corruption errors."""

import struct

import numpy as np
import pytest

from lenvae.checkpoint import (
    CheckpointChecksumError, CheckpointFormatError, CheckpointTruncatedError,
    CheckpointVersionError, IncompatibleCheckpointError, checkpoint_load,
    checkpoint_save,
)
from lenvae.inference import summarize
from lenvae.model import HyperParams, init_params
from lenvae.textpipe import build_vocab


@pytest.fixture
def saved(tmp_path):
    vocab = build_vocab([["cat", "dog", "runs", "the"]], top_k=10)
    hp = HyperParams(vocab_size=vocab.size, cell_size=6, embed_size=5,
                     latent_dim=4, bow_width=5, len_embed_size=3,
                     decoder_layers=2, max_len_index=12, softmax_samples=4)
    params = init_params(hp, np.random.default_rng(0))
    path = tmp_path / "model.lvae"
    checkpoint_save(path, params, hp, vocab, step=123)
    return path, params, hp, vocab


def test_roundtrip_bit_exact(saved):
    path, params, hp, vocab = saved
    loaded_params, loaded_hp, loaded_vocab, step = checkpoint_load(path)
    assert step == 123
    assert loaded_hp == hp
    assert loaded_vocab.tokens == vocab.tokens
    assert loaded_params.names() == params.names()  # iteration order preserved
    for name, t in params.items():
        got = loaded_params[name].data
        assert got.dtype == np.float64
        np.testing.assert_array_equal(got, t.data)


def test_truncated_file_is_typed_error(saved):
    path, *_ = saved
    raw = path.read_bytes()
    path.write_bytes(raw[:len(raw) // 2])
    with pytest.raises((CheckpointTruncatedError, CheckpointChecksumError)):
        checkpoint_load(path)
    # cutting exactly the checksum keeps the body parseable but not verifiable
    path.write_bytes(raw[:-2])
    with pytest.raises((CheckpointTruncatedError, CheckpointChecksumError)):
        checkpoint_load(path)


def test_flipped_byte_is_checksum_error(saved):
    path, *_ = saved
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CheckpointChecksumError):
        checkpoint_load(path)


def test_version_mismatch_is_typed_error(saved, tmp_path):
    path, *_ = saved
    raw = bytearray(path.read_bytes())
    raw[4:8] = struct.pack("<I", 99)
    # restore a valid checksum so the version check is what fires
    import zlib
    body = bytes(raw[:-4])
    out = tmp_path / "versioned.lvae"
    out.write_bytes(body + struct.pack("<I", zlib.crc32(body)))
    with pytest.raises(CheckpointVersionError):
        checkpoint_load(out)


def test_bad_magic_is_format_error(tmp_path):
    import zlib
    body = b"NOPE" + struct.pack("<I", 1) + b"\x00" * 16
    path = tmp_path / "bad.lvae"
    path.write_bytes(body + struct.pack("<I", zlib.crc32(body)))
    with pytest.raises(CheckpointFormatError):
        checkpoint_load(path)


def test_lenemb_disabled_checkpoint_refuses_length_decoding(tmp_path):
    vocab = build_vocab([["cat", "dog", "runs", "the"]], top_k=10)
    hp = HyperParams(vocab_size=vocab.size, cell_size=6, embed_size=5,
                     latent_dim=4, bow_width=5, len_embed_size=3,
                     decoder_layers=1, max_len_index=12, softmax_samples=4,
                     lenemb=False)
    params = init_params(hp, np.random.default_rng(1))
    path = tmp_path / "nolen.lvae"
    checkpoint_save(path, params, hp, vocab, step=1)
    loaded_params, loaded_hp, loaded_vocab, _ = checkpoint_load(path)
    assert loaded_hp.lenemb is False
    with pytest.raises(IncompatibleCheckpointError):
        summarize("the cat runs", 2, loaded_params, loaded_hp, loaded_vocab,
                  beam_width=2, max_tokens=6)
    # natural-length decoding stays possible
    out = summarize("the cat runs", "natural", loaded_params, loaded_hp,
                    loaded_vocab, beam_width=2, max_tokens=6)
    assert isinstance(out, str)


def test_float32_params_roundtrip_through_float64_file(tmp_path):
    vocab = build_vocab([["a", "b"]], top_k=5)
    hp = HyperParams(vocab_size=vocab.size, cell_size=4, embed_size=4,
                     latent_dim=2, bow_width=4, len_embed_size=2,
                     decoder_layers=1, max_len_index=8, softmax_samples=3)
    params = init_params(hp, np.random.default_rng(2), dtype=np.float32)
    path = tmp_path / "f32.lvae"
    checkpoint_save(path, params, hp, vocab, step=0)
    loaded, *_ = checkpoint_load(path)
    for name, t in params.items():
        np.testing.assert_array_equal(loaded[name].data.astype(np.float32), t.data)
