"""Scratch: sweep anti-collapse knobs for the toy experiment."""

import sys
import time

import numpy as np

from lenvae.inference import summarize
from lenvae.model import HyperParams
from lenvae.textpipe import (
    build_vocab, default_toy_grammar, encode_sentences, generate_toy_corpus,
    normalize,
)
from lenvae.training import TrainConfig, train

steps = int(sys.argv[1])
horizon = int(sys.argv[2])
drop = float(sys.argv[3])
latent = int(sys.argv[4])
lr = float(sys.argv[5]) if len(sys.argv) > 5 else 0.002
seed = int(sys.argv[6]) if len(sys.argv) > 6 else 0
kind = sys.argv[7] if len(sys.argv) > 7 else "linear"

lines = generate_toy_corpus(default_toy_grammar(), 5000, seed=101)
tokens = [normalize(l) for l in lines]
vocab = build_vocab(tokens, top_k=100)
sentences = encode_sentences(tokens, vocab)
train_sents = sentences[:4800]

hp = HyperParams(vocab_size=vocab.size, cell_size=32, embed_size=32, latent_dim=latent,
                 bow_width=32, len_embed_size=8, decoder_layers=2,
                 max_len_index=30, softmax_samples=60)
cfg = TrainConfig(batch_size=64, total_steps=steps, anneal_horizon=horizon,
                  word_drop_p=drop, seed=seed, learning_rate=lr,
                  anneal_kind=kind, checkpoint_interval=10**9)
t0 = time.time()
result = train(train_sents, vocab, hp, cfg)
last = result.metrics.records[-1]
kl_tail = np.mean([r[2] for r in result.metrics.records[-50:]])

acc = []
for line in lines[:80]:
    rec = summarize(line, "natural", result.params, hp, vocab, beam_width=8, max_tokens=20)
    a, b = line.split(), rec.split()
    acc.append(sum(1 for x, y in zip(a, b) if x == y) / len(a))
print(f"steps={steps} hor={horizon} drop={drop} D={latent} lr={lr} seed={seed} {kind}: "
      f"kl_tail={kl_tail:.2f} recon={last[3]:.1f} "
      f"train_acc={np.mean(acc):.3f} ({time.time()-t0:.0f}s)")
