"""Shared fixtures: synthetic corpora and stores for tests."""

from __future__ import annotations

import random

import numpy as np

from gazefusion.corpus import Corpus, TargetVector, TokenRecord
from gazefusion.store import EmbeddingStore


def record(
    dataset="SYN",
    language="en",
    sentence_id=0,
    word_id=0,
    word="abc",
    targets=(10.0, 2.0, 20.0, 5.0),
) -> TokenRecord:
    t = TargetVector(*targets) if targets is not None else None
    return TokenRecord(dataset, language, sentence_id, word_id, word, t)


def synth_corpus(
    n_sentences=10,
    words_per_sentence=8,
    split="train",
    seed=0,
    target_fn=None,
    dataset="SYN",
    language="en",
) -> Corpus:
    """Random-word corpus; target_fn(rel_len) -> scalar fills all four targets.

    Default targets are uniform random in [0, 100].
    """
    r = random.Random(seed)
    records = []
    for s in range(n_sentences):
        prev_len = None
        for w in range(words_per_sentence):
            word = "x" * r.randint(1, 10)
            char_len = len(word)
            rel = 1.0 if prev_len is None else char_len / prev_len
            prev_len = char_len
            if split == "test":
                targets = None
            elif target_fn is not None:
                v = min(max(target_fn(rel), 0.0), 100.0)
                targets = TargetVector(v, v, v, v)
            else:
                targets = TargetVector(*(r.uniform(0, 100) for _ in range(4)))
            records.append(TokenRecord(dataset, language, s, w, word, targets))
    return Corpus(tuple(records), split)


def random_store(corpus: Corpus, dim: int, seed=0) -> EmbeddingStore:
    """Store with random finite f32 vectors and random tok_len covering the corpus."""
    rng = np.random.default_rng(seed)
    names: list[str] = []
    entries = {}
    for r in corpus.records:
        if r.dataset not in names:
            names.append(r.dataset)
        vec = rng.standard_normal(dim).astype(np.float32)
        entries[r.key] = (int(rng.integers(1, 5)), vec)
    return EmbeddingStore(dim=dim, dataset_names=tuple(names), entries=entries)
