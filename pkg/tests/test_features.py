import pytest
from hypothesis import given
from hypothesis import strategies as st

from gazefusion.errors import EmptyWord, MissingEmbedding
from gazefusion.features import featurize_sentence, rel_len, tok_len, word_char_len
from gazefusion.store import EmbeddingStore, zero_store
from gazefusion.corpus import Corpus
from helpers import record, synth_corpus

import numpy as np


def test_char_len_ascii():
    assert word_char_len("abc") == 3


def test_char_len_cyrillic():
    # frozen from the reference UTF-8 encoding: 2 bytes per Cyrillic letter
    assert word_char_len("мир") == 6


def test_char_len_cjk():
    # 3 bytes per CJK letter
    assert word_char_len("你好") == 6


def test_char_len_empty():
    with pytest.raises(EmptyWord):
        word_char_len("  ")


words = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1
).filter(lambda w: w.strip())


@given(words)
def test_char_len_at_least_scalar_count(word):
    n = word_char_len(word)
    assert n >= len(word)
    assert (n == len(word)) == word.isascii()


@given(words, words)
def test_rel_len_reciprocal(a, b):
    ra = rel_len(record(word=a), record(word=b))
    rb = rel_len(record(word=b), record(word=a))
    assert abs(ra * rb - 1.0) < 1e-12


def test_rel_len_ratio():
    assert rel_len(record(word="abc"), record(word="abcdef")) == 0.5


def test_rel_len_sentence_initial():
    assert rel_len(record(word="abc"), None) == 1.0


def test_rel_len_equal():
    assert rel_len(record(word="abcdef"), record(word="qwerty")) == 1.0


def test_tok_len_from_store():
    r = record()
    store = EmbeddingStore(
        dim=2, dataset_names=("SYN",), entries={r.key: (3, np.zeros(2, dtype=np.float32))}
    )
    assert tok_len(store, r.key) == 3


def test_tok_len_missing():
    store = EmbeddingStore(dim=2, dataset_names=(), entries={})
    with pytest.raises(MissingEmbedding):
        tok_len(store, ("SYN", 0, 0))


def test_featurize_sentence_chaining():
    group = [record(word="abcdef", word_id=0), record(word="abc", word_id=1)]
    store = zero_store(Corpus(tuple(group), "train"), 4)
    fvs = featurize_sentence(group, store)
    assert [fv.rel_len for fv in fvs] == [1.0, 0.5]
    assert [fv.word_char_len for fv in fvs] == [6, 3]
    assert all(fv.tok_len == 1 for fv in fvs)


def test_featurize_single_token():
    group = [record(word="hi")]
    store = zero_store(Corpus(tuple(group), "train"), 4)
    (fv,) = featurize_sentence(group, store)
    assert fv.as_tuple() == (1.0, 2.0, 1.0)


def test_featurize_empty_group():
    store = EmbeddingStore(dim=2, dataset_names=(), entries={})
    assert featurize_sentence([], store) == []


def test_featurize_length_matches():
    corpus = synth_corpus(4, 7, seed=9)
    store = zero_store(corpus, 4)
    from gazefusion.corpus import group_sentences

    for group in group_sentences(corpus):
        assert len(featurize_sentence(group, store)) == len(group)
