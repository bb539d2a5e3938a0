import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazefusion.corpus import Corpus
from gazefusion.errors import (
    BadMagic,
    ChecksumMismatch,
    DimMismatch,
    MissingEmbedding,
    NonFiniteValue,
    TruncatedFile,
    UnsupportedVersion,
)
from gazefusion.store import (
    EmbeddingStore,
    lookup,
    read_store,
    store_from_bytes,
    store_to_bytes,
    write_store,
    zero_store,
)
from helpers import random_store, synth_corpus


def layout_size(n_entries, dim, names):
    header = 8 + 4 + 4 + 8 + 2 + sum(2 + len(n.encode()) for n in names)
    return header + n_entries * (2 + 4 + 4 + 2 + 4 * dim) + 4


def test_empty_store_bytes():
    data = store_to_bytes({}, 4, [])
    assert len(data) == layout_size(0, 4, [])
    st = store_from_bytes(data)
    assert st.dim == 4 and len(st) == 0


def test_single_entry_size():
    entries = {("D", 0, 0): (1, np.array([1.0, -1.0], dtype=np.float32))}
    data = store_to_bytes(entries, 2, ["D"])
    assert len(data) == layout_size(1, 2, ["D"])


def test_non_finite_rejected():
    entries = {("D", 0, 0): (1, np.array([np.nan, 0.0], dtype=np.float32))}
    with pytest.raises(NonFiniteValue):
        store_to_bytes(entries, 2, ["D"])


def test_dim_mismatch_rejected():
    entries = {("D", 0, 0): (1, np.zeros(3, dtype=np.float32))}
    with pytest.raises(DimMismatch):
        store_to_bytes(entries, 2, ["D"])


def test_round_trip_file(tmp_path):
    corpus = synth_corpus(3, 4, seed=5)
    store = random_store(corpus, 6, seed=5)
    path = tmp_path / "s.emb"
    write_store(store.entries, store.dim, store.dataset_names, path)
    again = read_store(path)
    assert again.dim == store.dim
    assert again.dataset_names == store.dataset_names
    assert again.entries.keys() == store.entries.keys()
    for key, (count, vec) in store.entries.items():
        count2, vec2 = again.entries[key]
        assert count2 == count
        assert vec2.tobytes() == vec.tobytes()


def test_canonical_bytes(tmp_path):
    corpus = synth_corpus(3, 4, seed=6)
    store = random_store(corpus, 6, seed=6)
    a = store_to_bytes(store.entries, store.dim, store.dataset_names)
    shuffled = dict(reversed(list(store.entries.items())))
    b = store_to_bytes(shuffled, store.dim, store.dataset_names)
    assert a == b


def test_bad_magic():
    data = store_to_bytes({}, 2, [])
    with pytest.raises(BadMagic):
        store_from_bytes(b"WRONGMAG" + data[8:])


def test_unsupported_version():
    data = bytearray(store_to_bytes({}, 2, []))
    struct.pack_into("<I", data, 8, 99)
    body = bytes(data[:-4])
    data = body + struct.pack("<I", zlib.crc32(body))
    with pytest.raises(UnsupportedVersion):
        store_from_bytes(data)


def test_truncated_record():
    entries = {("D", 0, 0): (1, np.zeros(4, dtype=np.float32))}
    data = store_to_bytes(entries, 4, ["D"])
    body = data[:-12]  # drop part of the record and the checksum
    cut = body + struct.pack("<I", zlib.crc32(body))
    with pytest.raises(TruncatedFile):
        store_from_bytes(cut)


def test_checksum_mismatch():
    data = bytearray(store_to_bytes({}, 2, []))
    data[-1] ^= 0xFF
    with pytest.raises(ChecksumMismatch):
        store_from_bytes(bytes(data))


def test_lookup_present_absent():
    corpus = synth_corpus(1, 3, seed=7)
    store = random_store(corpus, 4, seed=7)
    key = corpus.records[0].key
    count, vec = lookup(store, key)
    assert count >= 1 and vec.shape == (4,)
    with pytest.raises(MissingEmbedding):
        lookup(store, ("NOPE", 9, 9))


def test_zero_store_lookups():
    corpus = synth_corpus(2, 3, seed=8)
    store = zero_store(corpus, 8)
    for r in corpus.records:
        count, vec = lookup(store, r.key)
        assert count == 1
        assert not vec.any()


def test_zero_store_empty_corpus():
    store = zero_store(Corpus((), "train"), 4)
    assert len(store) == 0


def test_zero_store_bad_dim():
    with pytest.raises(DimMismatch):
        zero_store(Corpus((), "train"), 0)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 6),
    st.lists(
        st.tuples(st.integers(0, 2), st.integers(0, 3), st.integers(0, 3), st.integers(1, 9)),
        unique_by=lambda t: t[:3],
        max_size=12,
    ),
    st.randoms(use_true_random=False),
)
def test_round_trip_property(dim, keys, rnd):
    names = ["alpha", "beta", "gamma"]
    rng = np.random.default_rng(rnd.randrange(2**32))
    entries = {
        (names[d], sid, wid): (count, rng.standard_normal(dim).astype(np.float32))
        for d, sid, wid, count in keys
    }
    data = store_to_bytes(entries, dim, names)
    again = store_from_bytes(data)
    assert again.entries.keys() == entries.keys()
    for key, (count, vec) in entries.items():
        count2, vec2 = again.entries[key]
        assert (count2, vec2.tobytes()) == (count, vec.tobytes())
    # serializing the parsed store is the identity on bytes
    assert store_to_bytes(again.entries, again.dim, again.dataset_names) == data
