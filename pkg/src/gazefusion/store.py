"""Binary embedding store: token identity -> contextual vector + subword count.

Decouples encoder inference from training. Layout, little-endian throughout:

    magic    8 bytes ASCII ``GAZEEMB1``
    version  u32 (= 1)
    dim      u32
    count    u64
    dataset table: u16 n, then n length-prefixed (u16) UTF-8 names
    records x count: dataset_index u16, sentence_id u32, word_id u32,
                     tok_len u16, vector dim x f32
    trailer  CRC-32 of everything preceding, u32

Records are sorted by (dataset_index, sentence_id, word_id), which together
with the checksum makes files canonical and diffable.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import (
    BadMagic,
    ChecksumMismatch,
    DimMismatch,
    IoFailure,
    MissingEmbedding,
    NonFiniteValue,
    TruncatedFile,
    UnknownDataset,
    UnsupportedVersion,
)

MAGIC = b"GAZEEMB1"
VERSION = 1

# key: (dataset name, sentence_id, word_id); value: (tok_len, f32 vector)
Entry = tuple[int, np.ndarray]
Key = tuple[str, int, int]


@dataclass
class EmbeddingStore:
    dim: int
    dataset_names: tuple[str, ...]
    entries: dict[Key, Entry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)


def lookup(store: EmbeddingStore, key: Key) -> Entry:
    try:
        return store.entries[key]
    except KeyError:
        raise MissingEmbedding(f"no embedding for {key!r}")


def _validate_entries(entries: dict[Key, Entry], dim: int, dataset_names) -> None:
    index = {name: i for i, name in enumerate(dataset_names)}
    for (dataset, sid, wid), (count, vec) in entries.items():
        if dataset not in index:
            raise UnknownDataset(f"dataset {dataset!r} missing from name table")
        if count < 1:
            raise NonFiniteValue(f"tok_len {count} < 1 for {(dataset, sid, wid)!r}")
        if vec.shape != (dim,):
            raise DimMismatch(
                f"vector for {(dataset, sid, wid)!r} has shape {vec.shape}, want ({dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise NonFiniteValue(f"non-finite component in vector for {(dataset, sid, wid)!r}")


def store_to_bytes(
    entries: dict[Key, Entry], dim: int, dataset_names: list[str] | tuple[str, ...]
) -> bytes:
    """Serialize to the canonical byte layout (sorted records + CRC trailer)."""
    _validate_entries(entries, dim, dataset_names)
    index = {name: i for i, name in enumerate(dataset_names)}
    parts = [MAGIC, struct.pack("<IIQ", VERSION, dim, len(entries))]
    parts.append(struct.pack("<H", len(dataset_names)))
    for name in dataset_names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
    keys = sorted(entries, key=lambda k: (index[k[0]], k[1], k[2]))
    for dataset, sid, wid in keys:
        count, vec = entries[(dataset, sid, wid)]
        parts.append(struct.pack("<HIIH", index[dataset], sid, wid, count))
        parts.append(np.ascontiguousarray(vec, dtype="<f4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def store_from_bytes(data: bytes) -> EmbeddingStore:
    """Parse the byte layout back into a store; bit-identical vectors."""
    if len(data) < len(MAGIC):
        raise TruncatedFile("shorter than magic")
    if data[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"bad magic {data[:len(MAGIC)]!r}")
    if len(data) < len(MAGIC) + 16 + 4:
        raise TruncatedFile("missing header")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise ChecksumMismatch("CRC-32 trailer does not match file contents")

    off = len(MAGIC)
    version, dim, count = struct.unpack_from("<IIQ", body, off)
    off += 16
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}, expected {VERSION}")

    def take(n: int) -> int:
        nonlocal off
        if off + n > len(body):
            raise TruncatedFile(f"need {n} bytes at offset {off}, have {len(body) - off}")
        off += n
        return off - n

    (n_names,) = struct.unpack_from("<H", body, take(2))
    names: list[str] = []
    for _ in range(n_names):
        (length,) = struct.unpack_from("<H", body, take(2))
        names.append(body[take(length) : off].decode("utf-8"))

    entries: dict[Key, Entry] = {}
    record_fixed = struct.calcsize("<HIIH")
    for _ in range(count):
        ds_idx, sid, wid, tok_count = struct.unpack_from("<HIIH", body, take(record_fixed))
        if ds_idx >= len(names):
            raise TruncatedFile(f"dataset index {ds_idx} out of range")
        vec = np.frombuffer(body, dtype="<f4", count=dim, offset=take(4 * dim)).copy()
        entries[(names[ds_idx], sid, wid)] = (tok_count, vec)
    if off != len(body):
        raise TruncatedFile(f"{len(body) - off} trailing bytes before checksum")
    return EmbeddingStore(dim=dim, dataset_names=tuple(names), entries=entries)


def write_store(
    entries: dict[Key, Entry],
    dim: int,
    dataset_names: list[str] | tuple[str, ...],
    path: str | Path,
) -> None:
    data = store_to_bytes(entries, dim, dataset_names)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(str(exc))


def read_store(path: str | Path) -> EmbeddingStore:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc))
    return store_from_bytes(data)


def zero_store(corpus: Corpus, dim: int) -> EmbeddingStore:
    """In-memory all-zeros store covering every corpus token (tok_len 1).

    Lets the full pipeline run without any encoder.
    """
    if dim < 1:
        raise DimMismatch(f"dim {dim} < 1")
    names: list[str] = []
    entries: dict[Key, Entry] = {}
    zero = np.zeros(dim, dtype=np.float32)
    for r in corpus.records:
        if r.dataset not in names:
            names.append(r.dataset)
        entries[r.key] = (1, zero.copy())
    return EmbeddingStore(dim=dim, dataset_names=tuple(names), entries=entries)
