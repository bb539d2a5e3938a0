"""Writer for the binary embedding-store interchange format.

Layout, little-endian: magic ``GAZEEMB1``, u32 version (1), u32 dim,
u64 count, dataset name table (u16 n, then u16-length-prefixed UTF-8 names),
then per record: dataset_index u16, sentence_id u32, word_id u32,
tok_len u16, dim x f32; trailing CRC-32 of everything preceding.

Records are sorted by (dataset_index, sentence_id, word_id) so two runs over
the same corpus produce byte-identical files.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"GAZEEMB1"
VERSION = 1


def serialize_store(
    entries: dict[tuple[str, int, int], tuple[int, np.ndarray]],
    dim: int,
    dataset_names: list[str],
) -> bytes:
    index = {name: i for i, name in enumerate(dataset_names)}
    parts = [MAGIC, struct.pack("<IIQ", VERSION, dim, len(entries))]
    parts.append(struct.pack("<H", len(dataset_names)))
    for name in dataset_names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
    for dataset, sid, wid in sorted(entries, key=lambda k: (index[k[0]], k[1], k[2])):
        count, vec = entries[(dataset, sid, wid)]
        if vec.shape != (dim,):
            raise ValueError(f"vector for {(dataset, sid, wid)} has shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"non-finite vector for {(dataset, sid, wid)}")
        parts.append(struct.pack("<HIIH", index[dataset], sid, wid, count))
        parts.append(np.ascontiguousarray(vec, dtype="<f4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def write_store_file(
    entries: dict[tuple[str, int, int], tuple[int, np.ndarray]],
    dim: int,
    dataset_names: list[str],
    path: str | Path,
) -> None:
    Path(path).write_bytes(serialize_store(entries, dim, dataset_names))
