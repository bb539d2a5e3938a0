"""Token-level eye-tracking corpora in the canonical CSV format.

Canonical schema (UTF-8, comma-delimited, RFC-4180 quoting), header exactly:

    dataset,language,sentence_id,word_id,word,FFDAvg,FFDStd,TRTAvg,TRTStd

The four target cells must be all-present or all-absent per row; absent is
only legal on the test split. Word text is kept verbatim (features depend on
the raw surface form).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import (
    DuplicateKey,
    MalformedRow,
    MissingTargets,
    NonContiguousWordIds,
    TargetOutOfRange,
)

HEADER = [
    "dataset",
    "language",
    "sentence_id",
    "word_id",
    "word",
    "FFDAvg",
    "FFDStd",
    "TRTAvg",
    "TRTStd",
]

SPLITS = ("train", "dev", "test")

TARGET_NAMES = ("FFDAvg", "FFDStd", "TRTAvg", "TRTStd")


@dataclass(frozen=True)
class TargetVector:
    """The four regression targets, scaled units in [0, 100]."""

    ffd_avg: float
    ffd_std: float
    trt_avg: float
    trt_std: float

    def __post_init__(self):
        for name, value in zip(TARGET_NAMES, self.as_tuple()):
            if not (0.0 <= value <= 100.0):
                raise TargetOutOfRange(f"{name}={value!r} outside [0, 100]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ffd_avg, self.ffd_std, self.trt_avg, self.trt_std)


@dataclass(frozen=True)
class TokenRecord:
    """One word of one sentence, with dataset/language identity."""

    dataset: str
    language: str
    sentence_id: int
    word_id: int
    word: str
    targets: Optional[TargetVector] = None

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.dataset, self.sentence_id, self.word_id)


@dataclass(frozen=True)
class Corpus:
    records: tuple[TokenRecord, ...]
    split_tag: str

    def __len__(self) -> int:
        return len(self.records)


def _parse_row(fields: list[str], line: int, split_tag: str) -> TokenRecord:
    if len(fields) != len(HEADER):
        raise MalformedRow(line, f"expected {len(HEADER)} fields, got {len(fields)}")
    dataset, language, sid_s, wid_s, word = fields[:5]
    target_cells = fields[5:]
    if not dataset:
        raise MalformedRow(line, "empty dataset")
    try:
        sentence_id = int(sid_s)
        word_id = int(wid_s)
    except ValueError:
        raise MalformedRow(line, f"non-integer sentence_id/word_id: {sid_s!r}/{wid_s!r}")
    if sentence_id < 0 or word_id < 0:
        raise MalformedRow(line, "negative sentence_id or word_id")
    if not word.strip():
        raise MalformedRow(line, "empty word")

    present = [c != "" for c in target_cells]
    if any(present) and not all(present):
        raise MalformedRow(line, "target cells must be all-present or all-absent")
    targets: Optional[TargetVector] = None
    if all(present):
        try:
            values = [float(c) for c in target_cells]
        except ValueError:
            raise MalformedRow(line, f"non-numeric target cell in {target_cells!r}")
        targets = TargetVector(*values)
    elif split_tag in ("train", "dev"):
        raise MissingTargets(f"line {line}: {split_tag} split requires targets")
    return TokenRecord(dataset, language, sentence_id, word_id, word, targets)


def parse_corpus(path: str | Path, split_tag: str) -> Corpus:
    """Parse and validate a corpus file; record order is preserved."""
    if split_tag not in SPLITS:
        raise ValueError(f"unknown split tag {split_tag!r}")
    records: list[TokenRecord] = []
    seen: set[tuple[str, int, int]] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "missing header row")
        if header != HEADER:
            raise MalformedRow(1, f"bad header {header!r}")
        for fields in reader:
            record = _parse_row(fields, reader.line_num, split_tag)
            if record.key in seen:
                raise DuplicateKey(f"duplicate (dataset, sentence_id, word_id) {record.key!r}")
            seen.add(record.key)
            records.append(record)

    _check_contiguity(records)
    return Corpus(records=tuple(records), split_tag=split_tag)


def _check_contiguity(records: Iterable[TokenRecord]) -> None:
    by_sentence: dict[tuple[str, int], list[int]] = {}
    for r in records:
        by_sentence.setdefault((r.dataset, r.sentence_id), []).append(r.word_id)
    for group, word_ids in by_sentence.items():
        if sorted(word_ids) != list(range(len(word_ids))):
            raise NonContiguousWordIds(
                f"sentence {group!r} has word_ids {sorted(word_ids)}"
            )


def _format_float(x: float) -> str:
    # repr round-trips exactly, keeping parse -> write -> parse the identity
    return repr(x)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Serialize a corpus back to the canonical CSV format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for r in corpus.records:
            if r.targets is None:
                cells = ["", "", "", ""]
            else:
                cells = [_format_float(v) for v in r.targets.as_tuple()]
            writer.writerow(
                [r.dataset, r.language, str(r.sentence_id), str(r.word_id), r.word] + cells
            )


def group_sentences(corpus: Corpus) -> list[list[TokenRecord]]:
    """One group per (dataset, sentence_id), each ordered by word_id.

    Groups appear in order of first occurrence in the corpus.
    """
    groups: dict[tuple[str, int], list[TokenRecord]] = {}
    for r in corpus.records:
        groups.setdefault((r.dataset, r.sentence_id), []).append(r)
    return [sorted(g, key=lambda r: r.word_id) for g in groups.values()]
