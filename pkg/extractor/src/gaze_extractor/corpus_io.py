"""Minimal reader for the canonical token-level corpus CSV.

Only the structure needed for extraction is checked here; full validation is
the training harness's job.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

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


@dataclass(frozen=True)
class Token:
    dataset: str
    language: str
    sentence_id: int
    word_id: int
    word: str

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.dataset, self.sentence_id, self.word_id)


@dataclass(frozen=True)
class Sentence:
    dataset: str
    sentence_id: int
    tokens: tuple[Token, ...]

    @property
    def words(self) -> list[str]:
        return [t.word for t in self.tokens]


def read_sentences(path: str | Path) -> list[Sentence]:
    """Sentences in order of first appearance, tokens ordered by word_id."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise ValueError(f"{path}: bad header {header!r}")
        groups: dict[tuple[str, int], list[Token]] = {}
        for fields in reader:
            if len(fields) != len(HEADER):
                raise ValueError(f"{path} line {reader.line_num}: bad field count")
            dataset, language, sid, wid, word = fields[:5]
            token = Token(dataset, language, int(sid), int(wid), word)
            groups.setdefault((dataset, token.sentence_id), []).append(token)
    return [
        Sentence(ds, sid, tuple(sorted(tokens, key=lambda t: t.word_id)))
        for (ds, sid), tokens in groups.items()
    ]
