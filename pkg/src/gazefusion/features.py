"""The three engineered per-token features.

tok_len        subword piece count, as recorded by the embedding extractor
word_char_len  UTF-8 byte count of the raw word
rel_len        length ratio current/previous within a sentence (1.0 at start)

Features are fed to models raw, never standardized: the ablation protocol
replaces them with zeros at inference, so zero has to mean "feature absent".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .corpus import TokenRecord
from .errors import EmptyWord
from .store import EmbeddingStore, lookup


@dataclass(frozen=True)
class FeatureVector:
    tok_len: int
    word_char_len: int
    rel_len: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (float(self.tok_len), float(self.word_char_len), self.rel_len)


def word_char_len(word: str) -> int:
    """Number of bytes in the UTF-8 encoding of the word."""
    if not word.strip():
        raise EmptyWord(f"word {word!r} is empty")
    return len(word.encode("utf-8"))


def rel_len(current: TokenRecord, previous: Optional[TokenRecord]) -> float:
    """Length ratio to the preceding word; 1.0 for sentence-initial tokens."""
    if previous is None:
        return 1.0
    return word_char_len(current.word) / word_char_len(previous.word)


def tok_len(store: EmbeddingStore, key: tuple[str, int, int]) -> int:
    """Subword piece count recorded by the extractor for this token."""
    count, _ = lookup(store, key)
    return count


def featurize_sentence(
    group: list[TokenRecord], store: EmbeddingStore
) -> list[FeatureVector]:
    """One FeatureVector per token; rel_len chains left-to-right only within
    this sentence."""
    out: list[FeatureVector] = []
    previous: Optional[TokenRecord] = None
    for record in group:
        out.append(
            FeatureVector(
                tok_len=tok_len(store, record.key),
                word_char_len=word_char_len(record.word),
                rel_len=rel_len(record, previous),
            )
        )
        previous = record
    return out
