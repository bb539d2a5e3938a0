"""Run a pretrained encoder over corpus sentences and export first-subtoken
embeddings plus subword counts.

Sentence context: the words of a sentence are passed pre-split to the
tokenizer (joined per encoder convention), aligned back to words via the
fast tokenizer's word map. For each word the vector of its FIRST subword
piece at the chosen hidden layer is exported. Words the tokenizer maps to
zero pieces are substituted by the unknown-token piece and flagged in the
sidecar report, as are sentences that overflow the encoder length and get
truncated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus_io import Sentence, read_sentences
from .storefile import write_store_file


class EncoderLoadFailure(Exception):
    pass


class TokenAlignmentFailure(Exception):
    pass


class WidthMismatch(Exception):
    pass


@dataclass
class ExtractorConfig:
    encoder_name: str
    layer: str = "last"  # "last" or a hidden-state index as str/int
    batch_sentences: int = 8
    device: str = "cpu"


def _layer_index(layer, n_states: int) -> int:
    if layer in ("last", None):
        return n_states - 1
    idx = int(layer)
    if not (-n_states <= idx < n_states):
        raise WidthMismatch(f"layer {idx} out of range for {n_states} hidden states")
    return idx


def _dataset_names(sentences: list[Sentence]) -> list[str]:
    names: list[str] = []
    for s in sentences:
        if s.dataset not in names:
            names.append(s.dataset)
    return names


def extract(corpus_csv: str | Path, config: ExtractorConfig, out_path: str | Path) -> dict:
    """Extract embeddings for every corpus token and write the store file.

    Returns the sidecar report (also written to ``<out>.report.json``).
    """
    import torch

    try:
        from transformers import AutoModel, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(config.encoder_name, use_fast=True)
        model = AutoModel.from_pretrained(config.encoder_name)
    except Exception as exc:
        raise EncoderLoadFailure(f"cannot load encoder {config.encoder_name!r}: {exc}")
    model.to(config.device)
    model.eval()

    sentences = read_sentences(corpus_csv)
    report = {"zero_piece_words": [], "truncated_sentences": []}
    entries: dict[tuple[str, int, int], tuple[int, np.ndarray]] = {}
    dim = None

    with torch.no_grad():
        for start in range(0, len(sentences), config.batch_sentences):
            batch = sentences[start : start + config.batch_sentences]
            batch_words = []
            for sentence in batch:
                words = []
                for token in sentence.tokens:
                    word = token.word
                    if not tokenizer.tokenize(word):
                        report["zero_piece_words"].append(
                            {"key": list(token.key), "word": word}
                        )
                        word = tokenizer.unk_token
                    words.append(word)
                batch_words.append(words)
            enc = tokenizer(
                batch_words,
                is_split_into_words=True,
                padding=True,
                truncation=True,
                return_tensors="pt",
            ).to(config.device)
            out = model(**enc, output_hidden_states=True)
            hidden = out.hidden_states[_layer_index(config.layer, len(out.hidden_states))]
            if dim is None:
                dim = hidden.shape[-1]
            elif hidden.shape[-1] != dim:
                raise WidthMismatch(f"width changed from {dim} to {hidden.shape[-1]}")
            for i, sentence in enumerate(batch):
                word_map = enc.word_ids(i)
                pieces: dict[int, list[int]] = {}
                for position, word_index in enumerate(word_map):
                    if word_index is not None:
                        pieces.setdefault(word_index, []).append(position)
                truncated = False
                for w, token in enumerate(sentence.tokens):
                    positions = pieces.get(w)
                    if positions:
                        first = positions[0]
                        count = len(positions)
                    else:
                        # word fell past the encoder length limit
                        truncated = True
                        count = max(1, len(tokenizer.tokenize(batch_words[i][w])))
                        last_real = max(
                            p for p, wi in enumerate(word_map) if wi is not None
                        )
                        first = last_real
                    vec = hidden[i, first].cpu().numpy().astype(np.float32)
                    entries[token.key] = (count, vec)
                if truncated:
                    report["truncated_sentences"].append(
                        {"dataset": sentence.dataset, "sentence_id": sentence.sentence_id}
                    )

    if dim is None:
        raise TokenAlignmentFailure("corpus contains no sentences")
    write_store_file(entries, int(dim), _dataset_names(sentences), out_path)
    Path(str(out_path) + ".report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return report


def extract_zero(corpus_csv: str | Path, dim: int, out_path: str | Path) -> None:
    """Zero-vector store (tok_len 1) so the pipeline can run without any
    encoder; useful as a CI fixture."""
    sentences = read_sentences(corpus_csv)
    zero = np.zeros(dim, dtype=np.float32)
    entries = {
        token.key: (1, zero.copy())
        for sentence in sentences
        for token in sentence.tokens
    }
    write_store_file(entries, dim, _dataset_names(sentences), out_path)
