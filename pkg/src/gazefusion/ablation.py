"""Zero-replacement feature ablation at inference time.

Masks are applied only during inference, never training; the sweep covers
every non-empty subset of the three features in table order (singletons,
then pairs, then the triple), reusing one set of trained weights.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus
from .evaluation import EvalReport, evaluate_sliced
from .features import FeatureVector
from .models import FusionModel, predict
from .store import EmbeddingStore

FEATURE_NAMES = ("tok_len", "word_char_len", "rel_len")


@dataclass(frozen=True)
class AblationMask:
    zero_tok_len: bool = False
    zero_word_char_len: bool = False
    zero_rel_len: bool = False

    @property
    def flags(self) -> tuple[bool, bool, bool]:
        return (self.zero_tok_len, self.zero_word_char_len, self.zero_rel_len)

    def render(self) -> str:
        names = [n for n, f in zip(FEATURE_NAMES, self.flags) if f]
        return "-" + ",".join(names) if names else "none"

    @classmethod
    def parse(cls, text: str) -> "AblationMask":
        names = [n for n in text.lstrip("-").split(",") if n]
        unknown = set(names) - set(FEATURE_NAMES)
        if unknown:
            raise ValueError(f"unknown feature name(s) {sorted(unknown)}")
        return cls(*(n in names for n in FEATURE_NAMES))


# paper-table row order: singletons, pairs, triple
SWEEP_MASKS = (
    AblationMask(True, False, False),
    AblationMask(False, True, False),
    AblationMask(False, False, True),
    AblationMask(True, True, False),
    AblationMask(True, False, True),
    AblationMask(False, True, True),
    AblationMask(True, True, True),
)


def apply_mask(features: FeatureVector, mask: AblationMask) -> tuple[float, float, float]:
    """Masked 3-real model input; the FeatureVector itself is untouched."""
    return tuple(
        0.0 if flag else value for value, flag in zip(features.as_tuple(), mask.flags)
    )


def ablation_sweep(
    model: FusionModel, eval_corpus: Corpus, store: EmbeddingStore
) -> list[tuple[AblationMask, EvalReport]]:
    """One inference-only evaluation per non-empty feature subset (7 rows)."""
    out = []
    for mask in SWEEP_MASKS:
        preds = predict(model, eval_corpus, store, mask=mask)
        out.append((mask, evaluate_sliced(preds, eval_corpus)[0]))
    return out
