import numpy as np
import pytest

from gazefusion.ablation import (
    SWEEP_MASKS,
    AblationMask,
    ablation_sweep,
    apply_mask,
)
from gazefusion.evaluation import evaluate_sliced
from gazefusion.features import FeatureVector
from gazefusion.models import init_fusion, param_checksum, predict
from helpers import random_store, synth_corpus


def test_apply_mask_identity():
    fv = FeatureVector(2, 6, 0.5)
    assert apply_mask(fv, AblationMask()) == (2.0, 6.0, 0.5)


def test_apply_mask_all():
    fv = FeatureVector(2, 6, 0.5)
    assert apply_mask(fv, AblationMask(True, True, True)) == (0.0, 0.0, 0.0)


def test_apply_mask_rel_only():
    fv = FeatureVector(2, 6, 0.5)
    assert apply_mask(fv, AblationMask(zero_rel_len=True)) == (2.0, 6.0, 0.0)
    # the FeatureVector itself is untouched
    assert fv.rel_len == 0.5


def test_mask_render_parse():
    mask = AblationMask(True, False, True)
    assert mask.render() == "-tok_len,rel_len"
    assert AblationMask.parse("tok_len,rel_len") == mask
    assert AblationMask.parse("-word_char_len") == AblationMask(zero_word_char_len=True)
    assert AblationMask().render() == "none"
    with pytest.raises(ValueError):
        AblationMask.parse("bogus")


def test_sweep_order_matches_table():
    rendered = [m.render() for m in SWEEP_MASKS]
    assert rendered == [
        "-tok_len",
        "-word_char_len",
        "-rel_len",
        "-tok_len,word_char_len",
        "-tok_len,rel_len",
        "-word_char_len,rel_len",
        "-tok_len,word_char_len,rel_len",
    ]


def fixture(seed=31):
    corpus = synth_corpus(4, 5, split="dev", seed=seed)
    store = random_store(corpus, 4, seed=seed)
    model = init_fusion(4, 6, 0.0, np.random.default_rng(seed))
    return model, corpus, store


def test_sweep_has_seven_rows():
    model, corpus, store = fixture()
    rows = ablation_sweep(model, corpus, store)
    assert len(rows) == 7
    assert [m for m, _ in rows] == list(SWEEP_MASKS)


def test_sweep_equals_direct_predict_bitwise():
    model, corpus, store = fixture(seed=33)
    rows = ablation_sweep(model, corpus, store)
    for mask, report in rows:
        direct = predict(model, corpus, store, mask=mask)
        assert evaluate_sliced(direct, corpus)[0].per_target == report.per_target


def test_sweep_does_not_mutate_model():
    model, corpus, store = fixture(seed=35)
    before = param_checksum(model)
    ablation_sweep(model, corpus, store)
    assert param_checksum(model) == before


def test_unused_features_make_sweep_flat():
    model, corpus, store = fixture(seed=37)
    model.W_h[model.dim :, :] = 0.0
    base = evaluate_sliced(predict(model, corpus, store), corpus)[0]
    for _, report in ablation_sweep(model, corpus, store):
        assert report.per_target == base.per_target
