import pytest

VOCAB = [
    "[PAD]",
    "[UNK]",
    "[CLS]",
    "[SEP]",
    "[MASK]",
    "he",
    "##llo",
    "##re",
    "the",
    "cat",
    "sat",
    "on",
    "mat",
    "мир",
    "你",
    "a",
    "##b",
    "##c",
]


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """A small randomly initialized BERT saved locally, so extraction runs
    offline and deterministically."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    path = tmp_path_factory.mktemp("tiny-bert")
    (path / "vocab.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast.from_pretrained(str(path), do_lower_case=True)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(1234)
    model = BertModel(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return path


CORPUS_HEADER = "dataset,language,sentence_id,word_id,word,FFDAvg,FFDStd,TRTAvg,TRTStd"

# 5 sentences, 3 languages; "hello" and "abc" exercise multi-piece words
FIXTURE_SENTENCES = [
    ("BSC", "zh", ["你好", "你"]),
    ("RSC", "ru", ["мир", "мир", "мир"]),
    ("ZuCo1", "en", ["the", "cat", "sat", "on", "the", "mat"]),
    ("ZuCo1", "en", ["hello", "there"]),
    ("Provo", "en", ["abc", "cat"]),
]


def write_fixture_corpus(path, with_targets=True, sentences=FIXTURE_SENTENCES):
    lines = [CORPUS_HEADER]
    value = 5.0
    for sid, (dataset, language, words) in enumerate(sentences):
        for wid, word in enumerate(words):
            if with_targets:
                cells = [f"{value}", "2.0", f"{value + 1}", "3.0"]
                value = (value + 7.0) % 90.0
            else:
                cells = ["", "", "", ""]
            lines.append(
                ",".join([dataset, language, str(sid), str(wid), word] + cells)
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def fixture_corpus(tmp_path):
    return write_fixture_corpus(tmp_path / "corpus.csv")
