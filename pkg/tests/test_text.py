import json

import pytest
from hypothesis import given, strategies as st

from multireward.text import (RESERVED, CorpusError, Vocabulary, build_vocab, load_corpus,
                              sentences_from_tokens, split_sentences, tokenize)


@pytest.mark.parametrize("text, expected", [
    ("The cat sat.", ["the", "cat", "sat", "."]),
    ("", []),
    ("a  b", ["a", "b"]),
    ("Hi!Yes;no: ok,", ["hi", "!", "yes", ";", "no", ":", "ok", ","]),
])
def test_tokenize(text, expected):
    assert tokenize(text) == expected


@pytest.mark.parametrize("text, expected", [
    ("A b. C d!", [["a", "b", "."], ["c", "d", "!"]]),
    ("no terminator", [["no", "terminator"]]),
    ("", []),
    ("x? y", [["x", "?"], ["y"]]),
])
def test_split_sentences(text, expected):
    assert split_sentences(text) == expected


texts = st.text(alphabet="ab .,!?;:\n\tXY", max_size=40)


@given(texts)
def test_tokenize_idempotent(text):
    toks = tokenize(text)
    assert tokenize(" ".join(toks)) == toks
    assert all(t and not any(c.isspace() for c in t) for t in toks)


@given(texts)
def test_split_preserves_tokens(text):
    sents = split_sentences(text)
    assert [t for s in sents for t in s] == tokenize(text)
    assert all(sents)


def test_sentences_from_tokens_matches_split():
    text = "a b . c ! d"
    assert sentences_from_tokens(tokenize(text)) == split_sentences(text)


def _write(tmp_path, lines):
    path = tmp_path / "c.jsonl"
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def test_load_corpus(tmp_path):
    path = _write(tmp_path, [json.dumps({"id": "1", "document": "A b.", "summary": "A."})])
    (pair,) = load_corpus(path)
    assert pair.id == "1"
    assert pair.document == [["a", "b", "."]]
    assert pair.summary == [["a", "."]]


def test_load_corpus_empty(tmp_path):
    assert load_corpus(_write(tmp_path, [])) == []


def test_load_corpus_missing_field(tmp_path):
    path = _write(tmp_path, [json.dumps({"id": "1", "document": "A b."})])
    with pytest.raises(CorpusError, match="line 1: missing field summary"):
        load_corpus(path)


def test_load_corpus_malformed_line(tmp_path):
    path = _write(tmp_path, [json.dumps({"id": "1", "document": "a", "summary": "b"}), "{oops"])
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(path)


def test_load_corpus_duplicate_id(tmp_path):
    rec = json.dumps({"id": "1", "document": "a", "summary": "b"})
    with pytest.raises(CorpusError, match="duplicate id 1"):
        load_corpus(_write(tmp_path, [rec, rec]))


def test_build_vocab_keeps_all_when_room():
    vocab = build_vocab(["a a b"], 6)
    assert vocab.tokens == list(RESERVED) + ["a", "b"]


def test_build_vocab_frequency_rule():
    assert build_vocab(["a a b"], 5).tokens[4:] == ["a"]


def test_build_vocab_lexicographic_tie_break():
    assert build_vocab(["c b"], 5).tokens[4:] == ["b"]


def test_build_vocab_rejects_tiny():
    with pytest.raises(ValueError):
        build_vocab(["a"], 4)


def test_vocabulary_reserved_and_unk():
    vocab = build_vocab(["x y"], 10)
    assert [vocab.index[t] for t in RESERVED] == [0, 1, 2, 3]
    assert vocab.encode(["x", "zzz"]) == [vocab.index["x"], vocab.unk_id]
    with pytest.raises(ValueError):
        Vocabulary(["a", "b"])


def test_build_vocab_deterministic():
    corpus = ["d c b a a c", "b b e"]
    assert build_vocab(corpus, 7).tokens == build_vocab(list(corpus), 7).tokens
