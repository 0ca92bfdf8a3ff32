import numpy as np
import pytest
import torch
from hypothesis import given, strategies as st
from sklearn.base import clone

from multireward import synth
from multireward.entailment import (LABELS, EntailmentClassifier, LexicalEntailment, NliExample,
                                    entail_prob, entail_reward, generate_nli, load_nli, save_nli,
                                    train_entailment)

STUB = LexicalEntailment()


class Constant:
    def __init__(self, p):
        self.p = p

    def entail_probs(self, premise, hyps):
        return [self.p] * len(hyps)


def test_stub_probabilities():
    assert entail_prob(STUB, ["a", "b", "c"], ["a", "b"]) == 1.0
    assert entail_prob(STUB, ["a", "b", "c"], ["x", "y"]) == 0.0
    assert entail_prob(STUB, ["a", "b", "c"], ["a", "x"]) == 0.5
    with pytest.raises(ValueError, match="empty hypothesis"):
        entail_prob(STUB, ["a"], [])


def test_reward_examples():
    gt = [["a", "b", "."], ["c", "d", "."]]
    assert entail_reward(Constant(1.0), gt, gt) == 1.0
    gen10 = [["x"] * 10]
    gt20 = [["y"] * 20]
    assert entail_reward(Constant(0.8), gt20, gen10) == pytest.approx(0.4)
    assert entail_reward(STUB, gt, []) == 0.0


def test_reward_cap_and_uncapped_mode():
    gt = [["a", "b"]]
    long_gen = [["a", "b", "a", "b"]]
    assert entail_reward(STUB, gt, long_gen) == 1.0
    assert entail_reward(STUB, gt, long_gen, capped=False) == 2.0


def test_subsequence_sentences_score_raw_one():
    gt = [["a", "b", "c", "."], ["d", "e", "."]]
    gen = [["a", "c"], ["b", "d", "e", "."]]
    ratio = 6 / 7
    assert entail_reward(STUB, gt, gen) == pytest.approx(ratio)


toks = st.lists(st.sampled_from("abcxyz"), min_size=1, max_size=6)


@given(st.lists(toks, min_size=1, max_size=3), st.lists(toks, max_size=3))
def test_reward_in_unit_interval(gt, gen):
    assert 0.0 <= entail_reward(STUB, gt, gen) <= 1.0


@given(st.floats(0.0, 1.0), st.integers(1, 19))
def test_reward_monotone_in_length_ratio(raw, n):
    gt = [["g"] * 20]
    lo = entail_reward(Constant(raw), gt, [["h"] * n])
    hi = entail_reward(Constant(raw), gt, [["h"] * (n + 1)])
    assert hi >= lo


def test_repeated_sentences_only_change_length():
    gt = [["a", "b", "c", "d", "e", "f", "g", "h"]]
    one = [["a", "x"]]
    three = one * 3
    raw = 0.5
    assert entail_reward(STUB, gt, one) == pytest.approx(raw * 2 / 8)
    assert entail_reward(STUB, gt, three) == pytest.approx(raw * 6 / 8)


def test_generator_rules():
    data = generate_nli(60, 4, synth.VOCAB)
    assert {ex.label for ex in data} == set(LABELS)
    for ex in data:
        if ex.label == "entailment":
            assert STUB.entail_prob(ex.premise, ex.hypothesis) == 1.0
        elif ex.label == "neutral":
            assert STUB.entail_prob(ex.premise, ex.hypothesis) == 0.0
        else:
            assert "not" in ex.hypothesis
    assert generate_nli(60, 4, synth.VOCAB) == data


def test_nli_jsonl_roundtrip(tmp_path):
    data = generate_nli(9, 1, synth.VOCAB)
    save_nli(tmp_path / "n.jsonl", data)
    assert load_nli(tmp_path / "n.jsonl") == data


def test_classifier_requires_all_classes():
    data = [NliExample(["a"], ["a"], "entailment"), NliExample(["a"], ["b"], "neutral")]
    with pytest.raises(ValueError, match="contradiction"):
        train_entailment(data)
    with pytest.raises(ValueError):
        NliExample(["a"], ["b"], "maybe")


def test_zero_epochs_probabilities_open_interval():
    data = generate_nli(12, 0, synth.VOCAB)
    clf = train_entailment(data, epochs=0, seed=1)
    proba = clf.predict_proba([(ex.premise, ex.hypothesis) for ex in data])
    assert np.all((proba > 0) & (proba < 1))
    np.testing.assert_allclose(proba.sum(1), 1.0, atol=1e-12)


def test_same_seed_same_classifier():
    data = generate_nli(30, 0, synth.VOCAB)
    a = train_entailment(data, epochs=2, seed=3)
    b = clone(a).fit(data)
    for p, q in zip(a.model_.parameters(), b.model_.parameters()):
        assert torch.equal(p, q)
    x = (data[0].premise, data[0].hypothesis)
    assert a.entail_prob(*x) == b.entail_prob(*x)


def test_classifier_sklearn_surface():
    data = generate_nli(30, 0, synth.VOCAB)
    X = [(ex.premise, ex.hypothesis) for ex in data]
    y = [ex.label for ex in data]
    clf = EntailmentClassifier(epochs=1, hidden_dim=4).fit(X, y)
    assert set(clf.predict(X)) <= set(LABELS)
    assert 0.0 <= clf.score(X, y) <= 1.0
    assert 0.0 <= entail_reward(clf, [data[0].premise], [data[0].hypothesis]) <= 1.0
