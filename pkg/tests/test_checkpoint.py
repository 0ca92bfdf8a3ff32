import torch

from multireward import checkpoint, synth
from multireward.entailment import LexicalEntailment, train_entailment
from multireward.nnutil import dump_weights, parse_weights
from multireward.policy import beam_decode
from multireward.saliency import LexiconSaliency, SaliencyTagger

from .conftest import tiny_policy


def test_weight_dump_roundtrip_is_exact():
    pol = tiny_policy(3)
    text = dump_weights(pol)
    state = parse_weights(text)
    for name, tensor in pol.state_dict().items():
        assert torch.equal(state[name], tensor)
    assert dump_weights(pol) == text


def test_policy_roundtrip(tmp_path):
    pol = tiny_policy(1, tokens=("a", "b", "c", "."))
    checkpoint.save_policy(pol, tmp_path / "p", seed=1)
    back = checkpoint.load_policy(tmp_path / "p")
    assert back.dims() == pol.dims() and back.vocab.tokens == pol.vocab.tokens
    doc = [["a", "c", "b", "."]]
    assert beam_decode(back, doc, 6, 3) == beam_decode(pol, doc, 6, 3)
    checkpoint.save_policy(back, tmp_path / "q", seed=1)
    for f in ("weights.txt", "vocab.txt", "manifest.json"):
        assert (tmp_path / "p" / f).read_bytes() == (tmp_path / "q" / f).read_bytes()


def test_wrong_kind_and_tampered_vocab(tmp_path):
    pol = tiny_policy(0)
    checkpoint.save_policy(pol, tmp_path / "p")
    try:
        checkpoint.load_saliency(tmp_path / "p")
    except ValueError as exc:
        assert "saliency" in str(exc)
    else:
        raise AssertionError("expected a kind mismatch")
    vocab = tmp_path / "p" / "vocab.txt"
    vocab.write_text(vocab.read_text().replace("a\n", "z\n"))
    try:
        checkpoint.load_policy(tmp_path / "p")
    except ValueError as exc:
        assert "hash" in str(exc)
    else:
        raise AssertionError("expected a hash mismatch")


def test_saliency_roundtrip(tmp_path):
    spans = synth.make_spans(10, 2)
    tagger = SaliencyTagger(epochs=1, hidden_dim=4, emb_dim=3).fit(spans)
    checkpoint.save_saliency(tagger, tmp_path / "s")
    back = checkpoint.load_saliency(tmp_path / "s")
    assert back.get_params() == tagger.get_params()
    X = [ex.sentence for ex in spans[:5]]
    for a, b in zip(tagger.predict_proba(X), back.predict_proba(X)):
        assert (a == b).all()
    checkpoint.save_saliency(LexiconSaliency(("w001",)), tmp_path / "l")
    assert checkpoint.load_saliency(tmp_path / "l").lexicon == ("w001",)


def test_entailment_roundtrip(tmp_path):
    data = synth.make_nli(30, 2)
    clf = train_entailment(data, epochs=1, hidden_dim=4, emb_dim=3)
    checkpoint.save_entailment(clf, tmp_path / "e")
    back = checkpoint.load_entailment(tmp_path / "e")
    X = [(ex.premise, ex.hypothesis) for ex in data[:6]]
    assert (clf.predict_proba(X) == back.predict_proba(X)).all()
    checkpoint.save_entailment(LexicalEntailment(), tmp_path / "x")
    assert isinstance(checkpoint.load_entailment(tmp_path / "x"), LexicalEntailment)
