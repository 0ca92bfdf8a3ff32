"""Checkpoint directories: flat-text weight dump, vocabulary and a JSON manifest."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .entailment import LABELS, EntailmentClassifier, LexicalEntailment, PairEncoder
from .nnutil import dump_weights, parse_weights
from .policy import Seq2SeqPolicy
from .saliency import BiGRUTagger, LexiconSaliency, SaliencyTagger
from .text import Vocabulary

WEIGHTS, VOCAB, MANIFEST = "weights.txt", "vocab.txt", "manifest.json"


def _write(out_dir, kind: str, module, vocab: Vocabulary, **meta) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / WEIGHTS).write_text(dump_weights(module), encoding="utf-8")
    (out / VOCAB).write_text("\n".join(vocab.tokens) + "\n", encoding="utf-8")
    manifest = {"kind": kind, "vocab_hash": vocab.digest(), **meta}
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                encoding="utf-8")
    return out


def _read(path, kind: str):
    path = Path(path)
    manifest = json.loads((path / MANIFEST).read_text(encoding="utf-8"))
    if manifest.get("kind") != kind:
        raise ValueError(f"{path}: expected a {kind} checkpoint, found {manifest.get('kind')!r}")
    vocab = Vocabulary((path / VOCAB).read_text(encoding="utf-8").split("\n")[:-1])
    if vocab.digest() != manifest["vocab_hash"]:
        raise ValueError(f"{path}: vocabulary does not match manifest hash")
    return manifest, vocab, parse_weights((path / WEIGHTS).read_text(encoding="utf-8"))


def save_policy(policy: Seq2SeqPolicy, out_dir, seed: int | None = None) -> Path:
    return _write(out_dir, "policy", policy, policy.vocab, seed=seed, **policy.dims())


def load_policy(path) -> Seq2SeqPolicy:
    manifest, vocab, state = _read(path, "policy")
    policy = Seq2SeqPolicy(vocab, manifest["emb_dim"], manifest["hidden_dim"],
                           manifest["max_enc_len"])
    policy.load_state_dict(state)
    return policy


def save_saliency(tagger, out_dir) -> Path:
    if isinstance(tagger, LexiconSaliency):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / MANIFEST).write_text(json.dumps({"kind": "lexicon",
                                                "lexicon": sorted(tagger.lexicon)}) + "\n")
        return out
    return _write(out_dir, "saliency", tagger.model_, tagger.vocab_, **tagger.get_params())


def load_saliency(path):
    manifest = json.loads((Path(path) / MANIFEST).read_text(encoding="utf-8"))
    if manifest.get("kind") == "lexicon":
        return LexiconSaliency(tuple(manifest["lexicon"]))
    manifest, vocab, state = _read(path, "saliency")
    params = {k: manifest[k] for k in SaliencyTagger().get_params() if k in manifest}
    tagger = SaliencyTagger(**params)
    tagger.vocab_ = vocab
    tagger.model_ = BiGRUTagger(len(vocab), tagger.emb_dim, tagger.hidden_dim)
    tagger.model_.load_state_dict(state)
    return tagger


def save_entailment(scorer, out_dir) -> Path:
    if isinstance(scorer, LexicalEntailment):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / MANIFEST).write_text(json.dumps({"kind": "lexical"}) + "\n")
        return out
    return _write(out_dir, "entailment", scorer.model_, scorer.vocab_, **scorer.get_params())


def load_entailment(path):
    manifest = json.loads((Path(path) / MANIFEST).read_text(encoding="utf-8"))
    if manifest.get("kind") == "lexical":
        return LexicalEntailment()
    manifest, vocab, state = _read(path, "entailment")
    params = {k: manifest[k] for k in EntailmentClassifier().get_params() if k in manifest}
    clf = EntailmentClassifier(**params)
    clf.vocab_ = vocab
    clf.classes_ = np.array(LABELS)
    clf.model_ = PairEncoder(len(vocab), clf.emb_dim, clf.hidden_dim)
    clf.model_.load_state_dict(state)
    return clf
