"""Entailment scoring and the length-normalized Entail reward."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence

from .nnutil import DTYPE, pad_ids, seeded
from .text import build_vocab, load_jsonl, tokenize, write_jsonl
from .validation import check_sentences, check_tokens

LABELS = ("entailment", "neutral", "contradiction")
NEGATION = "not"


@dataclass
class NliExample:
    premise: list[str]
    hypothesis: list[str]
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")


def load_nli(path) -> list[NliExample]:
    return [NliExample(tokenize(r["premise"]), tokenize(r["hypothesis"]), r["label"])
            for r in load_jsonl(path, ("premise", "hypothesis", "label"))]


def save_nli(path, examples: Sequence[NliExample]) -> None:
    write_jsonl(path, ({"premise": " ".join(ex.premise), "hypothesis": " ".join(ex.hypothesis),
                        "label": ex.label} for ex in examples))


def generate_nli(size: int, seed: int, vocabulary: Sequence[str],
                 premise_len=(6, 12)) -> list[NliExample]:
    """Rule-labelled pairs.

    entailment: an in-order subsequence of the premise;
    neutral: shuffled tokens that never occur in the premise;
    contradiction: an in-order subsequence with ``not`` inserted.
    """
    rng = random.Random(seed)
    vocabulary = [t for t in vocabulary if t != NEGATION]
    out = []
    for k in range(size):
        premise = rng.sample(vocabulary, rng.randint(*premise_len))
        label = LABELS[k % 3]
        hyp_len = rng.randint(2, min(5, len(premise) - 1))
        if label == "neutral":
            pool = [t for t in vocabulary if t not in premise]
            hyp = rng.sample(pool, hyp_len)
        else:
            keep = sorted(rng.sample(range(len(premise)), hyp_len))
            hyp = [premise[i] for i in keep]
            if label == "contradiction":
                hyp.insert(rng.randint(0, len(hyp)), NEGATION)
        out.append(NliExample(premise, hyp, label))
    rng.shuffle(out)
    return out


def _check_pair(premise, hypothesis):
    hypothesis = check_tokens(hypothesis, "hypothesis")
    if not hypothesis:
        raise ValueError("empty hypothesis")
    premise = check_tokens(premise, "premise", allow_empty=False)
    return premise, hypothesis


class LexicalEntailment:
    """Share of hypothesis tokens that also occur in the premise."""

    def entail_prob(self, premise, hypothesis) -> float:
        premise, hypothesis = _check_pair(premise, hypothesis)
        vocab = set(premise)
        return sum(t in vocab for t in hypothesis) / len(hypothesis)

    def entail_probs(self, premise, hypotheses) -> list[float]:
        return [self.entail_prob(premise, h) for h in hypotheses]

    def __repr__(self):
        return "LexicalEntailment()"


class PairEncoder(nn.Module):
    """Shared bidirectional GRU over premise and hypothesis; [u, v, u*v] -> 3-way softmax."""

    def __init__(self, vocab_size: int, emb_dim: int, hidden_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, emb_dim, padding_idx=0)
        self.rnn = nn.GRU(emb_dim, hidden_dim, batch_first=True, bidirectional=True)
        self.out = nn.Linear(6 * hidden_dim, len(LABELS))
        self.to(DTYPE)

    def encode(self, ids, lengths):
        packed = pack_padded_sequence(self.embedding(ids), lengths, batch_first=True,
                                      enforce_sorted=False)
        _, h = self.rnn(packed)
        return torch.cat([h[-2], h[-1]], dim=-1)

    def forward(self, prem, prem_len, hyp, hyp_len):
        u, v = self.encode(prem, prem_len), self.encode(hyp, hyp_len)
        return torch.log_softmax(self.out(torch.cat([u, v, u * v], dim=-1)), dim=-1)


class EntailmentClassifier(ClassifierMixin, BaseEstimator):
    """3-way NLI classifier; ``X`` is a list of (premise, hypothesis) token pairs."""

    def __init__(self, emb_dim=32, hidden_dim=64, epochs=30, lr=3e-3, batch_size=32,
                 vocab_size=200, seed=0):
        self.emb_dim = emb_dim
        self.hidden_dim = hidden_dim
        self.epochs = epochs
        self.lr = lr
        self.batch_size = batch_size
        self.vocab_size = vocab_size
        self.seed = seed

    def _tensors(self, pairs):
        prem, prem_len = pad_ids([self.vocab_.encode(p) for p, _ in pairs])
        hyp, hyp_len = pad_ids([self.vocab_.encode(h) for _, h in pairs])
        return prem, prem_len, hyp, hyp_len

    def fit(self, X, y=None):
        if y is None:
            examples = list(X)
            X = [(ex.premise, ex.hypothesis) for ex in examples]
            y = [ex.label for ex in examples]
        X, y = [_check_pair(p, h) for p, h in X], list(y)
        if not X:
            raise ValueError("cannot train the entailment classifier on empty data")
        missing = [lab for lab in LABELS if lab not in y]
        if missing:
            raise ValueError(f"training data lacks class(es): {', '.join(missing)}")
        self.classes_ = np.array(LABELS)
        self.vocab_ = build_vocab([t for pair in X for t in pair], self.vocab_size)
        with seeded(self.seed):
            self.model_ = PairEncoder(len(self.vocab_), self.emb_dim, self.hidden_dim)
        targets = torch.tensor([LABELS.index(lab) for lab in y])
        opt = torch.optim.Adam(self.model_.parameters(), lr=self.lr)
        gen = torch.Generator().manual_seed(self.seed)
        for _ in range(self.epochs):
            order = torch.randperm(len(X), generator=gen).tolist()
            for start in range(0, len(order), self.batch_size):
                idx = order[start:start + self.batch_size]
                opt.zero_grad()
                logp = self.model_(*self._tensors([X[i] for i in idx]))
                nn.functional.nll_loss(logp, targets[idx]).backward()
                opt.step()
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, ["model_", "vocab_"])
        X = [_check_pair(p, h) for p, h in X]
        if not X:
            return np.zeros((0, len(LABELS)))
        with torch.no_grad():
            return self.model_(*self._tensors(X)).exp().numpy()

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]

    def entail_prob(self, premise, hypothesis) -> float:
        return float(self.predict_proba([(premise, hypothesis)])[0, 0])

    def entail_probs(self, premise, hypotheses) -> list[float]:
        return [float(p) for p in self.predict_proba([(premise, h) for h in hypotheses])[:, 0]]


def train_entailment(data: Sequence[NliExample], **params) -> EntailmentClassifier:
    return EntailmentClassifier(**params).fit(data)


def entail_prob(scorer, premise, hypothesis) -> float:
    return scorer.entail_prob(premise, hypothesis)


def entail_reward(scorer, gt_summary, gen_summary, capped: bool = True) -> float:
    """Mean entailment of each generated sentence given the whole ground truth,
    scaled by the generated/reference token-length ratio (capped at 1 by default)."""
    gt = check_sentences(gt_summary, "gt_summary", allow_empty=False)
    gen = check_sentences(gen_summary, "gen_summary")
    if not gen:
        return 0.0
    premise = [t for s in gt for t in s]
    raw = float(np.mean(scorer.entail_probs(premise, gen)))
    ratio = sum(len(s) for s in gen) / len(premise)
    if capped:
        ratio = min(1.0, ratio)
    return raw * ratio
