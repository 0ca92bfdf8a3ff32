"""Token saliency prediction.

A bidirectional GRU tagger scores every token of a sentence with the
probability of being salient. Those probabilities become the type-level
weights used by ROUGESal and the keyword sets used in saliency analysis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .metrics import SaliencyWeights
from .nnutil import DTYPE, pad_ids, seeded
from .text import Vocabulary, build_vocab, load_jsonl, tokenize, write_jsonl
from .validation import check_probability, check_sentences, check_tokens

DEFAULT_THRESHOLD = 0.2


@dataclass
class SpanExample:
    sentence: list[str]
    salient_spans: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        spans = sorted((int(a), int(b)) for a, b in self.salient_spans)
        last = 0
        for a, b in spans:
            if not 0 <= a < b <= len(self.sentence):
                raise ValueError(f"span [{a}, {b}) outside sentence of length {len(self.sentence)}")
            if a < last:
                raise ValueError("salient spans overlap")
            last = b
        self.salient_spans = spans

    def labels(self) -> list[int]:
        out = [0] * len(self.sentence)
        for a, b in self.salient_spans:
            out[a:b] = [1] * (b - a)
        return out


def load_spans(path) -> list[SpanExample]:
    return [SpanExample(tokenize(r["sentence"]), [tuple(s) for s in r["salient_spans"]])
            for r in load_jsonl(path, ("sentence", "salient_spans"))]


def save_spans(path, examples: Sequence[SpanExample]) -> None:
    write_jsonl(path, ({"sentence": " ".join(ex.sentence),
                        "salient_spans": [list(s) for s in ex.salient_spans]} for ex in examples))


class BiGRUTagger(nn.Module):
    """Embedding -> bidirectional GRU -> per-token 2-way softmax."""

    def __init__(self, vocab_size: int, emb_dim: int, hidden_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, emb_dim, padding_idx=0)
        self.rnn = nn.GRU(emb_dim, hidden_dim, batch_first=True, bidirectional=True)
        self.out = nn.Linear(2 * hidden_dim, 2)
        self.to(DTYPE)

    def forward(self, ids: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """Log-probabilities of shape (batch, time, 2)."""
        packed = pack_padded_sequence(self.embedding(ids), lengths, batch_first=True,
                                      enforce_sorted=False)
        states, _ = pad_packed_sequence(self.rnn(packed)[0], batch_first=True,
                                        total_length=ids.shape[1])
        return torch.log_softmax(self.out(states), dim=-1)


def tagger_loss(model: BiGRUTagger, ids, lengths, labels) -> torch.Tensor:
    """Mean per-token cross-entropy over non-padding positions."""
    logp = model(ids, lengths)
    mask = torch.arange(ids.shape[1])[None, :] < lengths[:, None]
    nll = -logp.gather(-1, labels.unsqueeze(-1)).squeeze(-1)
    return (nll * mask).sum() / mask.sum()


def _as_examples(X, y=None) -> list[SpanExample]:
    if y is None:
        if not all(isinstance(x, SpanExample) for x in X):
            raise TypeError("pass SpanExample objects or (sentences, labels)")
        return list(X)
    X, y = list(X), list(y)
    if len(X) != len(y):
        raise ValueError(f"{len(X)} sentences but {len(y)} label sequences")
    out = []
    for sent, lab in zip(X, y):
        sent = check_tokens(sent, "sentence", allow_empty=False)
        if len(lab) != len(sent):
            raise ValueError("label sequence length differs from sentence length")
        spans = [(i, i + 1) for i, v in enumerate(lab) if int(v)]
        out.append(SpanExample(sent, spans))
    return out


class SaliencyTagger(BaseEstimator):
    """Per-token salient/non-salient classifier.

    ``fit`` accepts either a list of :class:`SpanExample` or token sequences
    with aligned 0/1 labels. ``predict_proba`` returns one array of
    salient-class probabilities per sentence.
    """

    def __init__(self, emb_dim=16, hidden_dim=32, epochs=20, lr=5e-3, batch_size=32,
                 vocab_size=200, seed=0):
        self.emb_dim = emb_dim
        self.hidden_dim = hidden_dim
        self.epochs = epochs
        self.lr = lr
        self.batch_size = batch_size
        self.vocab_size = vocab_size
        self.seed = seed

    def _init_model(self, vocab: Vocabulary) -> BiGRUTagger:
        with seeded(self.seed):
            return BiGRUTagger(len(vocab), self.emb_dim, self.hidden_dim)

    def _tensors(self, examples: Sequence[SpanExample]):
        ids, lengths = pad_ids([self.vocab_.encode(ex.sentence) for ex in examples])
        labels, _ = pad_ids([ex.labels() for ex in examples])
        return ids, lengths, labels

    def fit(self, X, y=None):
        examples = _as_examples(X, y)
        if not examples:
            raise ValueError("cannot train the saliency tagger on empty data")
        self.vocab_ = build_vocab([ex.sentence for ex in examples], self.vocab_size)
        self.model_ = self._init_model(self.vocab_)
        opt = torch.optim.Adam(self.model_.parameters(), lr=self.lr)
        gen = torch.Generator().manual_seed(self.seed)
        full = self._tensors(examples)
        self.loss_curve_ = [self._loss(full)]
        for _ in range(self.epochs):
            order = torch.randperm(len(examples), generator=gen).tolist()
            for start in range(0, len(order), self.batch_size):
                batch = [examples[i] for i in order[start:start + self.batch_size]]
                opt.zero_grad()
                tagger_loss(self.model_, *self._tensors(batch)).backward()
                opt.step()
            self.loss_curve_.append(self._loss(full))
        return self

    def _loss(self, tensors) -> float:
        with torch.no_grad():
            return float(tagger_loss(self.model_, *tensors))

    def predict_proba(self, X) -> list[np.ndarray]:
        check_is_fitted(self, ["model_", "vocab_"])
        sents = [check_tokens(s, "sentence", allow_empty=False) for s in X]
        if not sents:
            return []
        ids, lengths = pad_ids([self.vocab_.encode(s) for s in sents])
        with torch.no_grad():
            probs = self.model_(ids, lengths)[..., 1].exp().numpy()
        return [np.clip(probs[i, : len(s)], 0.0, 1.0) for i, s in enumerate(sents)]

    def predict(self, X, threshold: float = 0.5) -> list[np.ndarray]:
        return [(p >= threshold).astype(int) for p in self.predict_proba(X)]

    def score(self, X, y=None) -> float:
        """Per-token accuracy at threshold 0.5."""
        examples = _as_examples(X, y)
        preds = self.predict([ex.sentence for ex in examples])
        hits = sum(int((p == np.asarray(ex.labels())).sum()) for p, ex in zip(preds, examples))
        return hits / sum(len(ex.sentence) for ex in examples)


class LexiconSaliency(BaseEstimator):
    """Deterministic stand-in: probability 1 for lexicon tokens, 0 otherwise."""

    def __init__(self, lexicon=()):
        self.lexicon = lexicon

    def fit(self, X=None, y=None):
        return self

    def predict_proba(self, X) -> list[np.ndarray]:
        lex = set(self.lexicon)
        return [np.array([1.0 if t in lex else 0.0 for t in check_tokens(s, "sentence")])
                for s in X]


def train_saliency(data: Sequence[SpanExample], **params) -> SaliencyTagger:
    return SaliencyTagger(**params).fit(data)


def predict_saliency(predictor, sentence) -> list[float]:
    sentence = check_tokens(sentence, "sentence", allow_empty=False)
    return [float(p) for p in predictor.predict_proba([sentence])[0]]


def eta_weights(summary, predictor) -> SaliencyWeights:
    """Average predicted probability per token type over the whole summary."""
    return eta_weights_many([summary], predictor)[0]


def eta_weights_many(summaries, predictor) -> list[SaliencyWeights]:
    """:func:`eta_weights` for several summaries with a single predictor call."""
    summaries = [check_sentences(s, "summary", allow_empty=False) for s in summaries]
    flat_sents = [sent for summ in summaries for sent in summ]
    probs = iter(predictor.predict_proba(flat_sents)) if flat_sents else iter(())
    out = []
    for summ in summaries:
        sums: dict[str, float] = {}
        counts: dict[str, int] = {}
        for sent in summ:
            for tok, p in zip(sent, next(probs)):
                sums[tok] = sums.get(tok, 0.0) + float(p)
                counts[tok] = counts.get(tok, 0) + 1
        out.append(SaliencyWeights({t: min(1.0, max(0.0, sums[t] / counts[t])) for t in sums}))
    return out


def extract_keywords(summary, predictor, threshold: float = DEFAULT_THRESHOLD) -> set[str]:
    check_probability(threshold, "threshold")
    eta = eta_weights(summary, predictor)
    return {tok for tok, w in eta.weights.items() if w >= threshold}


def saliency_match_pct(gt_summary, model_summary, predictor,
                       threshold: float = DEFAULT_THRESHOLD) -> float:
    """Share of ground-truth keywords that the model summary also contains, in percent."""
    keywords = extract_keywords(gt_summary, predictor, threshold)
    if not keywords:
        raise ValueError("no salient tokens")
    produced = {t for s in check_sentences(model_summary, "model_summary") for t in s}
    return 100.0 * len(keywords & produced) / len(keywords)
