"""Synthetic stand-ins for the summarization, span and NLI corpora.

Summarization documents mix filler tokens with a few tokens from a fixed
salient lexicon. The reference summary is those salient tokens in order,
with a sentence break after every fourth. A salient token may be preceded
by one of a couple of frequent function tokens (think "the"), which then
joins it in the reference: it counts for plain ROUGE but is not salient.
"""
from __future__ import annotations

import random

from .entailment import generate_nli
from .saliency import SpanExample
from .text import DocumentSummaryPair, sentences_from_tokens

VOCAB = [f"w{i:03d}" for i in range(150)]
LEXICON = VOCAB[:30]
FILLER = VOCAB[30:]
FUNCTION = FILLER[:2]
CONTEXT_PROB = 0.5


def _document(rng: random.Random, context_prob: float) -> tuple[list[list[str]], list[str]]:
    n_content = rng.randint(18, 52)
    salient = rng.sample(LEXICON, rng.randint(3, 8))
    positions = sorted(rng.sample(range(n_content), len(salient)))
    content = [rng.choice(FILLER) for _ in range(n_content)]
    for pos, tok in zip(positions, salient):
        content[pos] = tok
    phrases = []
    for pos, tok in zip(positions, salient):
        if pos > 0 and content[pos - 1] not in LEXICON and rng.random() < context_prob:
            content[pos - 1] = rng.choice(FUNCTION)
            phrases.append([content[pos - 1], tok])
        else:
            phrases.append([tok])
    sentences, start = [], 0
    while start < n_content:
        end = min(n_content, start + rng.randint(8, 12))
        sentences.append(content[start:end] + ["."])
        start = end
    return sentences, phrases


def _summary(phrases: list[list[str]], group: int = 4) -> list[list[str]]:
    return [[t for ph in phrases[i:i + group] for t in ph] + ["."]
            for i in range(0, len(phrases), group)]


def make_summ(size: int, seed: int,
              context_prob: float = CONTEXT_PROB) -> list[DocumentSummaryPair]:
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = random.Random(seed)
    pairs = []
    for i in range(size):
        doc, phrases = _document(rng, context_prob)
        pairs.append(DocumentSummaryPair(f"{seed}-{i}", doc, _summary(phrases)))
    return pairs


def make_spans(size: int, seed: int) -> list[SpanExample]:
    """Every document sentence of ``make_summ(size, seed)`` with its lexicon tokens marked."""
    lex = set(LEXICON)
    out = []
    for pair in make_summ(size, seed):
        for sent in pair.document:
            out.append(SpanExample(sent, _runs([t in lex for t in sent])))
    return out


def _runs(flags: list[bool]) -> list[tuple[int, int]]:
    spans, start = [], None
    for i, f in enumerate(flags + [False]):
        if f and start is None:
            start = i
        elif not f and start is not None:
            spans.append((start, i))
            start = None
    return spans


def make_nli(size: int, seed: int):
    if size < 1:
        raise ValueError("size must be >= 1")
    return generate_nli(size, seed, VOCAB)


def pair_to_json(pair: DocumentSummaryPair) -> dict:
    return {"id": pair.id,
            "document": " ".join(t for s in pair.document for t in s),
            "summary": " ".join(t for s in pair.summary for t in s)}


__all__ = ["VOCAB", "LEXICON", "FILLER", "FUNCTION", "make_summ", "make_spans", "make_nli",
           "pair_to_json", "sentences_from_tokens"]
