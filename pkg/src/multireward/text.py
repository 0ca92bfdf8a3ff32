"""Tokenization, sentence splitting, vocabularies and corpus ingestion."""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

PUNCT = ".,!?;:"
TERMINATORS = ".!?"

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<s>", "</s>"
RESERVED = (PAD, UNK, BOS, EOS)

_PUNCT_RE = re.compile("([" + re.escape(PUNCT) + "])")
_SENT_RE = re.compile("[^" + re.escape(TERMINATORS) + "]*(?:[" + re.escape(TERMINATORS) + "]|$)")

TokenSeq = list  # list[str]
SentenceList = list  # list[list[str]]


class CorpusError(ValueError):
    """Raised for malformed corpus files."""


def tokenize(text: str) -> list[str]:
    """Lowercase, isolate ``.,!?;:`` and split on whitespace."""
    return _PUNCT_RE.sub(r" \1 ", text.lower()).split()


def split_sentences(text: str) -> list[list[str]]:
    sentences = []
    for chunk in _SENT_RE.findall(text):
        toks = tokenize(chunk)
        if toks:
            sentences.append(toks)
    return sentences


def sentences_from_tokens(tokens: Sequence[str]) -> list[list[str]]:
    """Rebuild sentences from a flat token stream, breaking after terminators."""
    sentences, cur = [], []
    for tok in tokens:
        cur.append(tok)
        if tok in TERMINATORS:
            sentences.append(cur)
            cur = []
    if cur:
        sentences.append(cur)
    return sentences


def flatten(sentences: Iterable[Sequence[str]]) -> list[str]:
    return [tok for sent in sentences for tok in sent]


def detokenize(sentences: Iterable[Sequence[str]]) -> str:
    return " ".join(" ".join(s) for s in sentences)


@dataclass
class DocumentSummaryPair:
    id: str
    document: list[list[str]]
    summary: list[list[str]]

    def __post_init__(self):
        if not self.document or not self.summary:
            raise ValueError(f"pair {self.id}: document and summary must be non-empty")


def load_jsonl(path, required: Sequence[str] = ()) -> list[dict]:
    """Read a JSONL file; errors name the 1-based line and any missing field."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"line {lineno}: expected a JSON object")
            for name in required:
                if name not in obj:
                    raise CorpusError(f"line {lineno}: missing field {name}")
            records.append(obj)
    return records


def load_corpus(path) -> list[DocumentSummaryPair]:
    pairs, seen = [], set()
    for lineno, obj in enumerate(load_jsonl(path, ("id", "document", "summary")), 1):
        pid = str(obj["id"])
        if pid in seen:
            raise CorpusError(f"line {lineno}: duplicate id {pid}")
        seen.add(pid)
        doc, summ = split_sentences(obj["document"]), split_sentences(obj["summary"])
        if not doc or not summ:
            raise CorpusError(f"line {lineno}: empty document or summary")
        pairs.append(DocumentSummaryPair(pid, doc, summ))
    return pairs


def write_jsonl(path, records: Iterable[dict]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@dataclass
class Vocabulary:
    """Token/index mapping with ``<pad>``, ``<unk>``, ``<s>``, ``</s>`` at 0..3."""

    tokens: list[str] = field(default_factory=lambda: list(RESERVED))

    def __post_init__(self):
        if tuple(self.tokens[:4]) != RESERVED:
            raise ValueError("reserved entries must occupy indices 0..3")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate vocabulary entries")
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    pad_id, unk_id, bos_id, eos_id = 0, 1, 2, 3

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, tok):
        return tok in self.index

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.index.get(t, self.unk_id) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()[:16]


def _iter_tokens(item) -> Iterable[str]:
    if isinstance(item, str):
        return tokenize(item)
    if isinstance(item, DocumentSummaryPair):
        return flatten(item.document) + flatten(item.summary)
    if item and isinstance(item[0], str):
        return item
    return flatten(item)


def build_vocab(corpus, max_size: int = 200) -> Vocabulary:
    """Keep the ``max_size - 4`` most frequent tokens; ties go to the lexicographically smaller."""
    if max_size < 5:
        raise ValueError("max_size must be >= 5")
    counts = Counter()
    for item in corpus:
        counts.update(t for t in _iter_tokens(item) if t not in RESERVED)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(list(RESERVED) + [tok for tok, _ in ranked[: max_size - len(RESERVED)]])
