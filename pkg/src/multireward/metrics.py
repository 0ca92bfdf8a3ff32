"""ROUGE-family metrics: summary-level ROUGE-L, saliency-weighted ROUGE-L,
clipped ROUGE-N and novel n-gram percentages."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .validation import check_beta, check_sentences


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f: float

    @classmethod
    def from_pr(cls, precision: float, recall: float, beta: float = 1.0) -> "RougeScore":
        return cls(precision, recall, f_score(precision, recall, beta))

    def as_tuple(self):
        return (self.precision, self.recall, self.f)


ZERO = RougeScore(0.0, 0.0, 0.0)


def f_score(precision: float, recall: float, beta: float = 1.0) -> float:
    if precision <= 0.0 or recall <= 0.0:
        return 0.0
    b2 = beta * beta
    return (1.0 + b2) * recall * precision / (recall + b2 * precision)


class SaliencyWeights:
    """Type-level token weights in [0, 1]; unmapped tokens get ``default``.

    ``default`` falls back to the mean stored weight.
    """

    def __init__(self, weights: Mapping[str, float], default: float | None = None):
        self.weights = {str(k): float(v) for k, v in weights.items()}
        for tok, w in self.weights.items():
            if not 0.0 <= w <= 1.0 or w != w:
                raise ValueError(f"weight for {tok!r} outside [0, 1]: {w}")
        if default is None:
            default = float(np.mean(list(self.weights.values()))) if self.weights else 1.0
        if not 0.0 <= default <= 1.0:
            raise ValueError(f"default weight outside [0, 1]: {default}")
        self.default = float(default)

    def __getitem__(self, tok: str) -> float:
        return self.weights.get(tok, self.default)

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return f"SaliencyWeights({len(self.weights)} tokens, default={self.default:.4g})"

    def scaled(self, factor: float) -> "SaliencyWeights":
        """Multiply every weight by ``factor`` (range check skipped for factor > 1)."""
        out = SaliencyWeights.__new__(SaliencyWeights)
        out.weights = {k: v * factor for k, v in self.weights.items()}
        out.default = self.default * factor
        return out

    @classmethod
    def constant(cls, value: float) -> "SaliencyWeights":
        return cls({}, default=value)

    def to_json(self, id: str | None = None) -> dict:
        rec = {"weights": self.weights, "default": self.default}
        if id is not None:
            rec = {"id": id, **rec}
        return rec

    @classmethod
    def from_json(cls, obj: dict) -> "SaliencyWeights":
        return cls(obj["weights"], obj.get("default"))


def lcs_table(a: Sequence[str], b: Sequence[str]) -> np.ndarray:
    """Suffix table: ``T[i, j]`` is the LCS length of ``a[i:]`` and ``b[j:]``."""
    n, m = len(a), len(b)
    table = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        ai = a[i]
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = max(below[j], row[j + 1])
    return table


def lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    # two-row DP; the full table is only needed for alignments
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def lcs_alignment(r: Sequence[str], c: Sequence[str]) -> list[tuple[int, int]]:
    """One LCS alignment as (r-index, c-index) pairs.

    Among all optimal alignments this returns the one whose reference
    indices are lexicographically smallest.
    """
    if not r or not c:
        return []
    table = lcs_table(r, c)
    i = j = 0
    pairs = []
    while i < len(r) and j < len(c):
        if r[i] == c[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i, j + 1] == table[i, j]:
            j += 1
        else:
            i += 1
    return pairs


def union_lcs(r: Sequence[str], cands: Sequence[Sequence[str]]) -> set[int]:
    """Positions of ``r`` matched by the canonical LCS against any candidate sentence."""
    matched: set[int] = set()
    for c in cands:
        matched.update(i for i, _ in lcs_alignment(r, c))
    return matched


def _clipped_hits(ref: Sequence[Sequence[str]], cand: Sequence[Sequence[str]]) -> list[str]:
    # A candidate token may sit in the union LCS of several reference
    # sentences; each hit consumes one occurrence on both sides so the
    # numerator never exceeds either length.
    ref_left = Counter(t for s in ref for t in s)
    cand_left = Counter(t for s in cand for t in s)
    hits = []
    for r in ref:
        for pos in sorted(union_lcs(r, cand)):
            tok = r[pos]
            if ref_left[tok] > 0 and cand_left[tok] > 0:
                hits.append(tok)
                ref_left[tok] -= 1
                cand_left[tok] -= 1
    return hits


def rouge_l(ref, cand, beta: float = 1.0) -> RougeScore:
    """Summary-level ROUGE-L F over sentence lists."""
    check_beta(beta)
    ref = check_sentences(ref, "ref", allow_empty=False)
    cand = check_sentences(cand, "cand")
    n = sum(len(s) for s in cand)
    if n == 0:
        return ZERO
    m = sum(len(s) for s in ref)
    hits = len(_clipped_hits(ref, cand))
    return RougeScore.from_pr(hits / n, hits / m, beta)


def rouge_sal(ref, cand, eta_ref: SaliencyWeights, eta_cand: SaliencyWeights | None = None,
              beta: float = 1.0) -> RougeScore:
    """ROUGE-L where every token counts with its saliency weight.

    A matched token contributes ``min(eta_ref[w], eta_cand[w])``, which is
    just ``eta[w]`` when both sides share one weight mapping.
    """
    check_beta(beta)
    ref = check_sentences(ref, "ref", allow_empty=False)
    cand = check_sentences(cand, "cand")
    if eta_cand is None:
        eta_cand = eta_ref
    if not any(cand):
        return ZERO
    ref_mass = sum(eta_ref[t] for s in ref for t in s)
    if ref_mass <= 0.0:
        raise ValueError("degenerate reference weights")
    cand_mass = sum(eta_cand[t] for s in cand for t in s)
    num = sum(min(eta_ref[t], eta_cand[t]) for t in _clipped_hits(ref, cand))
    precision = num / cand_mass if cand_mass > 0.0 else 0.0
    return RougeScore.from_pr(precision, num / ref_mass, beta)


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def _ngram_counts(sentences, n: int) -> Counter:
    counts = Counter()
    for s in sentences:
        counts.update(ngrams(s, n))
    return counts


def rouge_n(ref, cand, n: int = 1, beta: float = 1.0) -> RougeScore:
    """Clipped n-gram overlap; n-grams never straddle sentence boundaries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    check_beta(beta)
    ref = check_sentences(ref, "ref")
    cand = check_sentences(cand, "cand")
    ref_counts, cand_counts = _ngram_counts(ref, n), _ngram_counts(cand, n)
    total_cand, total_ref = sum(cand_counts.values()), sum(ref_counts.values())
    if total_cand == 0 or total_ref == 0:
        return ZERO
    overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    return RougeScore.from_pr(overlap / total_cand, overlap / total_ref, beta)


def novel_ngram_pct(source, summary, n: int = 2) -> float:
    """Percentage of summary n-gram instances that never occur in the source."""
    if n < 1:
        raise ValueError("n must be >= 1")
    source = check_sentences(source, "source")
    summary = check_sentences(summary, "summary")
    seen = set(_ngram_counts(source, n))
    grams = [g for s in summary for g in ngrams(s, n)]
    if not grams:
        raise ValueError("summary too short for n")
    return 100.0 * sum(g not in seen for g in grams) / len(grams)
