"""Input validation helpers shared by the metrics and estimators."""
from __future__ import annotations

import math

from .text import split_sentences


def check_beta(beta: float) -> None:
    if not (isinstance(beta, (int, float)) and math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be a positive real, got {beta!r}")


def check_sentences(x, name: str = "input", allow_empty: bool = True) -> list[list[str]]:
    """Coerce ``x`` to a list of non-empty token lists.

    Accepts raw text, a flat token sequence (one sentence) or a sentence list.
    """
    if isinstance(x, str):
        out = split_sentences(x)
    else:
        x = list(x)
        if x and all(isinstance(t, str) for t in x):
            out = [list(x)]
        else:
            out = []
            for sent in x:
                if isinstance(sent, str):
                    raise TypeError(f"{name}: mixed tokens and sentences")
                sent = list(sent)
                if sent:
                    out.append(sent)
    for sent in out:
        for tok in sent:
            if not isinstance(tok, str) or not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"{name}: invalid token {tok!r}")
    if not out and not allow_empty:
        raise ValueError(f"{name} must be non-empty")
    return out


def check_tokens(x, name: str = "input", allow_empty: bool = True) -> list[str]:
    if isinstance(x, str):
        raise TypeError(f"{name}: expected a token sequence, got a string")
    x = list(x)
    if x and not isinstance(x[0], str):
        x = [t for s in x for t in s]
    if not x and not allow_empty:
        raise ValueError(f"{name} must be non-empty")
    return x


def check_probability(p: float, name: str = "probability") -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return float(p)

