"""Sequence-level rewards for policy-gradient training.

A reward maps a batch of (reference summary, decoded token stream) pairs
to floats. Decoded streams are split into sentences after every
terminator token before scoring.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .entailment import entail_reward
from .metrics import SaliencyWeights, rouge_l, rouge_sal
from .saliency import eta_weights, eta_weights_many
from .text import EOS, sentences_from_tokens

REWARD_NAMES = ("rouge", "rougesal", "entail")


def candidate_sentences(tokens: Sequence[str]) -> list[list[str]]:
    tokens = list(tokens)
    if tokens and tokens[-1] == EOS:
        tokens = tokens[:-1]
    return sentences_from_tokens(tokens)


class Reward:
    name = "base"

    def score(self, reference, candidate) -> float:
        raise NotImplementedError

    def __call__(self, references, candidates) -> np.ndarray:
        return np.array([self.score(r, candidate_sentences(c))
                         for r, c in zip(references, candidates)], dtype=np.float64)

    def __repr__(self):
        return f"{type(self).__name__}()"


class RougeReward(Reward):
    name = "rouge"

    def __init__(self, beta: float = 1.0):
        self.beta = beta

    def score(self, reference, candidate):
        return rouge_l(reference, candidate, self.beta).f


class RougeSalReward(Reward):
    """ROUGESal F with weights from a saliency predictor.

    Reference weights are cached per reference since references repeat
    across RL steps.
    """

    name = "rougesal"

    def __init__(self, predictor, beta: float = 1.0):
        self.predictor = predictor
        self.beta = beta
        self._ref_cache: dict[tuple, SaliencyWeights] = {}

    def _eta_ref(self, reference) -> SaliencyWeights:
        key = tuple(tuple(s) for s in reference)
        if key not in self._ref_cache:
            self._ref_cache[key] = eta_weights(reference, self.predictor)
        return self._ref_cache[key]

    def score(self, reference, candidate, eta_cand=None):
        if not candidate:
            return 0.0
        if eta_cand is None:
            eta_cand = eta_weights(candidate, self.predictor)
        return rouge_sal(reference, candidate, self._eta_ref(reference), eta_cand, self.beta).f

    def __call__(self, references, candidates) -> np.ndarray:
        cands = [candidate_sentences(c) for c in candidates]
        nonempty = [c for c in cands if c]
        etas = iter(eta_weights_many(nonempty, self.predictor))
        return np.array([self.score(r, c, next(etas)) if c else 0.0
                         for r, c in zip(references, cands)], dtype=np.float64)


class EntailReward(Reward):
    name = "entail"

    def __init__(self, scorer, capped: bool = True):
        self.scorer = scorer
        self.capped = capped

    def score(self, reference, candidate):
        return entail_reward(self.scorer, reference, candidate, capped=self.capped)


def make_reward(name: str, saliency=None, entail_scorer=None, beta: float = 1.0,
                entail_capped: bool = True) -> Reward:
    if name == "rouge":
        return RougeReward(beta)
    if name == "rougesal":
        if saliency is None:
            raise ValueError("the rougesal reward needs a saliency predictor")
        return RougeSalReward(saliency, beta)
    if name == "entail":
        if entail_scorer is None:
            raise ValueError("the entail reward needs an entailment scorer")
        return EntailReward(entail_scorer, entail_capped)
    raise ValueError(f"unknown reward {name!r}; expected one of {', '.join(REWARD_NAMES)}")
