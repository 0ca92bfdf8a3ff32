"""Self-critical policy-gradient training with alternating multi-reward batches."""
from __future__ import annotations

import copy
import csv
import io
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np
import torch
from sklearn.base import BaseEstimator

from .entailment import entail_reward
from .metrics import novel_ngram_pct, rouge_l, rouge_n, rouge_sal
from .nnutil import make_generator
from .policy import (Seq2SeqPolicy, _grads, batch_logprob, beam_decode, decode_batch,
                     greedy_decode, sample_decode, xe_loss)
from .rewards import REWARD_NAMES, Reward, candidate_sentences, make_reward
from .saliency import DEFAULT_THRESHOLD, eta_weights, saliency_match_pct
from .text import EOS, DocumentSummaryPair, build_vocab, flatten
from .validation import check_sentences

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


def parse_reward_spec(value) -> tuple[str, ...]:
    """``"rougesal+entail"`` / ``"rouge,entail"`` / sequences -> validated tuple."""
    if isinstance(value, str):
        parts = [p.strip() for p in value.replace("+", ",").split(",") if p.strip()]
    else:
        parts = list(value)
    if not 1 <= len(parts) <= 2:
        raise ConfigError(f"reward list must name 1 or 2 rewards, got {len(parts)}")
    for p in parts:
        if p not in REWARD_NAMES:
            raise ConfigError(f"unknown reward {p!r}")
    return tuple(parts)


@dataclass
class TrainConfig:
    gamma: float = 0.99
    lr_xe: float = 1e-3
    lr_rl: float = 1e-4
    clip_norm: float = 2.0
    batch_size: int = 32
    xe_epochs: int = 10
    rl_steps: int = 200
    rl_subset_size: int = 5000
    beam: int = 4
    seed: int = 0
    reward: tuple = ("rouge",)
    hidden: int = 32
    emb: int = 16
    vocab_size: int = 200
    max_dec_len: int = 20
    max_enc_len: int = 60
    entail_capped: bool = True

    def __post_init__(self):
        self.reward = parse_reward_spec(self.reward)
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")
        for name in ("batch_size", "beam", "hidden", "emb", "max_dec_len", "max_enc_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("xe_epochs", "rl_steps", "rl_subset_size"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.vocab_size < 5:
            raise ConfigError("vocab_size must be >= 5")

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        """Parse flat ``key = value`` lines; ``#`` starts a comment."""
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"unknown config key: {key}")
            try:
                values[key] = _coerce(types[key], value)
            except ValueError:
                raise ConfigError(f"config key {key}: bad value {value!r}") from None
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def to_text(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            if isinstance(v, (tuple, list)):
                v = ",".join(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), **changes})


def _coerce(typ, value: str):
    if typ in ("float", float):
        return float(value)
    if typ in ("int", int):
        return int(value)
    if typ in ("bool", bool):
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise ValueError(value)
    if typ in ("tuple", tuple):
        return parse_reward_spec(value)
    return value


@dataclass
class StepRecord:
    step: int
    phase: str
    active_reward: str
    xe_loss: float
    rl_loss: float | None = None
    sample_reward: float | None = None
    baseline_reward: float | None = None
    grad_norm: float = 0.0


CSV_HEADER = ("step", "phase", "active_reward", "xe_loss", "rl_loss", "sample_reward",
              "baseline_reward")


@dataclass
class TrainReport:
    records: list[StepRecord] = field(default_factory=list)
    final_scores: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.records:
            writer.writerow([r.step, r.phase, r.active_reward] + [
                "" if v is None else f"{v:.6f}"
                for v in (r.xe_loss, r.rl_loss, r.sample_reward, r.baseline_reward)])
        return buf.getvalue()

    def phase(self, name: str) -> list[StepRecord]:
        return [r for r in self.records if r.phase == name]


def _documents(pairs):
    return [p.document for p in pairs]


def scst_grad(policy: Seq2SeqPolicy, pair: DocumentSummaryPair, reward_fn: Reward, seed: int,
              max_len: int = 20) -> tuple[float, dict[str, torch.Tensor]]:
    """Single-sample policy gradient with the greedy decode as baseline.

    Returns the loss ``-(r(sample) - r(greedy)) * log p(sample)`` and its
    gradient w.r.t. every parameter.
    """
    sample = sample_decode(policy, pair.document, max_len, seed)
    greedy = greedy_decode(policy, pair.document, max_len)
    r_s, r_a = reward_fn([pair.summary] * 2, [sample.tokens, greedy.tokens])
    advantage = float(r_s - r_a)
    loss = -advantage * batch_logprob(policy, [pair.document], [sample.tokens])[0]
    return loss.item(), _grads(policy, loss)


def mixed_step(policy: Seq2SeqPolicy, batch: Sequence[DocumentSummaryPair], reward_fn: Reward,
               gamma: float, optimizer: torch.optim.Optimizer, clip_norm: float = 2.0,
               generator: torch.Generator | None = None, max_len: int = 20) -> StepRecord:
    """One update on ``gamma * L_RL + (1 - gamma) * L_XE`` after norm clipping."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    docs, refs = _documents(batch), [p.summary for p in batch]
    B = len(docs)
    rollouts = decode_batch(policy, docs + docs, max_len, sample=[True] * B + [False] * B,
                            generator=generator)
    samples, greedy = rollouts[:B], rollouts[B:]
    r_s = reward_fn(refs, [s.tokens for s in samples])
    r_a = reward_fn(refs, [g.tokens for g in greedy])
    optimizer.zero_grad()
    rl_value = xe_value = None
    if gamma == 0.0:
        loss = xe_loss(policy, docs, refs)
        xe_value = loss.item()
    elif gamma == 1.0:
        lp = batch_logprob(policy, docs, [s.tokens for s in samples])
        loss = -(torch.as_tensor(r_s - r_a) * lp).mean()
        rl_value = loss.item()
    else:
        # one teacher-forced pass scores the samples (RL term) and the references (XE term)
        gold = [flatten(r) + [EOS] for r in refs]
        lp = batch_logprob(policy, docs + docs, [s.tokens for s in samples] + gold)
        rl = -(torch.as_tensor(r_s - r_a) * lp[:B]).mean()
        xe = -lp[B:].mean()
        loss = gamma * rl + (1.0 - gamma) * xe
        rl_value, xe_value = rl.item(), xe.item()
    loss.backward()
    norm = float(torch.nn.utils.clip_grad_norm_(policy.parameters(), clip_norm))
    optimizer.step()
    return StepRecord(0, "rl", reward_fn.name, xe_value, rl_value, float(r_s.mean()),
                      float(r_a.mean()), min(norm, clip_norm))


def xe_step(policy, batch, optimizer, clip_norm: float = 2.0) -> StepRecord:
    optimizer.zero_grad()
    loss = xe_loss(policy, _documents(batch), [p.summary for p in batch])
    loss.backward()
    norm = float(torch.nn.utils.clip_grad_norm_(policy.parameters(), clip_norm))
    optimizer.step()
    return StepRecord(0, "xe", "", loss.item(), grad_norm=min(norm, clip_norm))


def _batches(n: int, batch_size: int, generator: torch.Generator):
    """Endless stream of shuffled index batches, reshuffled every pass."""
    while True:
        order = torch.randperm(n, generator=generator).tolist()
        for start in range(0, n, batch_size):
            yield order[start:start + batch_size]


def train(corpus: Sequence[DocumentSummaryPair], config: TrainConfig, saliency=None,
          entail_scorer=None, init_policy: Seq2SeqPolicy | None = None,
          rewards: dict[str, Reward] | None = None) -> tuple[Seq2SeqPolicy, TrainReport]:
    """Cross-entropy pretraining followed by mixed XE+RL training.

    With two rewards, RL mini-batch ``t`` optimizes ``config.reward[t % 2]``.
    ``init_policy`` (copied, never mutated) skips fresh initialization.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must be non-empty")
    if init_policy is None:
        vocab = build_vocab(corpus, config.vocab_size)
        policy = Seq2SeqPolicy.create(vocab, config.seed, emb_dim=config.emb,
                                      hidden_dim=config.hidden, max_enc_len=config.max_enc_len)
    else:
        policy = copy.deepcopy(init_policy)
    gen = make_generator(config.seed)
    report = TrainReport()
    step = 0

    if config.xe_epochs:
        opt = torch.optim.Adam(policy.parameters(), lr=config.lr_xe)
        batches = _batches(len(corpus), config.batch_size, gen)
        per_epoch = -(-len(corpus) // config.batch_size)
        for _ in range(config.xe_epochs * per_epoch):
            rec = xe_step(policy, [corpus[i] for i in next(batches)], opt, config.clip_norm)
            rec.step = step
            report.records.append(rec)
            step += 1
        log.info("xe phase done: %d steps, last loss %.4f", step, report.records[-1].xe_loss)

    if config.rl_steps:
        if rewards is None:
            rewards = {}
        reward_fns = [rewards.get(name) or make_reward(name, saliency, entail_scorer,
                                                       entail_capped=config.entail_capped)
                      for name in config.reward]
        subset_order = torch.randperm(len(corpus), generator=gen).tolist()
        subset = [corpus[i] for i in subset_order[: config.rl_subset_size]]
        opt = torch.optim.Adam(policy.parameters(), lr=config.lr_rl)
        batches = _batches(len(subset), config.batch_size, gen)
        for t in range(config.rl_steps):
            reward_fn = reward_fns[t % len(reward_fns)]
            rec = mixed_step(policy, [subset[i] for i in next(batches)], reward_fn,
                             config.gamma, opt, config.clip_norm, gen, config.max_dec_len)
            rec.step = step
            report.records.append(rec)
            step += 1
        log.info("rl phase done: %d steps", config.rl_steps)
    return policy, report


# -- evaluation ------------------------------------------------------------

DEFAULT_METRICS = ("rouge1", "rouge2", "rougeL", "rougesal", "entail", "novel2", "novel3",
                   "novel4", "saliency_match")


def _mean(values):
    return float(np.mean(values)) if values else float("nan")


def score_summaries(pairs: Sequence[DocumentSummaryPair], summaries, saliency=None,
                    entail_scorer=None, metrics: Sequence[str] = DEFAULT_METRICS,
                    beta: float = 1.0, threshold: float = DEFAULT_THRESHOLD) -> dict[str, float]:
    """Corpus means of the requested metrics for already-decoded summaries.

    Pairs whose summary is too short for an n-gram order, or whose reference
    has no keyword, are left out of that metric's mean.
    """
    per_metric: dict[str, list[float]] = {m: [] for m in metrics}
    for pair, summ in zip(pairs, summaries, strict=True):
        cand = check_sentences(summ, "summary")
        for m in metrics:
            if m == "rougeL":
                per_metric[m].append(rouge_l(pair.summary, cand, beta).f)
            elif m in ("rouge1", "rouge2"):
                per_metric[m].append(rouge_n(pair.summary, cand, int(m[-1]), beta).f)
            elif m == "rougesal":
                if saliency is None:
                    raise ValueError("rougesal needs a saliency predictor")
                eta_ref = eta_weights(pair.summary, saliency)
                eta_c = eta_weights(cand, saliency) if cand else eta_ref
                per_metric[m].append(rouge_sal(pair.summary, cand, eta_ref, eta_c, beta).f)
            elif m == "entail":
                if entail_scorer is None:
                    raise ValueError("entail needs an entailment scorer")
                per_metric[m].append(entail_reward(entail_scorer, pair.summary, cand))
            elif m.startswith("novel"):
                n = int(m[len("novel"):])
                if sum(max(0, len(s) - n + 1) for s in cand):
                    per_metric[m].append(novel_ngram_pct(pair.document, cand, n))
            elif m == "saliency_match":
                if saliency is None:
                    raise ValueError("saliency_match needs a saliency predictor")
                try:
                    per_metric[m].append(
                        saliency_match_pct(pair.summary, cand, saliency, threshold))
                except ValueError:
                    pass
            else:
                raise ValueError(f"unknown metric {m!r}")
    return {m: _mean(v) for m, v in per_metric.items()}


def decode_corpus(policy, pairs, beam: int = 4, max_len: int = 20) -> list[list[list[str]]]:
    """Beam-decode every document; ``beam=0`` means greedy."""
    if beam == 0:
        outs = decode_batch(policy, _documents(pairs), max_len)
    else:
        outs = [beam_decode(policy, p.document, max_len, beam) for p in pairs]
    return [candidate_sentences(o.tokens) for o in outs]


def evaluate(policy, corpus, saliency=None, entail_scorer=None, beam: int = 4,
             max_len: int = 20, metrics: Sequence[str] = DEFAULT_METRICS,
             return_decodes: bool = False):
    """Decode the corpus and report the mean of each requested metric."""
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must be non-empty")
    decodes = decode_corpus(policy, corpus, beam, max_len)
    table = score_summaries(corpus, decodes, saliency, entail_scorer, metrics)
    return (table, decodes) if return_decodes else table


# -- estimator ---------------------------------------------------------------

def _as_pairs(X, y) -> list[DocumentSummaryPair]:
    X, y = list(X), list(y)
    if len(X) != len(y):
        raise ValueError(f"{len(X)} documents but {len(y)} summaries")
    return [DocumentSummaryPair(str(i), check_sentences(d, "document", allow_empty=False),
                                check_sentences(s, "summary", allow_empty=False))
            for i, (d, s) in enumerate(zip(X, y))]


class SCSTSummarizer(BaseEstimator):
    """Estimator wrapper around :func:`train` and beam decoding.

    ``fit(documents, summaries)`` runs XE pretraining then RL. With
    ``warm_start=True`` a refit continues from the current policy.
    """

    def __init__(self, reward="rouge", gamma=0.99, lr_xe=1e-3, lr_rl=1e-4, clip_norm=2.0,
                 batch_size=32, xe_epochs=10, rl_steps=200, rl_subset_size=5000, beam=4,
                 hidden=32, emb=16, vocab_size=200, max_dec_len=20, max_enc_len=60,
                 entail_capped=True, seed=0, saliency=None, entail_scorer=None,
                 warm_start=False):
        self.reward = reward
        self.gamma = gamma
        self.lr_xe = lr_xe
        self.lr_rl = lr_rl
        self.clip_norm = clip_norm
        self.batch_size = batch_size
        self.xe_epochs = xe_epochs
        self.rl_steps = rl_steps
        self.rl_subset_size = rl_subset_size
        self.beam = beam
        self.hidden = hidden
        self.emb = emb
        self.vocab_size = vocab_size
        self.max_dec_len = max_dec_len
        self.max_enc_len = max_enc_len
        self.entail_capped = entail_capped
        self.seed = seed
        self.saliency = saliency
        self.entail_scorer = entail_scorer
        self.warm_start = warm_start

    def config(self) -> TrainConfig:
        params = self.get_params(deep=False)
        return TrainConfig(**{f.name: params[f.name] for f in fields(TrainConfig)})

    def fit(self, X, y):
        pairs = _as_pairs(X, y)
        init = self.policy_ if self.warm_start and hasattr(self, "policy_") else None
        self.policy_, self.report_ = train(pairs, self.config(), self.saliency,
                                           self.entail_scorer, init_policy=init)
        return self

    def predict(self, X) -> list[list[list[str]]]:
        if not hasattr(self, "policy_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("SCSTSummarizer is not fitted yet")
        pairs = [DocumentSummaryPair(str(i), check_sentences(d, "document", allow_empty=False),
                                     [["-"]]) for i, d in enumerate(X)]
        return decode_corpus(self.policy_, pairs, self.beam, self.max_dec_len)

    def score(self, X, y) -> float:
        """Mean ROUGE-L F1 of the beam decodes."""
        preds = self.predict(X)
        return _mean([rouge_l(check_sentences(r, "summary", allow_empty=False), p).f
                      for r, p in zip(y, preds)])
