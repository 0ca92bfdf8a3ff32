"""Attentional encoder-decoder policy over a small vocabulary.

Bidirectional GRU encoder, additive attention, GRU decoder. Everything is
batched over documents; the single-document functions at the bottom are
thin wrappers used by tests, the CLI and the SCST contract checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .nnutil import DTYPE, make_generator, pad_ids, seeded
from .text import EOS, Vocabulary
from .validation import check_tokens


class Seq2SeqPolicy(nn.Module):
    def __init__(self, vocab: Vocabulary, emb_dim: int = 16, hidden_dim: int = 32,
                 max_enc_len: int = 60):
        super().__init__()
        self.vocab = vocab
        self.emb_dim, self.hidden_dim, self.max_enc_len = emb_dim, hidden_dim, max_enc_len
        V, E, H = len(vocab), emb_dim, hidden_dim
        self.embedding = nn.Embedding(V, E)
        self.encoder = nn.GRU(E, H, batch_first=True, bidirectional=True)
        self.bridge = nn.Linear(2 * H, H)
        self.att_enc = nn.Linear(2 * H, H, bias=False)
        self.att_dec = nn.Linear(H, H)
        self.att_v = nn.Linear(H, 1, bias=False)
        self.decoder = nn.GRUCell(E + 2 * H, H)
        self.out = nn.Linear(3 * H, V)
        self.to(DTYPE)

    @classmethod
    def create(cls, vocab: Vocabulary, seed: int, **dims) -> "Seq2SeqPolicy":
        with seeded(seed):
            return cls(vocab, **dims)

    def dims(self) -> dict:
        return {"emb_dim": self.emb_dim, "hidden_dim": self.hidden_dim,
                "max_enc_len": self.max_enc_len}

    # -- encoding -------------------------------------------------------
    def source_ids(self, document) -> list[int]:
        tokens = check_tokens(document, "document", allow_empty=False)
        return self.vocab.encode(tokens[: self.max_enc_len])

    def encode(self, src: torch.Tensor, lengths: torch.Tensor):
        packed = pack_padded_sequence(self.embedding(src), lengths, batch_first=True,
                                      enforce_sorted=False)
        states, _ = pad_packed_sequence(self.encoder(packed)[0], batch_first=True,
                                        total_length=src.shape[1])
        mask = torch.arange(src.shape[1])[None, :] < lengths[:, None]
        mean = (states * mask[..., None]).sum(1) / lengths[:, None].to(DTYPE)
        s0 = torch.tanh(self.bridge(mean))
        return (states, self.att_enc(states), mask), s0

    def step(self, prev: torch.Tensor, s: torch.Tensor, enc) -> tuple[torch.Tensor, torch.Tensor]:
        """One decoder step: returns (log-probs over vocab, new state)."""
        states, keys, mask = enc
        scores = self.att_v(torch.tanh(keys + self.att_dec(s)[:, None, :])).squeeze(-1)
        attn = torch.softmax(scores.masked_fill(~mask, float("-inf")), dim=-1)
        ctx = torch.bmm(attn[:, None, :], states).squeeze(1)
        s = self.decoder(torch.cat([self.embedding(prev), ctx], dim=-1), s)
        return torch.log_softmax(self.out(torch.cat([s, ctx], dim=-1)), dim=-1), s

    def teacher_forced(self, src, src_len, tgt, tgt_len) -> torch.Tensor:
        """Per-sequence summed log-probability of ``tgt`` (padding ignored)."""
        enc, s = self.encode(src, src_len)
        prev = torch.full((src.shape[0],), self.vocab.bos_id, dtype=torch.long)
        total = torch.zeros(src.shape[0], dtype=DTYPE)
        for t in range(tgt.shape[1]):
            logp, s = self.step(prev, s, enc)
            live = (t < tgt_len).to(DTYPE)
            total = total + live * logp.gather(1, tgt[:, t:t + 1]).squeeze(1)
            prev = tgt[:, t]
        return total


@dataclass
class DecodeOutput:
    """Decoded tokens (``</s>`` included when emitted) and their log-probs."""

    tokens: list[str]
    step_logprobs: list[float] = field(default_factory=list)

    @property
    def logprob(self) -> float:
        return float(sum(self.step_logprobs))

    @property
    def summary_tokens(self) -> list[str]:
        return self.tokens[:-1] if self.tokens and self.tokens[-1] == EOS else list(self.tokens)


def _batch_source(policy: Seq2SeqPolicy, documents) -> tuple[torch.Tensor, torch.Tensor]:
    return pad_ids([policy.source_ids(d) for d in documents])


@torch.no_grad()
def decode_batch(policy: Seq2SeqPolicy, documents, max_len: int, sample=False,
                 generator: torch.Generator | None = None,
                 temperature: float = 1.0) -> list[DecodeOutput]:
    """Greedy or ancestral-sampling decode for a batch of documents.

    ``sample`` may be a single flag or one flag per document, so sampled and
    greedy rollouts can share a batch.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    src, src_len = _batch_source(policy, documents)
    enc, s = policy.encode(src, src_len)
    B = src.shape[0]
    rows = torch.as_tensor(sample, dtype=torch.bool).expand(B).clone()
    if temperature <= 0:
        rows[:] = False
    eos = policy.vocab.eos_id
    prev = torch.full((B,), policy.vocab.bos_id, dtype=torch.long)
    done = torch.zeros(B, dtype=torch.bool)
    ids, lps = [], []
    for _ in range(max_len):
        logp, s = policy.step(prev, s, enc)
        tok = logp.argmax(dim=-1)
        if rows.any():
            probs = torch.softmax(logp[rows] / temperature, dim=-1)
            tok[rows] = torch.multinomial(probs, 1, generator=generator).squeeze(1)
        ids.append(tok)
        lps.append(logp.gather(1, tok[:, None]).squeeze(1))
        done = done | (tok == eos)
        prev = tok
        if bool(done.all()):
            break
    ids_np = torch.stack(ids, 1).numpy()
    lps_np = torch.stack(lps, 1).numpy()
    outs = []
    for b in range(B):
        row = ids_np[b].tolist()
        end = row.index(eos) + 1 if eos in row else len(row)
        outs.append(DecodeOutput(policy.vocab.decode(row[:end]), lps_np[b, :end].tolist()))
    return outs


@torch.no_grad()
def beam_decode(policy: Seq2SeqPolicy, document, max_len: int, beam: int = 4) -> DecodeOutput:
    """Beam search on total log-probability, no length normalization.

    Ties are broken toward the earlier hypothesis, then the lower token id,
    so ``beam=1`` reproduces greedy decoding.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    eos = policy.vocab.eos_id
    src, src_len = _batch_source(policy, [document])
    (states, keys, mask), s = policy.encode(src, src_len)
    hyps: list[tuple[list[int], list[float]]] = [([], [])]
    scores = np.zeros(1)
    prev = torch.tensor([policy.vocab.bos_id])
    finished: list[tuple[float, list[int], list[float]]] = []
    for t in range(max_len):
        k = len(hyps)
        enc = (states.expand(k, -1, -1), keys.expand(k, -1, -1), mask.expand(k, -1))
        logp, s = policy.step(prev, s, enc)
        logp = logp.numpy()
        total = (scores[:, None] + logp).reshape(-1)
        order = np.argsort(-total, kind="stable")[:beam]
        V = logp.shape[1]
        new_hyps, new_scores, keep_rows, keep_tok = [], [], [], []
        for flat_idx in order:
            h, tok = divmod(int(flat_idx), V)
            ids, lps = hyps[h]
            entry = (ids + [tok], lps + [float(logp[h, tok])])
            if tok == eos or t == max_len - 1:
                finished.append((float(total[flat_idx]), *entry))
            else:
                new_hyps.append(entry)
                new_scores.append(total[flat_idx])
                keep_rows.append(h)
                keep_tok.append(tok)
        if not new_hyps:
            break
        best_done = max((f[0] for f in finished), default=-np.inf)
        if best_done >= max(new_scores):
            break  # extending a live hypothesis can only lower its score
        hyps, scores = new_hyps, np.array(new_scores)
        s = s[torch.tensor(keep_rows)]
        prev = torch.tensor(keep_tok)
    best = max(range(len(finished)), key=lambda i: (finished[i][0], -i))
    _, ids, lps = finished[best]
    return DecodeOutput(policy.vocab.decode(ids), lps)


def sample_decode(policy, document, max_len: int, seed: int,
                  temperature: float = 1.0) -> DecodeOutput:
    return decode_batch(policy, [document], max_len, sample=True,
                        generator=make_generator(seed), temperature=temperature)[0]


def greedy_decode(policy, document, max_len: int) -> DecodeOutput:
    return decode_batch(policy, [document], max_len)[0]


def _target_ids(policy: Seq2SeqPolicy, targets: Sequence[Sequence[str]], add_eos: bool):
    seqs = []
    for tgt in targets:
        ids = policy.vocab.encode(check_tokens(tgt, "target"))
        if add_eos and (not ids or ids[-1] != policy.vocab.eos_id):
            ids = ids + [policy.vocab.eos_id]
        if not ids:
            raise ValueError("target must be non-empty")
        seqs.append(ids)
    return pad_ids(seqs)


def batch_logprob(policy: Seq2SeqPolicy, documents, targets, add_eos: bool = False) -> torch.Tensor:
    """Differentiable per-pair log p(target | document)."""
    src, src_len = _batch_source(policy, documents)
    tgt, tgt_len = _target_ids(policy, targets, add_eos)
    return policy.teacher_forced(src, src_len, tgt, tgt_len)


def _grads(policy: Seq2SeqPolicy, value: torch.Tensor) -> dict[str, torch.Tensor]:
    names, params = zip(*policy.named_parameters())
    grads = torch.autograd.grad(value, params, allow_unused=True)
    return {n: (g if g is not None else torch.zeros_like(p))
            for n, p, g in zip(names, params, grads)}


def sequence_logprob_and_grad(policy, document, target) -> tuple[float, dict[str, torch.Tensor]]:
    """Teacher-forced log-probability of exactly ``target`` and its gradient.

    No end-of-sequence token is appended; include ``</s>`` in ``target`` to
    score termination.
    """
    lp = batch_logprob(policy, [document], [target])[0]
    return lp.item(), _grads(policy, lp)


def xe_loss(policy, documents, summaries) -> torch.Tensor:
    """Mean negative log-likelihood of the gold summaries (with ``</s>``)."""
    return -batch_logprob(policy, documents, summaries, add_eos=True).mean()


def xe_loss_and_grad(policy, pairs) -> tuple[float, dict[str, torch.Tensor]]:
    pairs = list(pairs)
    if not pairs:
        raise ValueError("batch must be non-empty")
    loss = xe_loss(policy, [d for d, _ in pairs], [s for _, s in pairs])
    return loss.item(), _grads(policy, loss)
