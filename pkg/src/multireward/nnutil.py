"""Torch plumbing: seeding, padding, gradient dicts and the flat-text weight dump."""
from __future__ import annotations

import contextlib
from typing import Iterable, Sequence

import numpy as np
import torch

DTYPE = torch.float64


@contextlib.contextmanager
def seeded(seed: int):
    """Fork the global torch RNG so parameter init is a pure function of ``seed``."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def make_generator(seed: int) -> torch.Generator:
    gen = torch.Generator()
    gen.manual_seed(int(seed))
    return gen


def pad_ids(seqs: Sequence[Sequence[int]], pad: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """Right-pad to a (batch, time) LongTensor plus a lengths tensor."""
    lengths = torch.tensor([len(s) for s in seqs], dtype=torch.long)
    width = max(1, int(lengths.max())) if len(seqs) else 1
    out = torch.full((len(seqs), width), pad, dtype=torch.long)
    for i, s in enumerate(seqs):
        if len(s):
            out[i, : len(s)] = torch.as_tensor(list(s), dtype=torch.long)
    return out, lengths


def grad_dict(module: torch.nn.Module) -> dict[str, torch.Tensor]:
    return {
        name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in module.named_parameters()
    }


def flat(tensors: dict[str, torch.Tensor] | Iterable[torch.Tensor]) -> np.ndarray:
    if isinstance(tensors, dict):
        tensors = tensors.values()
    return np.concatenate([t.detach().reshape(-1).cpu().numpy() for t in tensors])


def n_params(module: torch.nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def all_finite(module: torch.nn.Module) -> bool:
    return all(bool(torch.isfinite(p).all()) for p in module.parameters())


def dump_weights(module: torch.nn.Module) -> str:
    """One ``name shape values...`` line per tensor; shape is comma-joined, values %.17g."""
    lines = []
    for name, p in module.state_dict().items():
        shape = ",".join(str(d) for d in p.shape) or "-"
        values = " ".join("%.17g" % v for v in p.detach().reshape(-1).tolist())
        lines.append(f"{name} {shape} {values}".rstrip())
    return "\n".join(lines) + "\n"


def parse_weights(text: str) -> dict[str, torch.Tensor]:
    state = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"weight dump line {lineno}: expected 'name shape values...'")
        name, shape = parts[0], parts[1]
        dims = () if shape == "-" else tuple(int(d) for d in shape.split(","))
        values = [float(v) for v in parts[2:]]
        if len(values) != int(np.prod(dims, dtype=np.int64)):
            raise ValueError(f"weight dump line {lineno}: {name} has {len(values)} values "
                             f"for shape {dims}")
        state[name] = torch.tensor(values, dtype=DTYPE).reshape(dims)
    return state


def load_weights(module: torch.nn.Module, text: str) -> torch.nn.Module:
    module.load_state_dict(parse_weights(text))
    return module
