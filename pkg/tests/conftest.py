import pytest
import torch

from multireward.policy import Seq2SeqPolicy
from multireward.text import Vocabulary, RESERVED


def tiny_policy(seed=0, tokens=("a", "b", "c"), emb_dim=3, hidden_dim=3):
    """A policy well under 500 parameters for finite-difference checks."""
    vocab = Vocabulary(list(RESERVED) + list(tokens))
    return Seq2SeqPolicy.create(vocab, seed, emb_dim=emb_dim, hidden_dim=hidden_dim)


@pytest.fixture
def policy():
    return tiny_policy()


def central_difference(f, params, eps=1e-5):
    """Numerical gradient of scalar ``f()`` w.r.t. each tensor in ``params``."""
    grads = []
    with torch.no_grad():
        for p in params:
            g = torch.zeros_like(p)
            flat_p, flat_g = p.view(-1), g.view(-1)
            for i in range(flat_p.numel()):
                orig = flat_p[i].item()
                flat_p[i] = orig + eps
                up = float(f())
                flat_p[i] = orig - eps
                down = float(f())
                flat_p[i] = orig
                flat_g[i] = (up - down) / (2 * eps)
            grads.append(g)
    return grads


def max_relative_error(analytic, numeric, floor=1e-6):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        err = (a - n).abs() / torch.clamp(torch.maximum(a.abs(), n.abs()), min=floor)
        worst = max(worst, float(err.max()))
    return worst


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.REPORT, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
