import subprocess

import numpy as np
import pytest
import torch


class QuadModel(torch.nn.Module):
    """L(theta) = 0.5 * theta^T A theta with a known symmetric A."""

    def __init__(self, A: np.ndarray, theta0=None):
        super().__init__()
        self.A = torch.as_tensor(A, dtype=torch.float64)
        init = np.zeros(A.shape[0]) if theta0 is None else theta0
        self.theta = torch.nn.Parameter(
            torch.as_tensor(init, dtype=torch.float64))


def quad_loss(model):
    return 0.5 * model.theta @ (model.A @ model.theta)


class TinyMLP(torch.nn.Module):
    """Double-precision MLP with < 500 parameters plus a fixed regression set."""

    def __init__(self, seed=0):
        super().__init__()
        torch.manual_seed(seed)
        self.net = torch.nn.Sequential(
            torch.nn.Linear(4, 8), torch.nn.Tanh(), torch.nn.Linear(8, 1),
        ).double()
        g = torch.Generator().manual_seed(seed + 1)
        self.X = torch.randn(32, 4, dtype=torch.float64, generator=g)
        self.Y = torch.randn(32, 1, dtype=torch.float64, generator=g)


def mlp_loss(model):
    return torch.mean((model.net(model.X) - model.Y) ** 2)


def flat_params(model):
    return torch.cat([p.detach().reshape(-1)
                      for p in model.parameters() if p.requires_grad])


def set_flat_params(model, flat):
    offset = 0
    with torch.no_grad():
        for p in model.parameters():
            if not p.requires_grad:
                continue
            size = p.numel()
            p.copy_(torch.as_tensor(flat[offset:offset + size],
                                    dtype=p.dtype).view(p.shape))
            offset += size


def run_tlprof(args):
    """Invoke the profiler CLI (the only allowed route into that package)."""
    res = subprocess.run(["tlprof", *args], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr or res.stdout
    return res.stdout


@pytest.fixture
def rng():
    return np.random.default_rng(0)
