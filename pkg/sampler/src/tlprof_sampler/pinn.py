"""Desk-scale physics-informed network for the 1-D convection equation.

u_t + beta * u_x = 0 on x in [0, 2*pi), t in [0, T], u(x, 0) = h(x), with
periodic boundary.  The exact solution for h = sin is u = sin(x - beta * t).
Loss = IC misfit + weighted PDE residual + periodic-boundary penalty, each
over deterministic uniform collocation grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch

TWO_PI = 2.0 * math.pi


@dataclass
class ConvectionProblem:
    beta: float
    T: float = 1.0
    h: Callable[[torch.Tensor], torch.Tensor] = torch.sin
    n_u: int = 64        # initial-condition collocation points
    n_f: int = 256       # PDE residual collocation points
    weights: tuple = (1.0, 1.0, 1.0)   # (ic, residual, boundary)

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.n_u < 1 or self.n_f < 1:
            raise ValueError("collocation counts must be >= 1")

    def collocation(self):
        """Deterministic uniform grids: IC x-points, interior (x,t), boundary t."""
        x_u = torch.linspace(0.0, TWO_PI, self.n_u + 1)[:-1]
        side = max(2, int(round(math.sqrt(self.n_f))))
        xs = torch.linspace(0.0, TWO_PI, side + 1)[:-1]
        ts = torch.linspace(0.0, self.T, side)
        gx, gt = torch.meshgrid(xs, ts, indexing="ij")
        t_b = torch.linspace(0.0, self.T, self.n_u)
        return x_u, gx.reshape(-1), gt.reshape(-1), t_b

    def exact(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        return torch.sin(x - self.beta * t)


def pinn_convection_loss(network, problem: ConvectionProblem):
    """Total loss and its (ic, residual, boundary) terms.

    `network` is any callable mapping (x, t) tensors to u-hat; residual
    derivatives come from autograd on the collocation inputs.
    """
    w_ic, w_f, w_b = problem.weights
    x_u, x_f, t_f, t_b = problem.collocation()

    u0 = network(x_u, torch.zeros_like(x_u))
    ic = torch.mean((u0 - problem.h(x_u)) ** 2)

    x_f = x_f.clone().requires_grad_(True)
    t_f = t_f.clone().requires_grad_(True)
    u = network(x_f, t_f)
    if u.requires_grad:
        u_x, u_t = torch.autograd.grad(u.sum(), (x_f, t_f),
                                       create_graph=True, allow_unused=True)
    else:   # network constant in its inputs (e.g. the zero network)
        u_x = u_t = None
    u_x = torch.zeros_like(x_f) if u_x is None else u_x
    u_t = torch.zeros_like(t_f) if u_t is None else u_t
    residual = torch.mean((u_t + problem.beta * u_x) ** 2)

    left = network(torch.zeros_like(t_b), t_b)
    right = network(torch.full_like(t_b, TWO_PI), t_b)
    boundary = torch.mean((left - right) ** 2)

    total = w_ic * ic + w_f * residual + w_b * boundary
    return total, {"ic": ic, "residual": residual, "boundary": boundary}


class PinnNet(torch.nn.Module):
    """Small tanh MLP (x, t) -> u."""

    def __init__(self, width: int = 30, depth: int = 3):
        super().__init__()
        dims = [2] + [width] * depth + [1]
        layers = []
        for a, b in zip(dims[:-1], dims[1:]):
            layers.append(torch.nn.Linear(a, b))
            layers.append(torch.nn.Tanh())
        layers.pop()   # linear output
        self.net = torch.nn.Sequential(*layers)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        return self.net(torch.stack([x, t], dim=-1)).squeeze(-1)


def relative_l2_error(network, problem: ConvectionProblem,
                      resolution: int = 64) -> float:
    xs = torch.linspace(0.0, TWO_PI, resolution + 1)[:-1]
    ts = torch.linspace(0.0, problem.T, resolution)
    gx, gt = torch.meshgrid(xs, ts, indexing="ij")
    with torch.no_grad():
        pred = network(gx.reshape(-1), gt.reshape(-1))
    truth = problem.exact(gx.reshape(-1), gt.reshape(-1))
    return float(torch.linalg.norm(pred - truth) / torch.linalg.norm(truth))


def train_toy_pinn(problem: ConvectionProblem, width: int = 30,
                   depth: int = 3, lr: float = 1e-3, epochs: int = 2000,
                   seed: int = 0):
    """Adam training run; returns the model plus a small report dict.

    Divergence (NaN loss) is reported via `failed`, never raised.
    """
    torch.manual_seed(seed)
    model = PinnNet(width, depth)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    final = float("nan")
    for _ in range(epochs):
        opt.zero_grad()
        total, _ = pinn_convection_loss(model, problem)
        if not bool(torch.isfinite(total.detach())):
            return model, {"failed": True, "final_loss": float("nan"),
                           "relative_error": float("nan"), "seed": seed}
        total.backward()
        opt.step()
        final = float(total.detach())
    return model, {
        "failed": False,
        "final_loss": final,
        "relative_error": relative_l2_error(model, problem),
        "seed": seed,
    }
