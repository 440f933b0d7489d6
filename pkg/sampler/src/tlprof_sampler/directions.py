"""Top Hessian eigen-directions of a model's loss via Lanczos on HVPs.

The Hessian is never materialized: Lanczos with full reorthogonalization runs
on Hessian-vector products obtained by double backprop.  Directions can be
left unit-norm or rescaled layerwise to the parameter norms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
import torch


@dataclass
class SubspaceDirections:
    """Orthonormal directions (rows) with their eigenvalues, descending."""

    vectors: np.ndarray      # (n, P) float64
    eigenvalues: np.ndarray  # (n,) float64, descending
    normalization: str = "unit"   # unit | layerwise

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def trainable_parameters(model: torch.nn.Module) -> List[torch.nn.Parameter]:
    return [p for p in model.parameters() if p.requires_grad]


def flatten(tensors) -> torch.Tensor:
    return torch.cat([t.reshape(-1) for t in tensors])


def make_hvp(model: torch.nn.Module,
             loss_fn: Callable[[torch.nn.Module], torch.Tensor]):
    """Return (P, matvec) where matvec(v) = H v for the loss Hessian at θ.

    The gradient graph is built once and reused across products.
    """
    params = trainable_parameters(model)
    loss = loss_fn(model)
    grads = torch.autograd.grad(loss, params, create_graph=True)
    flat_grad = flatten(grads)
    P = flat_grad.numel()

    def matvec(v: np.ndarray) -> np.ndarray:
        vt = torch.as_tensor(v, dtype=flat_grad.dtype)
        hv = torch.autograd.grad(flat_grad @ vt, params, retain_graph=True)
        return flatten(hv).detach().numpy().astype(np.float64)

    return P, matvec


def top_hessian_eigenvectors(model: torch.nn.Module,
                             loss_fn: Callable[[torch.nn.Module], torch.Tensor],
                             n: int, tol: float = 1e-4,
                             max_iter: int | None = None,
                             seed: int = 0) -> SubspaceDirections:
    """Top-n eigenpairs of the loss Hessian, largest eigenvalues first.

    Lanczos with full reorthogonalization; stops once the Ritz residuals of
    the wanted pairs drop below `tol` relative to the eigenvalue scale.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    P, matvec = make_hvp(model, loss_fn)
    if n > P:
        raise ValueError(f"n={n} exceeds parameter count {P}")
    if max_iter is None:
        max_iter = min(P, max(8 * n, 60))
    max_iter = min(max_iter, P)

    rng = np.random.default_rng(seed)
    q = rng.standard_normal(P)
    q /= np.linalg.norm(q)
    Q = [q]
    alphas: list[float] = []
    betas: list[float] = []
    residuals = np.full(n, np.inf)

    for j in range(max_iter):
        w = matvec(Q[j])
        alphas.append(float(Q[j] @ w))
        # full reorthogonalization against every previous Lanczos vector
        basis = np.asarray(Q)
        w -= basis.T @ (basis @ w)
        w -= basis.T @ (basis @ w)
        beta = float(np.linalg.norm(w))

        if j + 1 >= n:
            T = np.diag(alphas)
            off = np.asarray(betas)
            if off.size:
                T += np.diag(off, 1) + np.diag(off, -1)
            evals, evecs = np.linalg.eigh(T)
            top = evecs[:, ::-1][:, :n]
            residuals = beta * np.abs(top[-1, :])
            scale = max(np.abs(evals).max(), 1e-30)
            if residuals.max() <= tol * scale or beta <= 1e-12 or j + 1 == P:
                basis = np.asarray(Q)
                vectors = (basis.T @ top).T
                vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
                return SubspaceDirections(vectors, evals[::-1][:n].copy())
        if beta <= 1e-12:
            # invariant subspace smaller than requested; restart direction
            q = rng.standard_normal(P)
            basis = np.asarray(Q)
            q -= basis.T @ (basis @ q)
            beta = float(np.linalg.norm(q))
            w = q
        betas.append(beta)
        Q.append(w / beta)

    warnings.warn(
        f"Lanczos hit the iteration cap ({max_iter}); "
        f"residual norms {residuals.tolist()}")
    T = np.diag(alphas) + np.diag(betas[:-1], 1) + np.diag(betas[:-1], -1)
    evals, evecs = np.linalg.eigh(T)
    top = evecs[:, ::-1][:, :n]
    basis = np.asarray(Q[:len(alphas)])
    vectors = (basis.T @ top).T
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return SubspaceDirections(vectors, evals[::-1][:n].copy())


def layerwise_normalize(direction: np.ndarray,
                        model: torch.nn.Module) -> np.ndarray:
    """Rescale each layer slice of `direction` to the norm of that layer of θ.

    Zero-norm direction slices are left as zeros (with a warning) rather than
    divided by zero.
    """
    out = np.array(direction, dtype=np.float64, copy=True)
    offset = 0
    for p in trainable_parameters(model):
        size = p.numel()
        sl = slice(offset, offset + size)
        dnorm = float(np.linalg.norm(out[sl]))
        pnorm = float(p.detach().norm())
        if dnorm == 0.0:
            warnings.warn(f"zero-norm direction slice at offset {offset}")
        else:
            out[sl] *= pnorm / dnorm
        offset += size
    if offset != out.size:
        raise ValueError(
            f"direction length {out.size} != parameter count {offset}")
    return out
