import numpy as np
import pytest
import torch

from tlprof_sampler import (layerwise_normalize, make_hvp,
                            top_hessian_eigenvectors)

from conftest import (QuadModel, TinyMLP, flat_params, mlp_loss, quad_loss,
                      set_flat_params)


def symmetric(rng, d):
    A = rng.standard_normal((d, d))
    return (A + A.T) / 2


def test_quadratic_eigenpairs_match_dense(rng):
    A = symmetric(rng, 10)
    dirs = top_hessian_eigenvectors(QuadModel(A), quad_loss, 3,
                                    tol=1e-8, seed=1)
    evals, evecs = np.linalg.eigh(A)
    top_vals = evals[::-1][:3]
    assert np.abs(dirs.eigenvalues - top_vals).max() < 1e-6
    for v, lam in zip(dirs.vectors, top_vals):
        # eigenvector up to sign: A v = lam v
        assert np.abs(A @ v - lam * v).max() < 1e-6


def test_orthogonality_by_construction(rng):
    A = symmetric(rng, 12)
    dirs = top_hessian_eigenvectors(QuadModel(A), quad_loss, 2, seed=3)
    assert abs(dirs.vectors[0] @ dirs.vectors[1]) <= 1e-6


def test_tiny_mlp_vs_dense_hessian():
    model = TinyMLP()
    P = flat_params(model).numel()
    assert P <= 500
    dirs = top_hessian_eigenvectors(model, mlp_loss, 1, tol=1e-6, seed=0)

    # dense oracle: assemble the full Hessian row by row from the gradient
    params = [p for p in model.parameters() if p.requires_grad]
    grads = torch.autograd.grad(mlp_loss(model), params, create_graph=True)
    flat_grad = torch.cat([g.reshape(-1) for g in grads])
    H = np.empty((P, P))
    for i in range(P):
        row = torch.autograd.grad(flat_grad[i], params, retain_graph=True)
        H[i] = torch.cat([r.reshape(-1) for r in row]).detach().numpy()
    top = np.linalg.eigvalsh((H + H.T) / 2)[-1]
    assert abs(dirs.eigenvalues[0] - top) <= 1e-4 * abs(top)


def test_hvp_matches_finite_differences(rng):
    model = TinyMLP(seed=2)
    theta = flat_params(model).numpy()
    _, matvec = make_hvp(model, mlp_loss)
    v = rng.standard_normal(theta.size)
    v /= np.linalg.norm(v)
    hv = matvec(v)

    def grad_at(flat):
        set_flat_params(model, flat)
        params = [p for p in model.parameters() if p.requires_grad]
        g = torch.autograd.grad(mlp_loss(model), params)
        return torch.cat([x.reshape(-1) for x in g]).numpy()

    eps = 1e-5
    fd = (grad_at(theta + eps * v) - grad_at(theta - eps * v)) / (2 * eps)
    set_flat_params(model, theta)
    assert np.linalg.norm(hv - fd) <= 1e-4 * max(np.linalg.norm(fd), 1.0)


def test_deterministic_given_seed(rng):
    A = symmetric(rng, 8)
    a = top_hessian_eigenvectors(QuadModel(A), quad_loss, 2, seed=5)
    b = top_hessian_eigenvectors(QuadModel(A), quad_loss, 2, seed=5)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_iteration_cap_warns(rng):
    A = symmetric(rng, 30)
    with pytest.warns(UserWarning, match="iteration cap"):
        top_hessian_eigenvectors(QuadModel(A), quad_loss, 3,
                                 tol=1e-14, max_iter=4, seed=0)


def test_layerwise_normalize_matches_param_norms():
    model = TinyMLP(seed=4)
    rng = np.random.default_rng(9)
    direction = rng.standard_normal(flat_params(model).numel())
    out = layerwise_normalize(direction, model)
    offset = 0
    for p in model.parameters():
        size = p.numel()
        ratio = (np.linalg.norm(out[offset:offset + size])
                 / float(p.detach().norm()))
        assert ratio == pytest.approx(1.0, abs=1e-8)
        offset += size


def test_layerwise_normalize_fixed_point():
    model = TinyMLP(seed=6)
    theta = flat_params(model).numpy()
    assert np.allclose(layerwise_normalize(theta, model), theta, atol=1e-12)


def test_layerwise_normalize_zero_slice_warns():
    model = TinyMLP(seed=7)
    direction = np.zeros(flat_params(model).numel())
    direction[-1] = 1.0   # only the last layer's bias is nonzero
    with pytest.warns(UserWarning, match="zero-norm"):
        out = layerwise_normalize(direction, model)
    assert np.all(out[: 4 * 8] == 0.0)
