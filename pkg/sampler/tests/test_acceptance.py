"""Acceptance suite for the sampler: one pass/fail line per criterion.

The qualitative landscape comparison trains ten desk-scale PINNs and runs
the profiler CLI on each sampled field, so this module takes a few minutes.
"""

import json

import numpy as np
import torch

from tlprof_sampler import (ConvectionProblem, pinn_convection_loss,
                            sample_loss_grid, top_hessian_eigenvectors,
                            train_toy_pinn)
from tlprof_sampler.directions import layerwise_normalize

from conftest import TinyMLP, flat_params, mlp_loss, run_tlprof


def report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_hessian_directions_vs_dense_oracle():
    """Lanczos top-2 eigenvalues on a <=500-parameter model match the dense
    Hessian within 1e-4 relative; directions orthonormal within 1e-6."""
    model = TinyMLP()
    P = flat_params(model).numel()
    assert P <= 500
    dirs = top_hessian_eigenvectors(model, mlp_loss, 2, tol=1e-6, seed=0)

    params = [p for p in model.parameters() if p.requires_grad]
    grads = torch.autograd.grad(mlp_loss(model), params, create_graph=True)
    flat_grad = torch.cat([g.reshape(-1) for g in grads])
    H = np.empty((P, P))
    for i in range(P):
        row = torch.autograd.grad(flat_grad[i], params, retain_graph=True)
        H[i] = torch.cat([r.reshape(-1) for r in row]).detach().numpy()
    dense = np.linalg.eigvalsh((H + H.T) / 2)[::-1][:2]

    scale = np.abs(dense).max()
    eig_err = np.abs(dirs.eigenvalues - dense).max() / scale
    gram_err = np.abs(dirs.vectors @ dirs.vectors.T - np.eye(2)).max()
    report("Hessian directions vs dense oracle",
           eig_err <= 1e-4 and gram_err <= 1e-6,
           f"eig rel err {eig_err:.2e}, gram err {gram_err:.2e}")


def _landscape_stats(tmp_path, beta, seed):
    """Train, sample n=3 r=21, profile via the tlprof CLI; return
    (saddle count, master-dominance) after 1% relative simplification."""
    problem = ConvectionProblem(beta=beta)

    def loss_fn(m):
        return pinn_convection_loss(m, problem)[0]

    model, rep = train_toy_pinn(problem, epochs=1500, seed=seed)
    assert not rep["failed"]
    dirs = top_hessian_eigenvectors(model, loss_fn, 3, seed=seed)
    dirs.vectors = np.stack(
        [layerwise_normalize(v, model) for v in dirs.vectors])
    field = tmp_path / f"b{beta:g}s{seed}.tlpf"
    sample_loss_grid(model, loss_fn, dirs, r=21, scale=0.1, out=str(field))

    prof = tmp_path / f"b{beta:g}s{seed}.json"
    summary = json.loads(run_tlprof(
        ["pipeline", str(field), "--relative-epsilon", "0.01",
         "--json", str(prof)]).strip().splitlines()[-1])
    doc = json.loads(prof.read_text())
    lo, hi = doc["valueRange"]
    vrange = (hi - lo) or 1.0
    pers = []

    def walk(basin, is_root):
        if not is_root:
            pers.append(basin["topValue"] - basin["minValue"])
        for child in basin["children"]:
            walk(child, False)

    for basin in doc["basins"]:
        walk(basin, True)
    dominance = 1.0 - (max(pers) / vrange if pers else 0.0)
    return summary["saddles"], dominance


def test_funnel_vs_bowl_qualitative(tmp_path):
    """Low-beta runs are more funnel-like than high-beta runs: larger
    master-branch dominance of the value range in >= 4/5 seed pairings, and
    fewer surviving saddles in >= 4/5 pairings."""
    seeds = range(5)
    dom_wins = saddle_wins = 0
    details = []
    for seed in seeds:
        low_saddles, low_dom = _landscape_stats(tmp_path, 1.0, seed)
        high_saddles, high_dom = _landscape_stats(tmp_path, 30.0, seed)
        dom_wins += low_dom > high_dom
        saddle_wins += high_saddles > low_saddles
        details.append(f"s{seed}: dom {low_dom:.3f}/{high_dom:.3f} "
                       f"saddles {low_saddles}/{high_saddles}")
    report("funnel vs bowl (low vs high beta, 5 seeds)",
           dom_wins >= 4 and saddle_wins >= 4,
           f"dominance {dom_wins}/5, saddles {saddle_wins}/5; "
           + "; ".join(details))
