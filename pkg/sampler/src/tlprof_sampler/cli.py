"""CLI: train a toy convection PINN and sample its loss landscape to a file."""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from .directions import layerwise_normalize, top_hessian_eigenvectors
from .pinn import ConvectionProblem, pinn_convection_loss, train_toy_pinn
from .sampling import DEFAULT_SCALE, sample_loss_grid


@click.group()
def main():
    """Loss-landscape sampler for small neural networks."""


@main.command()
@click.option("--beta", type=float, required=True, help="convection coefficient")
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=int, default=3, show_default=True,
              help="subspace dimension (top-n Hessian directions)")
@click.option("--r", type=int, default=21, show_default=True,
              help="lattice resolution per axis")
@click.option("--scale", type=float, default=DEFAULT_SCALE, show_default=True,
              help="grid half-width along each direction")
@click.option("--epochs", type=int, default=2000, show_default=True)
@click.option("--width", type=int, default=30, show_default=True)
@click.option("--depth", type=int, default=3, show_default=True)
@click.option("--normalize", type=click.Choice(["unit", "layerwise"]),
              default="layerwise", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["tlpf", "csv"]),
              default="tlpf", show_default=True)
@click.option("--out", type=click.Path(), required=True)
def sample(beta, lr, seed, n, r, scale, epochs, width, depth, normalize,
           fmt, out):
    """Train a convection PINN, then sample its landscape to OUT."""
    problem = ConvectionProblem(beta=beta)

    def loss_fn(m):
        return pinn_convection_loss(m, problem)[0]

    model, report = train_toy_pinn(problem, width=width, depth=depth,
                                   lr=lr, epochs=epochs, seed=seed)
    if report["failed"]:
        click.echo("error [train]: run diverged (NaN loss)", err=True)
        sys.exit(1)

    dirs = top_hessian_eigenvectors(model, loss_fn, n, seed=seed)
    if normalize == "layerwise":
        dirs.vectors = np.stack(
            [layerwise_normalize(v, model) for v in dirs.vectors])
        dirs.normalization = "layerwise"

    provenance = {"beta": beta, "lr": lr, "seed": seed,
                  "epochs": epochs, "width": width, "depth": depth,
                  "final_loss": report["final_loss"],
                  "relative_error": report["relative_error"]}
    sample_loss_grid(model, loss_fn, dirs, r=r, scale=scale, out=out,
                     fmt=fmt, provenance=provenance)
    click.echo(json.dumps({
        "out": out, "N": r ** n, "beta": beta, "seed": seed,
        "final_loss": report["final_loss"],
        "relative_error": report["relative_error"],
        "eigenvalues": [float(v) for v in dirs.eigenvalues]},
        sort_keys=True))
