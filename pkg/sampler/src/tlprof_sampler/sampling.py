"""Sample a model's loss on a centered grid in a parameter subspace.

f(α₁..αₙ) = L(θ + Σ αᵢ δᵢ) on an r^n lattice whose midpoint is the trained
model.  Fields are written in the profiler's TLPF / CSV exchange formats so
the two packages only share files, never code.
"""

from __future__ import annotations

import io
import json
import struct
import warnings
from typing import Callable, Optional

import numpy as np
import torch

from .directions import SubspaceDirections, flatten, trainable_parameters

TLPF_MAGIC = b"TLPF"
TLPF_VERSION = 1
DEFAULT_SCALE = 0.01   # total perturbation half-width along each direction


def write_tlpf(path, coords: np.ndarray, values: np.ndarray,
               r: Optional[int] = None, provenance: Optional[dict] = None):
    """Write a TLPF binary field (magic, version, n, N, grid flag, payload)."""
    coords = np.ascontiguousarray(coords, dtype="<f8")
    values = np.ascontiguousarray(values, dtype="<f8")
    N, n = coords.shape
    blob = json.dumps(provenance or {}, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(TLPF_MAGIC)
    buf.write(struct.pack("<H", TLPF_VERSION))
    buf.write(struct.pack("<IQ", n, N))
    if r is not None:
        buf.write(struct.pack("<BI", 1, r))
    else:
        buf.write(struct.pack("<B", 0))
    buf.write(coords.tobytes())
    buf.write(values.tobytes())
    buf.write(struct.pack("<I", len(blob)))
    buf.write(blob)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def write_csv(path, coords: np.ndarray, values: np.ndarray):
    n = coords.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join(f"alpha_{i + 1}" for i in range(n)) + ",loss\n")
        for row, v in zip(coords, values):
            fh.write(",".join(repr(float(c)) for c in row)
                     + f",{float(v)!r}\n")


def lattice(n: int, r: int) -> np.ndarray:
    """All r^n integer lattice points in row-major order."""
    mesh = np.meshgrid(*([np.arange(r)] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sample_loss_grid(model: torch.nn.Module,
                     loss_fn: Callable[[torch.nn.Module], torch.Tensor],
                     directions: SubspaceDirections,
                     r: int, scale: float = DEFAULT_SCALE,
                     out=None, fmt: str = "tlpf",
                     provenance: Optional[dict] = None):
    """Evaluate the loss at every lattice point; optionally write the field.

    `scale` is the half-width of the grid along each direction, so the step
    between adjacent lattice points is scale / ((r - 1) / 2) and the grid
    midpoint is the unperturbed model.  Returns (coords, values, provenance).
    """
    n = directions.n
    if r < 3 or r % 2 == 0:
        raise ValueError("r must be odd and >= 3 so the model sits at center")
    params = trainable_parameters(model)
    theta = flatten([p.detach() for p in params]).numpy().astype(np.float64)
    if directions.vectors.shape[1] != theta.size:
        raise ValueError("direction length does not match parameter count")

    step = scale / ((r - 1) / 2)
    center = (r - 1) / 2
    coords = lattice(n, r)
    offsets = (coords - center) * step           # (N, n) in parameter units
    values = np.empty(coords.shape[0])

    shapes = [p.shape for p in params]
    sizes = [p.numel() for p in params]

    def set_theta(flat: np.ndarray):
        offset = 0
        with torch.no_grad():
            for p, shape, size in zip(params, shapes, sizes):
                p.copy_(torch.as_tensor(
                    flat[offset:offset + size], dtype=p.dtype).view(shape))
                offset += size

    try:
        for i, alpha in enumerate(offsets):
            set_theta(theta + alpha @ directions.vectors)
            with torch.no_grad():
                values[i] = float(loss_fn(model))
    finally:
        set_theta(theta)

    flagged = np.flatnonzero(~np.isfinite(values))
    if flagged.size > 0.01 * values.size:
        raise ValueError(
            f"{flagged.size}/{values.size} lattice points gave non-finite "
            "loss; aborting field write")
    if flagged.size:
        warnings.warn(f"{flagged.size} non-finite lattice points clamped")
        values[flagged] = values[np.isfinite(values)].max()

    prov = dict(provenance or {})
    prov.update({
        "grid_scale": step,
        "half_width": scale,
        "eigenvalues": [float(v) for v in directions.eigenvalues],
        "normalization": directions.normalization,
        "nonfinite_points": [int(i) for i in flagged],
    })
    if out is not None:
        if fmt == "tlpf":
            write_tlpf(out, coords.astype(np.float64), values, r=r,
                       provenance=prov)
        elif fmt == "csv":
            write_csv(out, coords.astype(np.float64), values)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    return coords, values, prov
