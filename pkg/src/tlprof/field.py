"""Scalar-field data model, grid generation, file formats, synthetic wells.

A field is a set of N sample points, each carrying n subspace coordinates
(in grid units) and one finite loss value.  When the points enumerate a full
integer lattice {0..r-1}^n in row-major order, the optional :class:`GridSpec`
records that structure; the physical step size stays in metadata so distance
computations downstream can treat all directions isotropically.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .errors import FieldFormatError, FieldSizeError, ParameterError

BINARY_MAGIC = b"TLPF"
BINARY_VERSION = 1

# hard cap on total lattice points: must fit comfortably in signed 64-bit
# index arithmetic
_MAX_POINTS = 2**62


def default_scale(r: int) -> float:
    """Physical step per grid unit so the grid spans +/-0.01 from center."""
    return 0.01 / ((r - 1) / 2)


@dataclass(frozen=True)
class GridSpec:
    """Full-lattice geometry: n dimensions at resolution r per dimension."""

    n: int
    r: int = 41
    scale: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if self.r < 2:
            raise ParameterError(f"r must be >= 2, got {self.r}")
        if self.r ** self.n > _MAX_POINTS:
            raise FieldSizeError(
                f"grid of {self.r}^{self.n} points exceeds the index range"
            )
        if self.scale is None:
            object.__setattr__(self, "scale", default_scale(self.r))
        elif self.scale <= 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")

    @property
    def num_points(self) -> int:
        return self.r ** self.n

    @property
    def center(self) -> tuple[int, ...]:
        """Lattice coordinates of the unperturbed model (exact when r is odd)."""
        return ((self.r - 1) // 2,) * self.n


def generate_grid(spec: GridSpec) -> np.ndarray:
    """All r^n lattice points as an (N, n) int array in row-major order.

    Point index i and its coordinates are mutually recoverable via
    :func:`grid_index` / :func:`grid_coords`.
    """
    axes = [np.arange(spec.r)] * spec.n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_index(spec: GridSpec, coords: Sequence[int]) -> int:
    """Row-major index of a lattice point."""
    return int(np.ravel_multi_index(tuple(int(c) for c in coords),
                                    (spec.r,) * spec.n))


def grid_coords(spec: GridSpec, index: int) -> tuple[int, ...]:
    """Lattice coordinates of a row-major index."""
    return tuple(int(c) for c in np.unravel_index(index, (spec.r,) * spec.n))


@dataclass
class ScalarField:
    """N sample points with coordinates (grid units) and scalar loss values."""

    coords: np.ndarray
    values: np.ndarray
    grid: Optional[GridSpec] = None
    provenance: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.coords.ndim != 2:
            raise FieldFormatError("coords must be a 2-d array")
        if self.values.ndim != 1:
            raise FieldFormatError("values must be a 1-d array")
        if self.coords.shape[0] != self.values.shape[0]:
            raise FieldFormatError(
                f"{self.coords.shape[0]} coordinate rows but "
                f"{self.values.shape[0]} values"
            )
        bad = np.flatnonzero(~np.isfinite(self.values))
        if bad.size:
            raise FieldFormatError(f"non-finite loss value at row {bad[0]}")
        bad = np.flatnonzero(~np.isfinite(self.coords).all(axis=1))
        if bad.size:
            raise FieldFormatError(f"non-finite coordinate at row {bad[0]}")
        if self.grid is not None:
            g = self.grid
            if g.n != self.n:
                raise FieldFormatError(
                    f"grid dimension {g.n} != coordinate dimension {self.n}"
                )
            if self.N != g.num_points:
                raise FieldFormatError(
                    f"grid expects {g.num_points} points, field has {self.N}"
                )

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    @property
    def n(self) -> int:
        return self.coords.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarField):
            return NotImplemented
        return (
            np.array_equal(self.coords, other.coords)
            and np.array_equal(self.values, other.values)
            and self.grid == other.grid
            and self.provenance == other.provenance
        )


def detect_grid(coords: np.ndarray) -> Optional[GridSpec]:
    """Recognize a full row-major lattice {0..r-1}^n; None if not one."""
    N, n = coords.shape
    if N < 2 or not np.array_equal(coords, np.round(coords)):
        return None
    r = int(coords.max()) + 1
    if coords.min() != 0 or r < 2 or r ** n != N:
        return None
    spec = GridSpec(n=n, r=r)
    if np.array_equal(coords, generate_grid(spec)):
        return spec
    return None


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def write_field(fld: ScalarField, path, format: str = "tlpf") -> None:
    """Write a field to `path` as CSV or TLPF binary."""
    if format == "csv":
        _write_csv(fld, path)
    elif format == "tlpf":
        _write_binary(fld, path)
    else:
        raise ParameterError(f"unknown field format {format!r}")


def parse_field(path, format: str = "auto") -> ScalarField:
    """Read a field from `path`; `format` is 'csv', 'tlpf' or 'auto'."""
    if format == "auto":
        with open(path, "rb") as fh:
            format = "tlpf" if fh.read(4) == BINARY_MAGIC else "csv"
    if format == "csv":
        return _parse_csv(path)
    if format == "tlpf":
        return _parse_binary(path)
    raise ParameterError(f"unknown field format {format!r}")


def _write_csv(fld: ScalarField, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"alpha_{i + 1}" for i in range(fld.n)] + ["loss"])
        for row, v in zip(fld.coords, fld.values):
            w.writerow([repr(float(c)) for c in row] + [repr(float(v))])


def _parse_csv(path) -> ScalarField:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FieldFormatError(f"{path}: empty file") from None
        expected = [f"alpha_{i + 1}" for i in range(len(header) - 1)] + ["loss"]
        if header != expected or len(header) < 2:
            raise FieldFormatError(
                f"{path}: bad header {header!r}, expected alpha_1..alpha_n,loss"
            )
        n = len(header) - 1
        coords, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n + 1:
                raise FieldFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {n + 1}"
                )
            try:
                nums = [float(x) for x in row]
            except ValueError:
                raise FieldFormatError(
                    f"{path}: row {lineno} contains a non-numeric field"
                ) from None
            if not all(np.isfinite(nums)):
                raise FieldFormatError(f"{path}: non-finite value at row {lineno}")
            coords.append(nums[:n])
            values.append(nums[n])
    if not coords:
        raise FieldFormatError(f"{path}: no data rows")
    carr = np.asarray(coords, dtype=np.float64)
    return ScalarField(carr, np.asarray(values), grid=detect_grid(carr))


def _write_binary(fld: ScalarField, path) -> None:
    prov = dict(fld.provenance)
    if fld.grid is not None and fld.grid.scale is not None:
        prov.setdefault("grid_scale", fld.grid.scale)
    blob = json.dumps(prov, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(BINARY_MAGIC)
    buf.write(struct.pack("<H", BINARY_VERSION))
    buf.write(struct.pack("<IQ", fld.n, fld.N))
    if fld.grid is not None:
        buf.write(struct.pack("<BI", 1, fld.grid.r))
    else:
        buf.write(struct.pack("<B", 0))
    buf.write(fld.coords.astype("<f8").tobytes())
    buf.write(fld.values.astype("<f8").tobytes())
    buf.write(struct.pack("<I", len(blob)))
    buf.write(blob)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FieldFormatError(f"truncated file while reading {what}")
    return data


def _parse_binary(path) -> ScalarField:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != BINARY_MAGIC:
            raise FieldFormatError(f"{path}: bad magic bytes")
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != BINARY_VERSION:
            raise FieldFormatError(f"{path}: unsupported format version {version}")
        n, N = struct.unpack("<IQ", _read_exact(fh, 12, "dimensions"))
        (grid_flag,) = struct.unpack("<B", _read_exact(fh, 1, "grid flag"))
        r = None
        if grid_flag:
            (r,) = struct.unpack("<I", _read_exact(fh, 4, "grid resolution"))
        coords = np.frombuffer(
            _read_exact(fh, 8 * N * n, "coordinates"), dtype="<f8"
        ).reshape(N, n)
        values = np.frombuffer(_read_exact(fh, 8 * N, "values"), dtype="<f8")
        (blob_len,) = struct.unpack("<I", _read_exact(fh, 4, "provenance length"))
        prov = json.loads(_read_exact(fh, blob_len, "provenance").decode("utf-8"))
    grid = None
    if grid_flag:
        grid = GridSpec(n=n, r=r, scale=prov.get("grid_scale"))
    try:
        return ScalarField(coords.copy(), values.copy(), grid=grid, provenance=prov)
    except FieldFormatError as exc:
        raise FieldFormatError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# synthetic test fields
# ---------------------------------------------------------------------------

def synth_wells(n: int, r: int,
                wells: Sequence[tuple[Sequence[float], float, float]],
                baseline: float = 0.0) -> ScalarField:
    """Full-grid field of superposed Gaussian wells.

    f(x) = baseline - sum_j depth_j * exp(-|x - center_j|^2 / width_j^2),
    with x in grid units.  Analytic well parameters are recorded in the
    provenance so tests can check minima against them.
    """
    if not wells:
        raise ParameterError("wells must be non-empty")
    spec = GridSpec(n=n, r=r)
    for center, depth, width in wells:
        if len(center) != n:
            raise ParameterError(f"well center {center} is not {n}-dimensional")
        if any(c < 0 or c > r - 1 for c in center):
            raise ParameterError(f"well center {center} outside the lattice")
        if width <= 0:
            raise ParameterError(f"well width must be positive, got {width}")
    coords = generate_grid(spec).astype(np.float64)
    values = np.full(coords.shape[0], baseline, dtype=np.float64)
    for center, depth, width in wells:
        d2 = np.sum((coords - np.asarray(center, dtype=np.float64)) ** 2, axis=1)
        values -= depth * np.exp(-d2 / width ** 2)
    prov = {
        "generator": "synth_wells",
        "baseline": baseline,
        "wells": [
            {"center": [float(c) for c in center],
             "depth": float(depth), "width": float(width)}
            for center, depth, width in wells
        ],
    }
    return ScalarField(coords, values, grid=spec, provenance=prov)
