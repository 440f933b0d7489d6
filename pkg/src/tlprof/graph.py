"""Symmetric k-nearest-neighbor graphs over sampled fields.

Distances are Euclidean in grid units.  Ties between equidistant neighbors
are broken by the smaller vertex index so that every construction here is
deterministic and order-independent.  `exact_knn` is the brute-force route;
`nn_descent` is the scalable approximate route for large N.  Both produce
directed neighbor lists that `symmetrize_mutual` prunes down to the mutual
kNN edge set.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .field import ScalarField

THREADS_ENV = "TLPROF_THREADS"

#: below this many points, nn_descent silently delegates to exact_knn
EXACT_DELEGATION_N = 1024

#: above this many points, the pipeline's "auto" method switches to nn_descent
AUTO_EXACT_THRESHOLD = 50_000


def default_k(n: int) -> int:
    """Default neighbor count: 4 per dimension (8 in 2-d, like pixel adjacency)."""
    return 4 * n


def _num_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class NeighborLists:
    """Directed k-neighbor lists, pre-symmetrization.

    `indices[v]` holds v's k nearest vertex ids sorted by (distance, index);
    -1 marks a missing slot (only possible for the approximate route).
    """

    indices: np.ndarray
    k: int
    method: str
    meta: dict = dc_field(default_factory=dict)

    @property
    def vertex_count(self) -> int:
        return self.indices.shape[0]


@dataclass
class NeighborhoodGraph:
    """Undirected edge set over field vertices; edges stored as (u, v), u < v."""

    vertex_count: int
    edges: np.ndarray
    k: int
    method: str
    symmetric: bool = True
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    def adjacency(self) -> list[np.ndarray]:
        """Per-vertex sorted neighbor arrays."""
        adj: list[np.ndarray]
        deg = np.zeros(self.vertex_count, dtype=np.int64)
        if self.edge_count:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        offsets = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(deg, out=offsets[1:])
        flat = np.empty(offsets[-1], dtype=np.int64)
        cursor = offsets[:-1].copy()
        for u, v in self.edges:
            flat[cursor[u]] = v
            cursor[u] += 1
            flat[cursor[v]] = u
            cursor[v] += 1
        adj = [np.sort(flat[offsets[i]:offsets[i + 1]])
               for i in range(self.vertex_count)]
        return adj


def _chunk_knn(coords: np.ndarray, sq_norms: np.ndarray,
               lo: int, hi: int, k: int) -> np.ndarray:
    """Exact k nearest for rows [lo, hi) with (distance, index) tie order."""
    block = coords[lo:hi]
    # |a-b|^2 via the expansion; exact for integer-valued grid coordinates
    d2 = sq_norms[lo:hi, None] + sq_norms[None, :] - 2.0 * (block @ coords.T)
    np.maximum(d2, 0.0, out=d2)
    rows = np.arange(lo, hi)
    d2[np.arange(hi - lo), rows] = np.inf  # exclude self
    N = coords.shape[0]
    if k < N - 1:
        part = np.argpartition(d2, k, axis=1)[:, :k + 1]
    else:
        part = np.broadcast_to(np.arange(N), (hi - lo, N))
    part_d = np.take_along_axis(d2, part, axis=1)
    order = np.lexsort((part, part_d), axis=1)
    return np.take_along_axis(part, order[:, :k], axis=1)


def exact_knn(field: ScalarField, k: int, chunk: int = 1024) -> NeighborLists:
    """Brute-force k-nearest-neighbor lists with deterministic tie-breaking."""
    N = field.N
    if k < 1 or k >= N:
        raise ParameterError(f"need 1 <= k < N, got k={k}, N={N}")
    coords = field.coords
    sq_norms = np.einsum("ij,ij->i", coords, coords)
    out = np.empty((N, k), dtype=np.int64)
    ranges = [(lo, min(lo + chunk, N)) for lo in range(0, N, chunk)]
    workers = _num_threads()
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for (lo, hi), res in zip(ranges, pool.map(
                    lambda r: _chunk_knn(coords, sq_norms, r[0], r[1], k),
                    ranges)):
                out[lo:hi] = res
    else:
        for lo, hi in ranges:
            out[lo:hi] = _chunk_knn(coords, sq_norms, lo, hi, k)
    return NeighborLists(out, k=k, method="exact", meta={})


# ---------------------------------------------------------------------------
# NN-Descent
# ---------------------------------------------------------------------------

def _pair_distances(coords: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = coords[a] - coords[b]
    return np.einsum("ij,ij->i", diff, diff)


def _group_positions(sorted_keys: np.ndarray) -> np.ndarray:
    """Position of each element within its run of equal keys (keys sorted)."""
    if sorted_keys.size == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    idx = np.arange(sorted_keys.size)
    return idx - np.repeat(starts, np.diff(np.r_[starts, sorted_keys.size]))


def nn_descent(field: ScalarField, k: int, iterations: int = 20,
               sample_rate: float = 0.5, seed: int = 0,
               delta: float = 0.001) -> NeighborLists:
    """Approximate k-neighbor lists via neighbor-of-neighbor refinement.

    Deterministic for a fixed seed.  Small inputs (N <= EXACT_DELEGATION_N)
    delegate to the exact route.  If the iteration cap is hit before the
    update count drops below delta*N*k, the best-so-far lists are returned
    with `meta["converged"] = False`.
    """
    N = field.N
    if k < 1 or k >= N:
        raise ParameterError(f"need 1 <= k < N, got k={k}, N={N}")
    if N <= EXACT_DELEGATION_N:
        nbrs = exact_knn(field, k)
        nbrs.meta.update({"requested": "nn_descent", "delegated": True,
                          "seed": seed, "converged": True})
        return nbrs

    rng = np.random.default_rng(seed)
    coords = field.coords
    s = max(1, int(round(sample_rate * k)))

    # random initial lists: k draws per vertex, self excluded
    idx = rng.integers(0, N - 1, size=(N, k), dtype=np.int64)
    idx += idx >= np.arange(N, dtype=np.int64)[:, None]
    dist = _pair_distances(coords, np.repeat(np.arange(N), k),
                           idx.ravel()).reshape(N, k)
    isnew = np.ones((N, k), dtype=bool)
    arangeN = np.arange(N, dtype=np.int64)

    converged = False
    it = 0
    for it in range(1, iterations + 1):
        valid = idx >= 0
        # forward samples: first s new / first s old per row (lists are
        # distance-sorted after the first merge, so this prefers close ones)
        def row_take(mask, limit):
            take = mask & (np.cumsum(mask, axis=1) <= limit)
            out = np.full((N, limit), -1, dtype=np.int64)
            rr, cc = np.nonzero(take)
            pos = _group_positions(rr)
            out[rr, pos] = idx[rr, cc]
            return out, (rr, cc)

        flags_snapshot = isnew.ravel().copy()
        fwd_new, new_slots = row_take(valid & isnew, s)
        fwd_old, _ = row_take(valid & ~isnew, s)
        isnew[new_slots] = False  # sampled entries stop counting as new

        # reverse samples: invert the directed lists, keep up to s per target
        src = np.repeat(arangeN, k)
        dst = idx.ravel()
        flags = flags_snapshot
        keep = dst >= 0
        src, dst, flags = src[keep], dst[keep], flags[keep]
        perm = rng.permutation(src.size)
        src, dst, flags = src[perm], dst[perm], flags[perm]

        def rev_take(mask, limit):
            d, scr = dst[mask], src[mask]
            order = np.argsort(d, kind="stable")
            d, scr = d[order], scr[order]
            pos = _group_positions(d)
            sel = pos < limit
            out = np.full((N, limit), -1, dtype=np.int64)
            out[d[sel], pos[sel]] = scr[sel]
            return out

        rev_new = rev_take(flags, s)
        rev_old = rev_take(~flags, s)

        new_cand = np.concatenate([fwd_new, rev_new], axis=1)
        old_cand = np.concatenate([fwd_old, rev_old], axis=1)

        # local join: new x new and new x old
        c = new_cand.shape[1]
        ii, jj = np.triu_indices(c, 1)
        a1, b1 = new_cand[:, ii].ravel(), new_cand[:, jj].ravel()
        a2 = np.repeat(new_cand, old_cand.shape[1], axis=1).ravel()
        b2 = np.tile(old_cand, (1, c)).ravel()
        a = np.concatenate([a1, a2])
        b = np.concatenate([b1, b2])
        ok = (a >= 0) & (b >= 0) & (a != b)
        a, b = a[ok], b[ok]
        if a.size == 0:
            converged = True
            break
        d = _pair_distances(coords, a, b)

        # merge candidate edges (both directions) with the current lists;
        # current entries listed first so deduplication preserves old flags
        tgt = np.concatenate([np.repeat(arangeN, k), a, b])
        cand = np.concatenate([idx.ravel(), b, a])
        dd = np.concatenate([dist.ravel(), d, d])
        nn = np.concatenate([isnew.ravel(),
                             np.ones(2 * a.size, dtype=bool)])
        from_cand = np.concatenate([np.zeros(N * k, dtype=bool),
                                    np.ones(2 * a.size, dtype=bool)])
        okc = cand >= 0
        tgt, cand, dd, nn, from_cand = (tgt[okc], cand[okc], dd[okc],
                                        nn[okc], from_cand[okc])

        key = tgt * N + cand
        _, first = np.unique(key, return_index=True)
        tgt, cand, dd, nn, from_cand = (tgt[first], cand[first], dd[first],
                                        nn[first], from_cand[first])

        order = np.lexsort((cand, dd, tgt))
        tgt, cand, dd, nn, from_cand = (tgt[order], cand[order], dd[order],
                                        nn[order], from_cand[order])
        pos = _group_positions(tgt)
        sel = pos < k
        tgt, cand, dd, nn, from_cand, pos = (tgt[sel], cand[sel], dd[sel],
                                             nn[sel], from_cand[sel], pos[sel])

        idx = np.full((N, k), -1, dtype=np.int64)
        dist = np.full((N, k), np.inf)
        isnew = np.zeros((N, k), dtype=bool)
        idx[tgt, pos] = cand
        dist[tgt, pos] = dd
        isnew[tgt, pos] = nn

        changes = int(from_cand.sum())
        if changes <= delta * N * k:
            converged = True
            break

    return NeighborLists(idx, k=k, method="nn_descent",
                         meta={"seed": seed, "iterations": it,
                               "converged": converged})


# ---------------------------------------------------------------------------
# symmetrization and components
# ---------------------------------------------------------------------------

def symmetrize_mutual(nbrs: NeighborLists) -> NeighborhoodGraph:
    """Mutual-kNN pruning: keep (u, v) only if each is in the other's list."""
    N = nbrs.vertex_count
    k = nbrs.k
    src = np.repeat(np.arange(N, dtype=np.int64), nbrs.indices.shape[1])
    dst = nbrs.indices.ravel()
    keep = dst >= 0
    src, dst = src[keep], dst[keep]
    fwd = src * N + dst
    mutual = np.isin(dst * N + src, fwd)
    u = np.minimum(src[mutual], dst[mutual])
    v = np.maximum(src[mutual], dst[mutual])
    edges = np.unique(np.stack([u, v], axis=1), axis=0)
    return NeighborhoodGraph(N, edges, k=k, method=nbrs.method,
                             symmetric=True, meta=dict(nbrs.meta))


def connected_components(graph: NeighborhoodGraph) -> tuple[np.ndarray, int]:
    """Union-find component labels, numbered 0..C-1 by smallest member vertex."""
    N = graph.vertex_count
    parent = np.arange(N, dtype=np.int64)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]  # path halving
            x = parent[x]
        return x

    for u, v in graph.edges:
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            # keep the smaller vertex id as the root
            if ru < rv:
                parent[rv] = ru
            else:
                parent[ru] = rv
    roots = np.array([find(i) for i in range(N)], dtype=np.int64)
    uniq, labels = np.unique(roots, return_inverse=True)
    return labels, uniq.size


def write_edge_list(graph: NeighborhoodGraph, path) -> None:
    """Dump the edge set as `u v` lines with a descriptive header comment."""
    with open(path, "w") as fh:
        seed = graph.meta.get("seed")
        fh.write(f"# tlprof edge list: vertices={graph.vertex_count} "
                 f"k={graph.k} method={graph.method} seed={seed}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")
