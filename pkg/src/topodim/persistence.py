"""Vietoris-Rips persistent homology over the two-element field.

Dimension 0 is computed with union-find over the edges in filtration order
(Kruskal), which is the same pairing a column reduction of the edge boundary
matrix would give.  Higher dimensions reduce the boundary matrices from the
top dimension down with clearing: a simplex that appears as a pivot row in
the reduction of dimension k+1 is known to be positive, so its own column
in dimension k is skipped.

Columns are Python ints used as bitsets over the row simplices' positions
in filtration order; column addition is XOR and the pivot is the highest
set bit.

An edge enters the filtration at the distance between its endpoints (not at
half of it), so a loop on unit-square corners lives on ``[1, sqrt(2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .geometry import DistanceMatrix, as_cloud, enclosing_radius, pairwise_distances

DEFAULT_MAX_SIMPLICES = 50_000_000

Threshold = Union[float, str]


@dataclass(frozen=True)
class PersistenceInterval:
    birth: float
    death: float
    dim: int

    @property
    def lifespan(self) -> float:
        return self.death - self.birth

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.death)

    @property
    def is_zero_length(self) -> bool:
        return self.death == self.birth


def _canonical(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    if len(arr):
        arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PersistenceDiagram:
    """Intervals per homology dimension, each a sorted ``(k, 2)`` array of
    (birth, death) with ``inf`` for classes alive at the threshold."""

    pairs: Dict[int, np.ndarray]
    max_dim: int
    threshold: float
    n_points: int

    def __post_init__(self):
        pairs = {i: _canonical(self.pairs.get(i, ())) for i in range(self.max_dim + 1)}
        object.__setattr__(self, "pairs", pairs)

    def _check_dim(self, i: int):
        if not 0 <= i <= self.max_dim:
            raise InvalidArgumentError(
                f"homology dimension {i} not computed (diagram max_dim={self.max_dim})"
            )

    def dgm(self, i: int) -> np.ndarray:
        self._check_dim(i)
        return self.pairs[i]

    def finite(self, i: int) -> np.ndarray:
        d = self.dgm(i)
        return d[np.isfinite(d[:, 1])]

    def lifespans(self, i: int, include_zero_length: bool = True) -> np.ndarray:
        f = self.finite(i)
        life = f[:, 1] - f[:, 0]
        if not include_zero_length:
            life = life[life > 0]
        return life

    def zero_length(self, i: int) -> np.ndarray:
        """Mask over ``dgm(i)`` flagging intervals with birth == death."""
        d = self.dgm(i)
        return d[:, 0] == d[:, 1]

    def n_infinite(self, i: int) -> int:
        return int(np.isinf(self.dgm(i)[:, 1]).sum())

    def intervals(self, i: Optional[int] = None) -> List[PersistenceInterval]:
        dims = range(self.max_dim + 1) if i is None else [i]
        return [
            PersistenceInterval(float(b), float(d), k)
            for k in dims
            for b, d in self.dgm(k)
        ]

    def scaled(self, s: float) -> "PersistenceDiagram":
        return PersistenceDiagram(
            {i: p * s for i, p in self.pairs.items()}, self.max_dim, self.threshold * s, self.n_points
        )


@dataclass(frozen=True)
class PersistenceConfig:
    metric: str = "euclidean"
    max_dim: int = 1
    threshold: Threshold = "auto"
    max_simplices: int = DEFAULT_MAX_SIMPLICES


# -- dimension 0 -----------------------------------------------------------


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            ra, rb = rb, ra
        self.parent[ra] = rb
        return True


def _sorted_edges(dist: DistanceMatrix, threshold: float = math.inf):
    """Edges with value <= threshold sorted by (value, i, j)."""
    n = dist.n
    i, j = np.triu_indices(n, k=1)
    vals = dist.entries
    keep = vals <= threshold
    i, j, vals = i[keep], j[keep], vals[keep]
    # triu_indices is already lexicographic, so a stable sort on value suffices
    order = np.argsort(vals, kind="stable")
    return i[order], j[order], vals[order]


def _h0_pairs(dist: DistanceMatrix, threshold: float) -> Tuple[np.ndarray, np.ndarray]:
    """Kruskal pass; returns (dim-0 pairs, boolean mask of negative edges in filtration order)."""
    n = dist.n
    ei, ej, ev = _sorted_edges(dist, threshold)
    uf = UnionFind(n)
    negative = np.zeros(len(ev), dtype=bool)
    deaths = []
    remaining = n - 1
    for k, (a, b) in enumerate(zip(ei.tolist(), ej.tolist())):
        if remaining and uf.union(a, b):
            negative[k] = True
            deaths.append(ev[k])
            remaining -= 1
    n_inf = n - len(deaths)
    pairs = [(0.0, d) for d in deaths] + [(0.0, math.inf)] * n_inf
    return np.array(pairs, dtype=np.float64).reshape(-1, 2), negative


def h0_persistence(dist: DistanceMatrix) -> PersistenceDiagram:
    """Dimension-0 diagram of the full filtration: n-1 finite bars born at 0
    whose deaths are the minimum spanning tree edge weights, plus one
    infinite bar."""
    pairs, _ = _h0_pairs(dist, math.inf)
    return PersistenceDiagram({0: pairs}, 0, math.inf, dist.n)


def mst_edge_weights(dist: DistanceMatrix) -> np.ndarray:
    """Edge weights of a minimum spanning tree, in the order Prim adds them."""
    n = dist.n
    if n == 1:
        return np.empty(0)
    sq = dist.square()
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = sq[0].copy()
    best[0] = np.inf
    out = np.empty(n - 1)
    for t in range(n - 1):
        v = int(np.argmin(best))
        out[t] = best[v]
        in_tree[v] = True
        np.minimum(best, sq[v], out=best)
        best[in_tree] = np.inf
    return out


def mst_total_length(dist: DistanceMatrix) -> float:
    return float(mst_edge_weights(dist).sum())


# -- filtration ------------------------------------------------------------


@dataclass(frozen=True)
class FiltrationOrder:
    """Rips simplices by dimension.  ``simplices[k]`` is an ``(m, k+1)`` array
    of vertex tuples sorted by (value, lexicographic vertices); ``values[k]``
    holds the matching filtration values."""

    simplices: List[np.ndarray]
    values: List[np.ndarray]
    threshold: float

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.values)

    def __iter__(self) -> Iterator[Tuple[float, int, Tuple[int, ...]]]:
        """Global order: (value, dimension, lexicographic vertices)."""
        items = [
            (float(v), k, tuple(s))
            for k, (S, V) in enumerate(zip(self.simplices, self.values))
            for s, v in zip(S.tolist(), V.tolist())
        ]
        return iter(sorted(items))


def _colex_keys(S: np.ndarray, binom: np.ndarray) -> np.ndarray:
    keys = np.zeros(len(S), dtype=np.int64)
    for pos in range(S.shape[1]):
        keys += binom[S[:, pos], pos + 1]
    return keys


def _extend(S, V, adj, sq, cap_left, chunk_cells=4_000_000):
    """All (k+1)-simplices obtained by appending a vertex larger than every
    vertex of a k-simplex in ``S`` and adjacent to all of them.  ``S`` must be
    in lexicographic order; the output is too."""
    n = adj.shape[0]
    above = np.arange(n)
    out_s, out_v = [], []
    total = 0
    step = max(1, chunk_cells // max(n, 1))
    for lo in range(0, len(S), step):
        block = S[lo:lo + step]
        mask = adj[block[:, 0]].copy()
        for p in range(1, block.shape[1]):
            mask &= adj[block[:, p]]
        mask &= above[None, :] > block[:, -1][:, None]
        r, v = np.nonzero(mask)
        total += len(r)
        if total > cap_left:
            return None, None, total
        base = block[r]
        val = V[lo:lo + step][r]
        for p in range(block.shape[1]):
            val = np.maximum(val, sq[base[:, p], v])
        out_s.append(np.column_stack([base, v]))
        out_v.append(val)
    k1 = S.shape[1] + 1
    if not out_s:
        return np.empty((0, k1), dtype=np.int64), np.empty(0), 0
    return np.concatenate(out_s).astype(np.int64), np.concatenate(out_v), total


def rips_filtration(
    dist: DistanceMatrix,
    top_dim: int,
    threshold: float,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> FiltrationOrder:
    """Simplices of dimension 0..top_dim with diameter <= threshold."""
    n = dist.n
    sq = dist.square()
    adj = sq <= threshold
    np.fill_diagonal(adj, False)
    lex_s = [np.arange(n, dtype=np.int64).reshape(-1, 1)]
    lex_v = [np.zeros(n)]
    count = n
    if count > max_simplices:
        raise ResourceLimitError(f"filtration has more than {max_simplices} simplices ({count})", count)
    for _ in range(top_dim):
        S, V, made = _extend(lex_s[-1], lex_v[-1], adj, sq, max_simplices - count)
        if S is None:
            count += made
            raise ResourceLimitError(
                f"filtration exceeds the simplex cap of {max_simplices} "
                f"(at least {count} simplices up to dimension {top_dim})",
                count,
            )
        count += made
        lex_s.append(S)
        lex_v.append(V)
    simplices, values = [], []
    for S, V in zip(lex_s, lex_v):
        order = np.argsort(V, kind="stable")
        simplices.append(S[order])
        values.append(V[order])
    return FiltrationOrder(simplices, values, threshold)


def _face_ranks(filt: FiltrationOrder, k: int, n: int) -> np.ndarray:
    """Row positions (in filtration order of dimension k-1) of every face of
    each k-simplex, one row per k-simplex in filtration order."""
    S = filt.simplices[k]
    faces_S = filt.simplices[k - 1]
    if k == 1:
        return S.copy()
    binom = np.array(
        [[math.comb(v, j) for j in range(k + 2)] for v in range(n)], dtype=np.int64
    )
    keys = _colex_keys(faces_S, binom)
    perm = np.argsort(keys)
    sorted_keys = keys[perm]
    out = np.empty((len(S), k + 1), dtype=np.int64)
    for drop in range(k + 1):
        face = np.delete(S, drop, axis=1)
        out[:, drop] = perm[np.searchsorted(sorted_keys, _colex_keys(face, binom))]
    return out


def _reduce(face_ranks: np.ndarray, cleared: Optional[set] = None, n_rows_positive: Optional[int] = None):
    """Reduce one boundary matrix.  Returns (pivot row -> column, zero columns).

    When ``n_rows_positive`` is given the loop stops as soon as that many
    rows have been paired; the zero-column list is then incomplete.
    """
    pivot_col: Dict[int, int] = {}
    reduced: Dict[int, int] = {}
    zero_cols = []
    cleared = cleared or set()
    for col, faces in enumerate(face_ranks.tolist()):
        if n_rows_positive is not None and len(pivot_col) == n_rows_positive:
            break
        if col in cleared:
            zero_cols.append(col)
            continue
        bits = 0
        for f in faces:
            bits ^= 1 << f
        while bits:
            low = bits.bit_length() - 1
            other = reduced.get(low)
            if other is None:
                reduced[low] = bits
                pivot_col[low] = col
                break
            bits ^= other
        else:
            zero_cols.append(col)
    return pivot_col, zero_cols


def _resolve_threshold(dist: DistanceMatrix, threshold: Threshold) -> float:
    if isinstance(threshold, str):
        if threshold != "auto":
            raise InvalidArgumentError(f"threshold must be a positive number or 'auto', got {threshold!r}")
        return enclosing_radius(dist)
    t = float(threshold)
    if not t > 0:
        raise InvalidArgumentError(f"threshold must be > 0, got {threshold}")
    return t


def rips_persistence(
    dist: DistanceMatrix,
    max_dim: int = 1,
    threshold: Threshold = "auto",
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> PersistenceDiagram:
    """Persistence diagrams of dimensions 0..max_dim.

    ``threshold="auto"`` truncates at the enclosing radius, past which the
    complex is a cone: the diagram then has exactly one infinite bar in
    dimension 0 and none above.  ``max_simplices`` bounds the number of
    simplices of dimension <= max_dim+1 and raises
    :class:`ResourceLimitError` when exceeded.
    """
    if max_dim < 0:
        raise InvalidArgumentError(f"max_dim must be >= 0, got {max_dim}")
    t = _resolve_threshold(dist, threshold)
    n = dist.n
    pairs: Dict[int, list] = {}
    h0, negative_edges = _h0_pairs(dist, t)
    pairs[0] = h0
    if max_dim == 0:
        return PersistenceDiagram(pairs, max_dim, t, n)

    filt = rips_filtration(dist, max_dim + 1, t, max_simplices)
    # positive[k]: positions (filtration order) of k-simplices whose column is zero
    positive: Dict[int, set] = {1: set(np.flatnonzero(~negative_edges).tolist())}
    paired: Dict[int, Dict[int, int]] = {}
    cleared: set = set()
    for k in range(max_dim + 1, 1, -1):
        # the top matrix's zero columns are never used, so when every
        # positive edge is known up front the reduction may stop early
        stop = len(positive[1]) if k == 2 and max_dim == 1 else None
        pivot_col, zero_cols = _reduce(_face_ranks(filt, k, n), cleared, stop)
        paired[k - 1] = pivot_col
        positive[k] = set(zero_cols)
        cleared = set(pivot_col)
    for k in range(1, max_dim + 1):
        vals, up = filt.values[k], filt.values[k + 1]
        kill = paired.get(k, {})
        out = []
        for row in sorted(positive[k]):
            col = kill.get(row)
            out.append((vals[row], up[col] if col is not None else math.inf))
        pairs[k] = out
    return PersistenceDiagram(pairs, max_dim, t, n)


def diagram(cloud_or_dist, config: PersistenceConfig = PersistenceConfig(), max_dim: Optional[int] = None):
    """Diagram of a point cloud (or precomputed distances) under ``config``."""
    if isinstance(cloud_or_dist, DistanceMatrix):
        dist = cloud_or_dist
    else:
        dist = pairwise_distances(as_cloud(cloud_or_dist), config.metric)
    md = config.max_dim if max_dim is None else max_dim
    return rips_persistence(dist, md, config.threshold, config.max_simplices)


def betti_at(diag: PersistenceDiagram, t: float, i: int) -> int:
    """Number of dimension-i intervals with birth <= t < death."""
    if not 0 <= i <= diag.max_dim:
        raise InvalidArgumentError(f"homology dimension {i} not computed (diagram max_dim={diag.max_dim})")
    if t < 0 or t > diag.threshold:
        raise InvalidArgumentError(f"t={t} outside the filtration range [0, {diag.threshold}]")
    d = diag.dgm(i)
    return int(((d[:, 0] <= t) & (t < d[:, 1])).sum())
