"""Exact k-th nearest neighbor queries over the pooled sample.

The estimators need, for each point Z_i, the single point at neighbor rank
k (self excluded). Ranks are defined by lexicographic order on
(squared Euclidean distance, global point index), which makes every query
deterministic even in the presence of duplicate points or exact distance
ties.

A scipy cKDTree provides the fast candidate search; candidates are then
re-ranked with the package's own distance formula so the documented
tie-break rule holds exactly. Rows whose rank-k boundary cannot be
certified from the fetched candidates (exact or near ties at the fetch
horizon) fall back to a full linear scan of that row, so results always
match a brute-force scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import HPDivError, JointSet, KTooLarge

# Extra candidates fetched beyond k to absorb ties at the fetch boundary.
_TIE_PAD = 8
# Relative guard separating the kept rank-k distance from the fetch horizon.
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class NeighborIndex:
    """Immutable spatial index over a JointSet; safe for concurrent reads."""

    tree: cKDTree
    source: JointSet

    def __len__(self) -> int:
        return len(self.source)


def build_index(z: JointSet) -> NeighborIndex:
    """Build a KD-tree index over the pooled points."""
    if not isinstance(z, JointSet):
        raise HPDivError("build_index expects a JointSet")
    return NeighborIndex(tree=cKDTree(z.points), source=z)


def _sq_dists(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances with one fixed summation order.

    Both the fast path and the fallback scan rank candidates with this
    exact computation, so their orderings agree bit-for-bit.
    """
    diff = points[a] - points[b]
    return np.einsum("...i,...i->...", diff, diff)


def _scan_row(points: np.ndarray, i: int, k_max: int) -> np.ndarray:
    """Exact ranks 1..k_max for point i by linear scan."""
    n = points.shape[0]
    diff = points - points[i]
    d2 = np.einsum("...i,...i->...", diff, diff)
    d2[i] = np.inf
    order = np.lexsort((np.arange(n), d2))
    return order[:k_max]


def _ranked_rows(idx: NeighborIndex, rows: np.ndarray, k_max: int) -> np.ndarray:
    """Neighbor indices at ranks 1..k_max for the given query rows."""
    points = idx.source.points
    n = points.shape[0]
    if not (1 <= k_max <= n - 1):
        raise KTooLarge(f"k must satisfy 1 <= k <= {n - 1}, got {k_max}")

    k_eff = min(n, k_max + 1 + _TIE_PAD)  # always >= 2, so cand is 2-D
    complete = k_eff >= n
    _, cand = idx.tree.query(points[rows], k=k_eff)

    d2 = _sq_dists(points, cand, rows[:, None])
    d2[cand == rows[:, None]] = np.inf  # exclude self
    order = np.lexsort((cand, d2), axis=1)
    d2_sorted = np.take_along_axis(d2, order, axis=1)
    ranked = np.take_along_axis(cand, order, axis=1)

    out = ranked[:, :k_max].astype(np.int64)
    if complete:
        return out

    # Certify each row: the kept rank-k distance must sit strictly inside
    # the fetch horizon, else ties may extend past the fetched candidates.
    valid = (~np.isinf(d2_sorted)).sum(axis=1)
    horizon = np.take_along_axis(d2_sorted, (valid - 1)[:, None], axis=1)[:, 0]
    kept = d2_sorted[:, k_max - 1]
    uncertain = ~(kept < horizon * (1.0 - _TIE_RTOL))
    for r in np.nonzero(uncertain)[0]:
        out[r] = _scan_row(points, int(rows[r]), k_max)
    return out


def neighbor_table(idx: NeighborIndex, k_max: int) -> np.ndarray:
    """(n, k_max) table: entry [i, r-1] is the rank-r neighbor of point i."""
    return _ranked_rows(idx, np.arange(len(idx)), k_max)


def kth_neighbor(idx: NeighborIndex, i: int, k: int) -> int:
    """Index of the k-th nearest neighbor of point i, self excluded.

    Ties resolve by (distance, global index) ascending.
    """
    n = len(idx)
    if not (0 <= i < n):
        raise HPDivError(f"point index {i} out of range for {n} points")
    row = _ranked_rows(idx, np.asarray([i]), k)
    return int(row[0, k - 1])
