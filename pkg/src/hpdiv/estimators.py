"""Neighbor-count divergence estimators over a pooled two-sample set.

Both estimators share one statistic family: for each point of Z = X u Y,
look at its rank-k nearest neighbor and record whether the labels differ.
With |E_k| such dichotomous points,

    knn:  value = 1 - |E_k| (N+M)/(2NM)
    wnn:  value = 1 - [sum_l W(l) |E_K(l)|] (N+M)/(2NM)

The weighted form is identically a weighted sum of plain k-NN estimates,
because sum_l W(l) = 1; both readings must (and do) agree.

Estimates are reported unclamped by default: the affine statistic is
negative whenever the dichotomous count exceeds 2NM/(N+M), which happens
routinely at small samples, and clamping would bias downstream moment
studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EstimateResult,
    JointSet,
    KCollision,
    KTooLarge,
    METHOD_KNN,
    METHOD_WNN,
    PointCloud,
    finish_estimate,
    validate_pair,
)
from .neighbors import NeighborIndex, build_index, neighbor_table
from .weights import WeightSchedule


@dataclass(frozen=True)
class DichotomousCount:
    """Per-rank dichotomous point counts and their (possibly weighted) total."""

    total: float
    per_k: dict[int, int]


def dichotomous_counts(z: JointSet, idx: NeighborIndex, ks) -> dict[int, int]:
    """|E_k| for every rank in ks, from one neighbor-table pass.

    Fetching the table once up to max(ks) and slicing per rank is
    output-identical to querying each rank separately but O(len(ks))
    cheaper.
    """
    ks = sorted({int(k) for k in ks})
    n = len(z)
    if not ks:
        return {}
    if ks[0] < 1 or ks[-1] > n - 1:
        raise KTooLarge(f"ranks must lie in [1, {n - 1}], got {ks[0]}..{ks[-1]}")
    table = neighbor_table(idx, ks[-1])
    opposite = z.labels[table] != z.labels[:, None]
    return {k: int(opposite[:, k - 1].sum()) for k in ks}


def count_dichotomous(z: JointSet, idx: NeighborIndex, k: int) -> int:
    """Number of points whose rank-k neighbor carries the opposite label."""
    return dichotomous_counts(z, idx, [k])[int(k)]


def affine_map(count: float, n: int, m: int) -> float:
    """The shared count-to-divergence transform 1 - count (N+M)/(2NM)."""
    return 1.0 - count * (n + m) / (2.0 * n * m)


def knn_estimate(
    x: PointCloud, y: PointCloud, k: int, p: float, clamp: bool = False
) -> EstimateResult:
    """Rank-k neighbor estimate of the divergence between samples x and y."""
    z = validate_pair(x, y, p)
    idx = build_index(z)
    count = count_dichotomous(z, idx, k)
    value, clamped = finish_estimate(affine_map(count, z.n_x, z.n_y), clamp)
    return EstimateResult(
        value=value,
        method=METHOD_KNN,
        n=z.n_x,
        m=z.n_y,
        p=float(p),
        params={"k": int(k), "dichotomous_count": count},
        clamped=clamped,
    )


def _check_schedule(schedule: WeightSchedule, pooled: int) -> np.ndarray:
    if schedule.k_values is None:
        raise KTooLarge("schedule has no resolved k_values; call resolve_schedule")
    k = np.asarray(schedule.k_values, dtype=np.int64)
    if len(np.unique(k)) != k.size:
        raise KCollision(f"schedule ranks contain duplicates: {k.tolist()}")
    if k.min() < 1 or k.max() > pooled - 1:
        raise KTooLarge(
            f"schedule ranks must lie in [1, {pooled - 1}], got "
            f"{k.min()}..{k.max()}"
        )
    return k


def wnn_estimate(
    x: PointCloud,
    y: PointCloud,
    schedule: WeightSchedule,
    p: float,
    clamp: bool = False,
) -> EstimateResult:
    """Weighted ensemble of rank-K(l) neighbor counts under one schedule."""
    z = validate_pair(x, y, p)
    k_values = _check_schedule(schedule, len(z))
    idx = build_index(z)
    counts = dichotomous_counts(z, idx, k_values.tolist())
    total = float(
        sum(w * counts[int(k)] for w, k in zip(schedule.w, k_values))
    )
    value, clamped = finish_estimate(affine_map(total, z.n_x, z.n_y), clamp)
    return EstimateResult(
        value=value,
        method=METHOD_WNN,
        n=z.n_x,
        m=z.n_y,
        p=float(p),
        params={
            "l_values": np.asarray(schedule.l_values).tolist(),
            "weights": np.asarray(schedule.w).tolist(),
            "k_values": k_values.tolist(),
        },
        clamped=clamped,
    )


def weighted_count(schedule: WeightSchedule, counts: dict[int, int]) -> DichotomousCount:
    """Assemble the weighted total S = sum_l W(l) |E_K(l)| from raw counts."""
    k = np.asarray(schedule.k_values, dtype=np.int64)
    per_k = {int(kk): int(counts[int(kk)]) for kk in k}
    total = float(sum(w * per_k[int(kk)] for w, kk in zip(schedule.w, k)))
    return DichotomousCount(total=total, per_k=per_k)
