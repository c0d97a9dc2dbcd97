"""Core domain types shared by every estimator: point clouds, the pooled
two-sample set, mixture parameters, and estimate results.

All types are immutable after construction and safe to share across
threads. Distances throughout the package are Euclidean.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class HPDivError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(HPDivError):
    """The two samples do not live in the same ambient dimension."""


class EmptyCloud(HPDivError):
    """A sample with zero points was supplied."""


class InvalidP(HPDivError):
    """Mixture parameter p outside the open interval (0, 1)."""


class KTooLarge(HPDivError):
    """Requested neighbor rank k outside the valid range [1, |Z| - 1]."""


class KCollision(HPDivError):
    """Two ensemble index values resolve to the same neighbor rank."""


class SampleRatioWarning(UserWarning):
    """Sample sizes deviate from the balanced-design ratio M = floor(N q / p)."""


@dataclass(frozen=True)
class PointCloud:
    """An ordered, finite sample of d-dimensional points.

    ``points`` is an (n, dim) float64 array, read-only after construction.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise HPDivError(f"points must be a 2-D array, got ndim={pts.ndim}")
        if pts.shape[0] == 0:
            raise EmptyCloud("point cloud must contain at least one point")
        if not np.isfinite(pts).all():
            raise HPDivError("point coordinates must be finite")
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


# Label conventions for the pooled set: X points first, then Y points.
LABEL_X = 0
LABEL_Y = 1


@dataclass(frozen=True)
class JointSet:
    """The pooled sample Z with per-point labels (X points first, then Y)."""

    cloud: PointCloud
    labels: np.ndarray
    n_x: int
    n_y: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.shape != (len(self.cloud),):
            raise HPDivError("labels must align one-to-one with points")
        if self.n_x + self.n_y != len(self.cloud):
            raise HPDivError("n_x + n_y must equal the pooled point count")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.cloud)

    @property
    def points(self) -> np.ndarray:
        return self.cloud.points


@dataclass(frozen=True)
class MixtureParam:
    """Mixture prior p with its complement q = 1 - p and the ratio eta = p/q."""

    p: float
    q: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (0.0 < p < 1.0) or not math.isfinite(p):
            raise InvalidP(f"p must lie in (0, 1), got {p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", 1.0 - p)
        object.__setattr__(self, "eta", p / (1.0 - p))


METHOD_KNN = "knn"
METHOD_WNN = "wnn"
METHOD_MST = "mst"


@dataclass(frozen=True)
class EstimateResult:
    """A divergence estimate plus the metadata needed to reproduce it.

    ``params`` is method-specific: {"k": int} for knn, the schedule fields
    for wnn, {"dichotomous_edges": int} for mst. When ``clamped`` is set the
    value was clipped into [0, 1]; otherwise the raw affine statistic is
    reported, which can be negative at small sample sizes.
    """

    value: float
    method: str
    n: int
    m: int
    p: float
    params: dict[str, Any]
    clamped: bool


def expected_m(n: int, p: float) -> int:
    """Balanced-design size floor(N q / p) for the second sample."""
    mix = MixtureParam(p)
    return int(math.floor(n * mix.q / mix.p))


def validate_pair(x: PointCloud, y: PointCloud, p: float) -> JointSet:
    """Validate a two-sample input and pool it into a labeled JointSet.

    X points occupy indices 0..n_x-1 and Y points follow, preserving input
    order. Emits a SampleRatioWarning when |M - floor(Nq/p)| > 1; unbalanced
    designs are accepted because real datasets fix M independently.
    """
    if not isinstance(x, PointCloud):
        x = PointCloud(x)
    if not isinstance(y, PointCloud):
        y = PointCloud(y)
    MixtureParam(p)  # raises InvalidP
    if x.dim != y.dim:
        raise DimensionMismatch(f"x has dim {x.dim} but y has dim {y.dim}")
    n, m = len(x), len(y)
    m_expected = expected_m(n, p)
    if abs(m - m_expected) > 1:
        warnings.warn(
            f"sample sizes deviate from the balanced design: "
            f"M={m} but floor(Nq/p)={m_expected} for N={n}, p={p}",
            SampleRatioWarning,
            stacklevel=2,
        )
    pooled = PointCloud(np.vstack([x.points, y.points]))
    labels = np.concatenate(
        [np.full(n, LABEL_X, np.int8), np.full(m, LABEL_Y, np.int8)]
    )
    return JointSet(cloud=pooled, labels=labels, n_x=n, n_y=m)


def finish_estimate(raw_value: float, clamp: bool) -> tuple[float, bool]:
    """Apply the optional [0, 1] clamp to a raw affine statistic."""
    if clamp:
        return float(min(1.0, max(0.0, raw_value))), True
    return float(raw_value), False
