"""Seeded synthetic samplers for the benchmark scenarios.

Streams are counter-based (Philox), so identical (spec, seed) pairs
reproduce bit-identical samples and parallel trials can own disjoint
streams derived as base_seed XOR trial_index without coordination.

Truncated normals are drawn by rejection from the untruncated Gaussian:
the benchmark boxes sit at several standard deviations, so acceptance is
essentially 1 and nothing smarter is warranted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HPDivError, PointCloud
from .oracle import DistributionSpec, KIND_TRUNC_NORMAL, KIND_UNIFORM

# Rejection sampling gives up when fewer than this fraction of a probe
# batch lands inside the box.
_MIN_ACCEPT_RATE = 1e-4
_PROBE = 20_000


class RejectionStall(HPDivError):
    """The box excludes essentially all Gaussian mass; sampling cannot finish."""


@dataclass
class SamplerState:
    """Single-owner sampling stream for one spec. Not thread-shared."""

    spec: DistributionSpec
    seed: int
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.seed < 0:
            raise HPDivError("seed must be a nonnegative integer")
        self._rng = np.random.Generator(np.random.Philox(key=self.seed))


def make_state(spec: DistributionSpec, seed: int) -> SamplerState:
    return SamplerState(spec=spec, seed=int(seed))


def trial_seed(base_seed: int, trial_index: int, role: int = 0) -> int:
    """Disjoint stream seed for one trial; role separates paired streams
    (0 for the X sample, 1 for Y) within the same trial."""
    return ((int(base_seed) ^ int(trial_index)) << 1) | (role & 1)


def sample(state: SamplerState, n: int) -> PointCloud:
    """Draw n i.i.d. points from the state's spec."""
    if n < 1:
        raise HPDivError(f"sample size must be >= 1, got {n}")
    spec = state.spec
    rng = state._rng
    lo, hi = spec.box[:, 0], spec.box[:, 1]
    if spec.kind == KIND_UNIFORM:
        pts = rng.uniform(lo, hi, size=(n, spec.dim))
        return PointCloud(pts)
    if spec.kind != KIND_TRUNC_NORMAL:
        raise HPDivError(f"cannot sample from kind {spec.kind!r}")

    if spec.cov.ndim == 1:
        scale = np.sqrt(spec.cov)
        draw = lambda size: spec.mean + scale * rng.standard_normal((size, spec.dim))
    else:
        chol = np.linalg.cholesky(spec.cov)
        draw = lambda size: spec.mean + rng.standard_normal((size, spec.dim)) @ chol.T

    kept: list[np.ndarray] = []
    have = 0
    probe = draw(_PROBE)
    accepted = probe[((probe >= lo) & (probe <= hi)).all(axis=1)]
    rate = len(accepted) / _PROBE
    if rate < _MIN_ACCEPT_RATE:
        raise RejectionStall(
            f"acceptance rate {rate:.2e} below {_MIN_ACCEPT_RATE:.0e}; "
            f"the box excludes essentially all Gaussian mass"
        )
    kept.append(accepted)
    have += len(accepted)
    while have < n:
        need = n - have
        batch = draw(int(need / max(rate, _MIN_ACCEPT_RATE) * 1.2) + 64)
        good = batch[((batch >= lo) & (batch <= hi)).all(axis=1)]
        kept.append(good)
        have += len(good)
    return PointCloud(np.vstack(kept)[:n])
