import numpy as np
import pytest

from hpdiv import PointCloud


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_cloud(rng, n: int, d: int, scale: float = 1.0) -> PointCloud:
    return PointCloud(rng.normal(0.0, scale, size=(n, d)))


def tie_free(points: np.ndarray) -> bool:
    """True when every point's neighbor distances are pairwise distinct."""
    pts = np.asarray(points)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    n = len(pts)
    for i in range(n):
        row = np.delete(d2[i], i)
        if len(np.unique(row)) != n - 1:
            return False
    return True


@pytest.fixture
def hand_pair():
    """The 1-D worked example: X = {0, 2}, Y = {1, 3}."""
    return PointCloud([[0.0], [2.0]]), PointCloud([[1.0], [3.0]])
