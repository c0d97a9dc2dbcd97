import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpdiv import (
    KCollision,
    KTooLarge,
    PointCloud,
    WeightSchedule,
    build_index,
    count_dichotomous,
    knn_estimate,
    resolve_schedule,
    validate_pair,
    wnn_estimate,
)

from conftest import tie_free


def quiet_pair(x, y, p=0.5):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return validate_pair(PointCloud(x), PointCloud(y), p)


def far_clusters(n=8, d=2, seed=0):
    rng = np.random.default_rng(seed)
    x = PointCloud(rng.normal(0, 0.1, size=(n, d)))
    y = PointCloud(rng.normal(0, 0.1, size=(n, d)) + 1e6)
    return x, y


class TestCountDichotomous:
    def test_hand_counts(self, hand_pair):
        x, y = hand_pair
        z = validate_pair(x, y, 0.5)
        idx = build_index(z)
        assert count_dichotomous(z, idx, 1) == 4
        assert count_dichotomous(z, idx, 2) == 2

    def test_far_clusters_zero(self):
        x, y = far_clusters()
        z = validate_pair(x, y, 0.5)
        idx = build_index(z)
        for k in (1, 3, 7):
            assert count_dichotomous(z, idx, k) == 0

    def test_k_too_large(self, hand_pair):
        x, y = hand_pair
        z = validate_pair(x, y, 0.5)
        idx = build_index(z)
        with pytest.raises(KTooLarge):
            count_dichotomous(z, idx, 4)


class TestKnnEstimate:
    def test_hand_values(self, hand_pair):
        x, y = hand_pair
        assert knn_estimate(x, y, 1, 0.5).value == -1.0
        assert knn_estimate(x, y, 2, 0.5).value == 0.0

    def test_far_clusters_one(self):
        x, y = far_clusters()
        assert knn_estimate(x, y, 3, 0.5).value == 1.0

    def test_clamp(self, hand_pair):
        x, y = hand_pair
        res = knn_estimate(x, y, 1, 0.5, clamp=True)
        assert res.value == 0.0 and res.clamped

    def test_metadata(self, hand_pair):
        x, y = hand_pair
        res = knn_estimate(x, y, 1, 0.5)
        assert res.method == "knn" and res.params["k"] == 1
        assert res.n == 2 and res.m == 2 and not res.clamped


class TestWnnEstimate:
    def test_hand_value(self, hand_pair):
        x, y = hand_pair
        sched = resolve_schedule([1.0, 2.0], 1, 2)
        np.testing.assert_array_equal(sched.w, [2.0, -1.0])
        assert wnn_estimate(x, y, sched, 0.5).value == -2.0

    def test_degenerate_single_weight_equals_knn(self):
        rng = np.random.default_rng(5)
        x = PointCloud(rng.normal(size=(10, 2)))
        y = PointCloud(rng.normal(size=(10, 2)))
        sched = WeightSchedule(
            l_values=np.array([1.0]), d=2, w=np.array([1.0]),
            k_values=np.array([3]), n=10,
        )
        assert wnn_estimate(x, y, sched, 0.5).value == knn_estimate(x, y, 3, 0.5).value

    def test_far_clusters_one(self):
        x, y = far_clusters(n=40)
        sched = resolve_schedule([1.0, 2.0], 1, 40)
        assert wnn_estimate(x, y, sched, 0.5).value == 1.0

    def test_collision_rejected(self, hand_pair):
        x, y = hand_pair
        sched = WeightSchedule(
            l_values=np.array([1.0, 1.1]), d=1, w=np.array([2.0, -1.0]),
            k_values=np.array([1, 1]), n=2,
        )
        with pytest.raises(KCollision):
            wnn_estimate(x, y, sched, 0.5)

    def test_rank_bound_rejected(self, hand_pair):
        x, y = hand_pair
        sched = WeightSchedule(
            l_values=np.array([1.0, 2.0]), d=1, w=np.array([2.0, -1.0]),
            k_values=np.array([1, 9]), n=2,
        )
        with pytest.raises(KTooLarge):
            wnn_estimate(x, y, sched, 0.5)


class TestEstimatorProperties:
    @pytest.mark.parametrize("seed", range(10))
    def test_ensemble_identity(self, seed):
        """wnn == sum_l W(l) knn(K(l)) to machine precision."""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(8, 40))
        x = PointCloud(rng.normal(size=(n, 2)))
        y = PointCloud(rng.normal(size=(n, 2)) + 0.3)
        sched = resolve_schedule([1.0, 2.0, 3.0], 2, n)
        whole = wnn_estimate(x, y, sched, 0.5).value
        parts = sum(
            w * knn_estimate(x, y, int(k), 0.5).value
            for w, k in zip(sched.w, sched.k_values)
        )
        assert whole == pytest.approx(parts, abs=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_range_bounds(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(3, 20)), int(rng.integers(3, 20))
        x = PointCloud(rng.normal(size=(n, 1)))
        y = PointCloud(rng.normal(size=(m, 1)))
        lo = 1 - (n + m) ** 2 / (2 * n * m)
        for k in (1, 2):
            v = quiet_knn(x, y, k)
            assert lo - 1e-12 <= v <= 1.0

    @pytest.mark.parametrize("seed", range(6))
    def test_wnn_weighted_range_bounds(self, seed):
        """Negative weights widen the attainable interval: the count bound
        0 <= |E_k| <= N+M propagates through the weighted sum."""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 24))
        x = PointCloud(rng.normal(size=(n, 1)))
        y = PointCloud(rng.normal(size=(n, 1)))
        sched = resolve_schedule([1.0, 2.0], 1, n)
        v = wnn_estimate(x, y, sched, 0.5).value
        t = (2 * n) ** 2 / (2 * n * n)
        pos = float(np.clip(sched.w, 0, None).sum())
        neg = float(np.clip(sched.w, None, 0).sum())
        assert 1 - t * pos - 1e-12 <= v <= 1 - t * neg + 1e-12

    @pytest.mark.parametrize("seed", range(8))
    def test_label_swap_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(4, 16)), int(rng.integers(4, 16))
        x = PointCloud(rng.normal(size=(n, 2)))
        y = PointCloud(rng.normal(size=(m, 2)))
        if not tie_free(np.vstack([x.points, y.points])):
            pytest.skip("random draw produced a distance tie")
        k = int(rng.integers(1, min(n, m)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert knn_estimate(x, y, k, 0.3).value == knn_estimate(y, x, k, 0.7).value

    @pytest.mark.parametrize("seed", range(8))
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 24))
        x = rng.normal(size=(n, 2))
        y = rng.normal(size=(n, 2)) + 0.25
        if not tie_free(np.vstack([x, y])):
            pytest.skip("random draw produced a distance tie")
        sched = resolve_schedule([1.0, 1.6, 2.2], 2, n)
        base_knn = knn_estimate(PointCloud(x), PointCloud(y), 2, 0.5).value
        base_wnn = wnn_estimate(PointCloud(x), PointCloud(y), sched, 0.5).value
        px, py = rng.permutation(n), rng.permutation(n)
        assert knn_estimate(PointCloud(x[px]), PointCloud(y[py]), 2, 0.5).value == base_knn
        assert wnn_estimate(PointCloud(x[px]), PointCloud(y[py]), sched, 0.5).value == base_wnn

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_wnn_two_forms_agree(self, seed):
        """1 - t*sum(w c) versus sum(w (1 - t c)): identical counts either way."""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 30))
        x = PointCloud(rng.normal(size=(n, 1)))
        y = PointCloud(rng.normal(size=(n, 1)) + 0.5)
        sched = resolve_schedule([1.0, 2.5], 1, n)
        z = validate_pair(x, y, 0.5)
        idx = build_index(z)
        t = (2 * n) / (2 * n * n)
        counts = [count_dichotomous(z, idx, int(k)) for k in sched.k_values]
        form_a = 1 - t * sum(w * c for w, c in zip(sched.w, counts))
        form_b = sum(w * (1 - t * c) for w, c in zip(sched.w, counts))
        assert form_a == pytest.approx(form_b, abs=1e-12)
        assert wnn_estimate(x, y, sched, 0.5).value == pytest.approx(form_a, abs=1e-15)


def quiet_knn(x, y, k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return knn_estimate(x, y, k, 0.5).value
