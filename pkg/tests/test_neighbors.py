import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpdiv import JointSet, KTooLarge, PointCloud, build_index, kth_neighbor, neighbor_table, validate_pair
from hpdiv.core import HPDivError


from oracles import brute_kth, scan_rank_table


def make_joint(points):
    """Wrap raw points as a JointSet (labels irrelevant for neighbor queries)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1:
        return JointSet(cloud=PointCloud(pts), labels=np.zeros(1, np.int8), n_x=1, n_y=0)
    half = max(1, len(pts) // 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return validate_pair(PointCloud(pts[:half]), PointCloud(pts[half:]), 0.5)


class TestHandCases:
    def test_nearest_by_geometry(self):
        z = make_joint([[0.0], [1.0], [3.0]])
        idx = build_index(z)
        assert kth_neighbor(idx, 0, 1) == 1

    def test_second_nearest(self):
        z = make_joint([[0.0], [1.0], [3.0]])
        idx = build_index(z)
        assert kth_neighbor(idx, 0, 2) == 2

    def test_tie_lower_index_wins(self):
        # point 1 sits exactly between 0 and 2
        z = make_joint([[0.0], [1.0], [2.0]])
        idx = build_index(z)
        assert kth_neighbor(idx, 1, 1) == 0
        assert kth_neighbor(idx, 1, 2) == 2

    def test_k_too_large(self):
        z = make_joint([[0.0], [1.0], [3.0]])
        idx = build_index(z)
        with pytest.raises(KTooLarge):
            kth_neighbor(idx, 0, 3)

    def test_single_point_any_k_errors(self):
        z = make_joint([[1.0, 2.0]])
        idx = build_index(z)
        with pytest.raises(KTooLarge):
            kth_neighbor(idx, 0, 1)

    def test_bad_point_index(self):
        z = make_joint([[0.0], [1.0]])
        idx = build_index(z)
        with pytest.raises(HPDivError):
            kth_neighbor(idx, 5, 1)


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(8))
    @pytest.mark.parametrize("dim", [1, 2, 5])
    def test_full_table_matches_scan(self, seed, dim):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 60))
        z = make_joint(rng.normal(size=(n, dim)))
        idx = build_index(z)
        table = neighbor_table(idx, n - 1)
        np.testing.assert_array_equal(table, scan_rank_table(z.points))

    @pytest.mark.parametrize("seed", range(4))
    def test_duplicates_match_scan(self, seed):
        rng = np.random.default_rng(seed)
        base = rng.normal(size=(12, 2))
        pts = np.vstack([base, base[:5], base[:3]])  # heavy duplication
        z = make_joint(pts)
        idx = build_index(z)
        table = neighbor_table(idx, len(pts) - 1)
        np.testing.assert_array_equal(table, scan_rank_table(z.points))

    def test_integer_grid_ties_match_scan(self):
        # lattice points generate massed exact ties at every radius
        xs, ys = np.meshgrid(np.arange(6.0), np.arange(6.0))
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        z = make_joint(pts)
        idx = build_index(z)
        table = neighbor_table(idx, len(pts) - 1)
        np.testing.assert_array_equal(table, scan_rank_table(z.points))

    @given(st.integers(0, 10_000), st.integers(2, 24), st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_single_queries_match_pure_python(self, seed, n, dim):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(n, dim))
        z = make_joint(pts)
        idx = build_index(z)
        i = int(rng.integers(0, n))
        k = int(rng.integers(1, n))
        assert kth_neighbor(idx, i, k) == brute_kth(z.points, i, k)


class TestInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_self_exclusion_and_monotonic(self, seed):
        rng = np.random.default_rng(seed)
        z = make_joint(rng.normal(size=(40, 3)))
        idx = build_index(z)
        table = neighbor_table(idx, 39)
        for i in range(40):
            assert i not in table[i]
            d = np.linalg.norm(z.points[table[i]] - z.points[i], axis=1)
            assert (np.diff(d) >= 0).all()

    def test_single_query_consistent_with_table(self):
        rng = np.random.default_rng(11)
        z = make_joint(rng.normal(size=(30, 2)))
        idx = build_index(z)
        table = neighbor_table(idx, 29)
        for i in [0, 7, 29]:
            for k in [1, 5, 29]:
                assert kth_neighbor(idx, i, k) == table[i, k - 1]
