import math

import numpy as np
import pytest
from scipy.stats import norm

from hpdiv import (
    DimTooHigh,
    NonOverlappingSupportWarning,
    UnsupportedP,
    bayes_bounds,
    density,
    true_divergence,
    truncated_normal,
    uniform_box,
)

from oracles import quad_bayes_error_1d, quad_divergence_1d

# frozen by adaptive Gauss-Kronrod quadrature over the analytic truncated
# densities: TruncNormal(0,1,[-5,5]) vs TruncNormal(1,1,[-5,5]) at p = 1/2
D_SHIFT_1D = 0.2040420025082429


def tnorm_pdf(mu, s2, lo, hi):
    z = norm.cdf((hi - mu) / math.sqrt(s2)) - norm.cdf((lo - mu) / math.sqrt(s2))
    return lambda t: (
        norm.pdf(t, mu, math.sqrt(s2)) / z if lo <= t <= hi else 0.0
    )


class TestDensity:
    def test_uniform_volume(self):
        u = uniform_box([(-5, 5), (-5, 5)])
        assert density(u, [0.0, 0.0]) == pytest.approx(1 / 100)

    def test_outside_box_zero(self):
        u = uniform_box([(-5, 5), (-5, 5)])
        assert density(u, [6.0, 0.0]) == 0.0
        f = truncated_normal([0.0], 1.0, (-5, 5))
        assert density(f, [5.5]) == 0.0

    def test_gaussian_ratio_cancels_normalizer(self):
        f = truncated_normal([0.0], 1.0, (-5, 5))
        ratio = density(f, [0.0]) / density(f, [1.0])
        assert ratio == pytest.approx(math.exp(0.5), rel=1e-12)

    def test_integrates_to_one(self):
        f = truncated_normal([0.0, 0.5], [1.0, 2.0], (-4, 4))
        grid = np.linspace(-4, 4, 501)
        xx, yy = np.meshgrid(grid, grid, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        vals = density(f, pts).reshape(501, 501)
        h = grid[1] - grid[0]
        w = np.full(501, h)
        w[0] = w[-1] = h / 2
        assert w @ vals @ w == pytest.approx(1.0, abs=1e-6)

    def test_vectorized_matches_scalar(self):
        f = truncated_normal([0.0, 0.0], 1.0, (-5, 5))
        pts = np.array([[0.0, 0.0], [1.0, -1.0], [9.0, 0.0]])
        vec = density(f, pts)
        assert vec.tolist() == [density(f, p) for p in pts]


class TestTrueDivergence:
    def test_identical_specs_zero(self):
        f = truncated_normal([0.0], 1.0, (-5, 5))
        assert true_divergence(f, f, 0.5) == pytest.approx(0.0, abs=2e-6)

    def test_disjoint_boxes_one(self):
        a = uniform_box((0.0, 1.0))
        b = uniform_box((2.0, 3.0))
        with pytest.warns(NonOverlappingSupportWarning):
            assert true_divergence(a, b, 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_frozen_shift_value(self):
        fx = truncated_normal([0.0], 1.0, (-5, 5))
        fy = truncated_normal([1.0], 1.0, (-5, 5))
        assert true_divergence(fx, fy, 0.5) == pytest.approx(D_SHIFT_1D, abs=1e-6)

    def test_matches_adaptive_quadrature_other_p(self):
        fx = truncated_normal([0.0], 1.0, (-5, 5))
        fy = truncated_normal([1.0], 2.0, (-5, 5))
        for p in (0.3, 0.5, 0.7):
            oracle = quad_divergence_1d(
                tnorm_pdf(0.0, 1.0, -5, 5), tnorm_pdf(1.0, 2.0, -5, 5), p, -5, 5
            )
            assert true_divergence(fx, fy, p) == pytest.approx(oracle, abs=1e-6)

    def test_symmetric_at_half(self):
        fx = truncated_normal([0.0, 0.0], 1.0, (-5, 5))
        fy = truncated_normal([1.0, 0.0], 2.0, (-5, 5))
        a = true_divergence(fx, fy, 0.5)
        b = true_divergence(fy, fx, 0.5)
        assert a == pytest.approx(b, abs=1e-9)
        assert 0.0 <= a <= 1.0

    def test_dim_cap(self):
        f = truncated_normal(np.zeros(4), 1.0, (-5, 5))
        with pytest.raises(DimTooHigh):
            true_divergence(f, f, 0.5)

    def test_3d_identical_and_disjoint(self):
        f = truncated_normal(np.zeros(3), 1.0, (-3, 3))
        assert true_divergence(f, f, 0.5, grid=41) == pytest.approx(0.0, abs=5e-4)


class TestBayesBounds:
    def test_indistinguishable(self):
        b = bayes_bounds(0.0, 0.5)
        assert (b.lower, b.upper) == (0.5, 0.5)

    def test_separable(self):
        b = bayes_bounds(1.0, 0.5)
        assert (b.lower, b.upper) == (0.0, 0.0)

    def test_quarter(self):
        b = bayes_bounds(0.25, 0.5)
        assert b.lower == pytest.approx(0.25)
        assert b.upper == pytest.approx(0.375)

    def test_clamps_raw_estimates(self):
        assert bayes_bounds(-0.7, 0.5).lower == 0.5
        assert bayes_bounds(1.4, 0.5).upper == 0.0

    def test_rejects_other_p(self):
        with pytest.raises(UnsupportedP):
            bayes_bounds(0.3, 0.4)

    @pytest.mark.parametrize("d", np.linspace(0, 1, 11).tolist())
    def test_ordering(self, d):
        b = bayes_bounds(d, 0.5)
        assert 0.0 <= b.lower <= b.upper <= 0.5

    @pytest.mark.parametrize("mu,s2", [(1.0, 1.0), (0.5, 1.0), (1.5, 2.0)])
    def test_sandwich_on_gaussian_pairs(self, mu, s2):
        """True Bayes error must land inside the divergence-derived bracket."""
        fx_pdf = tnorm_pdf(0.0, 1.0, -5, 5)
        fy_pdf = tnorm_pdf(mu, s2, -5, 5)
        err = quad_bayes_error_1d(fx_pdf, fy_pdf, -5, 5)
        fx = truncated_normal([0.0], 1.0, (-5, 5))
        fy = truncated_normal([mu], s2, (-5, 5))
        b = bayes_bounds(true_divergence(fx, fy, 0.5), 0.5)
        assert b.lower - 1e-9 <= err <= b.upper + 1e-9
