"""Gaussian numerics: Matern forms, kriging, log-density, orthant CDF, samplers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from stratasim.errors import CapacityError, NumericError, ParameterError
from stratasim.gaussnum import (
    MaternSpec,
    chol_psd,
    condition,
    cov_matrix,
    matern,
    mvn_cdf_below,
    mvn_logpdf,
    sample_gaussian_field,
    sample_truncated_mvn,
)


def bivariate_orthant(rho):
    """Closed form for P(X<0, Y<0) with standard margins and correlation rho."""
    return 0.25 + np.arcsin(rho) / (2.0 * np.pi)


class TestMatern:
    def test_zero_lag(self):
        for nu in (0.5, 1.5, 2.5):
            assert matern(0.0, MaternSpec(nu, 2.0)) == 1.0

    def test_closed_form_values_at_range(self):
        assert matern(1.0, MaternSpec(1.5, 1.0)) == pytest.approx(2.0 / np.e, abs=1e-12)
        assert matern(1.0, MaternSpec(0.5, 1.0)) == pytest.approx(1.0 / np.e, abs=1e-12)
        assert matern(1.0, MaternSpec(2.5, 1.0)) == pytest.approx(
            (1 + 1 + 1 / 3) * np.exp(-1.0), abs=1e-12
        )

    def test_invalid_nu_and_alpha(self):
        with pytest.raises(ParameterError):
            MaternSpec(1.0, 1.0)
        with pytest.raises(ParameterError):
            MaternSpec(1.5, 0.0)

    @given(
        st.sampled_from([0.5, 1.5, 2.5]),
        st.floats(0.05, 50.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_nonincreasing_in_lag(self, nu, alpha):
        spec = MaternSpec(nu, alpha)
        h = np.linspace(0.0, 10.0 * alpha, 200)
        vals = matern(h, spec)
        assert vals[0] == 1.0
        assert np.all(np.diff(vals) <= 1e-14)
        assert np.all((0.0 <= vals) & (vals <= 1.0))


class TestCondition:
    def test_zero_data_simple_kriging_variance(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0]])
        joint = cov_matrix(pts, MaternSpec(1.5, 1.0))
        rho = joint[0, 1]
        m, v = condition(joint, [0], [1], [0.0])
        assert m == pytest.approx(0.0, abs=1e-14)
        assert v[0, 0] == pytest.approx(1.0 - rho**2, abs=1e-12)

    def test_far_point_is_prior(self):
        pts = np.array([[0.0, 0.0], [1e6, 0.0]])
        joint = cov_matrix(pts, MaternSpec(1.5, 1.0))
        m, v = condition(joint, [0], [1], [3.0])
        assert m[0] == pytest.approx(0.0, abs=1e-12)
        assert v[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_empty_unknown_block(self):
        joint = np.eye(2)
        m, v = condition(joint, [0, 1], [], [1.0, 2.0])
        assert m.size == 0 and v.shape == (0, 0)

    def test_matches_brute_force_inversion(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = rng.integers(3, 7)
            pts = rng.uniform(0, 5, size=(n, 2))
            joint = cov_matrix(pts, MaternSpec(1.5, float(rng.uniform(0.5, 3.0))))
            k = int(rng.integers(1, n))
            perm = rng.permutation(n)
            known, unknown = perm[:k], perm[k:]
            w = rng.standard_normal(k)
            m, v = condition(joint, known, unknown, w)
            s_nn = joint[np.ix_(known, known)]
            s_un = joint[np.ix_(unknown, known)]
            s_uu = joint[np.ix_(unknown, unknown)]
            inv = np.linalg.inv(s_nn)
            assert np.allclose(m, s_un @ inv @ w, atol=1e-10)
            assert np.allclose(v, s_uu - s_un @ inv @ s_un.T, atol=1e-10)

    def test_conditional_variance_bounded_by_prior(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(0, 3, size=(6, 2))
        joint = cov_matrix(pts, MaternSpec(2.5, 1.0))
        m, v = condition(joint, [0, 1], [2, 3, 4, 5], rng.standard_normal(2))
        assert np.all(np.diag(v) <= 1.0 + 1e-10)


class TestCholPsd:
    def test_near_duplicate_points_jittered(self):
        pts = np.array([[0.0, 0.0], [1e-9, 0.0], [1.0, 1.0]])
        chol = chol_psd(cov_matrix(pts, MaternSpec(1.5, 1.0)))
        assert np.all(np.isfinite(chol))

    def test_indefinite_matrix_fails_with_condition_estimate(self):
        a = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
        with pytest.raises(NumericError, match="condition"):
            chol_psd(a)


class TestMvnLogpdf:
    def test_univariate_standard(self):
        assert mvn_logpdf([0.0], [0.0], [[1.0]]) == pytest.approx(
            -0.5 * np.log(2 * np.pi), abs=1e-12
        )

    def test_independence_sum(self):
        got = mvn_logpdf([0.3, -1.2], [0.0, 0.0], np.eye(2))
        want = norm.logpdf(0.3) + norm.logpdf(-1.2)
        assert got == pytest.approx(want, abs=1e-12)

    def test_correlated_bivariate_formula(self):
        rho = 0.5
        x1 = x2 = 1.0
        got = mvn_logpdf([x1, x2], [0, 0], [[1, rho], [rho, 1]])
        want = (
            -np.log(2 * np.pi)
            - 0.5 * np.log(1 - rho**2)
            - (x1**2 - 2 * rho * x1 * x2 + x2**2) / (2 * (1 - rho**2))
        )
        assert got == pytest.approx(want, abs=1e-12)


class TestMvnCdfBelow:
    def test_dim1_exact(self):
        prob, err = mvn_cdf_below([0.0], [0.0], [[1.0]])
        assert prob == 0.5 and err == 0.0

    def test_bivariate_closed_form(self):
        for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
            prob, err = mvn_cdf_below(
                [0.0, 0.0], [0.0, 0.0], [[1.0, rho], [rho, 1.0]], tol=1e-4
            )
            assert prob == pytest.approx(bivariate_orthant(rho), abs=1e-3)

    def test_trivariate_independence(self):
        prob, _ = mvn_cdf_below([0, 0, 0], [0, 0, 0], np.eye(3), tol=1e-4)
        assert prob == pytest.approx(0.125, abs=1e-3)

    def test_monotone_in_bounds(self):
        cov = [[1.0, 0.4], [0.4, 1.0]]
        probs = [
            mvn_cdf_below([b, 0.0], [0, 0], cov, tol=1e-5)[0]
            for b in (-1.0, 0.0, 1.0, 2.0)
        ]
        assert np.all(np.diff(probs) > 0)

    def test_deterministic_by_default(self):
        cov = cov_matrix(np.random.default_rng(1).uniform(0, 3, (5, 2)),
                         MaternSpec(1.5, 1.0))
        a = mvn_cdf_below(np.full(5, -0.3), np.zeros(5), cov)
        b = mvn_cdf_below(np.full(5, -0.3), np.zeros(5), cov)
        assert a == b

    def test_dimension_cap(self):
        with pytest.raises(CapacityError):
            mvn_cdf_below(np.zeros(5), np.zeros(5), np.eye(5), dim_cap=4)

    def test_mean_shift(self):
        prob, _ = mvn_cdf_below([1.0], [1.0], [[4.0]])
        assert prob == 0.5


class TestSampleTruncatedMvn:
    def test_dim1_matches_inverse_mills(self):
        rng = np.random.default_rng(3)
        draws = np.array([
            sample_truncated_mvn([0.0], [[1.0]], 0.0, rng)[0] for _ in range(10_000)
        ])
        want = -norm.pdf(0) / norm.cdf(0)  # ~ -0.7979
        se = draws.std() / np.sqrt(draws.size)
        assert abs(draws.mean() - want) < 3 * se

    def test_support_constraint_hard(self):
        rng = np.random.default_rng(4)
        cov = [[1.0, 0.8], [0.8, 1.0]]
        for _ in range(100):
            x = sample_truncated_mvn([0.0, 0.0], cov, -1.0, rng)
            assert np.all(x < -1.0)

    def test_independent_coordinates_uncorrelated(self):
        rng = np.random.default_rng(5)
        draws = np.array([
            sample_truncated_mvn([0.0, 0.0], np.eye(2), 0.5, rng)
            for _ in range(800)
        ])
        corr = np.corrcoef(draws.T)[0, 1]
        assert abs(corr) < 3.0 / np.sqrt(draws.shape[0])


class TestSampleGaussianField:
    def test_deterministic_given_seed(self):
        pts = np.random.default_rng(0).uniform(0, 10, (30, 2))
        spec = MaternSpec(1.5, 2.0)
        a = sample_gaussian_field(pts, spec, np.random.default_rng(9))
        b = sample_gaussian_field(pts, spec, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_conditioning_interpolates(self):
        rng = np.random.default_rng(11)
        cpts = rng.uniform(0, 10, (5, 2))
        cvals = rng.standard_normal(5)
        pts = np.vstack([cpts, rng.uniform(0, 10, (40, 2))])
        f = sample_gaussian_field(
            pts, MaternSpec(1.5, 2.0), rng, cond_points=cpts, cond_values=cvals
        )
        assert np.max(np.abs(f[:5] - cvals)) < 1e-6

    def test_budget_enforced(self):
        pts = np.zeros((100, 2))
        with pytest.raises(CapacityError):
            sample_gaussian_field(pts, MaternSpec(1.5, 1.0),
                                  np.random.default_rng(0), budget=50)

    def test_variogram_matches_model(self):
        # 1-D transect; empirical variogram of unconditional draws vs 1 - rho(h)
        spec = MaternSpec(1.5, 3.0)
        x = np.linspace(0, 10, 60)
        pts = np.column_stack([x, np.zeros_like(x)])
        rng = np.random.default_rng(12)
        draws = np.array([sample_gaussian_field(pts, spec, rng) for _ in range(200)])
        for lag in (3, 9, 18):  # h = 0.5, 1.5, 3.0 <= alpha
            h = x[lag] - x[0]
            gamma = 0.5 * np.mean((draws[:, lag:] - draws[:, :-lag]) ** 2)
            want = 1.0 - matern(h, spec)
            assert gamma == pytest.approx(want, rel=0.10)
