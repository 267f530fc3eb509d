"""Thickness transform, layer likelihood, moments, TCD, empirical init."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from stratasim.errors import ParameterError
from stratasim.likelihood import (
    LayerData,
    LayerParams,
    complete_loglik,
    init_from_empirical,
    jacobian_inv,
    layer_data_from_columns,
    layer_loglik,
    phi_inverse,
    phi_transform,
    tcd,
    thickness_moments,
)
from stratasim.core import AugmentedConfiguration


class TestTransform:
    def test_identity_jacobian(self):
        z = np.array([0.1, 1.0, 7.3])
        assert np.allclose(jacobian_inv(z, 1.0, 1.0), 1.0)

    def test_hand_value(self):
        # d/dz (z/2)^(1/2) at z=2 is 1/(2*sqrt(2*2)) = 0.25
        assert jacobian_inv(2.0, 2.0, 2.0) == pytest.approx(0.25, abs=1e-12)

    @given(
        st.floats(0.01, 50.0),
        st.floats(0.1, 20.0),
        st.floats(0.3, 3.9),
    )
    @settings(max_examples=60, deadline=None)
    def test_round_trip(self, z, mu, beta):
        assert phi_transform(phi_inverse(z, mu, beta), mu, beta) == pytest.approx(
            z, rel=1e-12
        )

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(100)
        for _ in range(1000):
            z = rng.uniform(0.05, 20.0)
            mu = rng.uniform(0.2, 10.0)
            beta = rng.uniform(0.3, 3.8)
            h = 1e-6 * z
            fd = (phi_inverse(z + h, mu, beta) - phi_inverse(z - h, mu, beta)) / (2 * h)
            assert jacobian_inv(z, mu, beta) == pytest.approx(fd, rel=1e-6)

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            phi_transform(1.0, -1.0, 1.0)
        with pytest.raises(ParameterError):
            phi_transform(1.0, 1.0, 5.0)
        with pytest.raises(ParameterError):
            jacobian_inv(0.0, 1.0, 1.0)


PARAMS = LayerParams(p=0.5, mu=1.0, beta=1.0, alpha=1.0)


class TestLayerLoglik:
    def test_single_positive_site(self):
        z = 0.7
        data = LayerData([z], [[0.0, 0.0]], np.empty((0, 2)))
        w = phi_inverse(z, PARAMS.mu, PARAMS.beta) + PARAMS.tau
        want = norm.logpdf(w) + np.log(jacobian_inv(z, PARAMS.mu, PARAMS.beta))
        assert layer_loglik(data, PARAMS) == pytest.approx(want, abs=1e-12)

    def test_far_apart_independence_limit(self):
        z = 1.3
        data = LayerData([z], [[0.0, 0.0]], [[1e7, 0.0]])
        w = phi_inverse(z, PARAMS.mu, PARAMS.beta) + PARAMS.tau
        want = (
            norm.logpdf(w)
            + np.log(jacobian_inv(z, PARAMS.mu, PARAMS.beta))
            + np.log(1.0 - PARAMS.p)
        )
        assert layer_loglik(data, PARAMS) == pytest.approx(want, abs=1e-6)

    def test_two_independent_zeros(self):
        data = LayerData(np.empty(0), np.empty((0, 2)), [[0.0, 0.0], [1e7, 0.0]])
        want = 2.0 * np.log(1.0 - PARAMS.p)
        assert layer_loglik(data, PARAMS) == pytest.approx(want, abs=1e-4)

    def test_no_sites(self):
        data = LayerData(np.empty(0), np.empty((0, 2)), np.empty((0, 2)))
        assert layer_loglik(data, PARAMS) == 0.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(21)
        locs = rng.uniform(0, 10, (6, 2))
        z = np.array([0.5, 0.0, 1.2, 0.0, 2.0, 0.7])
        base = layer_loglik(layer_data_from_columns(z, locs), PARAMS, cdf_tol=1e-6)
        for _ in range(3):
            perm = rng.permutation(6)
            got = layer_loglik(
                layer_data_from_columns(z[perm], locs[perm]), PARAMS, cdf_tol=1e-6
            )
            assert got == pytest.approx(base, abs=1e-6)

    def test_short_range_independent_site_sum(self):
        rng = np.random.default_rng(22)
        locs = rng.uniform(0, 10, (5, 2))
        z = np.array([0.5, 0.0, 1.2, 0.0, 2.0])
        d_min = min(
            np.linalg.norm(locs[i] - locs[k])
            for i in range(5) for k in range(i + 1, 5)
        )
        params = LayerParams(p=0.5, mu=1.0, beta=1.0, alpha=1e-6 * d_min)
        got = layer_loglik(layer_data_from_columns(z, locs), params, cdf_tol=1e-6)
        pos = z[z > 0]
        w = phi_inverse(pos, params.mu, params.beta) + params.tau
        want = float(
            np.sum(norm.logpdf(w))
            + np.sum(np.log(jacobian_inv(pos, params.mu, params.beta)))
            + 2 * np.log(1 - params.p)
        )
        assert got == pytest.approx(want, abs=1e-4)


class TestCompleteLoglik:
    def test_single_layer_reduction(self):
        locs = [[0.0, 0.0], [3.0, 4.0]]
        configs = [
            AugmentedConfiguration("a", np.array([0.8])),
            AugmentedConfiguration("b", np.array([0.0])),
        ]
        total = complete_loglik(configs, locs, [PARAMS])
        want = layer_loglik(layer_data_from_columns([0.8, 0.0], locs), PARAMS)
        assert total == pytest.approx(want, abs=1e-12)

    def test_additivity_over_layers(self):
        locs = [[0.0, 0.0], [3.0, 4.0]]
        p2 = LayerParams(p=0.3, mu=2.0, beta=1.0, alpha=2.0)
        configs = [
            AugmentedConfiguration("a", np.array([0.8, 1.5])),
            AugmentedConfiguration("b", np.array([0.0, 0.4])),
        ]
        total = complete_loglik(configs, locs, [PARAMS, p2])
        want = layer_loglik(
            layer_data_from_columns([0.8, 0.0], locs), PARAMS
        ) + layer_loglik(layer_data_from_columns([1.5, 0.4], locs), p2)
        assert total == pytest.approx(want, abs=1e-12)

    def test_layer_permutation_symmetry(self):
        locs = [[0.0, 0.0], [3.0, 4.0]]
        p2 = LayerParams(p=0.3, mu=2.0, beta=1.0, alpha=2.0)
        configs = [AugmentedConfiguration("a", np.array([0.8, 1.5]))]
        configs_swapped = [AugmentedConfiguration("a", np.array([1.5, 0.8]))]
        assert complete_loglik(configs, [locs[0]], [PARAMS, p2]) == pytest.approx(
            complete_loglik(configs_swapped, [locs[0]], [p2, PARAMS]), abs=1e-12
        )


class TestMoments:
    def test_symmetric_case_values(self):
        mean, var = thickness_moments(1.0, 0.5)
        assert mean == pytest.approx(2.0 * norm.pdf(0.0), abs=1e-9)  # ~0.797885
        assert var == pytest.approx(0.363380, abs=1e-6)

    def test_linear_scaling_in_mu(self):
        m1, v1 = thickness_moments(1.0, 0.35)
        for mu in (0.5, 2.0, 7.0):
            m, v = thickness_moments(mu, 0.35)
            assert m == pytest.approx(mu * m1, rel=1e-12)
            assert np.sqrt(v) == pytest.approx(mu * np.sqrt(v1), rel=1e-12)

    def test_monte_carlo_grid(self):
        rng = np.random.default_rng(30)
        n = 200_000
        for p in (0.2, 0.5, 0.8):
            for mu in (0.5, 2.0):
                tau = norm.ppf(1 - p)
                w = rng.standard_normal(n)
                zpos = mu * (w[w > tau] - tau)
                mean, var = thickness_moments(mu, p)
                se_m = zpos.std() / np.sqrt(zpos.size)
                assert abs(zpos.mean() - mean) < 3 * se_m
                # variance of the sample variance ~ (m4 - v^2)/n
                m4 = np.mean((zpos - zpos.mean()) ** 4)
                se_v = np.sqrt((m4 - var**2) / zpos.size)
                assert abs(zpos.var() - var) < 3 * se_v

    def test_extreme_p(self):
        tau = norm.ppf(0.001)
        mu = 3.0
        mean, _ = thickness_moments(mu, 0.999)
        assert mean == pytest.approx(mu * (norm.pdf(tau) / 0.999 - tau), abs=1e-9)

    def test_beta_not_one_unsupported(self):
        with pytest.raises(ParameterError):
            thickness_moments(1.0, 0.5, beta=2.0)


class TestTcd:
    def test_boundaries(self):
        assert tcd(0.0, PARAMS) == 0.0
        assert tcd(1e12, PARAMS) == pytest.approx(1.0, abs=1e-12)

    def test_hand_value(self):
        # p=0.5, mu=1, beta=1, z=1 -> (Phi(1) - 0.5) / 0.5
        assert tcd(1.0, PARAMS) == pytest.approx(
            (norm.cdf(1.0) - 0.5) / 0.5, abs=1e-12
        )

    def test_nondecreasing(self):
        z = np.linspace(0, 10, 500)
        params = LayerParams(p=0.3, mu=2.0, beta=1.7, alpha=1.0)
        vals = tcd(z, params)
        assert np.all(np.diff(vals) >= 0)
        assert np.all((0 <= vals) & (vals <= 1))

    def test_matches_simulation(self):
        rng = np.random.default_rng(31)
        params = LayerParams(p=0.4, mu=1.5, beta=1.3, alpha=1.0)
        w = rng.standard_normal(1_000_000)
        zpos = np.sort(phi_transform(w[w > params.tau] - params.tau,
                                     params.mu, params.beta))
        grid = np.linspace(0.0, zpos[-1], 400)
        emp = np.searchsorted(zpos, grid, side="right") / zpos.size
        ks = np.max(np.abs(emp - tcd(grid, params)))
        assert ks < 0.005


class TestEmpiricalInit:
    @pytest.mark.parametrize(
        "p0,tbar,tau_want,mu_want",
        [
            (11 / 24, 0.73, 0.10, 0.96),
            (0.75, 2.25, -0.67, 2.06),
            (0.25, 3.89, 0.67, 6.52),
            (0.125, 1.10, 1.15, 2.21),
        ],
    )
    def test_frozen_table(self, p0, tbar, tau_want, mu_want):
        tau0, mu0 = init_from_empirical(p0, tbar)
        assert tau0 == pytest.approx(tau_want, abs=0.02)
        assert mu0 == pytest.approx(mu_want, abs=0.02)

    def test_consistency_with_moments(self):
        # init inverts the beta=1 positive-part mean
        tau0, mu0 = init_from_empirical(0.4, 1.7)
        mean, _ = thickness_moments(mu0, 0.4)
        assert mean == pytest.approx(1.7, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ParameterError):
            init_from_empirical(0.0, 1.0)
        with pytest.raises(ParameterError):
            init_from_empirical(0.5, 0.0)
