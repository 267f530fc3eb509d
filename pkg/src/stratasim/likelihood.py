"""Thickness transform, per-layer and complete log-likelihood, moments, TCD.

Thickness of one layer is z = mu * (w - tau)^beta for a latent standardized
Gaussian w above the threshold tau = Phi^-1(1 - p), and exactly zero below.
The per-layer likelihood combines a Gaussian density over the positive-site
latents, the transform Jacobian, and the orthant probability that the
zero-site latents sit below tau given the positive ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import norm

from . import gaussnum
from .errors import NumericError, ParameterError
from .gaussnum import MaternSpec

BETA_SUPPORT = (0.25, 4.0)

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class LayerParams:
    """Parameters governing one layer's thickness field."""

    p: float
    mu: float
    beta: float
    alpha: float
    nu: float = 1.5

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie in (0,1), got {self.p}")
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not BETA_SUPPORT[0] < self.beta < BETA_SUPPORT[1]:
            raise ParameterError(f"beta must lie in {BETA_SUPPORT}, got {self.beta}")
        MaternSpec(self.nu, self.alpha)  # validates alpha and nu

    @property
    def tau(self) -> float:
        return float(ndtri(1.0 - self.p))

    @property
    def matern_spec(self) -> MaternSpec:
        return MaternSpec(self.nu, self.alpha)


@dataclass(frozen=True)
class LayerData:
    """One layer's thickness data across boreholes, split by sign."""

    pos_z: np.ndarray       # positive thicknesses, shape (n_j,)
    pos_locs: np.ndarray    # shape (n_j, 2)
    zero_locs: np.ndarray   # shape (l_j, 2)

    def __post_init__(self):
        pos_z = np.atleast_1d(np.asarray(self.pos_z, dtype=float))
        if np.any(pos_z <= 0):
            raise ParameterError("pos_z must be strictly positive")
        object.__setattr__(self, "pos_z", pos_z)
        object.__setattr__(
            self, "pos_locs", np.asarray(self.pos_locs, dtype=float).reshape(-1, 2)
        )
        object.__setattr__(
            self, "zero_locs", np.asarray(self.zero_locs, dtype=float).reshape(-1, 2)
        )


def _check_transform_params(mu, beta):
    if not mu > 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if not BETA_SUPPORT[0] < beta < BETA_SUPPORT[1]:
        raise ParameterError(f"beta must lie in {BETA_SUPPORT}, got {beta}")


def phi_transform(w, mu, beta):
    """z = mu * w^beta for w >= 0."""
    _check_transform_params(mu, beta)
    return mu * np.asarray(w, dtype=float) ** beta


def phi_inverse(z, mu, beta):
    """w = (z / mu)^(1/beta) for z >= 0."""
    _check_transform_params(mu, beta)
    return (np.asarray(z, dtype=float) / mu) ** (1.0 / beta)


def jacobian_inv(z, mu, beta):
    """d/dz (z/mu)^(1/beta) = (1 / (mu beta)) (z/mu)^(1/beta - 1), z > 0."""
    _check_transform_params(mu, beta)
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ParameterError("jacobian is evaluated at positive thickness only")
    return (z / mu) ** (1.0 / beta - 1.0) / (mu * beta)


def layer_loglik(data: LayerData, params: LayerParams, cdf_tol: float = 1e-4) -> float:
    """Complete-data log-likelihood of a single layer.

    Positive sites contribute the Gaussian log-density of
    w = phi_inverse(z) + tau plus log-Jacobian terms; zero sites contribute
    the log orthant probability below tau of their conditional (kriged)
    Gaussian law.  Orthant probabilities are floored at 1e-300 before log.
    """
    n_pos = data.pos_z.size
    n_zero = data.zero_locs.shape[0]
    tau = params.tau
    spec = params.matern_spec

    if n_pos == 0:
        if n_zero == 0:
            return 0.0
        cov = gaussnum.cov_matrix(data.zero_locs, spec)
        prob, _ = gaussnum.mvn_cdf_below(
            np.full(n_zero, tau), np.zeros(n_zero), cov, tol=cdf_tol
        )
        return float(np.log(max(prob, _LOG_FLOOR)))

    w = phi_inverse(data.pos_z, params.mu, params.beta) + tau
    cov_pos = gaussnum.cov_matrix(data.pos_locs, spec)
    total = gaussnum.mvn_logpdf(w, np.zeros(n_pos), cov_pos)
    total += float(np.sum(np.log(jacobian_inv(data.pos_z, params.mu, params.beta))))

    if n_zero > 0:
        pts = np.vstack([data.pos_locs, data.zero_locs])
        joint = gaussnum.cov_matrix(pts, spec)
        m, v = gaussnum.condition(
            joint, np.arange(n_pos), np.arange(n_pos, n_pos + n_zero), w
        )
        try:
            prob, _ = gaussnum.mvn_cdf_below(np.full(n_zero, tau), m, v, tol=cdf_tol)
        except NumericError as exc:
            raise NumericError(f"orthant probability failed: {exc}") from exc
        total += float(np.log(max(prob, _LOG_FLOOR)))
    return float(total)


def layer_data_from_columns(z_col, locations) -> LayerData:
    """Partition one layer's thickness column by positivity."""
    z = np.asarray(z_col, dtype=float)
    locs = np.asarray(locations, dtype=float).reshape(-1, 2)
    pos = z > 0
    return LayerData(z[pos], locs[pos], locs[~pos])


def complete_loglik(configs, locations, params_by_layer, cdf_tol: float = 1e-4) -> float:
    """Sum of independent layer log-likelihoods, in fixed layer order."""
    z = np.array([cfg.thicknesses for cfg in configs])  # (n, M)
    if z.shape[1] != len(params_by_layer):
        raise ParameterError("number of layers inconsistent between configs and params")
    total = 0.0
    for j, params in enumerate(params_by_layer):
        total += layer_loglik(layer_data_from_columns(z[:, j], locations), params, cdf_tol)
    return total


def thickness_moments(mu: float, p: float, beta: float = 1.0):
    """Mean and variance of the positive part of the thickness (beta = 1 only).

    mean = mu (imr - tau), var = mu^2 [1 + imr (tau - imr)] with
    imr = phi(tau) / (1 - Phi(tau)) the inverse Mills ratio.  Non-unit beta
    would need hypergeometric functions and is unsupported.
    """
    if beta != 1.0:
        raise ParameterError(
            f"thickness moments are only available for beta = 1 (got beta = {beta})"
        )
    if not mu > 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0,1), got {p}")
    tau = float(ndtri(1.0 - p))
    imr = float(norm.pdf(tau) / p)  # 1 - Phi(tau) = p
    mean = mu * (imr - tau)
    var = mu * mu * (1.0 + imr * (tau - imr))
    return float(mean), float(var)


def tcd(z, params: LayerParams):
    """Thickness cumulative distribution P(Z <= z | Z > 0).

    [Phi(tau + (z/mu)^(1/beta)) - Phi(tau)] / p, nondecreasing in z.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ParameterError("thickness must be non-negative")
    tau = params.tau
    val = (ndtr(tau + (z / params.mu) ** (1.0 / params.beta)) - ndtr(tau)) / params.p
    val = np.clip(val, 0.0, 1.0)
    return val if val.ndim else float(val)


def init_from_empirical(p0: float, mean_thickness: float):
    """Initial (tau0, mu0) from a presence proportion and mean thickness.

    tau0 = Phi^-1(1 - p0); mu0 inverts the beta = 1 positive-part mean,
    mu0 = T / (phi(tau0)/p0 - tau0).
    """
    if not 0.0 < p0 < 1.0:
        raise ParameterError(f"presence proportion must lie in (0,1), got {p0}")
    if not mean_thickness > 0:
        raise ParameterError(f"mean thickness must be positive, got {mean_thickness}")
    tau0 = float(ndtri(1.0 - p0))
    denom = float(norm.pdf(tau0) / p0 - tau0)
    if denom <= 0:
        raise NumericError("inverse-Mills denominator is non-positive")
    return tau0, float(mean_thickness / denom)
