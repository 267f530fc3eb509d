"""Gaussian numerical kernels.

Matern correlations (half-integer closed forms), covariance assembly,
Gaussian conditioning, multivariate normal log-density, orthant
probabilities by randomized quasi-Monte Carlo, truncated multivariate
normal sampling, and dense-Cholesky random field simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.spatial.distance import cdist
from scipy.stats import qmc, truncnorm

from .errors import CapacityError, DegenerateRegionError, NumericError, ParameterError

ALLOWED_NU = (0.5, 1.5, 2.5)

# Jitter escalation for near-singular covariance matrices (near-duplicate
# borehole coordinates).
_JITTER_START = 1e-10
_JITTER_MAX = 1e-6

_PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class MaternSpec:
    """Half-integer Matern correlation with unit sill.

    nu is restricted to {1/2, 3/2, 5/2}; alpha is the range in km.
    """

    nu: float = 1.5
    alpha: float = 1.0

    def __post_init__(self):
        if self.nu not in ALLOWED_NU:
            raise ParameterError(f"nu must be one of {ALLOWED_NU}, got {self.nu}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")


def matern(h, spec: MaternSpec):
    """Correlation at lag distance h >= 0 (closed forms, no Bessel calls)."""
    r = np.asarray(h, dtype=float) / spec.alpha
    if np.any(r < 0):
        raise ParameterError("distance must be non-negative")
    if spec.nu == 0.5:
        out = np.exp(-r)
    elif spec.nu == 1.5:
        out = (1.0 + r) * np.exp(-r)
    else:
        out = (1.0 + r + r * r / 3.0) * np.exp(-r)
    return out if out.ndim else float(out)


def cov_matrix(points, spec: MaternSpec) -> np.ndarray:
    """Unit-diagonal correlation matrix over a planar point set."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = cdist(pts, pts)
    c = matern(d, spec)
    np.fill_diagonal(c, 1.0)
    return c


def cross_cov(points_a, points_b, spec: MaternSpec) -> np.ndarray:
    pts_a = np.atleast_2d(np.asarray(points_a, dtype=float))
    pts_b = np.atleast_2d(np.asarray(points_b, dtype=float))
    return matern(cdist(pts_a, pts_b), spec)


def chol_psd(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, escalating diagonal jitter up to 1e-6."""
    a = np.asarray(a, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise NumericError("covariance matrix must be square")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pass
    jitter = _JITTER_START
    eye = np.eye(a.shape[0])
    while jitter <= _JITTER_MAX:
        try:
            return np.linalg.cholesky(a + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    cond = float(np.linalg.cond(a))
    raise NumericError(
        f"covariance not positive definite after jitter {_JITTER_MAX} "
        f"(condition estimate {cond:.3e})"
    )


def condition(joint: np.ndarray, known_idx, unknown_idx, w_known):
    """Conditional mean and covariance of the unknown block given the known one.

    m = S_un S_nn^-1 w,  V = S_uu - S_un S_nn^-1 S_nu  (simple kriging with
    zero prior mean).
    """
    joint = np.asarray(joint, dtype=float)
    known_idx = np.asarray(known_idx, dtype=int)
    unknown_idx = np.asarray(unknown_idx, dtype=int)
    w = np.asarray(w_known, dtype=float)
    if unknown_idx.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    if known_idx.size == 0:
        return np.zeros(unknown_idx.size), joint[np.ix_(unknown_idx, unknown_idx)].copy()
    s_nn = joint[np.ix_(known_idx, known_idx)]
    s_un = joint[np.ix_(unknown_idx, known_idx)]
    s_uu = joint[np.ix_(unknown_idx, unknown_idx)]
    chol = chol_psd(s_nn)
    # one triangular solve gives both chol^-1 S_nu and chol^-1 w
    tmp = np.linalg.solve(chol, np.column_stack([s_un.T, w]))
    m = tmp[:, :-1].T @ tmp[:, -1]
    v = s_uu - tmp[:, :-1].T @ tmp[:, :-1]
    v = 0.5 * (v + v.T)
    return m, v


def mvn_logpdf(x, mean, cov) -> float:
    """Multivariate Gaussian log-density via Cholesky factorization."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mean = np.broadcast_to(np.asarray(mean, dtype=float), x.shape)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = x.size
    chol = chol_psd(cov)
    r = np.linalg.solve(chol, x - mean)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return float(-0.5 * (d * np.log(2.0 * np.pi) + logdet + r @ r))


_SOBOL_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _sobol_points(dim: int, n: int) -> np.ndarray:
    key = (dim, n)
    if key not in _SOBOL_CACHE:
        m = int(np.log2(n))
        _SOBOL_CACHE[key] = qmc.Sobol(dim, scramble=False).random_base2(m)
    return _SOBOL_CACHE[key]


def _genz_probs(lower_chol, b, u01) -> np.ndarray:
    """Separation-of-variables sample probabilities of P(X < b), X ~ N(0, L L')."""
    n, dm1 = u01.shape
    d = dm1 + 1
    e = np.full(n, ndtr(b[0] / lower_chol[0, 0]))
    prob = e.copy()
    ys = np.empty((n, dm1))
    for i in range(1, d):
        q = np.clip(u01[:, i - 1] * e, _PROB_FLOOR, 1.0 - 1e-16)
        ys[:, i - 1] = ndtri(q)
        mu = ys[:, :i] @ lower_chol[i, :i]
        e = ndtr((b[i] - mu) / lower_chol[i, i])
        prob *= e
    return prob


def mvn_cdf_below(
    upper,
    mean,
    cov,
    tol: float = 1e-4,
    rng=None,
    dim_cap: int = 100,
    n_shifts: int = 10,
    max_points: int = 50_000,
):
    """P(X_1 < b_1, ..., X_d < b_d) with an error estimate.

    Randomized QMC (Genz separation of variables over shifted Sobol points),
    with variables reordered by increasing marginal truncation probability.
    Dimension 1 is computed exactly.  Returns (probability, error_estimate);
    the estimate may exceed tol if the sample cap is hit.

    With the default rng the result is a deterministic function of the
    inputs, which the MCMC cache audit relies on.
    """
    b = np.atleast_1d(np.asarray(upper, dtype=float))
    mean = np.broadcast_to(np.asarray(mean, dtype=float), b.shape)
    d = b.size
    if d == 0:
        return 1.0, 0.0
    if d > dim_cap:
        raise CapacityError(f"dimension {d} exceeds the orthant-probability cap {dim_cap}")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    bc = b - mean
    if d == 1:
        sd = np.sqrt(cov[0, 0])
        return float(ndtr(bc[0] / sd)), 0.0

    if rng is None:
        rng = np.random.default_rng(0x5EED)
    order = np.argsort(ndtr(bc / np.sqrt(np.diag(cov))))
    bo = bc[order]
    co = cov[np.ix_(order, order)]
    chol = chol_psd(co)
    shifts = rng.random((n_shifts, d - 1))

    n = 128
    while True:
        base = _sobol_points(d - 1, n)
        u = (base[None, :, :] + shifts[:, None, :]) % 1.0
        probs = _genz_probs(chol, bo, u.reshape(n_shifts * n, d - 1))
        ests = probs.reshape(n_shifts, n).mean(axis=1)
        est = float(ests.mean())
        err = float(3.0 * ests.std(ddof=1) / np.sqrt(n_shifts))
        if err <= tol or n >= max_points:
            break
        n *= 2
    return min(max(est, 0.0), 1.0), err


def sample_truncated_mvn(
    mean,
    cov,
    upper: float,
    rng,
    sweeps: int = 50,
    burn_in: int = 20,
) -> np.ndarray:
    """One draw of X ~ N(mean, cov) conditioned on every coordinate < upper.

    Gibbs sampler over the univariate truncated-normal full conditionals with
    a fixed sweep count; deterministic given the rng state.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    d = mean.size
    if d == 0:
        return np.zeros(0)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    sd = np.sqrt(np.diag(cov))
    prob, _ = mvn_cdf_below(np.full(d, upper), mean, cov, tol=1e-2)
    if prob < _PROB_FLOOR:
        raise DegenerateRegionError(
            f"truncation region below {upper} has vanishing probability"
        )
    if d == 1:
        beta = (upper - mean[0]) / sd[0]
        u = rng.random()
        return mean + sd * truncnorm.ppf(u, -np.inf, beta)

    chol = chol_psd(cov)
    prec = np.linalg.inv(chol.T) @ np.linalg.inv(chol)
    cond_var = 1.0 / np.diag(prec)
    cond_sd = np.sqrt(cond_var)

    x = np.minimum(mean, upper - 0.5 * sd)
    for _ in range(burn_in + sweeps):
        for i in range(d):
            r = prec[i] @ (x - mean) - prec[i, i] * (x[i] - mean[i])
            m_i = mean[i] - cond_var[i] * r
            beta = (upper - m_i) / cond_sd[i]
            u = rng.random()
            x[i] = m_i + cond_sd[i] * truncnorm.ppf(u, -np.inf, beta)
    return x


def sample_gaussian_field(
    points,
    spec: MaternSpec,
    rng,
    cond_points=None,
    cond_values=None,
    budget: int = 20_000,
) -> np.ndarray:
    """Standardized Gaussian field values at ``points``.

    Unconditional draws use a dense Cholesky of the point covariance.
    Conditional draws use conditioning-by-kriging (unconditional draw plus
    kriging correction) and interpolate the conditioning values exactly up
    to the factorization jitter.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    conditioned = cond_points is not None and len(cond_points) > 0
    cpts = np.atleast_2d(np.asarray(cond_points, dtype=float)) if conditioned else None
    total = n + (cpts.shape[0] if conditioned else 0)
    if total > budget:
        raise CapacityError(
            f"{total} simulation points exceed the Cholesky budget {budget}; coarsen the grid"
        )
    if not conditioned:
        chol = chol_psd(cov_matrix(pts, spec))
        return chol @ rng.standard_normal(n)

    w = np.asarray(cond_values, dtype=float)
    # Points coinciding with a conditioning point take its value directly;
    # keeping them in the joint covariance would make it singular and the
    # kriging residual would sit at jitter level instead of being exact.
    d = cdist(pts, cpts)
    hit = d.min(axis=1) < 1e-12
    out = np.empty(n)
    out[hit] = w[np.argmin(d[hit], axis=1)] if np.any(hit) else 0.0
    free = ~hit
    if not np.any(free):
        return out

    fpts = pts[free]
    nc = cpts.shape[0]
    joint_pts = np.vstack([cpts, fpts])
    joint_cov = cov_matrix(joint_pts, spec)
    chol = chol_psd(joint_cov)
    f_star = chol @ rng.standard_normal(nc + fpts.shape[0])

    s_cc = joint_cov[:nc, :nc]
    s_gc = joint_cov[nc:, :nc]
    chol_cc = chol_psd(s_cc)

    def krig(vals):
        t = np.linalg.solve(chol_cc, vals)
        return s_gc @ np.linalg.solve(chol_cc.T, t)

    out[free] = krig(w) + (f_star[nc:] - krig(f_star[:nc]))
    return out
