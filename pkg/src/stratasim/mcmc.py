"""Metropolis-within-Gibbs sampler over layer parameters and configurations.

One iteration sweeps every parameter kind over every parameter group, then
proposes one Split/Merge/Displace move per borehole.  Parameter proposals are
symmetric uniform random walks accepted on the likelihood-times-prior ratio;
configuration moves are accepted on the bare likelihood ratio.  Per-layer
log-likelihood terms are cached and audited against full recomputation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import core, likelihood
from .core import (
    AugmentedConfiguration,
    BoreholeObservation,
    Move,
    ParentSequence,
    apply_move,
    enumerate_moves,
    initial_augmentation,
    is_compatible,
    observe,
    snap_thickness,
)
from .errors import DatasetError, NumericError, ParameterError, StrataError
from .likelihood import LayerParams, init_from_empirical, layer_data_from_columns

log = logging.getLogger(__name__)

PARAM_KINDS = ("p", "mu", "beta", "alpha")

P_SUPPORT = (0.0, 1.0)
BETA_SUPPORT = likelihood.BETA_SUPPORT


@dataclass(frozen=True)
class PriorSpec:
    """Flat priors for p and beta; PC priors for range and thickness scale."""

    eps_alpha: float = 0.01
    alpha0: float = 3.0
    eps_mu: float = 0.01
    mu0: float = 10.0

    def __post_init__(self):
        for name, eps in (("eps_alpha", self.eps_alpha), ("eps_mu", self.eps_mu)):
            if not 0.0 < eps < 1.0:
                raise ParameterError(f"{name} must lie in (0,1)")
        if not (self.alpha0 > 0 and self.mu0 > 0):
            raise ParameterError("alpha0 and mu0 must be positive")

    @property
    def lambda_alpha(self) -> float:
        return -math.log(self.eps_alpha) * self.alpha0

    @property
    def lambda_mu(self) -> float:
        return -math.log(self.eps_mu) / self.mu0


@dataclass(frozen=True)
class ProposalSpec:
    """Uniform random-walk half-widths and move-kind probabilities."""

    d_mu: float = 0.4
    d_beta: float = 0.4
    d_p: float = 0.15
    d_alpha: float = 3.0
    move_probs: tuple[float, float, float] = (1.0 / 3, 1.0 / 3, 1.0 / 3)

    def __post_init__(self):
        if min(self.d_mu, self.d_beta, self.d_p, self.d_alpha) <= 0:
            raise ParameterError("proposal widths must be positive")
        if abs(sum(self.move_probs) - 1.0) > 1e-12 or min(self.move_probs) < 0:
            raise ParameterError("move probabilities must be non-negative and sum to 1")

    def width(self, which: str) -> float:
        return {"p": self.d_p, "mu": self.d_mu, "beta": self.d_beta, "alpha": self.d_alpha}[
            which
        ]


def pc_log_prior(alpha: float, mu: float, spec: PriorSpec) -> float:
    """Joint PC log-prior: lam_a a^-2 exp(-lam_a/a) * lam_m exp(-lam_m m)."""
    if alpha <= 0 or mu <= 0:
        return -math.inf
    la, lm = spec.lambda_alpha, spec.lambda_mu
    return (
        math.log(la) - 2.0 * math.log(alpha) - la / alpha
        + math.log(lm) - lm * mu
    )


def _in_support(which: str, value: float) -> bool:
    if which == "p":
        return P_SUPPORT[0] < value < P_SUPPORT[1]
    if which == "beta":
        return BETA_SUPPORT[0] < value < BETA_SUPPORT[1]
    return value > 0  # mu, alpha


def metropolis_step(log_target, current, propose, rng):
    """One generic Metropolis step with a symmetric proposal.

    Returns (new_state, accepted).  ``propose(current, rng)`` must be
    symmetric; ``log_target`` may return -inf.
    """
    cand = propose(current, rng)
    lt_cur = log_target(current)
    lt_new = log_target(cand)
    if lt_new == -math.inf:
        return current, False
    if math.log(rng.random()) < lt_new - lt_cur:
        return cand, True
    return current, False


class ThicknessModel:
    """Dataset + parent-sequence context for likelihood evaluation.

    When ``tie_by_facies`` is set, all layers of one facies share a single
    parameter group (the synthetic-experiment convention); otherwise each
    layer is its own group.
    """

    def __init__(
        self,
        boreholes: list[BoreholeObservation],
        parent: ParentSequence,
        nu: float = 1.5,
        tie_by_facies: bool = True,
        cdf_tol: float = 1e-3,
    ):
        bad = [b.id for b in boreholes if not is_compatible([f for f, _ in b.records], parent)]
        if bad:
            raise DatasetError(
                f"boreholes incompatible with the parent sequence: {', '.join(bad)}"
            )
        self.boreholes = list(boreholes)
        self.parent = parent
        self.nu = float(nu)
        self.tie_by_facies = tie_by_facies
        self.cdf_tol = float(cdf_tol)
        self.locations = np.array([[b.x, b.y] for b in boreholes], dtype=float)
        if tie_by_facies:
            self.group_of = {j: parent.layers[j] for j in range(len(parent))}
        else:
            self.group_of = {
                j: f"{parent.layers[j]}.{j + 1}" for j in range(len(parent))
            }
        self.groups = []
        for j in range(len(parent)):
            g = self.group_of[j]
            if g not in self.groups:
                self.groups.append(g)
        self.layers_of = {
            g: [j for j in range(len(parent)) if self.group_of[j] == g]
            for g in self.groups
        }

    @property
    def n(self) -> int:
        return len(self.boreholes)

    @property
    def n_layers(self) -> int:
        return len(self.parent)

    def layer_column(self, configs, j) -> np.ndarray:
        return np.array([cfg.thicknesses[j] for cfg in configs])

    def layer_term(self, z_col, params: LayerParams) -> float:
        data = layer_data_from_columns(z_col, self.locations)
        return likelihood.layer_loglik(data, params, cdf_tol=self.cdf_tol)

    def all_terms(self, configs, params_by_group) -> np.ndarray:
        terms = np.empty(self.n_layers)
        for j in range(self.n_layers):
            terms[j] = self.layer_term(
                self.layer_column(configs, j), params_by_group[self.group_of[j]]
            )
        return terms

    def empirical_init(self, alpha_init: float = 1.0) -> dict[str, LayerParams]:
        """Initial parameters from per-group presence and mean thickness."""
        params = {}
        overall_mean = np.mean(
            [z for b in self.boreholes for _, z in b.records] or [1.0]
        )
        for g in self.groups:
            facies = self.parent.layers[self.layers_of[g][0]]
            recs = [z for b in self.boreholes for f, z in b.records if f == facies]
            n_slots = len(self.parent.layers_of(facies)) * self.n
            p0 = len(recs) / n_slots
            p0 = float(np.clip(p0, 0.02, 0.98))
            tbar = float(np.mean(recs)) if recs else float(overall_mean)
            _, mu0 = init_from_empirical(p0, tbar)
            params[g] = LayerParams(p0, mu0, 1.0, alpha_init, self.nu)
        return params

    def initial_configs(self) -> list[AugmentedConfiguration]:
        return [initial_augmentation(b, self.parent) for b in self.boreholes]


@dataclass
class ChainState:
    """Mutable MCMC state: parameters, configurations, cached layer terms."""

    params: dict[str, LayerParams]
    configs: list[AugmentedConfiguration]
    layer_terms: np.ndarray
    iteration: int = 0

    @property
    def loglik(self) -> float:
        return float(np.sum(self.layer_terms))


@dataclass(frozen=True)
class PosteriorSample:
    """Thinned snapshot of the chain."""

    iteration: int
    params: dict[str, LayerParams]
    configs: tuple[AugmentedConfiguration, ...]
    loglik: float


def update_parameter(
    model: ThicknessModel,
    state: ChainState,
    group: str,
    which: str,
    proposals: ProposalSpec,
    priors: PriorSpec,
    rng,
) -> bool:
    """One random-walk Metropolis update of one parameter of one group."""
    cur = state.params[group]
    cur_val = getattr(cur, which)
    new_val = cur_val + rng.uniform(-proposals.width(which), proposals.width(which))
    if not _in_support(which, new_val):
        return False
    cand = replace(cur, **{which: float(new_val)})
    layers = model.layers_of[group]
    try:
        new_terms = {
            j: model.layer_term(model.layer_column(state.configs, j), cand)
            for j in layers
        }
    except (NumericError, StrataError) as exc:
        log.warning("parameter proposal rejected after numeric failure: %s", exc)
        return False
    delta = sum(new_terms[j] - state.layer_terms[j] for j in layers)
    if which in ("mu", "alpha"):
        delta += pc_log_prior(cand.alpha, cand.mu, priors) - pc_log_prior(
            cur.alpha, cur.mu, priors
        )
    if math.log(rng.random()) < delta:
        state.params[group] = cand
        for j in layers:
            state.layer_terms[j] = new_terms[j]
        return True
    return False


def update_configuration(
    model: ThicknessModel,
    state: ChainState,
    k: int,
    proposals: ProposalSpec,
    rng,
) -> tuple[str, str]:
    """One move proposal at borehole k.

    Returns (kind, outcome) with outcome in {'noop', 'accepted', 'rejected'}.
    """
    kind = core.MOVE_KINDS[
        rng.choice(3, p=np.asarray(proposals.move_probs, dtype=float))
    ]
    cfg = state.configs[k]
    moves = enumerate_moves(cfg, model.parent, kind)
    if not moves:
        return kind, "noop"
    move = moves[rng.integers(len(moves))]
    if kind == "split":
        total = cfg.thicknesses[move.j]
        u = float(snap_thickness(rng.uniform(0.0, total)))
        if not 0.0 < u < total:
            return kind, "rejected"
        move = move.with_u(u)
    elif kind == "displace":
        total = cfg.thicknesses[move.j] + cfg.thicknesses[move.j2]
        u = float(snap_thickness(rng.uniform(0.0, total)))
        if not 0.0 < u < total:
            return kind, "rejected"
        move = move.with_u(u)
    new_cfg = apply_move(cfg, model.parent, move)

    affected = sorted({move.j, move.j2})
    new_configs = list(state.configs)
    new_configs[k] = new_cfg
    try:
        new_terms = {
            j: model.layer_term(
                model.layer_column(new_configs, j),
                state.params[model.group_of[j]],
            )
            for j in affected
        }
    except (NumericError, StrataError) as exc:
        log.warning("move proposal rejected after numeric failure: %s", exc)
        return kind, "rejected"
    delta = sum(new_terms[j] - state.layer_terms[j] for j in affected)
    if math.log(rng.random()) < delta:
        state.configs[k] = new_cfg
        for j in affected:
            state.layer_terms[j] = new_terms[j]
        return kind, "accepted"
    return kind, "rejected"


def _audit(model: ThicknessModel, state: ChainState, tol: float = 1e-6):
    """Verify cached terms and observed-image invariance; raise on failure."""
    fresh = model.all_terms(state.configs, state.params)
    drift = float(np.max(np.abs(fresh - state.layer_terms))) if fresh.size else 0.0
    if drift > tol:
        raise RuntimeError(f"cached log-likelihood drifted by {drift:.3e} at audit")
    for b, cfg in zip(model.boreholes, state.configs):
        if observe(cfg, model.parent) != list(b.records):
            raise RuntimeError(
                f"configuration at borehole {b.id} no longer maps to its records"
            )


def run_chain(
    boreholes: list[BoreholeObservation],
    parent: ParentSequence,
    priors: PriorSpec,
    proposals: ProposalSpec,
    n_iter: int,
    burn_in: int,
    thin: int,
    seed: int,
    nu: float = 1.5,
    tie_by_facies: bool = True,
    cdf_tol: float = 1e-3,
    alpha_init: float = 1.0,
    audit_every: int = 1000,
):
    """Full sampling loop; returns (samples, diagnostics).

    diagnostics carries the per-iteration log-likelihood trace, exact
    accepted/proposed counters per parameter kind and per move kind, and the
    initial log-likelihood.
    """
    model = ThicknessModel(
        boreholes, parent, nu=nu, tie_by_facies=tie_by_facies, cdf_tol=cdf_tol
    )
    rng = np.random.default_rng(seed)
    state = ChainState(
        params=model.empirical_init(alpha_init),
        configs=model.initial_configs(),
        layer_terms=None,
    )
    state.layer_terms = model.all_terms(state.configs, state.params)
    initial_loglik = state.loglik

    param_counts = {which: [0, 0] for which in PARAM_KINDS}  # accepted, proposed
    move_counts = {kind: [0, 0, 0] for kind in core.MOVE_KINDS}  # acc, prop, noop
    trace = []
    samples: list[PosteriorSample] = []

    for it in range(1, n_iter + 1):
        state.iteration = it
        for which in PARAM_KINDS:
            for group in model.groups:
                accepted = update_parameter(
                    model, state, group, which, proposals, priors, rng
                )
                param_counts[which][1] += 1
                param_counts[which][0] += int(accepted)
        for k in range(model.n):
            kind, outcome = update_configuration(model, state, k, proposals, rng)
            if outcome == "noop":
                move_counts[kind][2] += 1
            else:
                move_counts[kind][1] += 1
                move_counts[kind][0] += int(outcome == "accepted")
        trace.append(state.loglik)
        if audit_every and it % audit_every == 0:
            _audit(model, state)
        if it > burn_in and (it - burn_in) % thin == 0:
            samples.append(
                PosteriorSample(
                    iteration=it,
                    params=dict(state.params),
                    configs=tuple(state.configs),
                    loglik=state.loglik,
                )
            )

    diagnostics = {
        "initial_loglik": initial_loglik,
        "loglik_trace": trace,
        "param_accept": {
            which: {"accepted": c[0], "proposed": c[1]}
            for which, c in param_counts.items()
        },
        "move_accept": {
            kind: {"accepted": c[0], "proposed": c[1], "infeasible": c[2]}
            for kind, c in move_counts.items()
        },
        "groups": list(model.groups),
    }
    return samples, diagnostics


def select_most_likely(samples, predicate=None) -> PosteriorSample:
    """Sample with the highest stored log-likelihood (ties: earliest)."""
    pool = [s for s in samples if predicate is None or predicate(s)]
    if not pool:
        raise ParameterError("no posterior samples match the selection")
    best = pool[0]
    for s in pool[1:]:
        if s.loglik > best.loglik:
            best = s
    return best


def facies_shared(sample: PosteriorSample, parent: ParentSequence, facies: str) -> bool:
    """True if some borehole splits this facies across several layers."""
    idx = parent.layers_of(facies)
    return any(
        int(np.sum(cfg.thicknesses[idx] > 0)) >= 2 for cfg in sample.configs
    )
