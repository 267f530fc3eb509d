"""Flat key = value run configuration with line-precise validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import DatasetError
from .likelihood import LayerParams
from .mcmc import PriorSpec, ProposalSpec

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


@dataclass
class RunConfig:
    """Everything a run needs; defaults mirror the synthetic-experiment setup."""

    boreholes: str = "boreholes.csv"
    parent: str = "parent.txt"
    output_dir: str = "out"
    nu: float = 1.5
    tie_by_facies: bool = True
    priors: PriorSpec = field(default_factory=PriorSpec)
    proposals: ProposalSpec = field(default_factory=ProposalSpec)
    n_iter: int = 30_000
    burn_in: int = 2_500
    thin: int = 50
    cdf_tol: float = 1e-3
    alpha_init: float = 1.0
    grid_origin: tuple[float, float] = (0.0, 0.0)
    grid_spacing: float = 1.0
    grid_nx: int = 101
    grid_ny: int = 101
    transect: tuple[float, float, float, float] | None = None
    transect_n: int = 201
    t0: float = 0.0
    t0_policy: str = "constant"  # constant | idw
    sim_params: dict[str, LayerParams] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        raw: dict[str, tuple[int, str]] = {}
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DatasetError(f"{path}: cannot read config ({exc})") from exc
        for ln, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DatasetError(f"{path}:{ln}: expected 'key = value'")
            key, _, value = line.partition("=")
            raw[key.strip()] = (ln, value.strip())
        return cls._from_raw(raw, str(path))

    @classmethod
    def _from_raw(cls, raw, path) -> "RunConfig":
        cfg = cls()

        def take(key, conv, default):
            if key not in raw:
                return default
            ln, value = raw.pop(key)
            try:
                return conv(value)
            except (ValueError, KeyError) as exc:
                raise DatasetError(f"{path}:{ln}: bad value for {key}: {value!r}") from exc

        def boolean(v):
            return _BOOL[v.lower()]

        cfg.boreholes = take("boreholes", str, cfg.boreholes)
        cfg.parent = take("parent", str, cfg.parent)
        cfg.output_dir = take("output_dir", str, cfg.output_dir)
        cfg.nu = take("nu", float, cfg.nu)
        cfg.tie_by_facies = take("tie_by_facies", boolean, cfg.tie_by_facies)
        cfg.priors = PriorSpec(
            eps_alpha=take("eps_alpha", float, cfg.priors.eps_alpha),
            alpha0=take("alpha0", float, cfg.priors.alpha0),
            eps_mu=take("eps_mu", float, cfg.priors.eps_mu),
            mu0=take("mu0", float, cfg.priors.mu0),
        )
        cfg.proposals = ProposalSpec(
            d_mu=take("d_mu", float, cfg.proposals.d_mu),
            d_beta=take("d_beta", float, cfg.proposals.d_beta),
            d_p=take("d_p", float, cfg.proposals.d_p),
            d_alpha=take("d_alpha", float, cfg.proposals.d_alpha),
            move_probs=(
                take("p_split", float, cfg.proposals.move_probs[0]),
                take("p_merge", float, cfg.proposals.move_probs[1]),
                take("p_displace", float, cfg.proposals.move_probs[2]),
            ),
        )
        cfg.n_iter = take("n_iter", int, cfg.n_iter)
        cfg.burn_in = take("burn_in", int, cfg.burn_in)
        cfg.thin = take("thin", int, cfg.thin)
        cfg.cdf_tol = take("cdf_tol", float, cfg.cdf_tol)
        cfg.alpha_init = take("alpha_init", float, cfg.alpha_init)
        cfg.grid_origin = (
            take("grid_origin_x", float, cfg.grid_origin[0]),
            take("grid_origin_y", float, cfg.grid_origin[1]),
        )
        cfg.grid_spacing = take("grid_spacing", float, cfg.grid_spacing)
        cfg.grid_nx = take("grid_nx", int, cfg.grid_nx)
        cfg.grid_ny = take("grid_ny", int, cfg.grid_ny)
        if any(k in raw for k in ("transect_x0", "transect_y0", "transect_x1", "transect_y1")):
            cfg.transect = (
                take("transect_x0", float, 0.0),
                take("transect_y0", float, 0.0),
                take("transect_x1", float, 0.0),
                take("transect_y1", float, 0.0),
            )
        cfg.transect_n = take("transect_n", int, cfg.transect_n)
        cfg.t0 = take("t0", float, cfg.t0)
        cfg.t0_policy = take("t0_policy", str, cfg.t0_policy)
        if cfg.t0_policy not in ("constant", "idw"):
            raise DatasetError(f"{path}: t0_policy must be 'constant' or 'idw'")

        # simulation parameters: param.<facies>.<name> = value
        sim: dict[str, dict[str, float]] = {}
        for key in [k for k in raw if k.startswith("param.")]:
            ln, value = raw.pop(key)
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in ("p", "mu", "beta", "alpha"):
                raise DatasetError(f"{path}:{ln}: bad parameter key {key!r}")
            try:
                sim.setdefault(parts[1], {})[parts[2]] = float(value)
            except ValueError as exc:
                raise DatasetError(f"{path}:{ln}: bad value for {key}") from exc
        for facies, vals in sim.items():
            missing = {"p", "mu", "beta", "alpha"} - set(vals)
            if missing:
                raise DatasetError(
                    f"{path}: param.{facies}.* is missing {sorted(missing)}"
                )
            cfg.sim_params[facies] = LayerParams(
                vals["p"], vals["mu"], vals["beta"], vals["alpha"], cfg.nu
            )

        if raw:
            key = next(iter(raw))
            ln, _ = raw[key]
            raise DatasetError(f"{path}:{ln}: unknown config key {key!r}")
        if cfg.n_iter < 0 or cfg.burn_in < 0 or cfg.thin < 1:
            raise DatasetError(f"{path}: chain lengths must be non-negative, thin >= 1")
        return cfg
