"""Command-line entry point.

Subcommands: fit, simulate, tcd, synth, validate.  Exit codes: 0 success,
2 parse/validation error, 3 incompatibility or missing chain input,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fieldsim, io, likelihood, mcmc, synthgen
from .config import RunConfig
from .core import ParentSequence, initial_augmentation, is_compatible
from .errors import (
    CapacityError,
    DatasetError,
    DegenerateRegionError,
    IncompatibleSequenceError,
    NumericError,
    ParameterError,
    StrataError,
)

EXIT_PARSE = 2
EXIT_INCOMPATIBLE = 3
EXIT_NUMERIC = 4

_PARSE_ERRORS = (DatasetError, ParameterError)
_INCOMPATIBLE_ERRORS = (IncompatibleSequenceError,)
_NUMERIC_ERRORS = (NumericError, CapacityError, DegenerateRegionError)


def _load_inputs(cfg: RunConfig):
    parent = io.load_parent(cfg.parent)
    boreholes = io.load_boreholes(cfg.boreholes)
    bad = [
        b.id for b in boreholes
        if not is_compatible([f for f, _ in b.records], parent)
    ]
    if bad:
        raise IncompatibleSequenceError(
            "boreholes incompatible with the parent sequence: " + ", ".join(bad)
        )
    return parent, boreholes


def _init_table(parent, boreholes, cfg: RunConfig) -> str:
    model = mcmc.ThicknessModel(
        boreholes, parent, nu=cfg.nu, tie_by_facies=cfg.tie_by_facies,
        cdf_tol=cfg.cdf_tol,
    )
    params = model.empirical_init(cfg.alpha_init)
    lines = [f"{'group':<12}{'p0':>8}{'tau0':>8}{'mu0':>8}{'alpha0':>8}"]
    for g in model.groups:
        prm = params[g]
        lines.append(
            f"{g:<12}{prm.p:>8.3f}{prm.tau:>8.3f}{prm.mu:>8.3f}{prm.alpha:>8.3f}"
        )
    return "\n".join(lines)


def cmd_fit(args) -> int:
    cfg = RunConfig.from_file(args.config)
    parent, boreholes = _load_inputs(cfg)
    if args.dry_run:
        print(_init_table(parent, boreholes, cfg))
        return 0
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples, diagnostics = mcmc.run_chain(
        boreholes, parent, cfg.priors, cfg.proposals,
        n_iter=cfg.n_iter, burn_in=cfg.burn_in, thin=cfg.thin,
        seed=args.seed, nu=cfg.nu, tie_by_facies=cfg.tie_by_facies,
        cdf_tol=cfg.cdf_tol, alpha_init=cfg.alpha_init,
    )
    groups = diagnostics["groups"]
    io.save_samples(out / "samples.csv", samples, groups)
    io.save_configurations(out / "configurations.csv", samples, parent)
    io.save_diagnostics(out / "diagnostics.csv", diagnostics)
    if samples:
        io.save_summary(out / "summary.csv", samples, groups)
    print(f"wrote {len(samples)} posterior samples to {out}")
    return 0


def _make_grid(cfg: RunConfig, boreholes=None) -> fieldsim.SimGrid:
    if cfg.transect is not None:
        x0, y0, x1, y1 = cfg.transect
        grid = fieldsim.SimGrid.transect((x0, y0), (x1, y1), cfg.transect_n, t0=cfg.t0)
    else:
        grid = fieldsim.SimGrid.regular(
            cfg.grid_origin, cfg.grid_spacing, cfg.grid_nx, cfg.grid_ny, t0=cfg.t0
        )
    if cfg.t0_policy == "idw" and boreholes:
        locs = [[b.x, b.y] for b in boreholes]
        vals = [b.ground_level for b in boreholes]
        t0 = fieldsim.idw_ground_level(grid, locs, vals)
        grid = fieldsim.SimGrid(grid.kind, grid.origin, grid.spacing,
                                grid.nx, grid.ny, grid.endpoint, t0)
    return grid


def _select_sample(samples_rows, config_rows, selector):
    iterations = [it for it, _, _ in samples_rows]
    if selector == "most-likely":
        best = 0
        for i in range(1, len(samples_rows)):
            if samples_rows[i][2] > samples_rows[best][2]:
                best = i
        idx = best
    else:
        idx = int(selector)
        if not 0 <= idx < len(samples_rows):
            raise IncompatibleSequenceError(
                f"sample index {idx} out of range (0..{len(samples_rows) - 1})"
            )
    it, params, _ = samples_rows[idx]
    return it, params, config_rows[it]


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_file(args.config)
    parent = io.load_parent(cfg.parent)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.mode == "unconditional":
        missing = [f for f in parent.facies if f not in cfg.sim_params]
        if missing:
            raise DatasetError(
                f"config lacks param.<facies>.* entries for: {', '.join(missing)}"
            )
        grid = _make_grid(cfg)
        stack = fieldsim.simulate_unconditional(grid, cfg.sim_params, parent, args.seed)
    else:
        boreholes = io.load_boreholes(cfg.boreholes)
        samples_path = out / "samples.csv"
        configs_path = out / "configurations.csv"
        if not samples_path.exists() or not configs_path.exists():
            raise IncompatibleSequenceError(
                f"conditional mode needs {samples_path} and {configs_path} (run fit first)"
            )
        groups, samples_rows = io.load_samples(samples_path)
        config_rows = io.load_configurations(configs_path)
        it, params_by_group, configs = _select_sample(
            samples_rows, config_rows, args.selector
        )
        model = mcmc.ThicknessModel(
            boreholes, parent, nu=cfg.nu, tie_by_facies=cfg.tie_by_facies
        )
        params_by_layer = [
            params_by_group[model.group_of[j]] for j in range(len(parent))
        ]
        by_id = {cfg_.borehole_id: cfg_ for cfg_ in configs}
        ordered = [by_id[b.id] for b in boreholes]
        grid = _make_grid(cfg, boreholes)
        stack = fieldsim.simulate_conditional(
            grid, params_by_layer, parent, ordered,
            [[b.x, b.y] for b in boreholes], args.seed,
        )
        print(f"conditional simulation from sample at iteration {it}")

    if stack.grid.kind == "grid":
        io.save_raster(out / "raster.csv", stack)
        io.save_stack_grid(out / "surfaces.txt", stack)
    else:
        dist, columns, boundaries = fieldsim.cross_section(stack)
        io.save_section(out / "section.csv", dist, columns)
        io.save_polylines(out / "polylines.csv", dist, boundaries)
        io.save_stack_grid(out / "surfaces.txt", stack)
    print(f"simulation written to {out}")
    return 0


def cmd_tcd(args) -> int:
    cfg = RunConfig.from_file(args.config)
    parent = io.load_parent(cfg.parent)
    if args.facies not in parent.facies:
        raise DatasetError(f"unknown facies {args.facies!r}; parent has {parent.facies}")
    out = Path(cfg.output_dir)
    samples_path = out / "samples.csv"
    configs_path = out / "configurations.csv"
    if not samples_path.exists() or not configs_path.exists():
        raise IncompatibleSequenceError("tcd needs chain output files (run fit first)")
    groups, samples_rows = io.load_samples(samples_path)
    config_rows = io.load_configurations(configs_path)

    layer_idx = parent.layers_of(args.facies)
    thick = []
    for it, _, _ in samples_rows:
        for c in config_rows[it]:
            thick.extend(z for z in np.asarray(c.thicknesses)[layer_idx] if z > 0)
    thick = np.sort(np.array(thick))
    z_max = float(thick[-1]) * 1.2 if thick.size else 1.0
    z_grid = np.linspace(0.0, z_max, 201)

    def group_for_facies():
        for g in groups:
            if g == args.facies or g.startswith(f"{args.facies}."):
                return g
        raise DatasetError(f"no sampled parameter group for facies {args.facies!r}")

    g = group_for_facies()
    curves = np.array([
        likelihood.tcd(z_grid, params[g]) for _, params, _ in samples_rows
    ])
    median = np.median(curves, axis=0)
    q05 = np.quantile(curves, 0.05, axis=0)
    q95 = np.quantile(curves, 0.95, axis=0)
    empirical = (
        np.searchsorted(thick, z_grid, side="right") / thick.size
        if thick.size else np.zeros_like(z_grid)
    )
    path = out / f"tcd_{args.facies}.csv"
    io.save_tcd(path, z_grid, median, q05, q95, empirical)
    print(f"TCD table written to {path}")
    return 0


def cmd_synth(args) -> int:
    scenario = synthgen.SyntheticScenario(
        n_random_boreholes=max(args.n_boreholes - 3, 0), seed=args.seed
    )
    boreholes, truth, _ = synthgen.generate(scenario)
    boreholes = boreholes[: args.n_boreholes]
    truth = truth[: args.n_boreholes]
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.save_boreholes(out / "boreholes.csv", boreholes)
    io.save_truth(out / "truth.csv", truth, scenario.parent)
    io.save_parent(out / "parent.txt", scenario.parent)
    print(f"wrote {len(boreholes)} synthetic boreholes to {out}")
    return 0


def cmd_validate(args) -> int:
    cfg = RunConfig.from_file(args.config)
    parent, boreholes = _load_inputs(cfg)
    for b in boreholes:
        initial_augmentation(b, parent)
    print(f"{len(boreholes)} boreholes compatible with the {len(parent)}-layer parent")
    print(_init_table(parent, boreholes, cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratasim",
        description="Truncated-Gaussian stratigraphic modeling from borehole data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="run the MCMC and write chain files")
    p_fit.add_argument("--config", required=True)
    p_fit.add_argument("--seed", required=True, type=int)
    p_fit.add_argument("--dry-run", action="store_true",
                       help="validate inputs and print the initialization table")
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", help="simulate thickness fields")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", required=True, type=int)
    p_sim.add_argument("--mode", choices=("unconditional", "conditional"),
                       default="unconditional")
    p_sim.add_argument("--selector", default="most-likely",
                       help="'most-likely' or a 0-based thinned sample index")
    p_sim.set_defaults(func=cmd_simulate)

    p_tcd = sub.add_parser("tcd", help="posterior thickness cumulative distribution")
    p_tcd.add_argument("--config", required=True)
    p_tcd.add_argument("--facies", required=True)
    p_tcd.set_defaults(func=cmd_tcd)

    p_syn = sub.add_parser("synth", help="generate the synthetic scenario")
    p_syn.add_argument("--output-dir", default="synth")
    p_syn.add_argument("--seed", required=True, type=int)
    p_syn.add_argument("--n-boreholes", type=int, default=12)
    p_syn.set_defaults(func=cmd_synth)

    p_val = sub.add_parser("validate", help="check inputs without iterating")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _INCOMPATIBLE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StrataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
