"""File formats: borehole/parent inputs, chain outputs, rasters, polylines.

All tables are CSV with headers.  Floats are written with ``repr`` so every
file round-trips bit-exactly through its reader.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import AugmentedConfiguration, BoreholeObservation, ParentSequence
from .errors import DatasetError
from .fieldsim import LayerStack
from .likelihood import LayerParams
from .mcmc import PosteriorSample

BOREHOLE_HEADER = [
    "borehole_id", "x_km", "y_km", "ground_level_m",
    "record_index", "facies", "thickness_m",
]


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def load_parent(path) -> ParentSequence:
    """Parent sequence file: one facies code per line, top-down."""
    lines = []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        code = raw.strip()
        if not code or code.startswith("#"):
            continue
        lines.append(code)
    if not lines:
        raise DatasetError(f"{path}: parent sequence file is empty")
    return ParentSequence(tuple(lines))


def save_parent(path, parent: ParentSequence):
    Path(path).write_text("\n".join(parent.layers) + "\n")


def load_boreholes(path) -> list[BoreholeObservation]:
    """Borehole CSV: one row per record, ordered top-down per borehole."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != BOREHOLE_HEADER:
            raise DatasetError(
                f"{path}:1: expected header {','.join(BOREHOLE_HEADER)}"
            )
        for ln, row in enumerate(reader, start=2):
            try:
                rows.append(
                    (
                        row["borehole_id"],
                        float(row["x_km"]),
                        float(row["y_km"]),
                        float(row["ground_level_m"]),
                        int(row["record_index"]),
                        row["facies"],
                        float(row["thickness_m"]),
                    )
                )
            except (TypeError, ValueError, KeyError) as exc:
                raise DatasetError(f"{path}:{ln}: malformed row ({exc})") from exc
    if not rows:
        raise DatasetError(f"{path}: no borehole records")
    boreholes = []
    seen = {}
    for bid, x, y, gl, ridx, facies, z in rows:
        if bid not in seen:
            seen[bid] = {"x": x, "y": y, "gl": gl, "records": []}
        info = seen[bid]
        if info["records"] and ridx != len(info["records"]):
            raise DatasetError(
                f"{path}: borehole {bid}: record indices are not consecutive"
            )
        info["records"].append((facies, z))
    for bid, info in seen.items():
        boreholes.append(
            BoreholeObservation(bid, info["x"], info["y"], info["gl"],
                                tuple(info["records"]))
        )
    return boreholes


def save_boreholes(path, boreholes: list[BoreholeObservation]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BOREHOLE_HEADER)
        for b in boreholes:
            for k, (facies, z) in enumerate(b.records):
                writer.writerow(
                    [b.id, _fmt(b.x), _fmt(b.y), _fmt(b.ground_level),
                     k, facies, _fmt(z)]
                )


def save_truth(path, truth: list[AugmentedConfiguration], parent: ParentSequence):
    """Ground-truth sidecar: full thickness vector per borehole."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["borehole_id", "layer_index", "facies", "thickness_m"])
        for cfg in truth:
            for j, z in enumerate(cfg.thicknesses):
                writer.writerow([cfg.borehole_id, j, parent.layers[j], _fmt(z)])


def load_truth(path, parent: ParentSequence) -> list[AugmentedConfiguration]:
    per_bh: dict[str, list[float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            per_bh.setdefault(row["borehole_id"], []).append(float(row["thickness_m"]))
    return [
        AugmentedConfiguration(bid, np.array(zs)) for bid, zs in per_bh.items()
    ]


def save_samples(path, samples: list[PosteriorSample], groups: list[str]):
    """Chain output: one row per thinned sample."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["iteration"]
        for g in groups:
            header += [f"p_{g}", f"mu_{g}", f"beta_{g}", f"alpha_{g}", f"nu_{g}"]
        header.append("loglik")
        writer.writerow(header)
        for s in samples:
            row = [s.iteration]
            for g in groups:
                prm = s.params[g]
                row += [_fmt(prm.p), _fmt(prm.mu), _fmt(prm.beta),
                        _fmt(prm.alpha), _fmt(prm.nu)]
            row.append(_fmt(s.loglik))
            writer.writerow(row)


def load_samples(path):
    """Returns (groups, rows) with rows of (iteration, params_by_group, loglik)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or reader.fieldnames[0] != "iteration":
            raise DatasetError(f"{path}: not a samples file")
        groups = [c[2:] for c in reader.fieldnames if c.startswith("p_")]
        rows = []
        for row in reader:
            params = {
                g: LayerParams(
                    float(row[f"p_{g}"]), float(row[f"mu_{g}"]),
                    float(row[f"beta_{g}"]), float(row[f"alpha_{g}"]),
                    float(row[f"nu_{g}"]),
                )
                for g in groups
            }
            rows.append((int(row["iteration"]), params, float(row["loglik"])))
    return groups, rows


def save_configurations(path, samples: list[PosteriorSample], parent: ParentSequence):
    """Companion file: per-borehole thickness vectors per thinned sample."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "borehole_id", "layer_index", "thickness_m"])
        for s in samples:
            for cfg in s.configs:
                for j, z in enumerate(cfg.thicknesses):
                    writer.writerow([s.iteration, cfg.borehole_id, j, _fmt(z)])


def load_configurations(path):
    """Returns {iteration: [AugmentedConfiguration, ...]} in file order."""
    acc: dict[int, dict[str, list[float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            it = int(row["iteration"])
            acc.setdefault(it, {}).setdefault(row["borehole_id"], []).append(
                float(row["thickness_m"])
            )
    return {
        it: [AugmentedConfiguration(bid, np.array(zs)) for bid, zs in per.items()]
        for it, per in acc.items()
    }


def save_diagnostics(path, diagnostics: dict):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "name", "accepted", "proposed", "infeasible"])
        for which, c in diagnostics["param_accept"].items():
            writer.writerow(["parameter", which, c["accepted"], c["proposed"], 0])
        for kind, c in diagnostics["move_accept"].items():
            writer.writerow(["move", kind, c["accepted"], c["proposed"], c["infeasible"]])


def save_summary(path, samples: list[PosteriorSample], groups: list[str]):
    """Posterior medians and 0.05/0.95 quantiles per parameter and group."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "parameter", "median", "q05", "q95"])
        for g in groups:
            for which in ("p", "mu", "beta", "alpha"):
                vals = np.array([getattr(s.params[g], which) for s in samples])
                writer.writerow(
                    [g, which, _fmt(np.median(vals)),
                     _fmt(np.quantile(vals, 0.05)), _fmt(np.quantile(vals, 0.95))]
                )


def save_raster(path, stack: LayerStack):
    """Raster CSV: one row per (node, layer) with planar coordinates."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x_km", "y_km", "layer_index", "facies", "thickness_m"])
        n_grid = stack.grid.n_nodes
        pts = stack.points[:n_grid]
        for c in range(n_grid):
            for j in range(len(stack.parent)):
                writer.writerow(
                    [_fmt(pts[c, 0]), _fmt(pts[c, 1]), j,
                     stack.parent.layers[j], _fmt(stack.thickness[j, c])]
                )


def save_stack_grid(path, stack: LayerStack):
    """Gridded text format: header (origin, spacing, dims), then one line of
    node thicknesses per layer."""
    grid = stack.grid
    lines = [
        f"# stratasim gridded stack",
        f"# kind {grid.kind}",
        f"# origin {_fmt(grid.origin[0])} {_fmt(grid.origin[1])}",
        f"# spacing {_fmt(grid.spacing)}",
        f"# dims {grid.nx} {grid.ny} layers {len(stack.parent)}",
        f"# facies {' '.join(stack.parent.layers)}",
    ]
    n_grid = grid.n_nodes
    for j in range(len(stack.parent)):
        lines.append(" ".join(_fmt(v) for v in stack.thickness[j, :n_grid]))
    Path(path).write_text("\n".join(lines) + "\n")


def save_polylines(path, distances, boundaries):
    """Layer-boundary polylines: (transect_distance, depth, layer_index)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["transect_distance_km", "depth_m", "layer_index"])
        for j in range(boundaries.shape[0]):
            for c, d in enumerate(distances):
                writer.writerow([_fmt(d), _fmt(boundaries[j, c]), j])


def save_section(path, distances, columns):
    """Facies raster of a cross-section, column by column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["transect_distance_km", "layer_index", "facies", "top_m", "bottom_m"]
        )
        for c, d in enumerate(distances):
            for j, facies, top, bottom in columns[c]:
                writer.writerow([_fmt(d), j, facies, _fmt(top), _fmt(bottom)])


def save_tcd(path, z_grid, median, q05, q95, empirical):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z_m", "median", "q05", "q95", "empirical"])
        for row in zip(z_grid, median, q05, q95, empirical):
            writer.writerow([_fmt(v) for v in row])
