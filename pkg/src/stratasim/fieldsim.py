"""Unconditional and conditional simulation of stacked thickness fields.

Layers are simulated independently (per-layer seeded streams), transformed
to thicknesses, and stacked above a ground level to give depth surfaces.
Conditional simulation honors every borehole thickness, including the zeros,
by conditioning the latent field on back-transformed values and truncated
draws at zero-thickness sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gaussnum, likelihood
from .core import AugmentedConfiguration, ParentSequence, snap_thickness
from .errors import CapacityError, ParameterError, PlacementError
from .gaussnum import MaternSpec
from .likelihood import LayerParams

UNDEFINED_FACIES = "undefined"


@dataclass(frozen=True)
class SimGrid:
    """Rectangular planar grid or 1-D transect of simulation nodes."""

    kind: str                      # "grid" or "transect"
    origin: tuple[float, float]
    spacing: float
    nx: int
    ny: int
    endpoint: tuple[float, float] | None = None
    t0: float | np.ndarray = 0.0

    @classmethod
    def regular(cls, origin, spacing, nx, ny, t0=0.0) -> "SimGrid":
        if spacing <= 0 or nx < 1 or ny < 1:
            raise ParameterError("grid needs positive spacing and dimensions")
        return cls("grid", (float(origin[0]), float(origin[1])), float(spacing),
                   int(nx), int(ny), None, t0)

    @classmethod
    def transect(cls, start, end, n, t0=0.0) -> "SimGrid":
        if n < 2:
            raise ParameterError("transect needs at least two stations")
        start = (float(start[0]), float(start[1]))
        end = (float(end[0]), float(end[1]))
        step = float(np.hypot(end[0] - start[0], end[1] - start[1])) / (n - 1)
        if step <= 0:
            raise ParameterError("transect endpoints coincide")
        return cls("transect", start, step, int(n), 1, end, t0)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    def points(self) -> np.ndarray:
        if self.kind == "grid":
            xs = self.origin[0] + self.spacing * np.arange(self.nx)
            ys = self.origin[1] + self.spacing * np.arange(self.ny)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            return np.column_stack([gx.ravel(), gy.ravel()])
        t = np.linspace(0.0, 1.0, self.nx)[:, None]
        a = np.asarray(self.origin)
        b = np.asarray(self.endpoint)
        return a + t * (b - a)

    def distances(self) -> np.ndarray:
        """Along-line distance of each station (transect grids only)."""
        if self.kind != "transect":
            raise ParameterError("distances are defined for transect grids")
        return self.spacing * np.arange(self.nx)

    def ground_level(self) -> np.ndarray:
        t0 = np.asarray(self.t0, dtype=float)
        if t0.ndim == 0:
            return np.full(self.n_nodes, float(t0))
        if t0.size != self.n_nodes:
            raise ParameterError("per-node ground level has the wrong size")
        return t0.ravel()


def idw_ground_level(grid: SimGrid, locations, values, power: float = 2.0) -> np.ndarray:
    """Inverse-distance-interpolated ground level from borehole elevations."""
    pts = grid.points()
    locs = np.asarray(locations, dtype=float).reshape(-1, 2)
    vals = np.asarray(values, dtype=float)
    d = np.linalg.norm(pts[:, None, :] - locs[None, :, :], axis=2)
    out = np.empty(len(pts))
    exact = d < 1e-12
    w = 1.0 / np.maximum(d, 1e-12) ** power
    out = (w * vals).sum(axis=1) / w.sum(axis=1)
    hit = exact.any(axis=1)
    out[hit] = vals[np.argmax(exact[hit], axis=1)]
    return out


@dataclass(frozen=True)
class LayerStack:
    """Per-layer thickness fields plus derived depth surfaces.

    ``points`` may extend beyond the grid nodes when exact borehole
    locations were appended for conditioning; the first ``grid.n_nodes``
    rows are the grid columns.
    """

    grid: SimGrid
    parent: ParentSequence
    points: np.ndarray        # (N, 2)
    thickness: np.ndarray     # (M, N)

    def __post_init__(self):
        if np.any(self.thickness < 0):
            raise ParameterError("layer thicknesses must be non-negative")

    def surfaces(self) -> np.ndarray:
        """Depth surfaces T_0..T_M, shape (M + 1, N); nondecreasing in j."""
        n_grid = self.grid.n_nodes
        t0 = np.empty(self.thickness.shape[1])
        t0[:n_grid] = self.grid.ground_level()
        if self.thickness.shape[1] > n_grid:
            # appended borehole points inherit the scalar/mean ground level
            t0[n_grid:] = float(np.mean(self.grid.ground_level()))
        return np.vstack([t0, t0 + np.cumsum(self.thickness, axis=0)])


def _params_list(params_by_layer, parent: ParentSequence) -> list[LayerParams]:
    if isinstance(params_by_layer, dict):
        return [params_by_layer[facies] for facies in parent.layers]
    params = list(params_by_layer)
    if len(params) != len(parent):
        raise ParameterError("need one parameter set per parent layer")
    return params


def _layer_rng(seed: int, j: int):
    return np.random.default_rng(np.random.SeedSequence((int(seed), j)))


def _transform(w: np.ndarray, params: LayerParams) -> np.ndarray:
    above = w > params.tau
    z = np.zeros_like(w)
    if np.any(above):
        z[above] = likelihood.phi_transform(
            w[above] - params.tau, params.mu, params.beta
        )
    return z


def simulate_unconditional(
    grid: SimGrid,
    params_by_layer,
    parent: ParentSequence,
    seed: int,
    budget: int = 20_000,
) -> LayerStack:
    """Independent latent fields per layer, truncated and transformed."""
    params = _params_list(params_by_layer, parent)
    pts = grid.points()
    if len(pts) > budget:
        raise CapacityError(
            f"{len(pts)} grid nodes exceed the budget {budget}; coarsen the grid"
        )
    thickness = np.empty((len(parent), len(pts)))
    for j, prm in enumerate(params):
        w = gaussnum.sample_gaussian_field(
            pts, prm.matern_spec, _layer_rng(seed, j), budget=budget
        )
        thickness[j] = _transform(w, prm)
    return LayerStack(grid, parent, pts, thickness)


def _match_boreholes(grid: SimGrid, locations) -> tuple[np.ndarray, np.ndarray]:
    """Snap boreholes to grid nodes within half a cell; append the rest.

    Returns (sim_points, node_index_per_borehole).
    """
    pts = grid.points()
    locs = np.asarray(locations, dtype=float).reshape(-1, 2)
    half = grid.spacing / 2.0
    idx = np.empty(len(locs), dtype=int)
    extra = []
    for i, loc in enumerate(locs):
        d = np.linalg.norm(pts - loc, axis=1)
        k = int(np.argmin(d))
        if d[k] <= half:
            idx[i] = k
        else:
            idx[i] = len(pts) + len(extra)
            extra.append(loc)
    if extra:
        pts = np.vstack([pts, np.array(extra)])
    return pts, idx


def simulate_conditional(
    grid: SimGrid,
    params_by_layer,
    parent: ParentSequence,
    configs: list[AugmentedConfiguration],
    locations,
    seed: int,
    budget: int = 20_000,
) -> LayerStack:
    """Conditional simulation honoring every borehole thickness exactly.

    Per layer: back-transform positive thicknesses to latent values, draw
    the zero-site latents from their truncated conditional law, then simulate
    the field conditionally and transform back.  Borehole nodes are finally
    overwritten with the exact conditioning thicknesses (the kriging residual
    there is at jitter level, but near-threshold latents could otherwise leak
    a spurious sliver of thickness).
    """
    params = _params_list(params_by_layer, parent)
    locs = np.asarray(locations, dtype=float).reshape(-1, 2)
    if len(configs) != len(locs):
        raise ParameterError("need one configuration per borehole location")
    pts, bh_idx = _match_boreholes(grid, locs)
    if len(pts) > budget:
        raise CapacityError(
            f"{len(pts)} simulation points exceed the budget {budget}; coarsen the grid"
        )
    bh_pts = pts[bh_idx]
    z_cond = np.array([cfg.thicknesses for cfg in configs]).T  # (M, n)

    thickness = np.empty((len(parent), len(pts)))
    for j, prm in enumerate(params):
        rng = _layer_rng(seed, j)
        z_j = z_cond[j]
        pos = z_j > 0
        w_known = np.empty(len(locs))
        w_known[pos] = (
            likelihood.phi_inverse(z_j[pos], prm.mu, prm.beta) + prm.tau
        )
        if np.any(~pos):
            joint = gaussnum.cov_matrix(bh_pts, prm.matern_spec)
            m, v = gaussnum.condition(
                joint, np.nonzero(pos)[0], np.nonzero(~pos)[0], w_known[pos]
            )
            w_known[~pos] = gaussnum.sample_truncated_mvn(m, v, prm.tau, rng)
        w = gaussnum.sample_gaussian_field(
            pts,
            prm.matern_spec,
            rng,
            cond_points=bh_pts,
            cond_values=w_known,
            budget=budget,
        )
        thickness[j] = _transform(w, prm)
        thickness[j, bh_idx] = z_j
    return LayerStack(grid, parent, pts, thickness)


def cross_section(stack: LayerStack, transect: SimGrid | None = None):
    """Facies raster and layer-boundary polylines along a line.

    For a stack simulated on a transect grid no argument is needed; for a
    planar grid a transect is sampled at the nearest grid node per station.
    Returns (distances, columns, polylines) where ``columns[c]`` is the
    ordered list of (layer_index, facies, top, bottom) records of column c
    (positive layers plus a final undefined region below the last layer) and
    ``polylines`` has shape (M + 1, n_columns) of boundary depths.
    """
    surfaces = stack.surfaces()
    if stack.grid.kind == "transect" and transect is None:
        cols = np.arange(stack.grid.n_nodes)
        dist = stack.grid.distances()
    else:
        if transect is None or transect.kind != "transect":
            raise ParameterError("a planar stack needs an explicit transect")
        pts = stack.points[: stack.grid.n_nodes]
        stations = transect.points()
        d = np.linalg.norm(stations[:, None, :] - pts[None, :, :], axis=2)
        cols = np.argmin(d, axis=1)
        if np.any(np.min(d, axis=1) > stack.grid.spacing):
            raise PlacementError("transect does not intersect the grid")
        dist = transect.distances()

    boundaries = surfaces[:, cols]  # (M+1, ncols)
    bottom = float(np.max(boundaries[-1]))
    columns = []
    for c in range(len(cols)):
        records = []
        for j in range(len(stack.parent)):
            top, low = boundaries[j, c], boundaries[j + 1, c]
            if low > top:
                records.append((j, stack.parent.layers[j], float(top), float(low)))
        if bottom > boundaries[-1, c]:
            records.append(
                (len(stack.parent), UNDEFINED_FACIES, float(boundaries[-1, c]), bottom)
            )
        columns.append(records)
    return dist, columns, boundaries
