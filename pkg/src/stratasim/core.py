"""Domain types for stacked depositional sequences and the move algebra.

A parent sequence is the regional ordering of lithofacies layers.  Each
borehole observes a subsequence of it; layers absent at a borehole have zero
thickness in the corresponding augmented configuration.  The mapping
``observe`` projects a full-length thickness vector back onto the observed
records (drop zeros, merge adjacent same-facies runs).  Split/Merge/Displace
redistribute observed thickness among same-facies layers without changing the
observed records.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    IncompatibleSequenceError,
    InfeasibleMoveError,
    InvalidConfigurationError,
    DatasetError,
)

# All thicknesses are kept on a fixed dyadic grid (~1e-9 m).  Sums and
# differences of grid values below ~8e6 m are then exact in double precision,
# which makes total-thickness conservation and observe() invariance exact
# rather than approximate.
THICKNESS_QUANTUM = 2.0 ** -30

MOVE_KINDS = ("split", "merge", "displace")


def snap_thickness(z):
    """Round a thickness (scalar or array) to the dyadic grid."""
    return np.round(np.asarray(z, dtype=float) / THICKNESS_QUANTUM) * THICKNESS_QUANTUM


@dataclass(frozen=True)
class ParentSequence:
    """Ordered regional template of facies codes."""

    layers: tuple[str, ...]

    def __post_init__(self):
        if len(self.layers) < 1:
            raise InvalidConfigurationError("parent sequence must have at least one layer")
        object.__setattr__(self, "layers", tuple(str(c) for c in self.layers))

    def __len__(self):
        return len(self.layers)

    @property
    def facies(self) -> tuple[str, ...]:
        """Distinct facies codes, in order of first appearance."""
        seen = []
        for c in self.layers:
            if c not in seen:
                seen.append(c)
        return tuple(seen)

    def layers_of(self, facies: str) -> list[int]:
        return [j for j, c in enumerate(self.layers) if c == facies]


@dataclass(frozen=True)
class BoreholeObservation:
    """Observed facies/thickness records at one location.

    Records are ordered top-down; thicknesses are in metres and snapped to
    the dyadic grid at construction.  Consecutive records must carry
    different facies (each record is a maximal run).
    """

    id: str
    x: float
    y: float
    ground_level: float
    records: tuple[tuple[str, float], ...]

    def __post_init__(self):
        recs = []
        prev = None
        for k, (facies, z) in enumerate(self.records):
            zq = float(snap_thickness(z))
            if zq < 1e-9:
                raise DatasetError(
                    f"borehole {self.id}: record {k} has non-positive thickness {z!r}"
                )
            if prev is not None and facies == prev:
                raise DatasetError(
                    f"borehole {self.id}: records {k - 1} and {k} share facies {facies!r}"
                )
            recs.append((str(facies), zq))
            prev = facies
        object.__setattr__(self, "records", tuple(recs))

    @property
    def location(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def total_thickness(self) -> float:
        return float(np.sum([z for _, z in self.records]))


@dataclass(frozen=True)
class AugmentedConfiguration:
    """Full-length thickness vector over the parent sequence for one borehole."""

    borehole_id: str
    thicknesses: np.ndarray

    def __post_init__(self):
        z = np.array(self.thicknesses, dtype=float)
        if np.any(z < 0):
            raise InvalidConfigurationError(
                f"borehole {self.borehole_id}: negative thickness in configuration"
            )
        z.flags.writeable = False
        object.__setattr__(self, "thicknesses", z)

    def __len__(self):
        return len(self.thicknesses)

    def support(self) -> frozenset[int]:
        """Indices of layers with positive thickness."""
        return frozenset(int(j) for j in np.nonzero(self.thicknesses > 0)[0])

    def with_thicknesses(self, z) -> "AugmentedConfiguration":
        return AugmentedConfiguration(self.borehole_id, z)


@dataclass(frozen=True)
class Move:
    """One Split/Merge/Displace proposal.

    ``j``/``j2`` are parent-layer indices.  For a split, ``u`` is the
    thickness moved to layer ``j2``; for a displace, ``u`` is the new
    thickness of layer ``j``.  Merges carry no ``u``.
    """

    kind: str
    j: int
    j2: int
    u: Optional[float] = None

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise InfeasibleMoveError(f"unknown move kind {self.kind!r}")

    def with_u(self, u: float) -> "Move":
        return replace(self, u=float(u))


def is_compatible(obs_facies: Sequence[str], parent: ParentSequence) -> bool:
    """True iff the observed facies list is a subsequence of the parent."""
    it = iter(parent.layers)
    return all(f in it for f in obs_facies)


def observe(cfg: AugmentedConfiguration, parent: ParentSequence) -> list[tuple[str, float]]:
    """Project a configuration onto observed records.

    Drops zero-thickness layers, then merges maximal runs of consecutive
    identical facies by summing their thicknesses (left-to-right, exact on
    the dyadic grid).
    """
    z = cfg.thicknesses
    if len(z) != len(parent):
        raise InvalidConfigurationError(
            f"configuration length {len(z)} != parent length {len(parent)}"
        )
    if np.any(z < 0):
        raise InvalidConfigurationError("negative thickness")
    records: list[tuple[str, float]] = []
    for j in range(len(parent)):
        if z[j] <= 0:
            continue
        facies = parent.layers[j]
        if records and records[-1][0] == facies:
            records[-1] = (facies, records[-1][1] + z[j])
        else:
            records.append((facies, float(z[j])))
    return records


def initial_augmentation(
    obs: BoreholeObservation, parent: ParentSequence
) -> AugmentedConfiguration:
    """Greedy leftmost assignment of each observed record to a parent layer."""
    z = np.zeros(len(parent))
    pos = 0
    for k, (facies, thickness) in enumerate(obs.records):
        while pos < len(parent) and parent.layers[pos] != facies:
            pos += 1
        if pos >= len(parent):
            raise IncompatibleSequenceError(
                f"borehole {obs.id}: record {k} ({facies!r}) does not fit the parent sequence",
                position=k,
            )
        z[pos] = thickness
        pos += 1
    return AugmentedConfiguration(obs.id, z)


def _image_preserved(cfg, parent, probe_z) -> bool:
    """Feasibility is 'same observed image', checked by re-running observe."""
    try:
        return observe(cfg.with_thicknesses(probe_z), parent) == observe(cfg, parent)
    except InvalidConfigurationError:
        return False


def enumerate_moves(
    cfg: AugmentedConfiguration, parent: ParentSequence, kind: str
) -> list[Move]:
    """All feasible moves of one kind for this configuration.

    Split: a positive layer donates part of its mass to an empty same-facies
    layer.  Merge (directed): layer ``j2`` collapses onto layer ``j``; both
    directions are enumerated so every compatible support stays reachable.
    Displace: the boundary between two positive same-facies layers moves.
    Feasibility of every candidate is verified constructively by comparing
    observed images.
    """
    if kind not in MOVE_KINDS:
        raise InfeasibleMoveError(f"unknown move kind {kind!r}")
    z = cfg.thicknesses
    M = len(parent)
    moves = []
    if kind == "split":
        for j in range(M):
            if z[j] < 2 * THICKNESS_QUANTUM:
                continue
            for j2 in range(M):
                if j2 == j or z[j2] != 0 or parent.layers[j2] != parent.layers[j]:
                    continue
                half = snap_thickness(z[j] / 2.0)
                probe = z.copy()
                probe[j] = z[j] - half
                probe[j2] = half
                if _image_preserved(cfg, parent, probe):
                    moves.append(Move("split", j, j2))
    elif kind == "merge":
        # directed: mass goes to layer j, layer j2 becomes empty
        for j in range(M):
            if z[j] <= 0:
                continue
            for j2 in range(M):
                if j2 == j or z[j2] <= 0 or parent.layers[j2] != parent.layers[j]:
                    continue
                probe = z.copy()
                probe[j] = z[j] + z[j2]
                probe[j2] = 0.0
                if _image_preserved(cfg, parent, probe):
                    moves.append(Move(kind, j, j2))
    else:  # displace: unordered positive pairs, u covers both directions
        for j in range(M):
            if z[j] <= 0:
                continue
            for j2 in range(j + 1, M):
                if z[j2] <= 0 or parent.layers[j2] != parent.layers[j]:
                    continue
                probe = z.copy()
                probe[j] = z[j] + z[j2]
                probe[j2] = 0.0
                if _image_preserved(cfg, parent, probe):
                    moves.append(Move(kind, j, j2))
    return moves


def apply_move(
    cfg: AugmentedConfiguration, parent: ParentSequence, move: Move
) -> AugmentedConfiguration:
    """Apply a feasible move, conserving total thickness exactly."""
    feasible = enumerate_moves(cfg, parent, move.kind)
    if not any(m.j == move.j and m.j2 == move.j2 for m in feasible):
        raise InfeasibleMoveError(
            f"{move.kind} ({move.j}, {move.j2}) is not feasible for this configuration"
        )
    z = cfg.thicknesses.copy()
    if move.kind == "merge":
        z[move.j] = z[move.j] + z[move.j2]
        z[move.j2] = 0.0
        return cfg.with_thicknesses(z)

    if move.u is None:
        raise InfeasibleMoveError(f"{move.kind} move requires a split point u")
    u = float(snap_thickness(move.u))
    if move.kind == "split":
        total = z[move.j]
        if not 0.0 < u < total:
            raise InfeasibleMoveError(
                f"split point {move.u} outside open interval (0, {total})"
            )
        z[move.j] = total - u
        z[move.j2] = u
    else:  # displace
        total = z[move.j] + z[move.j2]
        if not 0.0 < u < total:
            raise InfeasibleMoveError(
                f"displace point {move.u} outside open interval (0, {total})"
            )
        z[move.j] = u
        z[move.j2] = total - u
    return cfg.with_thicknesses(z)


def compatible_supports(
    obs_facies: Sequence[str], parent: ParentSequence
) -> set[frozenset[int]]:
    """Brute-force set of support patterns compatible with an observed sequence.

    A subset S of parent layers is compatible iff merging consecutive
    same-facies runs of S (in parent order) reproduces the observed facies
    list.  Intended for small parents (exponential in len(parent)).
    """
    M = len(parent)
    obs = list(obs_facies)
    out = set()
    for mask in range(1 << M):
        sel = [j for j in range(M) if mask >> j & 1]
        merged = []
        for j in sel:
            c = parent.layers[j]
            if not merged or merged[-1] != c:
                merged.append(c)
        if merged == obs:
            out.add(frozenset(sel))
    return out


def reachable_supports(
    cfg: AugmentedConfiguration, parent: ParentSequence
) -> set[frozenset[int]]:
    """Support patterns reachable from ``cfg`` by chains of moves (BFS).

    Only Split and Merge change the support, so Displace is not explored.
    """
    seen = {cfg.support()}
    frontier = [cfg]
    while frontier:
        cur = frontier.pop()
        for kind in ("split", "merge"):
            for mv in enumerate_moves(cur, parent, kind):
                if kind == "split":
                    mv = mv.with_u(float(snap_thickness(cur.thicknesses[mv.j] / 2.0)))
                nxt = apply_move(cur, parent, mv)
                if nxt.support() not in seen:
                    seen.add(nxt.support())
                    frontier.append(nxt)
    return seen
