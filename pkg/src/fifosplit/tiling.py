"""Loop tiling: tile-coordinate dimensions, tiled domains, lifted relations.

A tiling is a list of hyperplane normal vectors with a spacing per normal.
Tiling a process prepends one tile coordinate per hyperplane; the coordinate
is tied to the point dimensions by  0 <= tau.x - b*phi <= b-1, which encodes
phi = floor(tau.x / b) without divisions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .ppn import PPN, Channel, Process, Schedule
from .presburger import (
    AffineExpr,
    Constraint,
    IntegerRelation,
    IntegerSet,
    ParseError,
    Space,
)


class InvalidTiling(Exception):
    pass


class DepthMismatch(Exception):
    pass


@dataclass
class Tiling:
    normals: list[tuple[int, ...]]
    sizes: list[int]

    def __post_init__(self):
        self.normals = [tuple(n) for n in self.normals]
        if len(self.normals) != len(self.sizes):
            raise InvalidTiling("one size per normal vector required")
        if any(b < 1 for b in self.sizes):
            raise InvalidTiling("tile sizes must be >= 1")
        if self.normals:
            widths = {len(n) for n in self.normals}
            if len(widths) != 1:
                raise InvalidTiling("normal vectors have inconsistent arity")
            if _rank(self.normals) != len(self.normals):
                raise InvalidTiling("normal vectors are linearly dependent")

    @property
    def depth(self) -> int:
        return len(self.normals)


def _rank(vectors) -> int:
    rows = [[Fraction(v) for v in vec] for vec in vectors]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def _phi_names(n: int, taken) -> list[str]:
    names = []
    for k in range(1, n + 1):
        name = f"phi{k}"
        while name in taken:
            name += "_"
        names.append(name)
    return names


def _membership_constraints(tiling: Tiling, phi_names, point_dims) -> list[Constraint]:
    """0 <= tau_k . x - b_k * phi_k <= b_k - 1 for every hyperplane k."""
    out = []
    for phi, tau, b in zip(phi_names, tiling.normals, tiling.sizes):
        e = AffineExpr({d: c for d, c in zip(point_dims, tau)})
        e = e + AffineExpr({phi: -b})
        out.append(Constraint(e, "ge"))
        out.append(Constraint((-e).shift(b - 1), "ge"))
    return out


def tile_process(p: Process, tiling: Tiling) -> Process:
    """Tiled process: dims (phi_1..phi_n, original dims), identity schedule."""
    n = tiling.depth
    if n == 0:
        return p
    if p.tile_depth:
        raise InvalidTiling(f"process {p.name} is already tiled")
    if any(len(tau) != len(p.dims) for tau in tiling.normals):
        raise InvalidTiling(
            f"normal arity does not match the {len(p.dims)} dims of process {p.name}"
        )
    if n > len(p.dims):
        raise InvalidTiling("more hyperplanes than process dimensions")
    phis = _phi_names(n, set(p.dims) | set(p.domain.space.params))
    space = Space(tuple(phis) + p.dims, p.domain.space.params)
    member = _membership_constraints(tiling, phis, p.dims)
    disjuncts = [list(conj) + member for conj in p.domain.disjuncts]
    rows = [AffineExpr.var(phi) for phi in phis] + list(p.schedule.rows)
    return Process(
        name=p.name,
        domain=IntegerSet(space, disjuncts),
        schedule=Schedule(space.dims, rows, p.schedule.params),
        instance_label=p.instance_label,
        tile_depth=n,
    )


def lift_relation(c: Channel, tp: Tiling | None, tc: Tiling | None) -> Channel:
    """Augment a channel relation with tile coordinates on the tiled sides.

    The point set projected back onto the original dimensions is unchanged:
    the membership inequalities force a unique phi vector per endpoint.
    """
    if tp is not None and tc is not None and tp.depth != tc.depth:
        raise DepthMismatch(
            f"channel {c.id}: producer tiled with {tp.depth} hyperplanes, "
            f"consumer with {tc.depth}"
        )
    rel = c.dataflow
    dims_in, dims_out = rel.space_in.dims, rel.space_out.dims
    params = rel.params
    extra: list[Constraint] = []

    if tp is not None and tp.depth:
        phis_in = [f"{x}'" for x in _phi_names(tp.depth, set(dims_in) | set(dims_out))]
        dims_in = tuple(phis_in) + dims_in
        extra += _membership_constraints(tp, phis_in, rel.space_in.dims)
    if tc is not None and tc.depth:
        taken = set(dims_in) | set(dims_out)
        phis_out = _phi_names(tc.depth, taken)
        dims_out = tuple(phis_out) + dims_out
        extra += _membership_constraints(tc, phis_out, rel.space_out.dims)

    lifted = IntegerRelation(
        Space(dims_in, params),
        Space(dims_out, params),
        [list(conj) + extra for conj in rel.disjuncts],
    )
    return Channel(c.id, c.producer, c.consumer, lifted)


def apply_tiling(net: PPN, tilings: dict[str, Tiling]) -> PPN:
    """Tile the named processes and lift every incident channel relation.

    Processes absent from `tilings` (and already-tiled processes) are left
    untouched, as are channels between two untouched processes.
    """
    for name in tilings:
        if name not in net.processes:
            raise InvalidTiling(f"tiling names unknown process {name!r}")
    processes = {
        name: tile_process(p, tilings[name]) if name in tilings else p
        for name, p in net.processes.items()
    }
    channels = []
    for c in net.channels:
        tp = tilings.get(c.producer)
        tc = tilings.get(c.consumer)
        if tp is None and tc is None:
            channels.append(c)
        else:
            channels.append(lift_relation(c, tp, tc))
    return PPN(net.params, dict(net.param_defaults), processes, channels)


def load_tilings(path) -> dict[str, Tiling]:
    """Tiling description file: {"tilings": [{process, normals, sizes}]}."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(doc, dict) or not isinstance(doc.get("tilings"), list):
        raise ParseError(f"{path}: expected a top-level 'tilings' list")
    out = {}
    for entry in doc["tilings"]:
        name = entry.get("process")
        if not isinstance(name, str):
            raise ParseError(f"{path}: tiling entry without a 'process' name")
        if name in out:
            raise ParseError(f"{path}: duplicate tiling for process {name!r}")
        out[name] = Tiling(entry.get("normals", []), entry.get("sizes", []))
    return out
