"""Channel partitioning by tile-crossing depth and network rewriting.

A channel between two processes tiled with n hyperplanes is split into n+1
parts: for each depth k the pairs whose timestamps first differ at tile
coordinate k, plus the pairs whose endpoints share a tile.  When every
nonempty part is a FIFO the channel is replaced by its parts; otherwise the
network keeps the channel unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import patterns
from .oracle import DEFAULT_PAIR_BUDGET
from .patterns import PatternClass, lex_compare_set
from .ppn import PPN, Channel, Schedule
from .presburger import IntegerRelation, ParamAssignment
from .tiling import Tiling, apply_tiling


class BadScheduleShape(Exception):
    """Schedules are not the identity map on (tile coords, point dims)."""


@dataclass
class SplitResult:
    """Parts ordered as crossing depth 1..n, then the intra-tile part."""

    parts: list[IntegerRelation]
    nonempty_mask: Optional[list[bool]] = None

    @property
    def suffixes(self) -> list[str]:
        return [f".d{k}" for k in range(1, len(self.parts))] + [".intra"]

    def nonempty_parts(self) -> list[tuple[str, IntegerRelation]]:
        if self.nonempty_mask is None:
            raise ValueError("no instantiation was given; emptiness is unknown")
        return [
            (suffix, part)
            for suffix, part, keep in zip(self.suffixes, self.parts, self.nonempty_mask)
            if keep
        ]


def split(
    rel: IntegerRelation,
    sp: Schedule,
    sc: Schedule,
    n: int,
    pa: Optional[ParamAssignment] = None,
) -> SplitResult:
    """Partition by the depth at which producer/consumer timestamps diverge.

    Part k (1 <= k <= n) collects the pairs whose producer timestamp
    precedes the consumer one at depth k; part n+1 collects same-tile pairs
    (first n timestamp rows equal).  The comparators are mutually exclusive,
    so the parts partition the relation for every dataflow relation whose
    producer runs no later than its consumer in tile coordinates (always the
    case for a valid channel under a shared schedule).
    """
    if n < 1:
        raise ValueError("tiling depth must be >= 1")
    if not sp.is_identity() or not sc.is_identity():
        raise BadScheduleShape("split requires identity schedules on (phi, point) dims")
    if n > min(sp.depth, sc.depth):
        raise BadScheduleShape(f"tiling depth {n} exceeds schedule depth")

    parts = [
        rel.intersect(lex_compare_set(rel, sp, sc, "precedes_at_depth", k))
        for k in range(1, n + 1)
    ]
    parts.append(rel.intersect(lex_compare_set(rel, sp, sc, "equal_first", n)))

    mask = None
    if pa is not None or not rel.params:
        mask = [
            not (p.instantiate(pa) if pa is not None and p.params else p).is_empty()
            for p in parts
        ]
    return SplitResult(parts, mask)


@dataclass
class ChannelDecision:
    id: str
    action: str  # "replaced" | "kept" | "skipped"
    reason: Optional[str] = None
    parts: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"id": self.id, "action": self.action}
        if self.reason:
            out["reason"] = self.reason
        if self.parts:
            out["parts"] = self.parts
        return out


@dataclass
class FifoizeLog:
    decisions: list[ChannelDecision] = field(default_factory=list)

    def decision(self, cid: str) -> ChannelDecision:
        for d in self.decisions:
            if d.id == cid:
                return d
        raise KeyError(cid)

    def to_json(self) -> list:
        return [d.to_json() for d in self.decisions]

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def _pair_count(rel: IntegerRelation, pa: ParamAssignment, budget: int) -> int:
    if rel.params:
        rel = rel.instantiate(pa)
    return len(rel.enumerate_pairs(budget))


def fifoize(
    net: PPN,
    tilings: dict[str, Tiling],
    pa: ParamAssignment,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> tuple[PPN, FifoizeLog]:
    """Apply the tilings, then split each eligible channel and rewrite.

    A channel is eligible when both endpoints are tiled with the same number
    of hyperplanes and both schedules have the identity shape.  Replacement
    is all-or-nothing per channel: the parts are inserted only if every
    nonempty part classifies as a FIFO, and empty parts are dropped.  A
    split that yields a single nonempty part leaves the channel unchanged
    (the part is the whole relation), which makes the rewrite idempotent.
    """
    tiled = apply_tiling(net, tilings)
    log = FifoizeLog()
    out_channels: list[Channel] = []

    for c in tiled.channels:
        prod = tiled.process(c.producer)
        cons = tiled.process(c.consumer)
        n_p, n_c = prod.tile_depth, cons.tile_depth
        if n_p == 0 or n_c == 0:
            log.decisions.append(ChannelDecision(c.id, "skipped", "untiled endpoint"))
            out_channels.append(c)
            continue
        if n_p != n_c:
            log.decisions.append(
                ChannelDecision(c.id, "skipped", f"tiling depths differ ({n_p} vs {n_c})")
            )
            out_channels.append(c)
            continue
        if not prod.schedule.is_identity() or not cons.schedule.is_identity():
            log.decisions.append(ChannelDecision(c.id, "skipped", "schedule shape"))
            out_channels.append(c)
            continue

        result = split(c.dataflow, prod.schedule, cons.schedule, n_p, pa)
        nonempty = result.nonempty_parts()
        part_info = []
        all_fifo = True
        for suffix, part in nonempty:
            cls = patterns.classify(part, prod.schedule, cons.schedule, pa)
            part_info.append(
                {
                    "suffix": suffix,
                    "class": cls.value,
                    "size": _pair_count(part, pa, budget),
                }
            )
            if cls is not PatternClass.FIFO:
                all_fifo = False

        if not nonempty:
            log.decisions.append(
                ChannelDecision(c.id, "kept", "empty at this instantiation", part_info)
            )
            out_channels.append(c)
        elif not all_fifo:
            log.decisions.append(ChannelDecision(c.id, "kept", "non-fifo part", part_info))
            out_channels.append(c)
        elif len(nonempty) == 1:
            log.decisions.append(ChannelDecision(c.id, "kept", "single part", part_info))
            out_channels.append(c)
        else:
            log.decisions.append(ChannelDecision(c.id, "replaced", None, part_info))
            for suffix, part in nonempty:
                out_channels.append(Channel(c.id + suffix, c.producer, c.consumer, part))

    return PPN(tiled.params, dict(tiled.param_defaults), tiled.processes, out_channels), log
