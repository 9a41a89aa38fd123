"""Brute-force ground truth for channel verdicts.

Enumerates all dataflow pairs at fixed parameters, orders them by the
producer/consumer schedules and decides in-order, unicity and peak occupancy
by direct inspection of the resulting trace.  Every symbolic verdict in the
pipeline is cross-checked against this module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .patterns import PatternClass
from .ppn import Schedule
from .presburger import IntegerRelation, ParamAssignment

DEFAULT_PAIR_BUDGET = 1_000_000


class ScheduleCollision(Exception):
    """Two distinct iterations share a timestamp; the model is not sequential."""


@dataclass
class Trace:
    """Writes and reads of one channel in schedule order.

    reads are (timestamp, consumer iteration, index into writes), sorted by
    consumer timestamp with the write index as tiebreak for multi-source
    reads.
    """

    writes: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    reads: list[tuple[tuple[int, ...], tuple[int, ...], int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "writes": [{"time": list(t), "iteration": list(x)} for t, x in self.writes],
            "reads": [
                {"time": list(t), "iteration": list(y), "write_index": w}
                for t, y, w in self.reads
            ],
        }

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def build_trace(
    rel: IntegerRelation,
    sp: Schedule,
    sc: Schedule,
    pa: ParamAssignment | None = None,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> Trace:
    if pa is not None and rel.params:
        rel = rel.instantiate(pa)
    pv = pa.values if pa is not None else None
    pairs = rel.enumerate_pairs(budget)

    sources = sorted({x for x, _ in pairs})
    write_ts = {x: sp.evaluate(x, pv) for x in sources}
    by_time = sorted(sources, key=lambda x: write_ts[x])
    for a, b in zip(by_time, by_time[1:]):
        if write_ts[a] == write_ts[b]:
            raise ScheduleCollision(
                f"producer iterations {a} and {b} share timestamp {write_ts[a]}"
            )
    windex = {x: i for i, x in enumerate(by_time)}

    reads = sorted(
        ((sc.evaluate(y, pv), y, windex[x]) for x, y in pairs),
        key=lambda r: (r[0], r[2]),
    )
    for (ta, ya, _), (tb, yb, _) in zip(reads, reads[1:]):
        if ta == tb and ya != yb:
            raise ScheduleCollision(
                f"consumer iterations {ya} and {yb} share timestamp {ta}"
            )
    return Trace(writes=[(write_ts[x], x) for x in by_time], reads=reads)


def oracle_classify(
    rel: IntegerRelation,
    sp: Schedule,
    sc: Schedule,
    pa: ParamAssignment | None = None,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> PatternClass:
    """Pattern quadrant decided by exhaustive inspection of the trace."""
    trace = build_trace(rel, sp, sc, pa, budget)
    order = [w for _, _, w in trace.reads]
    in_order = all(a <= b for a, b in zip(order, order[1:]))
    unicity = len(set(order)) == len(order)
    return PatternClass.from_predicates(in_order, unicity)


def oracle_maxlive(
    rel: IntegerRelation,
    sp: Schedule,
    sc: Schedule,
    pa: ParamAssignment | None = None,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> int:
    """Peak number of written-but-not-fully-read values, from the trace.

    Events are merged in timestamp order; a value retires at its last read.
    """
    trace = build_trace(rel, sp, sc, pa, budget)
    causal = all(not (t < trace.writes[w][0]) for t, _, w in trace.reads)
    if not causal:
        # unrelated local clocks (distinct processes): self-timed occupancy,
        # producer running just ahead of each read, eager retirement
        last_needed = -1
        reads_left = [0] * len(trace.writes)
        for _, _, w in trace.reads:
            reads_left[w] += 1
        retired = peak = 0
        for _, _, w in trace.reads:
            last_needed = max(last_needed, w)
            peak = max(peak, last_needed + 1 - retired)
            reads_left[w] -= 1
            if reads_left[w] == 0:
                retired += 1
        return peak

    last_read_of: dict[int, int] = {}
    for pos, (_, _, w) in enumerate(trace.reads):
        last_read_of[w] = pos

    # at a shared timestamp: reads of earlier writes, then the write,
    # then reads of the value written at this very timestamp
    events = [(t, 1, i) for i, (t, _) in enumerate(trace.writes)]
    events += [
        (t, 0 if t > trace.writes[w][0] else 2, pos)
        for pos, (t, _, w) in enumerate(trace.reads)
    ]
    events.sort(key=lambda e: (e[0], e[1]))

    live = peak = 0
    for _, role, idx in events:
        if role == 1:
            live += 1
            peak = max(peak, live)
        else:
            w = trace.reads[idx][2]
            if last_read_of[w] == idx:
                live -= 1
    return peak
