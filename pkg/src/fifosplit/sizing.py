"""Channel buffer sizing: exact peak occupancy plus power-of-two rounding.

The producer and consumer are assumed to share a global interleaving given
by lexicographic timestamp order; one timestamp behaves like one step of a
sequential process (operand reads retire, then the write lands).
Occupancy is computed by an exact sweep at fixed parameters;
the reported size is the next power of two (the sizing heuristic of the
report tables).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .oracle import DEFAULT_PAIR_BUDGET, ScheduleCollision
from .patterns import PatternClass
from .ppn import PPN, Channel, Schedule
from .presburger import ParamAssignment


def round_size(n: int) -> int:
    """Smallest power of two >= n; zero stays zero."""
    if n < 0:
        raise ValueError("size must be non-negative")
    if n == 0:
        return 0
    return 1 << (n - 1).bit_length()


def max_live(
    c: Channel,
    sp: Schedule,
    sc: Schedule,
    pa: ParamAssignment | None = None,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> int:
    """Peak count of values written but not yet fully consumed."""
    rel = c.dataflow
    if pa is not None and rel.params:
        rel = rel.instantiate(pa)
    pv = pa.values if pa is not None else None
    pairs = rel.enumerate_pairs(budget)
    if not pairs:
        return 0

    pending: dict[tuple[int, ...], int] = {}  # writer iteration -> unread count
    write_ts: dict[tuple[int, ...], tuple[int, ...]] = {}
    write_seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    read_seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    reads = []
    for x, y in pairs:
        if x not in pending:
            ts = sp.evaluate(x, pv)
            if ts in write_seen and write_seen[ts] != x:
                raise ScheduleCollision(
                    f"producer iterations {write_seen[ts]} and {x} share timestamp {ts}"
                )
            write_seen[ts] = x
            pending[x] = 0
            write_ts[x] = ts
        pending[x] += 1
        ts = sc.evaluate(y, pv)
        if ts in read_seen and read_seen[ts] != y:
            raise ScheduleCollision(
                f"consumer iterations {read_seen[ts]} and {y} share timestamp {ts}"
            )
        read_seen[ts] = y
        reads.append((ts, x))

    if any(ts < write_ts[x] for ts, x in reads):
        # clocks of the two processes are unrelated; the shared-schedule
        # interleaving does not exist, fall back to self-timed occupancy
        return _selftimed_maxlive(pairs, sp, sc, pv)

    # One timestamp is one step of the shared order: reads of earlier
    # values retire first, then the write lands, then same-step reads.
    events = [(ts, 1, x) for x, ts in write_ts.items()]
    events += [(ts, 0 if ts > write_ts[x] else 2, x) for ts, x in reads]
    events.sort(key=lambda e: (e[0], e[1]))
    live = peak = 0
    for _, role, x in events:
        if role == 1:
            live += 1
            peak = max(peak, live)
        else:
            pending[x] -= 1
            if pending[x] == 0:
                live -= 1
    return peak


def _selftimed_maxlive(pairs, sp: Schedule, sc: Schedule, pv) -> int:
    """Occupancy when the clocks are unrelated: the producer runs lazily,
    just far enough ahead of each read, and the consumer retires eagerly."""
    sources = sorted({x for x, _ in pairs}, key=lambda x: sp.evaluate(x, pv))
    rank = {x: i for i, x in enumerate(sources)}
    remaining = {x: 0 for x in sources}
    for x, _ in pairs:
        remaining[x] += 1
    reads = sorted(pairs, key=lambda p: (sc.evaluate(p[1], pv), rank[p[0]]))

    produced = retired = peak = 0
    for x, _ in reads:
        produced = max(produced, rank[x] + 1)
        peak = max(peak, produced - retired)
        remaining[x] -= 1
        if remaining[x] == 0:
            retired += 1
    return peak


@dataclass
class SizeReport:
    per_channel: dict[str, dict] = field(default_factory=dict)
    fifo_size: int = 0
    total_size: int = 0

    def to_json(self) -> dict:
        return {
            "channels": self.per_channel,
            "fifo_size": self.fifo_size,
            "total_size": self.total_size,
        }


def size_report(
    net: PPN,
    pa: ParamAssignment,
    classifications: Mapping[str, PatternClass],
    budget: int = DEFAULT_PAIR_BUDGET,
) -> SizeReport:
    """Per-channel maxlive/rounded sizes and the fifo/total aggregates."""
    report = SizeReport()
    for c in sorted(net.channels, key=lambda c: c.id):
        sp = net.process(c.producer).schedule
        sc = net.process(c.consumer).schedule
        raw = max_live(c, sp, sc, pa, budget)
        rounded = round_size(raw)
        pattern = classifications[c.id]
        report.per_channel[c.id] = {
            "raw_maxlive": raw,
            "rounded": rounded,
            "pattern": pattern.value,
        }
        report.total_size += rounded
        if pattern is PatternClass.FIFO:
            report.fifo_size += rounded
    return report
