"""Brute-force reference: traces, exhaustive classification, occupancy."""

import pytest

from fifosplit.oracle import (
    ScheduleCollision,
    build_trace,
    oracle_classify,
    oracle_maxlive,
)
from fifosplit.patterns import PatternClass, classify
from fifosplit.presburger import ParamAssignment, parse_relation
from fifosplit.sizing import max_live
from fifosplit.tiling import apply_tiling

from conftest import mk_schedule


def test_dep5_untiled_is_fifo(jacobi, pa88):
    c5 = jacobi.channel("c5")
    sched = jacobi.process("compute").schedule
    assert oracle_classify(c5.dataflow, sched, sched, pa88) is PatternClass.FIFO


def test_tiled_dep5_reversal_detected(jacobi, jacobi_tile2, pa88):
    tiled = apply_tiling(jacobi, jacobi_tile2)
    sched = tiled.process("compute").schedule
    c5 = tiled.channel("c5")
    trace = build_trace(c5.dataflow, sched, sched, pa88)
    order = [w for _, _, w in trace.reads]
    assert any(a > b for a, b in zip(order, order[1:]))
    assert (
        oracle_classify(c5.dataflow, sched, sched, pa88)
        is PatternClass.OUT_OF_ORDER_NO_MULTIPLICITY
    )


def test_broadcast_in_order_with_multiplicity():
    rel = parse_relation(
        "[i] -> [i2,j] : i2 = i and 0 <= j and j <= 2 and 0 <= i and i <= 4"
    )
    s = mk_schedule(["i"])
    c = mk_schedule(["i2", "j"])
    assert oracle_classify(rel, s, c) is PatternClass.IN_ORDER_WITH_MULTIPLICITY


def test_empty_channel():
    rel = parse_relation("[x] -> [y] : y = x and x >= 1 and x <= 0")
    s = mk_schedule(["x"])
    c = mk_schedule(["y"])
    assert oracle_maxlive(rel, s, c) == 0
    assert oracle_classify(rel, s, c) is PatternClass.FIFO


def test_single_pair_maxlive():
    rel = parse_relation("[x] -> [y] : x = 2 and y = 5")
    assert oracle_maxlive(rel, mk_schedule(["x"]), mk_schedule(["y"])) == 1


def test_trace_deterministic(jacobi, pa88):
    c4 = jacobi.channel("c4")
    sched = jacobi.process("compute").schedule
    t1 = build_trace(c4.dataflow, sched, sched, pa88)
    t2 = build_trace(c4.dataflow, sched, sched, pa88)
    assert t1.to_json() == t2.to_json()
    assert t1.reads == sorted(t1.reads, key=lambda r: (r[0], r[2]))


def test_schedule_collision_reported():
    rel = parse_relation("[x] -> [y] : y = 0 and 0 <= x and x <= 3")
    collapsing = mk_schedule(["x"], ["0"])
    with pytest.raises(ScheduleCollision):
        build_trace(rel, collapsing, mk_schedule(["y"]))


def test_trace_dump(tmp_path, jacobi, pa88):
    import json

    c5 = jacobi.channel("c5")
    sched = jacobi.process("compute").schedule
    trace = build_trace(c5.dataflow, sched, sched, pa88)
    path = tmp_path / "c5.trace.json"
    trace.dump(path)
    doc = json.loads(path.read_text())
    assert len(doc["writes"]) == len(trace.writes)
    assert all(r["write_index"] < len(doc["writes"]) for r in doc["reads"])


def test_oracle_agrees_with_symbolic_on_jacobi(jacobi, jacobi_tile2, pa88):
    for net in (jacobi, apply_tiling(jacobi, jacobi_tile2)):
        for c in net.channels:
            sp = net.process(c.producer).schedule
            sc = net.process(c.consumer).schedule
            assert classify(c.dataflow, sp, sc, pa88) is oracle_classify(
                c.dataflow, sp, sc, pa88
            )
            assert max_live(c, sp, sc, pa88) == oracle_maxlive(
                c.dataflow, sp, sc, pa88
            )
