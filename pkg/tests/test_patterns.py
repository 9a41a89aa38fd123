"""Communication pattern predicates: lex comparators, in-order, unicity."""

import pytest

from fifosplit.patterns import (
    DepthOutOfRange,
    PatternClass,
    classify,
    in_order,
    lex_compare_set,
    unicity,
)
from fifosplit.presburger import ParamAssignment, parse_relation
from fifosplit.tiling import apply_tiling

from conftest import mk_schedule


def test_quadrant_mapping():
    assert PatternClass.from_predicates(True, True) is PatternClass.FIFO
    assert (
        PatternClass.from_predicates(True, False)
        is PatternClass.IN_ORDER_WITH_MULTIPLICITY
    )
    assert (
        PatternClass.from_predicates(False, True)
        is PatternClass.OUT_OF_ORDER_NO_MULTIPLICITY
    )
    assert (
        PatternClass.from_predicates(False, False)
        is PatternClass.OUT_OF_ORDER_WITH_MULTIPLICITY
    )


def test_precedes_depth1_is_strict_inequality():
    rel = parse_relation("[x] -> [y] : 0 <= x and x <= 5 and 0 <= y and y <= 5")
    s = mk_schedule(["x"])
    c = mk_schedule(["y"])
    cmp_set = lex_compare_set(rel, s, c, "precedes_at_depth", 1)
    got = set(rel.intersect(cmp_set).enumerate_pairs(1000))
    assert got == {((x,), (y,)) for x in range(6) for y in range(6) if x < y}


def test_strictly_precedes_two_disjuncts():
    rel = parse_relation(
        "[x1,x2] -> [y1,y2] : 0 <= x1 and x1 <= 1 and 0 <= x2 and x2 <= 1 "
        "and 0 <= y1 and y1 <= 1 and 0 <= y2 and y2 <= 1"
    )
    s = mk_schedule(["x1", "x2"])
    c = mk_schedule(["y1", "y2"])
    cmp_set = lex_compare_set(rel, s, c, "strictly_precedes")
    assert len(cmp_set.disjuncts) == 2
    got = set(rel.intersect(cmp_set).enumerate_pairs(1000))
    assert got == {
        (x, y)
        for x in [(0, 0), (0, 1), (1, 0), (1, 1)]
        for y in [(0, 0), (0, 1), (1, 0), (1, 1)]
        if x < y
    }


def test_equal_first_selects_shared_prefix():
    rel = parse_relation(
        "[x1,x2] -> [y1,y2] : 0 <= x1 and x1 <= 2 and x2 = 0 "
        "and 0 <= y1 and y1 <= 2 and y2 = 1"
    )
    s = mk_schedule(["x1", "x2"])
    c = mk_schedule(["y1", "y2"])
    got = set(rel.intersect(lex_compare_set(rel, s, c, "equal_first", 1)).enumerate_pairs(1000))
    assert got == {((k, 0), (k, 1)) for k in range(3)}


def test_depth_out_of_range():
    rel = parse_relation("[x] -> [y] : x = y and 0 <= x and x <= 3")
    s = mk_schedule(["x"])
    c = mk_schedule(["y"])
    with pytest.raises(DepthOutOfRange):
        lex_compare_set(rel, s, c, "precedes_at_depth", 2)


def test_dep5_untiled_is_fifo(jacobi, pa88):
    c5 = jacobi.channel("c5")
    sched = jacobi.process("compute").schedule
    assert in_order(c5.dataflow, sched, sched, pa88)
    assert unicity(c5.dataflow, pa88)
    assert classify(c5.dataflow, sched, sched, pa88) is PatternClass.FIFO


def test_dep5_tiled_2x2_loses_in_order(jacobi, jacobi_tile2, pa88):
    tiled = apply_tiling(jacobi, jacobi_tile2)
    sched = tiled.process("compute").schedule
    c5 = tiled.channel("c5")
    assert not in_order(c5.dataflow, sched, sched, pa88)
    assert unicity(c5.dataflow, pa88)
    assert (
        classify(c5.dataflow, sched, sched, pa88)
        is PatternClass.OUT_OF_ORDER_NO_MULTIPLICITY
    )


def test_broadcast_has_multiplicity():
    rel = parse_relation("[i] -> [i2,j] : i2 = i and 0 <= j and j <= 2 and 0 <= i and i <= 4")
    s = mk_schedule(["i"])
    c = mk_schedule(["i2", "j"])
    assert not unicity(rel)
    assert in_order(rel, s, c)
    assert classify(rel, s, c) is PatternClass.IN_ORDER_WITH_MULTIPLICITY


def test_empty_relation_vacuously_fifo():
    rel = parse_relation("[x] -> [y] : x = y and x >= 1 and x <= 0")
    s = mk_schedule(["x"])
    c = mk_schedule(["y"])
    assert in_order(rel, s, c)
    assert unicity(rel)
    assert classify(rel, s, c) is PatternClass.FIFO


def test_schedule_shift_invariance(jacobi, pa88):
    c5 = jacobi.channel("c5")
    base = jacobi.process("compute").schedule
    shifted = mk_schedule(["t", "i"], ["t + 7", "i + 7"], params=("T", "N"))
    assert in_order(c5.dataflow, base, base, pa88) == in_order(
        c5.dataflow, shifted, shifted, pa88
    )


def test_monotone_restriction(jacobi, jacobi_tile2, pa88):
    # a subset of an in-order relation stays in-order; same for unicity
    c5 = jacobi.channel("c5")
    sched = jacobi.process("compute").schedule
    sub = c5.dataflow.intersect(
        parse_relation("[t,i] -> [t2,i2] : i <= 4", params=("T", "N"))
    )
    assert in_order(c5.dataflow, sched, sched, pa88)
    assert in_order(sub, sched, sched, pa88)
    assert unicity(sub, pa88)


def test_tiled_dep5_has_1243_style_reversal(jacobi, jacobi_tile2, pa88):
    # concrete witness for the reversed read order across a tile boundary
    tiled = apply_tiling(jacobi, jacobi_tile2)
    sched = tiled.process("compute").schedule
    pairs = tiled.channel("c5").dataflow.instantiate(pa88).enumerate_pairs(10**6)
    order = sorted(pairs, key=lambda xy: xy[1])  # consumer (identity) order
    writes = [x for x, _ in order]
    assert any(a > b for a, b in zip(writes, writes[1:]))
