"""Channel partitioning by crossing depth and the network rewrite."""

import pytest

from fifosplit.patterns import PatternClass, classify
from fifosplit.presburger import ParamAssignment, parse_relation, parse_set
from fifosplit.ppn import Process
from fifosplit.splitter import BadScheduleShape, fifoize, split
from fifosplit.tiling import Tiling, apply_tiling, lift_relation, tile_process

from conftest import mk_schedule


def tiled_channel(jacobi, tiling, cid):
    tiled = apply_tiling(jacobi, {"compute": tiling})
    return tiled.channel(cid), tiled.process("compute").schedule


def part_pairs(result, pa):
    return [
        set(p.instantiate(pa).enumerate_pairs(10**6)) if p.params else
        set(p.enumerate_pairs(10**6))
        for p in result.parts
    ]


def test_dep5_splits_in_three(jacobi, jacobi_tile2, pa88):
    c5, sched = tiled_channel(jacobi, jacobi_tile2["compute"], "c5")
    result = split(c5.dataflow, sched, sched, 2, pa88)
    assert result.suffixes == [".d1", ".d2", ".intra"]
    assert result.nonempty_mask == [True, True, True]


def test_dep6_depth2_part_empty(jacobi, jacobi_tile2, pa88):
    # (t-1,i+1) -> (t,i): t+i is constant, so the second hyperplane (t+i)
    # is never crossed
    c6, sched = tiled_channel(jacobi, jacobi_tile2["compute"], "c6")
    result = split(c6.dataflow, sched, sched, 2, pa88)
    assert result.nonempty_mask == [True, False, True]


def test_split_is_a_partition(jacobi, jacobi_tile2, pa88):
    for cid in ("c4", "c5", "c6"):
        ch, sched = tiled_channel(jacobi, jacobi_tile2["compute"], cid)
        result = split(ch.dataflow, sched, sched, 2, pa88)
        whole = set(ch.dataflow.instantiate(pa88).enumerate_pairs(10**6))
        parts = part_pairs(result, pa88)
        assert set().union(*parts) == whole
        assert sum(len(p) for p in parts) == len(whole)


def test_split_empty_relation(jacobi, jacobi_tile2, pa88):
    import dataclasses

    c5 = jacobi.channel("c5")
    empty = parse_relation(
        "[t,i] -> [t2,i2] : t2 = t and i2 = i and t >= 1 and t <= 0",
        params=("T", "N"),
    )
    lifted = lift_relation(
        dataclasses.replace(c5, dataflow=empty),
        jacobi_tile2["compute"],
        jacobi_tile2["compute"],
    )
    sched = tile_process(jacobi.process("compute"), jacobi_tile2["compute"]).schedule
    result = split(lifted.dataflow, sched, sched, 2, pa88)
    assert result.nonempty_mask == [False, False, False]


def test_split_rejects_non_identity_schedule():
    rel = parse_relation("[x] -> [y] : y = x and 0 <= x and x <= 3")
    skew = mk_schedule(["x"], ["x + 1"])
    with pytest.raises(BadScheduleShape):
        split(rel, skew, skew, 1)


def test_fifoize_jacobi_2x2(jacobi, jacobi_tile2, pa88):
    out, log = fifoize(jacobi, jacobi_tile2, pa88)
    assert log.decision("c4").action == "replaced"
    assert log.decision("c5").action == "replaced"
    assert log.decision("c6").action == "replaced"
    for cid in ("c1", "c2", "c3", "c7"):
        assert log.decision(cid).action == "skipped"
    new_ids = {c.id for c in out.channels}
    assert new_ids == {
        "c1", "c2", "c3", "c7",
        "c4.d1", "c4.d2",
        "c5.d1", "c5.d2", "c5.intra",
        "c6.d1", "c6.intra",
    }
    sched = out.process("compute").schedule
    for c in out.channels:
        if c.producer == "compute" and c.consumer == "compute":
            assert classify(c.dataflow, sched, sched, pa88) is PatternClass.FIFO


def test_fifoize_preserves_pair_multiset(jacobi, jacobi_tile2, pa88):
    tiled = apply_tiling(jacobi, jacobi_tile2)
    out, _ = fifoize(jacobi, jacobi_tile2, pa88)

    def pair_multiset(net):
        pairs = []
        for c in net.channels:
            pairs.extend(c.dataflow.instantiate(pa88).enumerate_pairs(10**6))
        return sorted(pairs)

    assert pair_multiset(out) == pair_multiset(tiled)


def test_fifoize_idempotent(jacobi, jacobi_tile2, pa88):
    once, _ = fifoize(jacobi, jacobi_tile2, pa88)
    twice, log = fifoize(once, {}, pa88)
    assert twice == once
    # split channels survive as single parts, nothing is re-split
    for c in once.channels:
        if c.producer == "compute" and c.consumer == "compute":
            assert log.decision(c.id).action == "kept"


def test_fifoize_without_tilings_is_identity(jacobi, pa88):
    out, log = fifoize(jacobi, {}, pa88)
    assert out == jacobi
    assert all(d.action == "skipped" for d in log.decisions)


def test_fifoize_monotone_fifo_count(jacobi, jacobi_tile2, pa88):
    def count_fifo(net):
        n = 0
        for c in net.channels:
            sp = net.process(c.producer).schedule
            sc = net.process(c.consumer).schedule
            n += classify(c.dataflow, sp, sc, pa88) is PatternClass.FIFO
        return n

    tiled = apply_tiling(jacobi, jacobi_tile2)
    out, _ = fifoize(jacobi, jacobi_tile2, pa88)
    assert count_fifo(out) >= count_fifo(tiled)


def test_longdep_channel_kept():
    from fifosplit import bundled_model, load_ppn, load_tilings

    net = load_ppn(bundled_model("jacobi1d_longdep.ppn.json"))
    tilings = load_tilings(bundled_model("jacobi1d_longdep.tile.json"))
    pa = ParamAssignment({"T": 8, "N": 8})
    out, log = fifoize(net, tilings, pa)
    d = log.decision("clong")
    assert d.action == "kept"
    assert d.reason == "non-fifo part"
    assert any(p["class"] != "fifo" for p in d.parts)
    assert any(c.id == "clong" for c in out.channels)
