"""Communication pattern classification: in-order, unicity, four quadrants.

A channel is a FIFO iff the consumer reads values in production order
(in-order) and each value is read exactly once (unicity).  Both predicates
reduce to emptiness of a violation set built over two copies of the dataflow
relation; emptiness is exact once parameters are instantiated.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

from .ppn import Schedule
from .presburger import (
    AffineExpr,
    Constraint,
    IntegerRelation,
    IntegerSet,
    ParamAssignment,
    PresburgerError,
    Space,
)


class DepthOutOfRange(PresburgerError):
    pass


class PatternClass(Enum):
    FIFO = "fifo"
    IN_ORDER_WITH_MULTIPLICITY = "in-order-with-multiplicity"
    OUT_OF_ORDER_NO_MULTIPLICITY = "out-of-order-no-multiplicity"
    OUT_OF_ORDER_WITH_MULTIPLICITY = "out-of-order-with-multiplicity"

    @staticmethod
    def from_predicates(in_order: bool, unicity: bool) -> "PatternClass":
        if in_order:
            return PatternClass.FIFO if unicity else PatternClass.IN_ORDER_WITH_MULTIPLICITY
        return (
            PatternClass.OUT_OF_ORDER_NO_MULTIPLICITY
            if unicity
            else PatternClass.OUT_OF_ORDER_WITH_MULTIPLICITY
        )


def _rows_on(schedule: Schedule, dims: tuple[str, ...]) -> list[AffineExpr]:
    """Schedule rows rewritten onto the relation-side dimension names."""
    if len(schedule.dims) != len(dims):
        raise DepthOutOfRange(
            f"schedule arity {len(schedule.dims)} does not match relation side {dims}"
        )
    mapping = dict(zip(schedule.dims, dims))
    return [r.rename(mapping) for r in schedule.rows]


def _lex_conjunction(rows_a, rows_b, depth: int) -> list[Constraint]:
    """a << b at the given depth: equal on the first depth-1 rows, then <."""
    conj = [Constraint(a - b, "eq") for a, b in zip(rows_a[: depth - 1], rows_b[: depth - 1])]
    conj.append(Constraint((rows_b[depth - 1] - rows_a[depth - 1]).shift(-1), "ge"))
    return conj


def lex_compare_set(
    rel: IntegerRelation,
    sp: Schedule,
    sc: Schedule,
    mode: str,
    depth: Optional[int] = None,
) -> IntegerSet:
    """Constraint set over (x, y) comparing producer and consumer timestamps.

    Modes: "precedes_at_depth" (k-1 equalities and a strict inequality),
    "equal_first" (first `depth` rows equal), "strictly_precedes" (one
    disjunct per depth), "equal" (all rows equal).
    """
    rows_p = _rows_on(sp, rel.space_in.dims)
    rows_c = _rows_on(sc, rel.space_out.dims)
    if len(rows_p) != len(rows_c):
        raise DepthOutOfRange("producer/consumer timestamp lengths differ")
    d = len(rows_p)
    space = rel.combined_space()

    if mode == "precedes_at_depth":
        if depth is None or not 1 <= depth <= d:
            raise DepthOutOfRange(f"depth {depth} not in 1..{d}")
        return IntegerSet(space, [_lex_conjunction(rows_p, rows_c, depth)])
    if mode == "equal_first":
        if depth is None or not 0 <= depth <= d:
            raise DepthOutOfRange(f"depth {depth} not in 0..{d}")
        conj = [Constraint(a - b, "eq") for a, b in zip(rows_p[:depth], rows_c[:depth])]
        return IntegerSet(space, [conj])
    if mode == "strictly_precedes":
        return IntegerSet(space, [_lex_conjunction(rows_p, rows_c, k) for k in range(1, d + 1)])
    if mode == "equal":
        return IntegerSet(space, [[Constraint(a - b, "eq") for a, b in zip(rows_p, rows_c)]])
    raise ValueError(f"unknown comparison mode {mode!r}")


def _doubled(rel: IntegerRelation) -> tuple[Space, list[list[Constraint]], tuple, tuple, tuple, tuple]:
    """Two renamed copies of the relation over one combined space."""
    din, dout = rel.space_in.dims, rel.space_out.dims
    in1 = tuple(f"{d}@1" for d in din)
    out1 = tuple(f"{d}@1" for d in dout)
    in2 = tuple(f"{d}@2" for d in din)
    out2 = tuple(f"{d}@2" for d in dout)
    ren1 = {d: f"{d}@1" for d in din + dout}
    ren2 = {d: f"{d}@2" for d in din + dout}
    space = Space(in1 + out1 + in2 + out2, rel.params)
    disjuncts = [
        [c.rename(ren1) for c in c1] + [c.rename(ren2) for c in c2]
        for c1 in rel.disjuncts
        for c2 in rel.disjuncts
    ]
    return space, disjuncts, in1, out1, in2, out2


def _instantiated(rel: IntegerRelation, pa: Optional[ParamAssignment]) -> IntegerRelation:
    if pa is not None and rel.params:
        return rel.instantiate(pa)
    return rel


def in_order(
    rel: IntegerRelation, sp: Schedule, sc: Schedule, pa: Optional[ParamAssignment] = None
) -> bool:
    """True iff no pair of dataflow pairs is read in reversed write order.

    The violation set is { (x,x') , (y,y') : x' before y' at the consumer
    and y strictly before x at the producer }; equal producer timestamps do
    not violate (the producer order is reflexive there).
    """
    rel = _instantiated(rel, pa)
    space, disjuncts, in1, out1, in2, out2 = _doubled(rel)
    rows_p1 = _rows_on(sp, in1)
    rows_p2 = _rows_on(sp, in2)
    rows_c1 = _rows_on(sc, out1)
    rows_c2 = _rows_on(sc, out2)
    dp, dc = len(rows_p1), len(rows_c1)

    violation: list[list[Constraint]] = []
    for base in disjuncts:
        for kc in range(1, dc + 1):
            for kp in range(1, dp + 1):
                violation.append(
                    base
                    + _lex_conjunction(rows_c1, rows_c2, kc)  # x' before y'
                    + _lex_conjunction(rows_p2, rows_p1, kp)  # y before x
                )
    for conj in violation:
        if not IntegerSet(space, [conj]).is_empty():
            return False
    return True


def unicity(rel: IntegerRelation, pa: Optional[ParamAssignment] = None) -> bool:
    """True iff no value is read twice: x = y with x' != y' is impossible."""
    rel = _instantiated(rel, pa)
    space, disjuncts, in1, out1, in2, out2 = _doubled(rel)
    same_writer = [
        Constraint(AffineExpr.var(a) - AffineExpr.var(b), "eq") for a, b in zip(in1, in2)
    ]
    for base in disjuncts:
        for j in range(len(out1)):
            a = AffineExpr.var(out1[j])
            b = AffineExpr.var(out2[j])
            for diff in ((b - a).shift(-1), (a - b).shift(-1)):  # a < b or a > b
                conj = base + same_writer + [Constraint(diff, "ge")]
                if not IntegerSet(space, [conj]).is_empty():
                    return False
    return True


def classify(
    rel: IntegerRelation, sp: Schedule, sc: Schedule, pa: Optional[ParamAssignment] = None
) -> PatternClass:
    return PatternClass.from_predicates(in_order(rel, sp, sc, pa), unicity(rel, pa))
