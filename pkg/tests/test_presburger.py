"""Integer set/relation layer: parsing, emptiness, set algebra, enumeration."""

import random

import pytest

from fifosplit.presburger import (
    ParamAssignment,
    ParseError,
    SpaceMismatch,
    Unbounded,
    parse_relation,
    parse_set,
)

# the dependence (t-1,i) -> (t,i) with the bounds as printed in the source
# description (0 < t <= T, 0 <= i <= N)
DEP5_VERBATIM = "[t,i] -> [t2,i2] : t2 = t + 1 and i2 = i and 1 <= t2 and t2 <= T and 0 <= i and i <= N"


def test_contradictory_bounds_empty():
    s = parse_set("{ [t,i] : t >= 1 and t <= 0 }")
    assert s.is_empty()


def test_box_nonempty_at_values():
    s = parse_set("{ [T,N] -> [t,i] : 1 <= t and t <= T and 1 <= i and i <= N }")
    inst = s.instantiate(ParamAssignment({"T": 8, "N": 8}))
    assert not inst.is_empty()
    assert inst.contains((1, 1))


def test_scaled_bounds_have_integer_point():
    # 2 <= 2t <= 3 admits t = 1
    s = parse_set("{ [t] : 2 <= 2*t and 2*t <= 3 }")
    assert not s.is_empty()
    assert s.enumerate_points(100) == [(1,)]


def test_scaled_bounds_without_integer_point():
    s = parse_set("{ [t] : 3 <= 2*t and 2*t <= 3 }")
    assert s.is_empty()


def test_intersect_intervals():
    a = parse_set("{ [t] : 0 <= t and t <= 4 }")
    b = parse_set("{ [t] : 2 <= t and t <= 9 }")
    assert a.intersect(b).enumerate_points(100) == [(2,), (3,), (4,)]


def test_intersect_with_empty_absorbs():
    a = parse_set("{ [t] : 0 <= t and t <= 4 }")
    empty = parse_set("{ [t] : false }")
    assert a.intersect(empty).is_empty()


def test_intersect_space_mismatch():
    a = parse_set("{ [t] : t >= 0 }")
    b = parse_set("{ [u] : u >= 0 }")
    with pytest.raises(SpaceMismatch):
        a.intersect(b)


def test_union_with_empty_is_identity():
    a = parse_set("{ [t] : 0 <= t and t <= 2 }")
    empty = parse_set("{ [t] : false }")
    assert a.union(empty).enumerate_points(100) == a.enumerate_points(100)


def test_union_of_intervals():
    a = parse_set("{ [t] : 0 <= t and t <= 1 }")
    b = parse_set("{ [t] : 1 <= t and t <= 2 }")
    assert set(a.union(b).enumerate_points(100)) == {(0,), (1,), (2,)}


def test_instantiate_substitutes_parameters():
    s = parse_set("{ [N] -> [i] : 0 <= i and i <= N }")
    inst = s.instantiate(ParamAssignment({"N": 3}))
    assert inst.enumerate_points(100) == [(0,), (1,), (2,), (3,)]


def test_instantiate_between_consecutive_integers_empty():
    s = parse_set("{ [N] -> [i] : N < i and i < N + 1 }")
    assert s.instantiate(ParamAssignment({"N": 5})).is_empty()


def test_dep5_verbatim_pair_count():
    rel = parse_relation(DEP5_VERBATIM, params=("T", "N"))
    pairs = rel.instantiate(ParamAssignment({"T": 2, "N": 3})).enumerate_pairs(1000)
    # t2 in {1,2} (t in {0,1}), i in {0..3}
    assert len(pairs) == 8


def test_enumerate_simple_interval():
    s = parse_set("{ [t] : 0 <= t and t <= 2 }")
    assert s.enumerate_points(100) == [(0,), (1,), (2,)]


def test_enumerate_empty():
    s = parse_set("{ [t] : t >= 1 and t <= 0 }")
    assert s.enumerate_points(100) == []


def test_enumerate_unbounded_raises():
    s = parse_set("{ [t] : t >= 0 }")
    with pytest.raises(Unbounded):
        s.enumerate_points(100)


def test_enumeration_is_sorted():
    s = parse_set("{ [a,b] : 0 <= a and a <= 2 and 0 <= b and b <= 2 }")
    pts = s.enumerate_points(100)
    assert pts == sorted(pts)


def test_instantiate_commutes_with_intersect():
    a = parse_set("{ [N] -> [i] : 0 <= i and i <= N }")
    b = parse_set("{ [N] -> [i] : i >= 2 }")
    pa = ParamAssignment({"N": 6})
    left = a.intersect(b).instantiate(pa)
    right = a.instantiate(pa).intersect(b.instantiate(pa))
    assert left.enumerate_points(100) == right.enumerate_points(100)


def test_relation_roundtrip_through_text():
    rel = parse_relation(
        "[t,i] -> [t2,i2] : t2 = t + 1 and i2 = i and t >= 0 and t <= 5 "
        "and 0 <= i and i <= 3"
    )
    again = parse_relation(str(rel))
    assert again.space_in == rel.space_in
    assert again.space_out == rel.space_out
    assert again.enumerate_pairs(1000) == rel.enumerate_pairs(1000)


def test_parse_error_reports_bad_token():
    with pytest.raises(ParseError):
        parse_set("{ [t] : t ?? 3 }")


def test_emptiness_matches_enumeration_randomized():
    rng = random.Random(20240817)
    for _ in range(200):
        nd = rng.randint(1, 3)
        dims = [f"x{i}" for i in range(nd)]
        conj = []
        for d in dims:
            conj.append(f"{d} >= {rng.randint(-3, 0)}")
            conj.append(f"{d} <= {rng.randint(0, 4)}")
        for _ in range(rng.randint(1, 4)):
            coeffs = [rng.randint(-3, 3) for _ in dims]
            lhs = " + ".join(f"{c}*{d}" for c, d in zip(coeffs, dims) if c) or "0"
            op = rng.choice([">=", "<=", "="])
            conj.append(f"{lhs} {op} {rng.randint(-4, 4)}")
        s = parse_set("{ [" + ",".join(dims) + "] : " + " and ".join(conj) + " }")
        assert s.is_empty() == (len(s.enumerate_points(10**5)) == 0), str(s)


def test_set_algebra_matches_enumeration_randomized():
    rng = random.Random(7)
    for _ in range(50):
        def randbox():
            conj = []
            for d in ("a", "b"):
                lo = rng.randint(-2, 2)
                conj.append(f"{d} >= {lo}")
                conj.append(f"{d} <= {lo + rng.randint(0, 4)}")
            if rng.random() < 0.5:
                conj.append(f"a + b <= {rng.randint(-1, 5)}")
            return parse_set("{ [a,b] : " + " and ".join(conj) + " }")

        x, y = randbox(), randbox()
        px = set(x.enumerate_points(10**5))
        py = set(y.enumerate_points(10**5))
        assert set(x.intersect(y).enumerate_points(10**5)) == px & py
        assert set(x.union(y).enumerate_points(10**5)) == px | py
