"""Parametric integer sets and relations defined by affine constraints.

Sets are finite unions of conjunctions of affine (in)equalities over named
integer dimensions, with symbolic integer parameters.  Emptiness of a
non-parametric conjunction is decided exactly by branch-and-bound over a
rational relaxation (Fourier-Motzkin elimination with integer tightening).
Everything is immutable after construction; all operations are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Iterable, Mapping, Optional, Sequence

DISJUNCT_CAP = 256
DEFAULT_NODE_BUDGET = 200_000


class PresburgerError(Exception):
    pass


class SpaceMismatch(PresburgerError):
    pass


class UnknownDimension(PresburgerError):
    pass


class MissingParameter(PresburgerError):
    pass


class Unbounded(PresburgerError):
    pass


class UnboundedSearch(PresburgerError):
    """Branch-and-bound budget exhausted; instantiate parameters or shrink."""


class BudgetExceeded(PresburgerError):
    pass


class ComplexityCap(PresburgerError):
    pass


class ParseError(PresburgerError):
    pass


# ---------------------------------------------------------------------------
# affine expressions and constraints


@dataclass
class AffineExpr:
    """Integer-affine expression: sum of dim terms, param terms and a constant.

    Zero coefficients are dropped on construction (canonical form).
    """

    coeffs: dict[str, int] = field(default_factory=dict)
    const: int = 0
    param_coeffs: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {n: c for n, c in self.coeffs.items() if c != 0}
        self.param_coeffs = {n: c for n, c in self.param_coeffs.items() if c != 0}

    @staticmethod
    def var(name: str) -> "AffineExpr":
        return AffineExpr({name: 1})

    @staticmethod
    def param(name: str) -> "AffineExpr":
        return AffineExpr(param_coeffs={name: 1})

    @staticmethod
    def constant(k: int) -> "AffineExpr":
        return AffineExpr(const=k)

    def __add__(self, other: "AffineExpr") -> "AffineExpr":
        c = dict(self.coeffs)
        for n, v in other.coeffs.items():
            c[n] = c.get(n, 0) + v
        p = dict(self.param_coeffs)
        for n, v in other.param_coeffs.items():
            p[n] = p.get(n, 0) + v
        return AffineExpr(c, self.const + other.const, p)

    def __neg__(self) -> "AffineExpr":
        return self.scale(-1)

    def __sub__(self, other: "AffineExpr") -> "AffineExpr":
        return self + (-other)

    def scale(self, k: int) -> "AffineExpr":
        return AffineExpr(
            {n: k * c for n, c in self.coeffs.items()},
            k * self.const,
            {n: k * c for n, c in self.param_coeffs.items()},
        )

    def shift(self, k: int) -> "AffineExpr":
        return AffineExpr(dict(self.coeffs), self.const + k, dict(self.param_coeffs))

    def rename(self, mapping: Mapping[str, str]) -> "AffineExpr":
        return AffineExpr(
            {mapping.get(n, n): c for n, c in self.coeffs.items()},
            self.const,
            dict(self.param_coeffs),
        )

    def subst_params(self, pa: Mapping[str, int]) -> "AffineExpr":
        const = self.const
        rest = {}
        for n, c in self.param_coeffs.items():
            if n in pa:
                const += c * pa[n]
            else:
                rest[n] = c
        return AffineExpr(dict(self.coeffs), const, rest)

    @property
    def is_param_free(self) -> bool:
        return not self.param_coeffs

    def evaluate(self, point: Mapping[str, int], pa: Optional[Mapping[str, int]] = None) -> int:
        v = self.const
        for n, c in self.coeffs.items():
            v += c * point[n]
        for n, c in self.param_coeffs.items():
            if pa is None or n not in pa:
                raise MissingParameter(f"parameter {n!r} has no value")
            v += c * pa[n]
        return v

    def names(self) -> set[str]:
        return set(self.coeffs) | set(self.param_coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AffineExpr)
            and self.coeffs == other.coeffs
            and self.const == other.const
            and self.param_coeffs == other.param_coeffs
        )

    def __str__(self) -> str:
        terms = []
        for n, c in list(self.coeffs.items()) + list(self.param_coeffs.items()):
            if c == 1:
                terms.append(("+", n))
            elif c == -1:
                terms.append(("-", n))
            else:
                terms.append(("+" if c > 0 else "-", f"{abs(c)}*{n}"))
        if self.const or not terms:
            terms.append(("+" if self.const >= 0 else "-", str(abs(self.const))))
        out = ""
        for sign, t in terms:
            if not out:
                out = t if sign == "+" else f"-{t}"
            else:
                out += f" {sign} {t}"
        return out


@dataclass
class Constraint:
    """`expr = 0` (kind "eq") or `expr >= 0` (kind "ge")."""

    expr: AffineExpr
    kind: str  # "eq" | "ge"

    def __post_init__(self):
        if self.kind not in ("eq", "ge"):
            raise ValueError(f"bad constraint kind {self.kind!r}")
        if self.kind == "eq":
            # canonical sign so that textual round-trips compare equal
            for _, c in sorted(self.expr.coeffs.items()) + sorted(
                self.expr.param_coeffs.items()
            ) + [("", self.expr.const)]:
                if c > 0:
                    break
                if c < 0:
                    self.expr = -self.expr
                    break

    def rename(self, mapping: Mapping[str, str]) -> "Constraint":
        return Constraint(self.expr.rename(mapping), self.kind)

    def subst_params(self, pa: Mapping[str, int]) -> "Constraint":
        return Constraint(self.expr.subst_params(pa), self.kind)

    def holds(self, point: Mapping[str, int], pa: Optional[Mapping[str, int]] = None) -> bool:
        v = self.expr.evaluate(point, pa)
        return v == 0 if self.kind == "eq" else v >= 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Constraint)
            and self.kind == other.kind
            and self.expr == other.expr
        )

    def __str__(self) -> str:
        op = "=" if self.kind == "eq" else ">="
        return f"{self.expr} {op} 0"


@dataclass
class Space:
    """Ordered dimension names plus parameter names; names must be unique."""

    dims: tuple[str, ...]
    params: tuple[str, ...] = ()
    existentials: tuple[str, ...] = ()

    def __post_init__(self):
        self.dims = tuple(self.dims)
        self.params = tuple(self.params)
        self.existentials = tuple(self.existentials)
        names = self.dims + self.params + self.existentials
        if len(set(names)) != len(names):
            raise SpaceMismatch(f"duplicate names in space {names}")

    def all_names(self) -> set[str]:
        return set(self.dims) | set(self.params) | set(self.existentials)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Space)
            and self.dims == other.dims
            and self.params == other.params
            and self.existentials == other.existentials
        )


@dataclass
class ParamAssignment:
    values: dict[str, int]

    def covers(self, space: Space) -> bool:
        return all(p in self.values for p in space.params)

    def __getitem__(self, name: str) -> int:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values


def _check_names(disjuncts, space: Space):
    ok = space.all_names()
    for conj in disjuncts:
        for c in conj:
            bad = c.expr.names() - ok
            if bad:
                raise UnknownDimension(f"unknown names {sorted(bad)} in constraint {c}")


@dataclass
class IntegerSet:
    """Finite union of conjunctions of affine constraints over one space.

    An empty disjunct list is the empty set; a disjunct with no constraints
    is the universe of the space.
    """

    space: Space
    disjuncts: list[list[Constraint]]

    def __post_init__(self):
        if len(self.disjuncts) > DISJUNCT_CAP:
            raise ComplexityCap(f"{len(self.disjuncts)} disjuncts exceed cap {DISJUNCT_CAP}")
        _check_names(self.disjuncts, self.space)

    @staticmethod
    def empty(space: Space) -> "IntegerSet":
        return IntegerSet(space, [])

    @staticmethod
    def universe(space: Space) -> "IntegerSet":
        return IntegerSet(space, [[]])

    def intersect(self, other: "IntegerSet") -> "IntegerSet":
        if self.space != other.space:
            raise SpaceMismatch("intersect: spaces differ")
        disj = [a + b for a in self.disjuncts for b in other.disjuncts]
        return IntegerSet(self.space, disj)

    def union(self, other: "IntegerSet") -> "IntegerSet":
        if self.space != other.space:
            raise SpaceMismatch("union: spaces differ")
        return IntegerSet(self.space, list(self.disjuncts) + list(other.disjuncts))

    def instantiate(self, pa: ParamAssignment) -> "IntegerSet":
        if not pa.covers(self.space):
            missing = [p for p in self.space.params if p not in pa]
            raise MissingParameter(f"missing values for parameters {missing}")
        space = Space(self.space.dims, (), self.space.existentials)
        disj = [[c.subst_params(pa.values) for c in conj] for conj in self.disjuncts]
        return IntegerSet(space, disj)

    def is_empty(self, node_budget: int = DEFAULT_NODE_BUDGET) -> bool:
        for conj in self.disjuncts:
            rows_eq, rows_ge = _conjunction_rows(conj, self.space.dims)
            if _has_integer_point(rows_eq, rows_ge, len(self.space.dims), node_budget):
                return False
        return True

    def contains(self, point: Sequence[int], pa: Optional[ParamAssignment] = None) -> bool:
        env = dict(zip(self.space.dims, point))
        pv = pa.values if pa is not None else None
        return any(all(c.holds(env, pv) for c in conj) for conj in self.disjuncts)

    def enumerate_points(self, box_budget: int = 1_000_000) -> list[tuple[int, ...]]:
        """All integer points, lexicographically sorted by dimension order."""
        pts: set[tuple[int, ...]] = set()
        budget = [box_budget]
        for conj in self.disjuncts:
            rows_eq, rows_ge = _conjunction_rows(conj, self.space.dims)
            rows = rows_eq + [_neg_row(r) for r in rows_eq] + rows_ge
            _enumerate(rows, len(self.space.dims), (), pts, budget)
        return sorted(pts)

    def __str__(self) -> str:
        return _format_set(self.space.params, [self.space.dims], self.disjuncts)


@dataclass
class IntegerRelation:
    """Relation between two dimension tuples, as constraints over their concat.

    Input and output dimension names must be disjoint; parameters are shared.
    """

    space_in: Space
    space_out: Space
    disjuncts: list[list[Constraint]]

    def __post_init__(self):
        if set(self.space_in.dims) & set(self.space_out.dims):
            raise SpaceMismatch("relation input/output dims overlap")
        if self.space_in.params != self.space_out.params:
            raise SpaceMismatch("relation input/output params differ")
        if len(self.disjuncts) > DISJUNCT_CAP:
            raise ComplexityCap(f"{len(self.disjuncts)} disjuncts exceed cap {DISJUNCT_CAP}")
        _check_names(self.disjuncts, self.combined_space())

    @property
    def params(self) -> tuple[str, ...]:
        return self.space_in.params

    def combined_space(self) -> Space:
        return Space(self.space_in.dims + self.space_out.dims, self.params)

    def as_set(self) -> IntegerSet:
        return IntegerSet(self.combined_space(), [list(c) for c in self.disjuncts])

    @staticmethod
    def from_set(s: IntegerSet, n_in: int, params: tuple[str, ...] = ()) -> "IntegerRelation":
        sp_in = Space(s.space.dims[:n_in], params or s.space.params)
        sp_out = Space(s.space.dims[n_in:], params or s.space.params)
        return IntegerRelation(sp_in, sp_out, [list(c) for c in s.disjuncts])

    @staticmethod
    def empty(space_in: Space, space_out: Space) -> "IntegerRelation":
        return IntegerRelation(space_in, space_out, [])

    def intersect(self, other) -> "IntegerRelation":
        if isinstance(other, IntegerRelation):
            if self.space_in != other.space_in or self.space_out != other.space_out:
                raise SpaceMismatch("intersect: relation spaces differ")
            other_set = other.as_set()
        else:
            other_set = other
        res = self.as_set().intersect(other_set)
        return IntegerRelation.from_set(res, len(self.space_in.dims), self.params)

    def union(self, other: "IntegerRelation") -> "IntegerRelation":
        if self.space_in != other.space_in or self.space_out != other.space_out:
            raise SpaceMismatch("union: relation spaces differ")
        return IntegerRelation(
            self.space_in, self.space_out, list(self.disjuncts) + list(other.disjuncts)
        )

    def instantiate(self, pa: ParamAssignment) -> "IntegerRelation":
        inst = self.as_set().instantiate(pa)
        return IntegerRelation.from_set(inst, len(self.space_in.dims), ())

    def is_empty(self, node_budget: int = DEFAULT_NODE_BUDGET) -> bool:
        return self.as_set().is_empty(node_budget)

    def enumerate_pairs(self, box_budget: int = 1_000_000) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        n = len(self.space_in.dims)
        return [(p[:n], p[n:]) for p in self.as_set().enumerate_points(box_budget)]

    def __str__(self) -> str:
        return _format_set(
            self.params, [self.space_in.dims, self.space_out.dims], self.disjuncts
        )


# ---------------------------------------------------------------------------
# exact integer feasibility / enumeration core
#
# A row is a tuple of ints (c_0, ..., c_{n-1}, k) read as  sum c_j x_j + k >= 0.


def _conjunction_rows(conj, dims):
    idx = {n: j for j, n in enumerate(dims)}
    n = len(dims)
    eqs, ges = [], []
    for c in conj:
        if not c.expr.is_param_free:
            raise MissingParameter(
                f"symbolic query on parametric constraint {c}; instantiate parameters first"
            )
        row = [0] * (n + 1)
        for name, coef in c.expr.coeffs.items():
            row[idx[name]] = coef
        row[n] = c.expr.const
        (eqs if c.kind == "eq" else ges).append(tuple(row))
    return eqs, ges


def _neg_row(row):
    return tuple(-v for v in row)


def _tighten(row):
    """Divide by the coefficient gcd, flooring the constant (valid over Z)."""
    coeffs, k = row[:-1], row[-1]
    g = 0
    for c in coeffs:
        g = gcd(g, c)
    if g <= 1:
        return row
    return tuple(c // g for c in coeffs) + (k // g,)


def _clean(rows):
    """Deduplicate rows, keep the tightest constant per coefficient vector.

    Returns None when a constant row is violated (rationally infeasible).
    """
    best: dict[tuple[int, ...], int] = {}
    for row in rows:
        row = _tighten(row)
        coeffs, k = row[:-1], row[-1]
        if all(c == 0 for c in coeffs):
            if k < 0:
                return None
            continue
        cur = best.get(coeffs)
        if cur is None or k < cur:
            best[coeffs] = k
    return [c + (k,) for c, k in best.items()]


def _fm_eliminate(rows, j):
    """Fourier-Motzkin elimination of variable j; None if infeasible."""
    pos, neg, rest = [], [], []
    for row in rows:
        c = row[j]
        if c > 0:
            pos.append(row)
        elif c < 0:
            neg.append(row)
        else:
            rest.append(row)
    out = list(rest)
    for p in pos:
        a = p[j]
        for q in neg:
            b = -q[j]
            out.append(tuple(b * pv + a * qv for pv, qv in zip(p, q)))
    return _clean(out)


def _elim_order(rows, nvars, keep=None):
    """Variable order minimizing the pos*neg product at each step (greedy)."""
    remaining = [j for j in range(nvars) if j != keep]

    def cost(j):
        p = sum(1 for r in rows if r[j] > 0)
        q = sum(1 for r in rows if r[j] < 0)
        return p * q - p - q

    return sorted(remaining, key=cost)


def _project_interval(rows, nvars, j):
    """Rational bounds of variable j after eliminating all the others.

    Returns (lo, hi) with None for an infinite end, or "infeasible".
    """
    cur = _clean(rows)
    if cur is None:
        return "infeasible"
    for v in _elim_order(cur, nvars, keep=j):
        cur = _fm_eliminate(cur, v)
        if cur is None:
            return "infeasible"
    lo, hi = None, None
    for row in cur:
        c, k = row[j], row[-1]
        if c == 0:
            continue
        b = Fraction(-k, c)
        if c > 0:
            lo = b if lo is None else max(lo, b)
        else:
            hi = b if hi is None else min(hi, b)
    if lo is not None and hi is not None and lo > hi:
        return "infeasible"
    return (lo, hi)


def _substitute(rows, j, value):
    out = []
    for row in rows:
        c = row[j]
        nrow = row[:j] + row[j + 1 : -1] + (row[-1] + c * value,)
        out.append(nrow)
    return out


def _gauss_reduce(eqs, ges, nvars):
    """Eliminate variables with a +-1 equality coefficient by substitution.

    Integer-exact (unit pivots only).  Returns (ge_rows, nvars) or None when
    an equality is unsatisfiable over the integers.
    """
    eqs = [list(r) for r in eqs]
    ges = [list(r) for r in ges]
    n = nvars
    progress = True
    while progress:
        progress = False
        for e in list(eqs):
            coeffs = e[:-1]
            g = 0
            for c in coeffs:
                g = gcd(g, c)
            if g == 0:
                if e[-1] != 0:
                    return None
                eqs.remove(e)
                progress = True
                break
            if e[-1] % g != 0:
                return None  # no integer solution to the equality
            if g > 1:
                e[:] = [c // g for c in e]
                coeffs = e[:-1]
            try:
                j = next(i for i, c in enumerate(coeffs) if abs(c) == 1)
            except StopIteration:
                continue
            s = e[j]
            # x_j = -s * (rest of e without the j term)
            for rows in (eqs, ges):
                for r in rows:
                    if r is e or r[j] == 0:
                        continue
                    f = r[j] * s  # r + x_j*... substituted
                    for i in range(n + 1):
                        if i != j:
                            r[i] -= f * e[i]
                    r[j] = 0
            # drop column j everywhere
            for rows in (eqs, ges):
                for r in rows:
                    del r[j]
            eqs.remove(e)
            n -= 1
            progress = True
            break
    # remaining non-unit equalities become inequality pairs
    for e in eqs:
        ges.append(list(e))
        ges.append([-v for v in e])
    return [tuple(r) for r in ges], n


def _has_integer_point(rows_eq, rows_ge, nvars, node_budget=DEFAULT_NODE_BUDGET):
    reduced = _gauss_reduce(rows_eq, rows_ge, nvars)
    if reduced is None:
        return False
    rows, n = reduced
    budget = [node_budget]
    return _bnb(rows, n, budget)


def _bnb(rows, nvars, budget):
    """Branch-and-bound search for an integer point of `rows`.

    The first variable is bounded by its exact rational shadow (full FM
    projection).  An integer value from the shadow is tried by substitution;
    on failure the interval is split around it and both halves searched, so
    no integer candidate is ever discarded.
    """
    if budget[0] <= 0:
        raise UnboundedSearch("branch-and-bound node budget exhausted")
    budget[0] -= 1
    cur = _clean(rows)
    if cur is None:
        return False
    if nvars == 0:
        return True
    iv = _project_interval(cur, nvars, 0)
    if iv == "infeasible":
        return False
    lo, hi = iv
    ilo = None if lo is None else ceil(lo)
    ihi = None if hi is None else floor(hi)
    if ilo is not None and ihi is not None and ilo > ihi:
        # no integer in the rational interval: exclude it and recurse
        left = cur + [_unit_row(nvars, 0, -1, floor(lo))]
        right = cur + [_unit_row(nvars, 0, 1, -ceil(hi))]
        return _bnb(left, nvars, budget) or _bnb(right, nvars, budget)
    if ilo is None and ihi is None:
        v = 0
    elif ilo is None:
        v = min(ihi, 0)
    elif ihi is None:
        v = max(ilo, 0)
    else:
        v = min(max(0, ilo), ihi)
    if _bnb(_substitute(cur, 0, v), nvars - 1, budget):
        return True
    if (ilo is None or v > ilo) and _bnb(
        cur + [_unit_row(nvars, 0, -1, v - 1)], nvars, budget
    ):
        return True
    if (ihi is None or v < ihi) and _bnb(
        cur + [_unit_row(nvars, 0, 1, -(v + 1))], nvars, budget
    ):
        return True
    return False


def _unit_row(nvars, j, sign, const):
    row = [0] * (nvars + 1)
    row[j] = sign
    row[-1] = const
    return tuple(row)


def _enumerate(rows, nvars, prefix, out, budget):
    rows = _clean(rows)
    if rows is None:
        return
    if nvars == 0:
        if budget[0] <= 0:
            raise BudgetExceeded("enumeration budget exhausted")
        budget[0] -= 1
        out.add(prefix)
        return
    iv = _project_interval(rows, nvars, 0)
    if iv == "infeasible":
        return
    lo, hi = iv
    if lo is None or hi is None:
        raise Unbounded(f"dimension {len(prefix)} has no finite bound")
    for v in range(ceil(lo), floor(hi) + 1):
        _enumerate(_substitute(rows, 0, v), nvars - 1, prefix + (v,), out, budget)


# ---------------------------------------------------------------------------
# textual form: `{ [params] -> [dims] : c1 and c2 or c3 and c4 }`


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z_0-9']*)|(?P<int>\d+)|(?P<op>->|<=|>=|==|!=|[-+*(),:{}\[\]<>=]))"
)


def _tokenize(text: str) -> list[str]:
    pos, toks = 0, []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad token at {text[pos:pos+12]!r}")
        toks.append(m.group(m.lastgroup))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, toks: list[str], space: Space):
        self.toks = toks
        self.i = 0
        self.space = space

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, tok: str):
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}")

    def atom(self) -> AffineExpr:
        tok = self.next()
        if tok == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok == "-":
            return -self.atom()
        if tok.isdigit():
            return AffineExpr.constant(int(tok))
        if tok in self.space.dims or tok in self.space.existentials:
            return AffineExpr.var(tok)
        if tok in self.space.params:
            return AffineExpr.param(tok)
        raise UnknownDimension(f"name {tok!r} not declared in the space")

    def term(self) -> AffineExpr:
        e = self.atom()
        while self.peek() == "*":
            self.next()
            rhs = self.atom()
            if not e.coeffs and not e.param_coeffs:
                e = rhs.scale(e.const)
            elif not rhs.coeffs and not rhs.param_coeffs:
                e = e.scale(rhs.const)
            else:
                raise ParseError("nonlinear product of two non-constant expressions")
        return e

    def expr(self) -> AffineExpr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.next()
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def comparison(self) -> list[Constraint]:
        """One comparison chain, e.g. `0 <= i <= N` or `t = u + 1`."""
        out = []
        lhs = self.expr()
        saw_op = False
        while self.peek() in ("<", "<=", ">", ">=", "=", "=="):
            op = self.next()
            rhs = self.expr()
            if op in ("=", "=="):
                out.append(Constraint(rhs - lhs, "eq"))
            elif op == "<=":
                out.append(Constraint(rhs - lhs, "ge"))
            elif op == "<":
                out.append(Constraint((rhs - lhs).shift(-1), "ge"))
            elif op == ">=":
                out.append(Constraint(lhs - rhs, "ge"))
            else:
                out.append(Constraint((lhs - rhs).shift(-1), "ge"))
            lhs = rhs
            saw_op = True
        if not saw_op:
            raise ParseError("expected a comparison operator")
        return out

    def conjunction(self) -> Optional[list[Constraint]]:
        """One `and`-joined conjunction; None for the keyword `false`."""
        if self.peek() in ("true", "false"):
            return [] if self.next() == "true" else None
        out = list(self.comparison())
        while self.peek() == "and":
            self.next()
            out.extend(self.comparison())
        return out

    def disjuncts(self) -> list[list[Constraint]]:
        disj = []
        conj = self.conjunction()
        if conj is not None:
            disj.append(conj)
        while self.peek() == "or":
            self.next()
            conj = self.conjunction()
            if conj is not None:
                disj.append(conj)
        return disj


def parse_constraints(body: str, space: Space) -> list[list[Constraint]]:
    """Parse `and`/`or`-separated affine comparisons into disjunct lists."""
    body = body.strip()
    if body in ("", "true"):
        return [[]]
    if body == "false":
        return []
    p = _Parser(_tokenize(body), space)
    disj = p.disjuncts()
    if p.peek() is not None:
        raise ParseError(f"trailing input at token {p.peek()!r}")
    return disj


def parse_affine(text: str, space: Space) -> AffineExpr:
    """Parse a single affine expression over the given space."""
    p = _Parser(_tokenize(text), space)
    e = p.expr()
    if p.peek() is not None:
        raise ParseError(f"trailing input at token {p.peek()!r}")
    return e


def _parse_bracket_names(p: _Parser) -> tuple[str, ...]:
    p.expect("[")
    names = []
    if p.peek() != "]":
        names.append(p.next())
        while p.peek() == ",":
            p.next()
            names.append(p.next())
    p.expect("]")
    return tuple(names)


def parse_set(text: str, params: Sequence[str] = ()) -> IntegerSet:
    """Parse `{ [dims] : body }` or `{ [params] -> [dims] : body }`."""
    toks = _tokenize(text)
    p = _Parser(toks, Space((), ()))
    p.expect("{")
    first = _parse_bracket_names(p)
    if p.peek() == "->":
        p.next()
        params = first
        dims = _parse_bracket_names(p)
    else:
        dims = first
    space = Space(dims, tuple(params))
    disj = _parse_body(p, space)
    return IntegerSet(space, disj)


def parse_relation(text: str, params: Sequence[str] = ()) -> IntegerRelation:
    """Parse `[in dims] -> [out dims] : body` (optionally brace-wrapped)."""
    toks = _tokenize(text)
    p = _Parser(toks, Space((), ()))
    braced = p.peek() == "{"
    if braced:
        p.next()
    dims_in = _parse_bracket_names(p)
    p.expect("->")
    dims_out = _parse_bracket_names(p)
    space_in = Space(dims_in, tuple(params))
    space_out = Space(dims_out, tuple(params))
    combined = Space(dims_in + dims_out, tuple(params))
    disj = _parse_body(p, combined, braced)
    return IntegerRelation(space_in, space_out, disj)


def _parse_body(p: _Parser, space: Space, braced: bool = True) -> list[list[Constraint]]:
    if p.peek() == ":":
        p.next()
        p.space = space
        disj = p.disjuncts()
    else:
        disj = [[]]
    if braced:
        p.expect("}")
    if p.peek() is not None:
        raise ParseError(f"trailing input at token {p.peek()!r}")
    return disj


def _format_set(params, dim_groups, disjuncts) -> str:
    head = ""
    if params:
        head = "[" + ",".join(params) + "] -> "
    head += " -> ".join("[" + ",".join(g) + "]" for g in dim_groups)
    if not disjuncts:
        body = "false"
    else:
        parts = []
        for conj in disjuncts:
            parts.append(" and ".join(str(c) for c in conj) if conj else "true")
        body = " or ".join(parts)
    return "{ " + head + " : " + body + " }"
