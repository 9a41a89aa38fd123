"""Polyhedral process network model: processes, channels, loader, validator.

A network is a set of processes (iteration domain + sequential local
schedule) connected by channels (producer, consumer, dataflow relation).
Models are loaded from JSON files; constraint strings use the textual form
of the `presburger` module.  Relation dimensions correspond positionally to
the producer/consumer process dimensions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .presburger import (
    AffineExpr,
    BudgetExceeded,
    IntegerRelation,
    IntegerSet,
    MissingParameter,
    ParamAssignment,
    ParseError,
    Space,
    Unbounded,
    parse_affine,
    parse_constraints,
    parse_relation,
)


class ValidationError(Exception):
    """A model invariant is violated; the message names the invariant."""


@dataclass
class Schedule:
    """Affine map from process iterations to lexicographic timestamps."""

    dims: tuple[str, ...]
    rows: list[AffineExpr]
    params: tuple[str, ...] = ()

    def evaluate(self, point, pa: Optional[dict[str, int]] = None) -> tuple[int, ...]:
        env = dict(zip(self.dims, point))
        return tuple(r.evaluate(env, pa) for r in self.rows)

    @property
    def depth(self) -> int:
        return len(self.rows)

    def is_identity(self) -> bool:
        return len(self.rows) == len(self.dims) and all(
            r == AffineExpr.var(d) for r, d in zip(self.rows, self.dims)
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Schedule)
            and self.dims == other.dims
            and self.rows == other.rows
        )


@dataclass
class Process:
    name: str
    domain: IntegerSet
    schedule: Schedule
    instance_label: Optional[str] = None
    tile_depth: int = 0  # number of leading tile-coordinate dims, 0 if untiled

    def __post_init__(self):
        if self.schedule.dims != self.domain.space.dims:
            raise ValidationError(
                f"process {self.name}: schedule dims {self.schedule.dims} "
                f"differ from domain dims {self.domain.space.dims}"
            )

    @property
    def dims(self) -> tuple[str, ...]:
        return self.domain.space.dims

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Process)
            and self.name == other.name
            and self.domain.space == other.domain.space
            and self.domain.disjuncts == other.domain.disjuncts
            and self.schedule == other.schedule
            and self.tile_depth == other.tile_depth
        )


@dataclass
class Channel:
    id: str
    producer: str
    consumer: str
    dataflow: IntegerRelation

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Channel)
            and self.id == other.id
            and self.producer == other.producer
            and self.consumer == other.consumer
            and self.dataflow.space_in == other.dataflow.space_in
            and self.dataflow.space_out == other.dataflow.space_out
            and self.dataflow.disjuncts == other.dataflow.disjuncts
        )


@dataclass
class CheckResult:
    name: str
    subject: str
    passed: bool
    witness: Optional[tuple] = None

    def __str__(self) -> str:
        state = "pass" if self.passed else f"FAIL (witness {self.witness})"
        return f"{self.name}[{self.subject}]: {state}"


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


@dataclass
class PPN:
    params: tuple[str, ...]
    param_defaults: dict[str, int]
    processes: dict[str, Process]
    channels: list[Channel]

    def process(self, name: str) -> Process:
        return self.processes[name]

    def channel(self, cid: str) -> Channel:
        for c in self.channels:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def default_assignment(self) -> ParamAssignment:
        missing = [p for p in self.params if p not in self.param_defaults]
        if missing:
            raise MissingParameter(f"no default value for parameters {missing}")
        return ParamAssignment(dict(self.param_defaults))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PPN)
            and self.params == other.params
            and self.processes == other.processes
            and self.channels == other.channels
        )

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        def body(disjuncts):
            if not disjuncts:
                return "false"
            return " or ".join(
                " and ".join(str(c) for c in conj) if conj else "true"
                for conj in disjuncts
            )

        return {
            "params": [
                {"name": p, **({"default": self.param_defaults[p]} if p in self.param_defaults else {})}
                for p in self.params
            ],
            "processes": [
                {
                    "name": p.name,
                    "dims": list(p.dims),
                    "domain": body(p.domain.disjuncts),
                    "schedule": [str(r) for r in p.schedule.rows],
                    **({"instance_label": p.instance_label} if p.instance_label else {}),
                    **({"tile_depth": p.tile_depth} if p.tile_depth else {}),
                }
                for p in self.processes.values()
            ],
            "channels": [
                {
                    "id": c.id,
                    "producer": c.producer,
                    "consumer": c.consumer,
                    "relation": "["
                    + ",".join(c.dataflow.space_in.dims)
                    + "] -> ["
                    + ",".join(c.dataflow.space_out.dims)
                    + "] : "
                    + body(c.dataflow.disjuncts),
                }
                for c in self.channels
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def _require(doc, key, kind, where):
    if key not in doc:
        raise ParseError(f"{where}: missing key {key!r}")
    v = doc[key]
    if not isinstance(v, kind):
        raise ParseError(f"{where}: key {key!r} must be {kind.__name__}")
    return v


def ppn_from_json(doc: dict) -> PPN:
    if not isinstance(doc, dict):
        raise ParseError("model root must be a JSON object")
    params, defaults = [], {}
    for entry in _require(doc, "params", list, "model"):
        name = _require(entry, "name", str, "params")
        params.append(name)
        if "default" in entry:
            if not isinstance(entry["default"], int):
                raise ParseError(f"params: default of {name!r} must be an integer")
            defaults[name] = entry["default"]
    params = tuple(params)

    processes: dict[str, Process] = {}
    for entry in _require(doc, "processes", list, "model"):
        name = _require(entry, "name", str, "process")
        if name in processes:
            raise ValidationError(f"duplicate process name {name!r}")
        dims = tuple(_require(entry, "dims", list, f"process {name}"))
        space = Space(dims, params)
        disjuncts = parse_constraints(_require(entry, "domain", str, f"process {name}"), space)
        rows = [
            parse_affine(r, space)
            for r in _require(entry, "schedule", list, f"process {name}")
        ]
        processes[name] = Process(
            name=name,
            domain=IntegerSet(space, disjuncts),
            schedule=Schedule(dims, rows, params),
            instance_label=entry.get("instance_label"),
            tile_depth=entry.get("tile_depth", 0),
        )

    channels: list[Channel] = []
    seen_ids = set()
    for entry in _require(doc, "channels", list, "model"):
        cid = _require(entry, "id", str, "channel")
        if cid in seen_ids:
            raise ValidationError(f"duplicate channel id {cid!r}")
        seen_ids.add(cid)
        prod = _require(entry, "producer", str, f"channel {cid}")
        cons = _require(entry, "consumer", str, f"channel {cid}")
        for role, pname in (("producer", prod), ("consumer", cons)):
            if pname not in processes:
                raise ValidationError(f"channel {cid}: unknown {role} process {pname!r}")
        rel = parse_relation(_require(entry, "relation", str, f"channel {cid}"), params)
        if len(rel.space_in.dims) != len(processes[prod].dims):
            raise ValidationError(
                f"channel {cid}: relation input arity {len(rel.space_in.dims)} "
                f"differs from producer {prod!r} arity {len(processes[prod].dims)}"
            )
        if len(rel.space_out.dims) != len(processes[cons].dims):
            raise ValidationError(
                f"channel {cid}: relation output arity {len(rel.space_out.dims)} "
                f"differs from consumer {cons!r} arity {len(processes[cons].dims)}"
            )
        channels.append(Channel(cid, prod, cons, rel))

    return PPN(params, defaults, processes, channels)


def load_ppn(path, check_defaults: bool = True) -> PPN:
    """Load and validate a network model file.

    Structural invariants are always checked.  Enumeration-based invariants
    (domain membership, channel partition, schedule injectivity) are checked
    at the model's default parameter assignment when one is fully declared;
    they are deferred otherwise.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON: {e}") from e
    net = ppn_from_json(doc)
    if check_defaults and all(p in net.param_defaults for p in net.params):
        try:
            report = validate_at(net, net.default_assignment())
        except (Unbounded, BudgetExceeded):
            return net  # too large or unbounded at defaults; defer to caller
        bad = report.failures()
        if bad:
            raise ValidationError("; ".join(str(c) for c in bad))
    return net


def _channel_pairs(channel: Channel, pa: ParamAssignment, budget: int):
    return channel.dataflow.instantiate(pa).enumerate_pairs(budget)


def validate_at(net: PPN, pa: ParamAssignment, budget: int = 1_000_000) -> ValidationReport:
    """Check the enumeration-based network invariants at fixed parameters."""
    report = ValidationReport()

    domains = {}
    for p in net.processes.values():
        pts = p.domain.instantiate(pa).enumerate_points(budget)
        domains[p.name] = set(pts)
        # schedule injectivity (sequential local order)
        seen: dict[tuple, tuple] = {}
        witness = None
        for pt in pts:
            ts = p.schedule.evaluate(pt, pa.values)
            if ts in seen:
                witness = (seen[ts], pt)
                break
            seen[ts] = pt
        report.checks.append(
            CheckResult("schedule-injective", p.name, witness is None, witness)
        )

    by_pair: dict[tuple[str, str], list[tuple[str, set]]] = {}
    for c in net.channels:
        pairs = set(_channel_pairs(c, pa, budget))
        witness = None
        for src, dst in pairs:
            if src not in domains[c.producer] or dst not in domains[c.consumer]:
                witness = (src, dst)
                break
        report.checks.append(
            CheckResult("dataflow-in-domains", c.id, witness is None, witness)
        )
        by_pair.setdefault((c.producer, c.consumer), []).append((c.id, pairs))

    for (prod, cons), entries in by_pair.items():
        for i, (id_a, pairs_a) in enumerate(entries):
            for id_b, pairs_b in entries[i + 1 :]:
                shared = pairs_a & pairs_b
                report.checks.append(
                    CheckResult(
                        "channel-partition",
                        f"{id_a}/{id_b}",
                        not shared,
                        next(iter(shared)) if shared else None,
                    )
                )
    return report
