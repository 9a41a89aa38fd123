"""Command line front end: classify channels, split them, size the buffers.

Subcommands:
  analyze       classification + sizing report, optionally after a tiling
  fifoize       split tiled channels into FIFO parts, emit the new network
  report-delta  storage delta between an original and a split report

stdout carries the report only; diagnostics go to stderr.  Exit codes:
0 success, 2 model/validation/usage errors, 3 solver budget exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import oracle, patterns, sizing, splitter
from .oracle import DEFAULT_PAIR_BUDGET, ScheduleCollision, build_trace
from .patterns import PatternClass
from .ppn import PPN, ValidationError, load_ppn
from .presburger import (
    BudgetExceeded,
    ComplexityCap,
    MissingParameter,
    ParamAssignment,
    ParseError,
    Unbounded,
    UnboundedSearch,
)
from .tiling import DepthMismatch, InvalidTiling, apply_tiling, load_tilings

PART_MARKERS = (".d", ".intra")


class MismatchedReports(Exception):
    """The two reports do not describe the same network and parameters."""


def _pct(n: int, total: int) -> int:
    """Percentage truncated toward zero, table style (16.67% prints as 16%)."""
    if total == 0:
        return 0
    return (100 * n) // total


@dataclass
class Row:
    """One aggregate line of the report table."""

    n_channels: int
    n_fifo: int
    fifo_size: int
    total_size: int
    n_fifo_split: Optional[int] = None

    @property
    def pct_fifo(self) -> int:
        return _pct(self.n_fifo, self.n_channels)

    @property
    def pct_fifo_split(self) -> Optional[int]:
        if self.n_fifo_split is None:
            return None
        return _pct(self.n_fifo_split, self.n_channels)

    def to_json(self) -> dict:
        out = {
            "n_channels": self.n_channels,
            "n_fifo": self.n_fifo,
            "pct_fifo": self.pct_fifo,
            "fifo_size": self.fifo_size,
            "total_size": self.total_size,
        }
        if self.n_fifo_split is not None:
            out["n_fifo_split"] = self.n_fifo_split
            out["pct_fifo_split"] = self.pct_fifo_split
        return out

    @staticmethod
    def from_json(doc: dict) -> "Row":
        return Row(
            n_channels=doc["n_channels"],
            n_fifo=doc["n_fifo"],
            fifo_size=doc["fifo_size"],
            total_size=doc["total_size"],
            n_fifo_split=doc.get("n_fifo_split"),
        )


@dataclass
class Report:
    """Before/after aggregates plus per-channel details for one network."""

    model: str
    params: dict[str, int]
    before: Row
    after: Optional[Row] = None
    channels_before: list[dict] = field(default_factory=list)
    channels_after: Optional[list[dict]] = None
    tilings: Optional[dict] = None
    decisions: Optional[list[dict]] = None
    oracle_agreement: Optional[bool] = None

    def to_json(self) -> dict:
        out = {
            "model": self.model,
            "params": self.params,
            "before": self.before.to_json(),
            "channels_before": self.channels_before,
        }
        if self.after is not None:
            out["after"] = self.after.to_json()
        if self.channels_after is not None:
            out["channels_after"] = self.channels_after
        if self.tilings is not None:
            out["tilings"] = self.tilings
        if self.decisions is not None:
            out["decisions"] = self.decisions
        if self.oracle_agreement is not None:
            out["oracle_agreement"] = self.oracle_agreement
        return out

    @staticmethod
    def from_json(doc: dict) -> "Report":
        return Report(
            model=doc["model"],
            params=dict(doc["params"]),
            before=Row.from_json(doc["before"]),
            after=Row.from_json(doc["after"]) if "after" in doc else None,
            channels_before=list(doc.get("channels_before", [])),
            channels_after=list(doc["channels_after"]) if "channels_after" in doc else None,
            tilings=doc.get("tilings"),
            decisions=doc.get("decisions"),
            oracle_agreement=doc.get("oracle_agreement"),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Report) and self.to_json() == other.to_json()

    # -- text rendering -----------------------------------------------------

    COLUMNS = (
        "#channel",
        "#fifo",
        "#fifo-split",
        "%fifo",
        "%fifo-split",
        "fifo-size",
        "total-size",
    )

    def render_text(self) -> str:
        def cells(row: Row) -> list[str]:
            split_n = "-" if row.n_fifo_split is None else str(row.n_fifo_split)
            split_p = "-" if row.pct_fifo_split is None else f"{row.pct_fifo_split}%"
            return [
                str(row.n_channels),
                str(row.n_fifo),
                split_n,
                f"{row.pct_fifo}%",
                split_p,
                str(row.fifo_size),
                str(row.total_size),
            ]

        lines = [f"network: {self.model}"]
        lines.append("params: " + ", ".join(f"{k}={v}" for k, v in self.params.items()))
        if self.tilings:
            for name, t in self.tilings.items():
                lines.append(
                    f"tiling[{name}]: normals={t['normals']} sizes={t['sizes']}"
                )
        lines.append("")

        table = [("", *self.COLUMNS), ("before", *cells(self.before))]
        if self.after is not None:
            table.append(("after", *cells(self.after)))
        widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
        for r in table:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        lines.append("")

        def detail(title, rows):
            lines.append(title)
            for ch in rows:
                lines.append(
                    f"  {ch['id']}: {ch['pattern']}, maxlive {ch['maxlive']}, "
                    f"size {ch['size']}"
                )

        detail("channels (before):", self.channels_before)
        if self.channels_after is not None:
            detail("channels (after):", self.channels_after)
        if self.decisions is not None:
            lines.append("decisions:")
            for d in self.decisions:
                reason = f" ({d['reason']})" if d.get("reason") else ""
                parts = d.get("parts")
                extra = ""
                if parts:
                    extra = ": " + ", ".join(
                        f"{p['suffix']} {p['class']}" for p in parts
                    )
                lines.append(f"  {d['id']}: {d['action']}{reason}{extra}")
        if self.oracle_agreement is not None:
            lines.append(f"oracle agreement: {'yes' if self.oracle_agreement else 'NO'}")
        return "\n".join(lines) + "\n"


def format_delta(fail: int, split: int) -> str:
    """Storage delta as printed in the comparison table; blank when fail=0."""
    if fail == 0:
        return ""
    return f"{round((split - fail) * 100 / fail)}%"


def _origin_id(cid: str) -> str:
    """Strip a split-part suffix (.dK or .intra) if present."""
    head, dot, tail = cid.rpartition(".")
    if dot and (tail == "intra" or (tail.startswith("d") and tail[1:].isdigit())):
        return head
    return cid


def report_delta(original: Report, split: Report) -> dict:
    """Compare the channels replaced by splitting against their FIFO parts.

    size-fifo-fail sums the original rounded sizes of the channels that were
    replaced (absent from the split report, id-prefixed parts present);
    size-fifo-split sums the sizes of those parts.
    """
    if original.model != split.model or original.params != split.params:
        raise MismatchedReports(
            f"reports describe different runs: {original.model} {original.params} "
            f"vs {split.model} {split.params}"
        )

    def channel_map(r: Report) -> dict[str, dict]:
        rows = r.channels_after if r.channels_after is not None else r.channels_before
        return {ch["id"]: ch for ch in rows}

    orig = channel_map(original)
    new = channel_map(split)
    parts_by_origin: dict[str, list[dict]] = {}
    for cid, ch in new.items():
        origin = _origin_id(cid)
        if origin != cid and origin in orig:
            parts_by_origin.setdefault(origin, []).append(ch)

    fail = total = 0
    replaced = []
    for cid, ch in sorted(orig.items()):
        if cid in new or cid not in parts_by_origin:
            continue
        fail += ch["size"]
        total += sum(p["size"] for p in parts_by_origin[cid])
        replaced.append(cid)
    return {
        "model": original.model,
        "replaced": replaced,
        "size_fifo_fail": fail,
        "size_fifo_split": total,
        "delta": format_delta(fail, total),
    }


# ---------------------------------------------------------------------------
# analysis pipeline


def _channel_rows(net: PPN, pa: ParamAssignment, budget: int) -> list[dict]:
    rows = []
    for c in sorted(net.channels, key=lambda c: c.id):
        sp = net.process(c.producer).schedule
        sc = net.process(c.consumer).schedule
        cls = patterns.classify(c.dataflow, sp, sc, pa)
        raw = sizing.max_live(c, sp, sc, pa, budget)
        rows.append(
            {
                "id": c.id,
                "producer": c.producer,
                "consumer": c.consumer,
                "pattern": cls.value,
                "maxlive": raw,
                "size": sizing.round_size(raw),
            }
        )
    return rows


def _aggregate(rows: list[dict]) -> Row:
    fifo = [r for r in rows if r["pattern"] == PatternClass.FIFO.value]
    return Row(
        n_channels=len(rows),
        n_fifo=len(fifo),
        fifo_size=sum(r["size"] for r in fifo),
        total_size=sum(r["size"] for r in rows),
    )


def _oracle_check(net: PPN, rows: list[dict], pa: ParamAssignment, budget: int) -> bool:
    ok = True
    by_id = {c.id: c for c in net.channels}
    for r in rows:
        c = by_id[r["id"]]
        sp = net.process(c.producer).schedule
        sc = net.process(c.consumer).schedule
        ref_cls = oracle.oracle_classify(c.dataflow, sp, sc, pa, budget)
        ref_live = oracle.oracle_maxlive(c.dataflow, sp, sc, pa, budget)
        if ref_cls.value != r["pattern"] or ref_live != r["maxlive"]:
            ok = False
            print(
                f"oracle mismatch on {c.id}: symbolic ({r['pattern']}, {r['maxlive']}) "
                f"vs oracle ({ref_cls.value}, {ref_live})",
                file=sys.stderr,
            )
    return ok


def _dump_traces(net: PPN, pa: ParamAssignment, budget: int, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for c in net.channels:
        sp = net.process(c.producer).schedule
        sc = net.process(c.consumer).schedule
        trace = build_trace(c.dataflow, sp, sc, pa, budget)
        trace.dump(outdir / f"{c.id}.trace.json")


def _tilings_echo(tilings) -> dict:
    return {
        name: {"normals": [list(n) for n in t.normals], "sizes": list(t.sizes)}
        for name, t in tilings.items()
    }


def _assignment(net: PPN, spec_list: list[str]) -> ParamAssignment:
    values = dict(net.param_defaults)
    for chunk in spec_list:
        for item in chunk.split(","):
            if not item:
                continue
            name, eq, val = item.partition("=")
            if not eq or not name:
                raise ParseError(f"bad parameter binding {item!r}, expected name=value")
            try:
                values[name] = int(val)
            except ValueError:
                raise ParseError(f"parameter {name}: {val!r} is not an integer") from None
            if name not in net.params:
                raise ParseError(f"unknown parameter {name!r}")
    missing = [p for p in net.params if p not in values]
    if missing:
        raise MissingParameter(
            "missing value for parameter(s) " + ", ".join(missing)
        )
    return ParamAssignment({p: values[p] for p in net.params})


def _emit(report: Report, args) -> None:
    if args.format == "json":
        text = json.dumps(report.to_json(), indent=2) + "\n"
    else:
        text = report.render_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _render_figures(net: PPN, rows: list[dict], pa: ParamAssignment, budget, outdir):
    from . import figures

    paths = figures.render_figures(net, pa, Path(outdir), budget)
    for p in paths:
        print(f"figure: {p}", file=sys.stderr)


def cmd_analyze(args) -> int:
    net = load_ppn(args.model)
    pa = _assignment(net, args.params)
    tilings = load_tilings(args.tiling) if args.tiling else None

    rows_before = _channel_rows(net, pa, args.budget)
    report = Report(
        model=Path(args.model).name,
        params=dict(pa.values),
        before=_aggregate(rows_before),
        channels_before=rows_before,
    )
    target = net
    rows = rows_before
    if tilings:
        target = apply_tiling(net, tilings)
        rows = _channel_rows(target, pa, args.budget)
        report.after = _aggregate(rows)
        report.channels_after = rows
        report.tilings = _tilings_echo(tilings)
    if not args.no_oracle:
        ok = _oracle_check(net, rows_before, pa, args.budget)
        if tilings:
            ok = _oracle_check(target, rows, pa, args.budget) and ok
        report.oracle_agreement = ok
    if args.dump_trace:
        _dump_traces(target, pa, args.budget, Path(args.dump_trace))
    if args.figures:
        _render_figures(target, rows, pa, args.budget, args.figures)
    _emit(report, args)
    return 0


def cmd_fifoize(args) -> int:
    net = load_ppn(args.model)
    pa = _assignment(net, args.params)
    tilings = load_tilings(args.tiling)

    tiled = apply_tiling(net, tilings)
    rows_before = _channel_rows(tiled, pa, args.budget)
    transformed, log = splitter.fifoize(net, tilings, pa, args.budget)
    rows_after = _channel_rows(transformed, pa, args.budget)

    # channels of the tiled network that end up entirely FIFO after the
    # rewrite: replaced ones by construction, untouched ones by their own class
    fifo_after = {r["id"] for r in rows_after if r["pattern"] == PatternClass.FIFO.value}
    n_split = 0
    for d in log.decisions:
        if d.action == "replaced" or d.id in fifo_after:
            n_split += 1

    before = _aggregate(rows_before)
    before.n_fifo_split = n_split
    report = Report(
        model=Path(args.model).name,
        params=dict(pa.values),
        before=before,
        after=_aggregate(rows_after),
        channels_before=rows_before,
        channels_after=rows_after,
        tilings=_tilings_echo(tilings),
        decisions=log.to_json(),
    )
    if not args.no_oracle:
        ok = _oracle_check(tiled, rows_before, pa, args.budget)
        ok = _oracle_check(transformed, rows_after, pa, args.budget) and ok
        report.oracle_agreement = ok

    network_out = args.network_out or (Path(args.model).stem + ".fifoized.json")
    transformed.save(network_out)
    print(f"transformed network: {network_out}", file=sys.stderr)
    if args.dump_trace:
        _dump_traces(transformed, pa, args.budget, Path(args.dump_trace))
    if args.figures:
        _render_figures(transformed, rows_after, pa, args.budget, args.figures)
    _emit(report, args)
    return 0


def cmd_report_delta(args) -> int:
    original = Report.from_json(json.loads(Path(args.original).read_text()))
    split = Report.from_json(json.loads(Path(args.split).read_text()))
    table = report_delta(original, split)
    if args.format == "json":
        text = json.dumps(table, indent=2) + "\n"
    else:
        text = (
            f"model: {table['model']}\n"
            f"replaced channels: {', '.join(table['replaced']) or '(none)'}\n"
            "size-fifo-fail  size-fifo-split  delta\n"
            f"{table['size_fifo_fail']:<14}  {table['size_fifo_split']:<15}  "
            f"{table['delta']}\n"
        )
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _common_flags(sp, tiling_required=False):
    sp.add_argument("model", help="network model file (JSON)")
    sp.add_argument(
        "--tiling",
        required=tiling_required,
        help="tiling description file (JSON)",
    )
    sp.add_argument(
        "--params",
        action="append",
        default=[],
        metavar="k=v[,k=v]",
        help="parameter values, overriding the model defaults",
    )
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out", help="write the report here instead of stdout")
    sp.add_argument("--no-oracle", action="store_true", help="skip the oracle cross-check")
    sp.add_argument("--dump-trace", metavar="DIR", help="dump per-channel traces")
    sp.add_argument("--figures", metavar="DIR", help="render figures into DIR")
    sp.add_argument(
        "--budget",
        type=int,
        default=DEFAULT_PAIR_BUDGET,
        help="enumeration budget in dataflow pairs",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fifosplit",
        description="FIFO channel analysis and recovery for process networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify and size the channels")
    _common_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fifoize", help="split tiled channels into FIFO parts")
    _common_flags(p, tiling_required=True)
    p.add_argument("--network-out", help="path for the transformed network file")
    p.set_defaults(func=cmd_fifoize)

    p = sub.add_parser("report-delta", help="storage delta between two reports")
    p.add_argument("original", help="report of the original network (JSON)")
    p.add_argument("split", help="report of the split network (JSON)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report_delta)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ValidationError,
        ParseError,
        MissingParameter,
        InvalidTiling,
        DepthMismatch,
        ScheduleCollision,
        MismatchedReports,
        FileNotFoundError,
        json.JSONDecodeError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (UnboundedSearch, BudgetExceeded, ComplexityCap, Unbounded) as e:
        print(f"error: analysis budget exhausted: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
