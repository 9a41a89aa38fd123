"""Figure rendering for the report path.

Two kinds of figures are written next to the textual output: a dependence
plot per channel family (arrows from producer to consumer iterations in the
last two coordinates, split parts in distinct colors) and a bar chart of the
rounded channel sizes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import sizing  # noqa: E402
from .ppn import PPN  # noqa: E402
from .presburger import ParamAssignment  # noqa: E402

PART_COLORS = ("tab:red", "tab:blue", "tab:green", "tab:orange", "tab:purple")


def _plane(point) -> tuple[int, int]:
    """Last two coordinates of an iteration, padding 1-D points with 0."""
    if len(point) >= 2:
        return point[-2], point[-1]
    return point[-1], 0


def _family(cid: str) -> str:
    head, dot, tail = cid.rpartition(".")
    if dot and (tail == "intra" or (tail.startswith("d") and tail[1:].isdigit())):
        return head
    return cid


def dependence_figure(pairs_by_label: dict[str, list], path: Path, title: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    for color, (label, pairs) in zip(
        PART_COLORS * (len(pairs_by_label) // len(PART_COLORS) + 1),
        sorted(pairs_by_label.items()),
    ):
        first = True
        for x, y in pairs:
            (x0, x1), (y0, y1) = _plane(x), _plane(y)
            ax.annotate(
                "",
                xy=(y1, y0),
                xytext=(x1, x0),
                arrowprops={"arrowstyle": "->", "color": color, "lw": 0.8},
            )
            if first:
                ax.plot([], [], color=color, label=label)
                first = False
    ax.set_title(title)
    ax.set_xlabel("innermost dim")
    ax.set_ylabel("outer dim")
    ax.invert_yaxis()
    if pairs_by_label:
        ax.legend(loc="best", fontsize="small")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def size_figure(sizes: dict[str, int], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(sizes)), 4))
    names = sorted(sizes)
    ax.bar(range(len(names)), [sizes[n] for n in names], color="tab:blue")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize="small")
    ax.set_ylabel("rounded size")
    ax.set_title("channel sizes")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def render_figures(
    net: PPN, pa: ParamAssignment, outdir: Path, budget: int = 1_000_000
) -> list[Path]:
    """Dependence plot per channel family plus a size chart; returns paths."""
    outdir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []

    families: dict[str, dict[str, list]] = {}
    sizes: dict[str, int] = {}
    for c in net.channels:
        pairs = c.dataflow.instantiate(pa).enumerate_pairs(budget)
        families.setdefault(_family(c.id), {})[c.id] = pairs
        sp = net.process(c.producer).schedule
        sc = net.process(c.consumer).schedule
        sizes[c.id] = sizing.round_size(sizing.max_live(c, sp, sc, pa, budget))

    for family, by_label in sorted(families.items()):
        path = outdir / f"dep_{family}.png"
        dependence_figure(by_label, path, f"channel {family}")
        paths.append(path)

    path = outdir / "sizes.png"
    size_figure(sizes, path)
    paths.append(path)
    return paths
