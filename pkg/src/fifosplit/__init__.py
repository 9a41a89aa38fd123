"""Process-network channel analysis: tiling, FIFO detection, channel splitting."""

from importlib import resources

from .patterns import PatternClass, classify, in_order, lex_compare_set, unicity
from .ppn import PPN, Channel, Process, Schedule, load_ppn, validate_at
from .presburger import (
    AffineExpr,
    Constraint,
    IntegerRelation,
    IntegerSet,
    ParamAssignment,
    Space,
    parse_relation,
    parse_set,
)
from .sizing import max_live, round_size, size_report
from .splitter import SplitResult, fifoize, split
from .tiling import Tiling, apply_tiling, lift_relation, load_tilings, tile_process

__version__ = "0.1.0"


def bundled_model(name: str):
    """Path to a bundled model or tiling file, e.g. 'jacobi1d.ppn.json'."""
    return resources.files("fifosplit.data").joinpath(name)


def bundled_models() -> list[str]:
    return sorted(
        p.name for p in resources.files("fifosplit.data").iterdir() if p.name.endswith(".json")
    )
