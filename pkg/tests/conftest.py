import pytest

from fifosplit import bundled_model, load_ppn, load_tilings
from fifosplit.ppn import Schedule
from fifosplit.presburger import ParamAssignment, Space, parse_affine


def mk_schedule(dims, rows=None, params=()):
    """Schedule from textual rows; identity on `dims` when rows is None."""
    space = Space(tuple(dims), tuple(params))
    rows = list(dims) if rows is None else rows
    return Schedule(tuple(dims), [parse_affine(r, space) for r in rows], tuple(params))


@pytest.fixture(scope="session")
def jacobi():
    return load_ppn(bundled_model("jacobi1d.ppn.json"))


@pytest.fixture(scope="session")
def jacobi_tile2():
    return load_tilings(bundled_model("jacobi1d.tile2x2.json"))


@pytest.fixture(scope="session")
def jacobi_tile4():
    return load_tilings(bundled_model("jacobi1d.tile4x4.json"))


@pytest.fixture(scope="session")
def pa88():
    return ParamAssignment({"T": 8, "N": 8})
