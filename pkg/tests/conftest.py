import itertools
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from approval_envy.core import Allocation, Instance
from approval_envy.envy import allocation_level

settings.register_profile("default", deadline=None)
settings.load_profile("default")

EXAMPLE1_ROWS = [
    [0, 3, 3, 1, 3, 2],
    [2, 0, 7, 2, 1, 0],
    [0, 3, 5, 0, 1, 3],
]
# a1 gets {o2, o6}, a2 gets {o1, o4, o5}, a3 gets {o3}
EXAMPLE1_SQUARED = Allocation((1, 0, 2, 1, 1, 0))


@pytest.fixture
def example1():
    return Instance.from_rows(EXAMPLE1_ROWS)


@pytest.fixture
def squared():
    return EXAMPLE1_SQUARED


def brute_force_min_level(inst, one_item_each=False):
    """Reference optimum by enumerating every allocation with the Fraction route.

    Returns the best AllocationLevel; with ``one_item_each`` only
    permutations are considered (house allocation).
    """
    if one_item_each:
        allocs = (Allocation(p) for p in itertools.permutations(range(inst.n)))
    else:
        allocs = (Allocation(o) for o in itertools.product(range(inst.n), repeat=inst.m))
    return min((allocation_level(inst, a) for a in allocs), key=lambda lv: lv.rank)


@st.composite
def instances(draw, max_n=4, max_m=5, min_n=1, min_m=0, max_u=6, fractions=False):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(min_m, max_m))
    if fractions:
        value = st.builds(Fraction, st.integers(0, max_u), st.integers(1, 4))
    else:
        value = st.integers(0, max_u)
    rows = draw(st.lists(st.lists(value, min_size=m, max_size=m), min_size=n, max_size=n))
    return Instance.from_rows(rows)


@st.composite
def instance_and_allocation(draw, **kw):
    inst = draw(instances(**kw))
    owner = draw(st.lists(st.integers(0, inst.n - 1), min_size=inst.m, max_size=inst.m))
    return inst, Allocation(tuple(owner))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
