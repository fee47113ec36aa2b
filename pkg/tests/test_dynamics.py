import itertools

import pytest
from hypothesis import assume, given

from approval_envy.core import Allocation, Instance
from approval_envy.dynamics import (
    apply_swap, ef_from_two_app_ef, find_weakly_improving_swap, is_weakly_improving_swap,
    two_app_ef_swaps,
)
from approval_envy.envy import AllocationLevel, allocation_level, degree_of_envy
from approval_envy.gen import gen_swap_worsens_instance

from conftest import instance_and_allocation, instances


def test_apply_swap():
    assert apply_swap(Allocation((0, 1, 2, 1)), 1, 2) == Allocation((0, 2, 1, 2))
    with pytest.raises(ValueError):
        apply_swap(Allocation((0,)), 0, 0)


def test_find_swap_is_lexicographically_first():
    inst = gen_swap_worsens_instance(4, 1)
    identity = Allocation(tuple(range(4)))
    assert find_weakly_improving_swap(inst, identity) == (0, 1)
    assert is_weakly_improving_swap(inst, identity, 0, 1)


def test_rejects_allocation_above_level_two(example1, squared):
    with pytest.raises(ValueError):
        list(two_app_ef_swaps(example1, squared))


@given(instance_and_allocation(min_n=2))
def test_found_swap_is_weakly_improving(pair):
    inst, alloc = pair
    found = find_weakly_improving_swap(inst, alloc)
    all_pairs = [(p, q) for p, q in itertools.combinations(range(inst.n), 2)
                 if is_weakly_improving_swap(inst, alloc, p, q)]
    assert found == (all_pairs[0] if all_pairs else None)


@given(instances(min_n=2, max_n=4, max_m=5))
def test_two_app_ef_reaches_ef(inst):
    """Start from every (2-app envy)-free allocation of a small instance."""
    starts = [Allocation(o) for o in itertools.product(range(inst.n), repeat=inst.m)]
    starts = [a for a in starts if allocation_level(inst, a).is_free_at(2)]
    assume(starts)
    for start in starts[:20]:
        alloc = start
        for step in two_app_ef_swaps(inst, alloc):
            assert step.de_after < step.de_before
            assert step.level_after.is_free_at(2)
            assert is_weakly_improving_swap(inst, alloc, step.agent_a, step.agent_b)
            alloc = apply_swap(alloc, step.agent_a, step.agent_b)
        result = ef_from_two_app_ef(inst, start)
        assert degree_of_envy(inst, result) == 0


def test_first_envious_swap_can_break_two_app_freeness():
    """A weakly improving swap from a level-2 allocation can reach level 3;
    the procedure must skip such swaps."""
    inst = Instance.from_rows([[1, 0, 2, 3, 3, 0], [3, 3, 2, 0, 0, 2], [2, 3, 0, 3, 0, 2]])
    start = Allocation((2, 1, 2, 0, 1, 1))
    assert allocation_level(inst, start) == AllocationLevel(2)
    assert is_weakly_improving_swap(inst, start, 0, 2)
    after = apply_swap(start, 2, 0)
    assert degree_of_envy(inst, after) < degree_of_envy(inst, start)
    assert allocation_level(inst, after) == AllocationLevel(3)
    steps = list(two_app_ef_swaps(inst, start))
    assert (steps[0].agent_a, steps[0].agent_b) != (2, 0)
    assert degree_of_envy(inst, ef_from_two_app_ef(inst, start)) == 0


def test_ef_input_needs_no_swaps():
    inst = Instance.from_rows([[2, 1], [1, 2]])
    assert list(two_app_ef_swaps(inst, Allocation((0, 1)))) == []
    assert ef_from_two_app_ef(inst, Allocation((0, 1))) == Allocation((0, 1))
