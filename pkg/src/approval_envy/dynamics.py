"""Bundle swaps between two agents and the swap procedure that turns a
(2-app envy)-free allocation into an envy-free one."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .core import Allocation, Instance
from .envy import AllocationLevel, allocation_level, bundle_values, degree_of_envy
from .solver import exists_k_app_ef


@dataclass(frozen=True)
class SwapStep:
    agent_a: int
    agent_b: int
    de_before: Fraction
    de_after: Fraction
    level_before: AllocationLevel
    level_after: AllocationLevel


def is_weakly_improving_swap(inst: Instance, alloc: Allocation, p: int, q: int) -> bool:
    v = bundle_values(inst, alloc)
    gain_p = v[p][q] - v[p][p]
    gain_q = v[q][p] - v[q][q]
    return gain_p >= 0 and gain_q >= 0 and (gain_p > 0 or gain_q > 0)


def find_weakly_improving_swap(inst: Instance, alloc: Allocation) -> tuple[int, int] | None:
    """Lexicographically smallest pair (p, q), p < q, whose swap is weakly improving."""
    v = bundle_values(inst, alloc)
    for p in range(inst.n):
        for q in range(p + 1, inst.n):
            gain_p = v[p][q] - v[p][p]
            gain_q = v[q][p] - v[q][q]
            if gain_p >= 0 and gain_q >= 0 and (gain_p > 0 or gain_q > 0):
                return p, q
    return None


def apply_swap(alloc: Allocation, p: int, q: int) -> Allocation:
    if p == q:
        raise ValueError("a swap needs two different agents")
    swap = {p: q, q: p}
    return Allocation(tuple(swap.get(o, o) for o in alloc.owner))


class NoSafeSwap(RuntimeError):
    """No envious pair can swap without creating approved envy."""


def _envious_pairs(v, n: int) -> Iterator[tuple[int, int]]:
    for i in range(n):
        for j in range(n):
            if i != j and v[i][i] < v[i][j]:
                yield i, j


def two_app_ef_swaps(inst: Instance, alloc: Allocation) -> Iterator[SwapStep]:
    """Yield the swaps performed while driving a (2-app envy)-free allocation to EF.

    In a (2-app envy)-free allocation the envied agent never approves the
    envy, so swapping an envious pair is weakly improving and lowers the
    degree of envy. Such a swap can still create approved envy elsewhere, so
    each step takes the lexicographically smallest envious pair (envier,
    envied) whose swap keeps the allocation (2-app envy)-free. Raises
    :class:`NoSafeSwap` if no envious pair qualifies.
    """
    level = allocation_level(inst, alloc)
    if not level.is_free_at(2):
        raise ValueError(f"allocation is not (2-app envy)-free (level {level})")
    de = degree_of_envy(inst, alloc)
    while level.k != 1:
        for pair in _envious_pairs(bundle_values(inst, alloc), inst.n):
            nxt = apply_swap(alloc, *pair)
            level_next = allocation_level(inst, nxt)
            if level_next.is_free_at(2):
                break
        else:
            raise NoSafeSwap(f"stuck at {alloc.owner} with level {level}")
        de_next = degree_of_envy(inst, nxt)
        yield SwapStep(pair[0], pair[1], de, de_next, level, level_next)
        alloc, de, level = nxt, de_next, level_next


def ef_from_two_app_ef(inst: Instance, alloc: Allocation) -> Allocation:
    """Envy-free allocation reached by swaps from a (2-app envy)-free one.

    Falls back to exact search in the (never observed) case where the swap
    procedure gets stuck.
    """
    try:
        for step in two_app_ef_swaps(inst, alloc):
            # guards against an infinite loop should the invariant ever break
            if not step.de_after < step.de_before:
                raise RuntimeError(f"degree of envy did not decrease at swap {step}")
            alloc = apply_swap(alloc, step.agent_a, step.agent_b)
    except NoSafeSwap:
        found, ef = exists_k_app_ef(inst, 1)
        if not found:
            raise RuntimeError("no envy-free allocation despite a (2-app envy)-free start") from None
        return ef
    return alloc
