"""Envy measures: pairwise envy, degree of envy, approval counts and levels.

Everything here works on exact Fractions and is the reference route; the
solver has its own vectorized integer path which is cross-checked against
these functions in the tests.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import Allocation, Instance, validate_allocation


def bundle_values(inst: Instance, alloc: Allocation) -> list[list[Fraction]]:
    """``values[k][i]`` is agent k's utility for agent i's bundle."""
    problems = validate_allocation(inst, alloc)
    if problems:
        raise ValueError("invalid allocation: " + "; ".join(problems))
    values = [[Fraction(0)] * inst.n for _ in range(inst.n)]
    for j, o in enumerate(alloc.owner):
        for k in range(inst.n):
            values[k][o] += inst.utilities[k][j]
    return values


def _check_pair(inst: Instance, i: int, j: int) -> None:
    if i == j:
        raise ValueError("envy is defined between two different agents")
    for a in (i, j):
        if not 0 <= a < inst.n:
            raise IndexError(f"agent {a} out of range for {inst.n} agents")


def pairwise_envy(inst: Instance, alloc: Allocation, i: int, j: int) -> Fraction:
    _check_pair(inst, i, j)
    v = bundle_values(inst, alloc)
    return max(Fraction(0), v[i][j] - v[i][i])


def degree_of_envy(inst: Instance, alloc: Allocation) -> Fraction:
    v = bundle_values(inst, alloc)
    return sum(
        (max(Fraction(0), v[i][j] - v[i][i]) for i in range(inst.n) for j in range(inst.n)),
        Fraction(0),
    )


def _approvals(values, i: int, j: int) -> int:
    return sum(1 for row in values if row[i] < row[j])


def approval_count(inst: Instance, alloc: Allocation, i: int, j: int) -> int:
    """Number of agents k (i included) with u_k(bundle of i) < u_k(bundle of j)."""
    _check_pair(inst, i, j)
    return _approvals(bundle_values(inst, alloc), i, j)


def k_app_envies(inst: Instance, alloc: Allocation, i: int, j: int, K: int) -> bool:
    _check_pair(inst, i, j)
    if not 1 <= K <= inst.n:
        raise ValueError(f"K = {K} outside [1, {inst.n}]")
    v = bundle_values(inst, alloc)
    return v[i][i] < v[i][j] and _approvals(v, i, j) >= K


class LevelKind(enum.Enum):
    EF = "EF"
    LEVEL = "level"
    UNANIMOUS = "unanimous"


@dataclass(frozen=True, order=False)
class AllocationLevel:
    """Smallest K for which an allocation is (K-app envy)-free.

    ``k`` is 1 for envy-free allocations and ``None`` when some envy is
    approved by every agent.
    """

    k: int | None

    @classmethod
    def ef(cls) -> "AllocationLevel":
        return cls(1)

    @classmethod
    def unanimous(cls) -> "AllocationLevel":
        return cls(None)

    @property
    def kind(self) -> LevelKind:
        if self.k is None:
            return LevelKind.UNANIMOUS
        return LevelKind.EF if self.k == 1 else LevelKind.LEVEL

    @property
    def rank(self) -> float:
        return math.inf if self.k is None else self.k

    def is_free_at(self, K: int) -> bool:
        """True iff the allocation is (K-app envy)-free."""
        return self.k is not None and self.k <= K

    def __lt__(self, other: "AllocationLevel") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "AllocationLevel") -> bool:
        return self.rank <= other.rank

    def __str__(self) -> str:
        if self.kind is LevelKind.EF:
            return "EF"
        if self.kind is LevelKind.UNANIMOUS:
            return "unanimous"
        return f"Level({self.k})"


def level_from_max_approval(max_approval: int, n: int) -> AllocationLevel:
    """Level given the largest approval count over envious pairs (0 if none)."""
    if max_approval == 0:
        return AllocationLevel.ef()
    if max_approval >= n:
        return AllocationLevel.unanimous()
    return AllocationLevel(max_approval + 1)


def allocation_level(inst: Instance, alloc: Allocation) -> AllocationLevel:
    v = bundle_values(inst, alloc)
    worst = 0
    for i in range(inst.n):
        for j in range(inst.n):
            if i != j and v[i][i] < v[i][j]:
                worst = max(worst, _approvals(v, i, j))
    return level_from_max_approval(worst, inst.n)


@dataclass(frozen=True)
class WeightedEnvyGraph:
    n: int
    edges: frozenset[tuple[int, int, int]]

    def weight(self, i: int, j: int) -> int | None:
        for a, b, w in self.edges:
            if (a, b) == (i, j):
                return w
        return None

    def level(self) -> AllocationLevel:
        return level_from_max_approval(max((w for *_, w in self.edges), default=0), self.n)


def weighted_envy_graph(inst: Instance, alloc: Allocation) -> WeightedEnvyGraph:
    v = bundle_values(inst, alloc)
    edges = frozenset(
        (i, j, _approvals(v, i, j))
        for i in range(inst.n)
        for j in range(inst.n)
        if i != j and v[i][i] < v[i][j]
    )
    return WeightedEnvyGraph(inst.n, edges)


def sm_threshold(n: int) -> int:
    return -(-n // 2)


def is_sm_app_ef(inst: Instance, alloc: Allocation) -> bool:
    """Every envy is contradicted by a strict majority: level <= ceil(n/2)."""
    return allocation_level(inst, alloc).is_free_at(sm_threshold(inst.n))
