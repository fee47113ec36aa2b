"""Exact add-MARA instances, allocations and integer normalization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# Largest bit width accepted for integer utilities. Row sums must fit a signed
# 64-bit word so that vectorized bundle sums cannot overflow.
INT_BITS = 62


class CapacityError(OverflowError):
    """Raised when scaled utilities do not fit the integer representation."""

    def __init__(self, required_bits: int, limit: int = INT_BITS):
        super().__init__(
            f"scaled utilities need {required_bits} bits, limit is {limit}"
        )
        self.required_bits = required_bits
        self.limit = limit


def to_fraction(value) -> Fraction:
    """Parse an int, Fraction or "p/q" string into an exact Fraction.

    Floats are rejected on purpose: ties between bundles must be exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not utilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} {value!r} as an exact utility")


@dataclass(frozen=True)
class Instance:
    """n agents, m items, nonnegative rational utilities ``utilities[i][j]``."""

    utilities: tuple[tuple[Fraction, ...], ...]
    agent_names: tuple[str, ...] = ()
    item_names: tuple[str, ...] = ()

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(u) for u in row) for row in self.utilities)
        if not rows:
            raise ValueError("an instance needs at least one agent")
        m = len(rows[0])
        if any(len(row) != m for row in rows):
            raise ValueError("utility matrix is ragged")
        if any(u < 0 for row in rows for u in row):
            raise ValueError("utilities must be nonnegative")
        agents = tuple(self.agent_names) or tuple(f"a{i + 1}" for i in range(len(rows)))
        items = tuple(self.item_names) or tuple(f"o{j + 1}" for j in range(m))
        if len(agents) != len(rows):
            raise ValueError(f"{len(agents)} agent names for {len(rows)} utility rows")
        if len(items) != m:
            raise ValueError(f"{len(items)} item names for {m} utility columns")
        object.__setattr__(self, "utilities", rows)
        object.__setattr__(self, "agent_names", agents)
        object.__setattr__(self, "item_names", items)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], agent_names=(), item_names=()) -> "Instance":
        return cls(tuple(tuple(row) for row in rows), tuple(agent_names), tuple(item_names))

    @property
    def n(self) -> int:
        return len(self.utilities)

    @property
    def m(self) -> int:
        return len(self.utilities[0])

    def u(self, agent: int, item: int) -> Fraction:
        return self.utilities[agent][item]


@dataclass(frozen=True)
class Allocation:
    """``owner[j]`` is the agent holding item j.

    Construction does not validate against an instance; use
    :func:`validate_allocation` for that.
    """

    owner: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "owner", tuple(int(o) for o in self.owner))

    @classmethod
    def from_bundles(cls, bundles: Sequence[Iterable[int]], m: int) -> "Allocation":
        owner = [-1] * m
        for agent, bundle in enumerate(bundles):
            for item in bundle:
                if owner[item] != -1:
                    raise ValueError(f"item {item} given to agents {owner[item]} and {agent}")
                owner[item] = agent
        if -1 in owner:
            raise ValueError(f"item {owner.index(-1)} is not allocated")
        return cls(tuple(owner))

    @property
    def m(self) -> int:
        return len(self.owner)

    def bundle(self, agent: int) -> frozenset[int]:
        return frozenset(j for j, o in enumerate(self.owner) if o == agent)

    def bundles(self, n: int) -> list[frozenset[int]]:
        out: list[set[int]] = [set() for _ in range(n)]
        for j, o in enumerate(self.owner):
            out[o].add(j)
        return [frozenset(b) for b in out]


def bundle_utility(inst: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    if not 0 <= agent < inst.n:
        raise IndexError(f"agent {agent} out of range for {inst.n} agents")
    row = inst.utilities[agent]
    total = Fraction(0)
    for item in bundle:
        if not 0 <= item < inst.m:
            raise IndexError(f"item {item} out of range for {inst.m} items")
        total += row[item]
    return total


def validate_allocation(inst: Instance, alloc: Allocation) -> list[str]:
    """Return the list of violated conditions; empty means the allocation is valid."""
    problems = []
    if len(alloc.owner) != inst.m:
        problems.append(f"length mismatch: {len(alloc.owner)} owners for {inst.m} items")
    for j, o in enumerate(alloc.owner):
        if not 0 <= o < inst.n:
            problems.append(f"owner out of range: item {j} owned by {o}, n = {inst.n}")
    return problems


@dataclass(frozen=True)
class NormalizedInstance:
    base: Instance
    scale: int
    int_utilities: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m


def normalize(inst: Instance, max_bits: int = INT_BITS) -> NormalizedInstance:
    """Scale utilities by the lcm of their denominators into an int64 matrix."""
    scale = math.lcm(*(u.denominator for row in inst.utilities for u in row)) if inst.m else 1
    ints = [[int(u * scale) for u in row] for row in inst.utilities]
    largest = max((sum(row) for row in ints), default=0)
    bits = max(largest.bit_length(), scale.bit_length())
    if bits > max_bits:
        raise CapacityError(bits, max_bits)
    arr = np.array(ints, dtype=np.int64).reshape(inst.n, inst.m)
    arr.setflags(write=False)
    return NormalizedInstance(inst, scale, arr)
