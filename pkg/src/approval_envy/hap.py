"""House allocation (one item per agent): unanimous-envy test, the maxEnvy
matrix and the dichotomous threshold-matching search for the minimal K."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Allocation, Instance, normalize


def _check_hap(inst: Instance) -> np.ndarray:
    if inst.n != inst.m:
        raise ValueError(f"house allocation needs n = m, got n={inst.n}, m={inst.m}")
    return normalize(inst).int_utilities


def unanimous_pair(inst: Instance) -> tuple[int, int] | None:
    """First item pair (worse, better) that every agent strictly orders the same way."""
    U = _check_hap(inst)
    # all_better[j, j2] = every agent strictly prefers j2 to j
    all_better = np.all(U[:, None, :] > U[:, :, None], axis=0)
    hits = np.argwhere(all_better)
    return None if hits.size == 0 else (int(hits[0][0]), int(hits[0][1]))


def is_unanimous_envy_hap(inst: Instance) -> bool:
    return unanimous_pair(inst) is not None


@dataclass(frozen=True)
class MaxEnvyMatrix:
    """``prec_counts[j][j2]``: agents strictly preferring item j2 to item j.
    ``max_envy[i][j]``: approval count of the worst envy agent i feels when
    holding item j (0 if j is one of i's top items)."""

    prec_counts: np.ndarray
    max_envy: np.ndarray

    @property
    def n(self) -> int:
        return self.max_envy.shape[0]


def compute_max_envy(inst: Instance) -> MaxEnvyMatrix:
    U = _check_hap(inst)
    better = U[:, None, :] > U[:, :, None]  # [k, j, j2]: agent k prefers j2 to j
    prec = better.sum(axis=0)
    # for agent i and item j, max of prec[j, j2] over the j2 that i prefers to j
    max_envy = np.where(better, prec[None, :, :], 0).max(axis=2, initial=0)
    return MaxEnvyMatrix(prec, max_envy)


def perfect_matching(adj: list[list[int]], n_right: int) -> list[int] | None:
    """Kuhn's augmenting-path matching; ``match[left] = right`` or None if not perfect.

    Agents are processed in index order and their neighbours in ascending
    item order, so the result is deterministic.
    """
    match_right = [-1] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    for u in range(len(adj)):
        if not augment(u, [False] * n_right):
            return None
    match = [-1] * len(adj)
    for v, u in enumerate(match_right):
        if u != -1:
            match[u] = v
    return match


def threshold_matching(matrix: MaxEnvyMatrix, t: int) -> Allocation | None:
    """One-item-per-agent allocation using only pairs with max_envy <= t."""
    n = matrix.n
    adj = [np.flatnonzero(matrix.max_envy[i] <= t).tolist() for i in range(n)]
    match = perfect_matching(adj, n)
    if match is None:
        return None
    owner = [0] * n
    for agent, item in enumerate(match):
        owner[item] = agent
    return Allocation(tuple(owner))


@dataclass(frozen=True)
class HapResult:
    """``k`` is the optimal level (None for a unanimous envy instance) and
    ``matching`` an allocation attaining it."""

    k: int | None
    matching: Allocation | None
    matchings_solved: int

    @property
    def unanimous(self) -> bool:
        return self.k is None


def solve_hap(inst: Instance) -> HapResult:
    """Binary search for the least threshold t admitting a perfect matching.

    A matching at threshold t is ((t+1)-app envy)-free. A perfect matching
    always exists at t = n, so reaching it means no K <= n works.
    """
    matrix = compute_max_envy(inst)
    n = matrix.n
    low, high = 0, n
    best: tuple[int, Allocation] | None = None
    solved = 0
    while low <= high:
        t = (low + high) // 2
        pi = threshold_matching(matrix, t)
        solved += 1
        if pi is not None:
            best = (t, pi)
            high = t - 1
        else:
            low = t + 1
    assert best is not None
    t_star, pi = best
    if t_star >= n:
        return HapResult(None, None, solved)
    return HapResult(t_star + 1, pi, solved)


def max_matchings(n: int) -> int:
    return math.ceil(math.log2(n + 2)) + 1


def hap_has_ef(inst: Instance) -> bool:
    return threshold_matching(compute_max_envy(inst), 0) is not None
