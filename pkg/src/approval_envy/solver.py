"""Exact minimum-K solver.

Items are assigned in decreasing order of total utility, agents tried in
index order. The search runs depth-first over blocks of partial
allocations evaluated with numpy on the integer-normalized utilities, and
starts from a local-search incumbent.

The level of a partial allocation is not a bound on its completions
(adding items can remove envy). The search therefore prunes only on
*certain* approvals: if agent k values h's partial bundle above i's by more
than k's total utility for the unassigned items, k approves that envy in
every completion. A partial allocation is cut when some envy is certain and
its certain approvals already reach the incumbent's level.

:func:`solve_exhaustive` enumerates every allocation without pruning and is
kept as an independent reference.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import Allocation, Instance, normalize

DEFAULT_BUDGET = 10**8
# elements of the (chunk, n, n, n) comparison tensor per chunk
_CHUNK_CELLS = 1 << 22


class BudgetExceeded(Exception):
    def __init__(self, result: "SolveResult"):
        super().__init__(f"search stopped after {result.explored} allocations")
        self.result = result


@dataclass(frozen=True)
class SolveResult:
    """Outcome of :func:`solve_min_k`.

    ``k`` is the minimal level (1 means envy-free) with ``witness`` attaining
    it, or ``None`` for a unanimous envy instance. When ``optimal`` is False
    the search hit its budget and ``k``/``witness`` are the best found so far.
    """

    k: int | None
    witness: Allocation | None
    explored: int
    elapsed: float
    optimal: bool = True

    @property
    def unanimous(self) -> bool:
        return self.optimal and self.k is None


def max_approvals(U: np.ndarray, owners: np.ndarray) -> np.ndarray:
    """Largest approval count over envious pairs, per allocation (0 = envy-free).

    ``U`` is the (n, m) integer utility matrix, ``owners`` a (C, m) array of
    owner vectors. A value of n means some envy is unanimous.
    """
    n, m = U.shape
    C = owners.shape[0]
    # V[c, k, i] = utility of agent k for the bundle of agent i
    V = np.zeros((C, n, n), dtype=U.dtype)
    rows = np.arange(C)
    for j in range(m):
        V[rows, :, owners[:, j]] += U[:, j]
    own = np.einsum("cii->ci", V)
    envious = V > own[:, :, None]  # [c, i, h]: i envies h
    approvals = (V[:, :, :, None] < V[:, :, None, :]).sum(axis=1)  # [c, i, h]
    return np.where(envious, approvals, 0).max(axis=(1, 2), initial=0)


def level_codes(U: np.ndarray, owners: np.ndarray) -> np.ndarray:
    """Allocation levels as integers: 1 for EF, K for Level(K), n + 1 for unanimous."""
    worst = max_approvals(U, owners)
    return np.where(worst == 0, 1, worst + 1)


def owners_block(n: int, m: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % n


def _chunks(U: np.ndarray, limit: int) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    n, m = U.shape
    size = max(1, _CHUNK_CELLS // (n**3 + n * m))
    for start in range(0, limit, size):
        owners = owners_block(n, m, start, min(limit, start + size))
        yield start, owners, level_codes(U, owners)


class _Search:
    """Vectorized depth-first search for allocations with small level codes."""

    def __init__(self, U: np.ndarray, budget: int | None, timeout: float | None):
        self.U = U
        self.n, self.m = U.shape
        # rem[d, k]: agent k's utility for items d..m-1
        tail = np.cumsum(U[:, ::-1], axis=1)[:, ::-1]
        self.rem = np.concatenate([tail, np.zeros((self.n, 1), U.dtype)], axis=1).T
        self.budget = budget
        self.deadline = None if timeout is None else time.perf_counter() + timeout
        self.explored = 0
        self.stopped = False
        self.target: int | None = None
        self.best_code = self.n + 2
        self.best_owner: np.ndarray | None = None
        self.step = max(1, _CHUNK_CELLS // (self.n**3 + self.n * self.m) // self.n)

    def _out_of_resources(self) -> bool:
        if self.budget is not None and self.explored >= self.budget:
            return True
        return self.deadline is not None and time.perf_counter() > self.deadline

    def _sure_codes(self, V: np.ndarray, depth: int) -> np.ndarray:
        """Least level code any completion can have; exact when depth == m."""
        D = V[:, :, None, :] - V[:, :, :, None]  # [c, k, i, h] = V[k,h] - V[k,i]
        sure = D > self.rem[depth][None, :, None, None]
        envious = np.einsum("ciih->cih", sure)
        counts = sure.sum(axis=1)
        return np.where(envious, counts, 0).max(axis=(1, 2), initial=0) + 1

    def run(self, target: int | None = None) -> None:
        """Find the least code; with ``target``, stop at the first code <= target."""
        self.target = target
        if target is not None:
            self.best_code = target + 1
        V = np.zeros((1, self.n, self.n), dtype=self.U.dtype)
        self._dfs(V, np.zeros((1, 0), dtype=np.int64), 0)

    def _done(self) -> bool:
        if self.stopped:
            return True
        if self.target is None:
            return self.best_code == 1
        return self.best_owner is not None

    def _dfs(self, V: np.ndarray, owners: np.ndarray, depth: int) -> None:
        if depth == self.m:
            self._leaves(V, owners)
            return
        n = self.n
        for s in range(0, V.shape[0], self.step):
            if self._done():
                return
            if self._out_of_resources():
                self.stopped = True
                return
            block, prefix = V[s:s + self.step], owners[s:s + self.step]
            B = block.shape[0]
            child = np.repeat(block, n, axis=0)
            agents = np.tile(np.arange(n), B)
            child[np.arange(B * n), :, agents] += self.U[:, depth]
            child_owners = np.concatenate([np.repeat(prefix, n, axis=0), agents[:, None]], axis=1)
            if depth + 1 == self.m:
                self._leaves(child, child_owners)
                continue
            self.explored += B * n
            keep = self._sure_codes(child, depth + 1) < self.best_code
            if keep.any():
                self._dfs(child[keep], child_owners[keep], depth + 1)

    def _leaves(self, V: np.ndarray, owners: np.ndarray) -> None:
        self.explored += V.shape[0]
        codes = self._sure_codes(V, self.m)
        pos = int(np.argmin(codes))
        if codes[pos] < self.best_code:
            self.best_code, self.best_owner = int(codes[pos]), owners[pos]


def local_search(
    U: np.ndarray, seed: int = 0, restarts: int = 4, patience: int = 25
) -> tuple[int, np.ndarray]:
    """Cheap incumbent: hill climbing over single-item moves with sideways steps.

    Returns ``(code, owners)`` for the best allocation met. Deterministic
    for a given seed.
    """
    n, m = U.shape
    if m == 0 or n == 1:
        owners = np.zeros(m, dtype=np.int64)
        return int(level_codes(U, owners[None])[0]), owners
    rng = np.random.default_rng(seed)
    moved_item = np.repeat(np.arange(m), n)
    new_owner = np.tile(np.arange(n), m)
    best_code, best_owners = n + 2, None
    for _ in range(restarts):
        owners = rng.integers(0, n, m)
        code = int(level_codes(U, owners[None])[0])
        stale = 0
        while stale < patience and code > 1:
            cand = np.repeat(owners[None], m * n, axis=0)
            cand[np.arange(m * n), moved_item] = new_owner
            codes = level_codes(U, cand)
            low = int(codes.min())
            stale = 0 if low < code else stale + 1
            owners = cand[rng.choice(np.flatnonzero(codes == low))]
            code = low
            if code < best_code:
                best_code, best_owners = code, owners.copy()
        if code < best_code:
            best_code, best_owners = code, owners.copy()
        if best_code == 1:
            break
    return best_code, best_owners


def _prepare(inst: Instance, budget, timeout) -> tuple[_Search, np.ndarray, np.ndarray]:
    U = normalize(inst).int_utilities
    # high-value items first: the certain-approval bound tightens sooner
    order = np.argsort(-U.sum(axis=0), kind="stable")
    return _Search(U[:, order], budget, timeout), U, order


def _unpermute(owners: np.ndarray, order: np.ndarray) -> Allocation:
    out = np.empty_like(owners)
    out[order] = owners
    return Allocation(tuple(out.tolist()))


def solve_min_k(
    inst: Instance,
    budget: int | None = DEFAULT_BUDGET,
    timeout: float | None = None,
    heuristic: bool = True,
) -> SolveResult:
    """Minimal K such that some allocation is (K-app envy)-free.

    A local-search incumbent seeds the depth-first search, which then only
    looks for strictly better allocations. If ``budget`` (evaluated partial
    and complete allocations) or ``timeout`` (seconds) runs out first, the
    incumbent is returned with ``optimal=False``.
    """
    t0 = time.perf_counter()
    search, U, order = _prepare(inst, budget, timeout)
    n = search.n
    code, witness = n + 1, None
    if heuristic:
        code, owners = local_search(U)
        witness = Allocation(tuple(owners.tolist()))
        search.best_code = code
    if code > 1:
        search.run()
        if search.best_owner is not None:
            code, witness = search.best_code, _unpermute(search.best_owner, order)
    return SolveResult(
        k=None if code > n else code,
        witness=witness,
        explored=search.explored,
        elapsed=time.perf_counter() - t0,
        optimal=code == 1 or not search.stopped,
    )


def exists_k_app_ef(
    inst: Instance, K: int, budget: int | None = DEFAULT_BUDGET
) -> tuple[bool, Allocation | None]:
    """Whether some allocation is (K-app envy)-free, with one such allocation.

    Raises :class:`BudgetExceeded` if the budget runs out before a decision.
    """
    if not 1 <= K <= inst.n:
        raise ValueError(f"K = {K} outside [1, {inst.n}]")
    t0 = time.perf_counter()
    search, _, order = _prepare(inst, budget, None)
    search.run(target=K)
    if search.best_owner is not None:
        return True, _unpermute(search.best_owner, order)
    if search.stopped:
        raise BudgetExceeded(
            SolveResult(None, None, search.explored, time.perf_counter() - t0, False)
        )
    return False, None


def solve_exhaustive(inst: Instance, budget: int | None = None) -> SolveResult:
    """Reference solver: evaluate every allocation, no pruning, no early exit."""
    t0 = time.perf_counter()
    U = normalize(inst).int_utilities
    n, m = U.shape
    total = n**m
    if budget is not None and total > budget:
        raise BudgetExceeded(SolveResult(None, None, 0, 0.0, False))
    best_code, best_owner = n + 2, None
    for _, owners, codes in _chunks(U, total):
        pos = int(np.argmin(codes))
        if codes[pos] < best_code:
            best_code, best_owner = int(codes[pos]), owners[pos]
    return SolveResult(
        k=None if best_code > n else best_code,
        witness=Allocation(tuple(best_owner.tolist())),
        explored=total,
        elapsed=time.perf_counter() - t0,
    )
