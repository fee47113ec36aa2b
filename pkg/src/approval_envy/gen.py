"""Instance generators: random cultures and the adversarial families used as
fixtures for the structural results on approval envy."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .core import Instance

UTILITY_MAX = 100


class Culture(str, enum.Enum):
    UNIFORM = "uniform"
    CORRELATED = "correlated"
    HAP = "hap"


@dataclass(frozen=True)
class GenConfig:
    n: int
    m: int
    culture: Culture = Culture.UNIFORM
    seed: int = 0
    concentration: float = 0.0
    filter_non_ef: bool = False

    def __post_init__(self):
        object.__setattr__(self, "culture", Culture(self.culture))
        if self.concentration < 0:
            raise ValueError("concentration must be nonnegative")
        if self.culture is Culture.HAP and self.m != self.n:
            raise ValueError("house allocation instances need m = n")
        if self.n < 1 or self.m < 0:
            raise ValueError(f"bad size n={self.n}, m={self.m}")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_uniform(n: int, m: int, seed) -> Instance:
    """i.i.d. integer utilities uniform on {0, ..., 100}."""
    return Instance.from_rows(_rng(seed).integers(0, UTILITY_MAX + 1, size=(n, m)).tolist())


def mixing_weight(concentration: float) -> float:
    if math.isinf(concentration):
        return 1.0
    return concentration / (1.0 + concentration)


def gen_correlated(n: int, m: int, concentration: float, seed) -> Instance:
    """Agents blend a shared reference row with a private uniform row.

    Each row is ``round(lam * ref + (1 - lam) * private)`` where
    ``lam = c / (1 + c)``; ``c = 0`` gives exactly :func:`gen_uniform` with the
    same seed and ``c = inf`` gives identical rows.
    """
    if concentration < 0:
        raise ValueError("concentration must be nonnegative")
    rng = _rng(seed)
    private = rng.integers(0, UTILITY_MAX + 1, size=(n, m))
    ref = rng.integers(0, UTILITY_MAX + 1, size=m)
    lam = mixing_weight(concentration)
    rows = np.rint(lam * ref[None, :] + (1.0 - lam) * private).astype(np.int64)
    return Instance.from_rows(rows.tolist())


def gen_unanimous_seed(n: int, m: int, seed) -> Instance:
    """Random instance where every agent values item 0 above all other items together."""
    if m < 1:
        raise ValueError("need at least one item")
    rng = _rng(seed)
    u = rng.integers(0, UTILITY_MAX + 1, size=(n, m))
    u[:, 0] = u[:, 1:].sum(axis=1) + rng.integers(1, UTILITY_MAX + 1, size=n)
    return Instance.from_rows(u.tolist())


def hierarchy_epsilon(n: int) -> Fraction:
    return Fraction(1, 2 * (n + 1))


def gen_hierarchy_instance(n: int, h: int) -> Instance:
    """n x n family whose optimal level is exactly h + 1.

    With agent i holding item i, the only envy is the last agent's envy of
    agent 0, approved by agents 0..h-2 and the envier: h approvals.
    """
    if not 2 <= h <= n - 1:
        raise ValueError(f"need 2 <= h <= n - 1, got h={h}, n={n}")
    eps = hierarchy_epsilon(n)
    u = [[eps] * n for _ in range(n)]
    u[0][0] = Fraction(1)
    for i in range(1, h - 1):
        u[i][0] = u[i][i] = Fraction(1, 2)
    for i in range(h - 1, n - 1):
        u[i][i] = Fraction(1)
    u[n - 1] = [Fraction(2, n + 1)] + [Fraction(1, n + 1)] * (n - 1)
    return Instance.from_rows(u)


def swap_worsens_groups(n: int, h: int) -> tuple[range, range]:
    """0-based agent indices of the two filler groups (l-agents, m-agents)."""
    return range(3, 3 + h), range(3 + h, n)


def gen_swap_worsens_instance(n: int, h: int) -> Instance:
    """n x n family where swapping the bundles of agents 0 and 1 is weakly
    improving but raises the level whenever h >= 1.

    h is the number of l-agents (who value items 0 and 2 equally); the
    remaining n - 3 - h filler agents are m-agents.
    """
    if n < 4 or not 0 <= h <= n - 3:
        raise ValueError(f"need n >= 4 and 0 <= h <= n - 3, got n={n}, h={h}")
    u = [[0] * n for _ in range(n)]
    u[0][0], u[0][1], u[0][2] = 1, 2, 7
    u[1][0] = u[1][1] = 2
    u[2][2] = 10
    l_agents, m_agents = swap_worsens_groups(n, h)
    for a in l_agents:
        u[a][0] = u[a][2] = 5
        for j in range(3, n):
            u[a][j] = 6
    for a in m_agents:
        u[a][1], u[a][2] = 4, 5
        for j in range(3, n):
            u[a][j] = 6
    return Instance.from_rows(u)


def generate(config: GenConfig, seed=None) -> Instance:
    """One instance of the configured culture (no EF filtering)."""
    seed = config.seed if seed is None else seed
    if config.culture is Culture.CORRELATED:
        return gen_correlated(config.n, config.m, config.concentration, seed)
    return gen_uniform(config.n, config.m, seed)


def instance_seeds(seed: int) -> Iterator[int]:
    """Independent per-instance seeds derived from a master seed."""
    ss = np.random.SeedSequence(seed)
    while True:
        for child in ss.spawn(64):
            yield int(child.generate_state(1, np.uint64)[0])


def generate_batch(config: GenConfig, count: int, budget: int | None = None) -> Iterator[Instance]:
    """``count`` instances; with ``filter_non_ef`` only instances certified to
    admit no envy-free allocation are kept."""
    from .hap import hap_has_ef
    from .solver import DEFAULT_BUDGET, solve_min_k

    kept = 0
    for s in instance_seeds(config.seed):
        if kept == count:
            return
        inst = generate(config, s)
        if config.filter_non_ef:
            if config.culture is Culture.HAP:
                if hap_has_ef(inst):
                    continue
            else:
                res = solve_min_k(inst, budget=budget or DEFAULT_BUDGET)
                if res.k == 1 or not res.optimal:
                    continue
        kept += 1
        yield inst
