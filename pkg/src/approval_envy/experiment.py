"""Batch experiments over random cultures and the summary report."""
from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import islice
from pathlib import Path

from .envy import sm_threshold
from .gen import Culture, GenConfig, generate, instance_seeds
from .hap import solve_hap
from .solver import DEFAULT_BUDGET, solve_min_k

REPORT_HEADER = [
    "n", "m", "culture", "count", "pct_opt", "pct_uei", "pct_smaef", "mean_k_over_n", "mean_time_s",
]
KN_HEADER = ["n", "m", "culture", "index", "k", "k_over_n", "optimal"]


@dataclass(frozen=True)
class ExperimentConfig:
    gen: GenConfig
    count: int
    budget: int | None = DEFAULT_BUDGET
    timeout: float | None = None
    hap: bool = False

    @property
    def label(self) -> str:
        g = self.gen
        base = "hap" if g.culture is Culture.HAP else g.culture.value
        if g.culture is Culture.CORRELATED:
            base = f"correlated:{g.concentration:g}"
            if self.hap:
                base = "hap-" + base
        return base

    @property
    def uses_hap(self) -> bool:
        return self.hap or self.gen.culture is Culture.HAP


@dataclass(frozen=True)
class Outcome:
    n: int
    m: int
    culture: str
    k: int | None
    optimal: bool
    elapsed: float

    @property
    def unanimous(self) -> bool:
        return self.optimal and self.k is None


def solve_one(config: ExperimentConfig, seed: int) -> Outcome:
    inst = generate(config.gen, seed)
    g = config.gen
    if config.uses_hap:
        import time

        t0 = time.perf_counter()
        res = solve_hap(inst)
        return Outcome(g.n, g.m, config.label, res.k, True, time.perf_counter() - t0)
    res = solve_min_k(inst, budget=config.budget, timeout=config.timeout)
    return Outcome(g.n, g.m, config.label, res.k, res.optimal, res.elapsed)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[Outcome]:
    """Solve ``count`` instances, skipping envy-free ones if the config filters them.

    Instances are drawn from a fixed seed stream and accepted in stream
    order, so the outcome list does not depend on ``workers``.
    """
    kept: list[Outcome] = []
    seeds = instance_seeds(config.gen.seed)
    batch = max(1, workers * 4)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while len(kept) < config.count:
            chunk = list(islice(seeds, batch))
            args = [config] * len(chunk)
            results = pool.map(solve_one, args, chunk) if pool else map(solve_one, args, chunk)
            for out in results:
                if config.gen.filter_non_ef and out.k == 1:
                    continue
                if len(kept) < config.count:
                    kept.append(out)
    finally:
        if pool:
            pool.shutdown()
    return kept


@dataclass(frozen=True)
class ReportRow:
    n: int
    m: int
    culture: str
    count: int
    pct_opt: float
    pct_uei: float
    pct_smaef: float
    mean_k_over_n: float
    mean_time_s: float

    def as_list(self) -> list:
        return [self.n, self.m, self.culture, self.count, f"{self.pct_opt:.1f}", f"{self.pct_uei:.1f}",
                f"{self.pct_smaef:.1f}", _fmt(self.mean_k_over_n), _fmt(self.mean_time_s)]


def _fmt(x: float) -> str:
    return "NaN" if math.isnan(x) else f"{x:.4f}"


def _mean(xs) -> float:
    xs = list(xs)
    return statistics.fmean(xs) if xs else math.nan


def summarize(outcomes: list[Outcome]) -> ReportRow:
    """Percentages are over all instances of the row. mean(K/n) is over
    solved instances with finite K > 1; the time is over solved instances."""
    first = outcomes[0]
    n, count = first.n, len(outcomes)
    solved = [o for o in outcomes if o.optimal]
    smaef = [o for o in outcomes if o.k is not None and o.k <= sm_threshold(n)]
    return ReportRow(
        n=n,
        m=first.m,
        culture=first.culture,
        count=count,
        pct_opt=100.0 * len(solved) / count,
        pct_uei=100.0 * sum(o.unanimous for o in outcomes) / count,
        pct_smaef=100.0 * len(smaef) / count,
        mean_k_over_n=_mean(o.k / n for o in solved if o.k is not None and o.k > 1),
        mean_time_s=_mean(o.elapsed for o in solved),
    )


def write_report(rows: list[ReportRow], path) -> None:
    rows = sorted(rows, key=lambda r: (r.n, r.m, r.culture))
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(REPORT_HEADER)
        for r in rows:
            w.writerow(r.as_list())


def write_k_over_n(outcomes: list[Outcome], path) -> None:
    """Per-instance optimal K/n, one row per instance, for box or line plots."""
    by_key: dict[tuple, list[Outcome]] = {}
    for o in outcomes:
        by_key.setdefault((o.n, o.m, o.culture), []).append(o)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(KN_HEADER)
        for key in sorted(by_key):
            for idx, o in enumerate(by_key[key]):
                kn = "NaN" if o.k is None else f"{o.k / o.n:.4f}"
                w.writerow([o.n, o.m, o.culture, idx, "" if o.k is None else o.k, kn, int(o.optimal)])


def kn_path(report_path) -> Path:
    p = Path(report_path)
    return p.with_name(p.stem + "_kn" + p.suffix)
