"""Uniform culture, EF instances filtered: the per-n summary rows.

    python scripts/run_table1.py --n-range 3..6 --count 60 -o table1.csv

Item counts default to m = 2n - 1; the acceptance suite caps n = 6 at m = 10.
"""
import argparse

from approval_envy.cli import parse_m, parse_range
from approval_envy.experiment import (
    ExperimentConfig, kn_path, run_experiment, summarize, write_k_over_n, write_report,
)
from approval_envy.gen import Culture, GenConfig


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-range", default="3..6")
    p.add_argument("--m", default="2n-1")
    p.add_argument("--count", type=int, default=60)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", default="table1.csv")
    args = p.parse_args()

    rows, outcomes = [], []
    for n in parse_range(args.n_range):
        gen = GenConfig(n, parse_m(args.m, n), Culture.UNIFORM, args.seed, filter_non_ef=True)
        outs = run_experiment(ExperimentConfig(gen, args.count, timeout=args.timeout), args.workers)
        row = summarize(outs)
        print(",".join(map(str, row.as_list())), flush=True)
        rows.append(row)
        outcomes.extend(outs)
    write_report(rows, args.output)
    write_k_over_n(outcomes, kn_path(args.output))


if __name__ == "__main__":
    main()
