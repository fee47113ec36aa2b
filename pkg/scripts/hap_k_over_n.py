"""Optimal K/n in house allocation as n grows, uniform and correlated cultures.

    python scripts/hap_k_over_n.py --n-range 3..30 --count 100 -o hap.csv

Writes the summary CSV and a per-instance ``*_kn.csv`` for line or box plots.
"""
import argparse

from approval_envy.cli import parse_range
from approval_envy.experiment import (
    ExperimentConfig, kn_path, run_experiment, summarize, write_k_over_n, write_report,
)
from approval_envy.gen import Culture, GenConfig


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-range", default="3..20")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--concentration", type=float, default=None,
                   help="use the correlated culture at this concentration")
    p.add_argument("-o", "--output", default="hap.csv")
    args = p.parse_args()

    rows, outcomes = [], []
    for n in parse_range(args.n_range):
        if args.concentration is None:
            gen = GenConfig(n, n, Culture.HAP, args.seed)
        else:
            gen = GenConfig(n, n, Culture.CORRELATED, args.seed, args.concentration)
        outs = run_experiment(ExperimentConfig(gen, args.count, hap=True))
        rows.append(summarize(outs))
        outcomes.extend(outs)
        print(",".join(map(str, rows[-1].as_list())), flush=True)
    write_report(rows, args.output)
    write_k_over_n(outcomes, kn_path(args.output))


if __name__ == "__main__":
    main()
