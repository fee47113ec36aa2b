"""Unanimous-envy frequency of n x n correlated house allocation by concentration.

    python scripts/correlated_hap.py --n 30 --count 100
"""
import argparse
import math

from approval_envy.gen import gen_correlated, instance_seeds
from approval_envy.hap import solve_hap


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=10)
    p.add_argument("--concentrations", default="0,0.1,0.3,1,10,100,inf")
    args = p.parse_args()

    print("concentration,unanimous_frequency,mean_k_over_n")
    for c in (math.inf if t == "inf" else float(t) for t in args.concentrations.split(",")):
        seeds = instance_seeds(args.seed)
        results = [solve_hap(gen_correlated(args.n, args.n, c, next(seeds))) for _ in range(args.count)]
        ks = [r.k / args.n for r in results if r.k is not None]
        mean = sum(ks) / len(ks) if ks else math.nan
        print(f"{c:g},{sum(r.unanimous for r in results) / args.count:.3f},{mean:.4f}")


if __name__ == "__main__":
    main()
