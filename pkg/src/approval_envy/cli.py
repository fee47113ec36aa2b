"""Command-line interface: ``approval-envy <command> ...``.

Exit status: 0 on success, 2 on invalid input, 3 when a search budget or
time limit ran out before optimality was proven.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from . import io
from .core import Allocation, Instance, normalize
from .dynamics import ef_from_two_app_ef, two_app_ef_swaps
from .envy import allocation_level, degree_of_envy, is_sm_app_ef, weighted_envy_graph
from .experiment import (
    ExperimentConfig, kn_path, run_experiment, summarize, write_k_over_n, write_report,
)
from .gen import Culture, GenConfig, generate_batch
from .hap import solve_hap, unanimous_pair
from .mip import build_model, check_assignment, export_lp, run_external_solver, solve_highs
from .solver import DEFAULT_BUDGET, solve_min_k

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


def _bundles_text(inst: Instance, alloc: Allocation) -> str:
    parts = []
    for i, b in enumerate(alloc.bundles(inst.n)):
        items = ", ".join(inst.item_names[j] for j in sorted(b))
        parts.append(f"  {inst.agent_names[i]}: {{{items}}}")
    return "\n".join(parts)


def _emit(args, record: dict, text: str) -> None:
    print(json.dumps(record) if args.json else text)


def cmd_solve(args) -> int:
    inst = io.read_instance(args.file)
    if args.method == "search":
        res = solve_min_k(inst, budget=args.budget, timeout=args.timeout)
        k, witness, optimal = res.k, res.witness, res.optimal
        extra = {"explored": res.explored, "elapsed": res.elapsed}
    else:
        model = build_model(normalize(inst))
        if args.method == "highs":
            out = solve_highs(model, time_limit=args.timeout)
            k, witness, optimal = (None, None, True) if out is None else (out[1], out[0], out[2])
        else:
            out = run_external_solver(model)
            k, witness, optimal = (None, None, True) if out is None else (out[1], out[0], True)
        extra = {}
    record = {
        "k": k,
        "unanimous": optimal and k is None,
        "optimal": optimal,
        "witness": None if witness is None else list(witness.owner),
        **extra,
    }
    if k is None and optimal:
        text = "unanimous envy instance"
    elif k is None:
        text = "budget exhausted before any allocation was found"
    else:
        text = f"min K = {k}" + ("" if optimal else " (not proven optimal)")
        text += "\nwitness:\n" + _bundles_text(inst, witness)
    _emit(args, record, text)
    return EXIT_OK if optimal else EXIT_BUDGET


def cmd_hap(args) -> int:
    inst = io.read_instance(args.file)
    res = solve_hap(inst)
    record = {
        "k": res.k,
        "unanimous": res.unanimous,
        "matching": None if res.matching is None else list(res.matching.owner),
        "matchings_solved": res.matchings_solved,
    }
    if res.unanimous:
        worse, better = unanimous_pair(inst)
        text = (f"unanimous envy instance: every agent prefers "
                f"{inst.item_names[better]} to {inst.item_names[worse]}")
    else:
        text = f"min K = {res.k}\nmatching:\n" + _bundles_text(inst, res.matching)
    _emit(args, record, text)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = io.read_instance(args.file)
    alloc = io.read_allocation(args.alloc, inst)
    level = allocation_level(inst, alloc)
    graph = weighted_envy_graph(inst, alloc)
    edges = sorted(graph.edges)
    record = {
        "level": str(level),
        "k": level.k,
        "degree_of_envy": str(degree_of_envy(inst, alloc)),
        "sm_app_ef": is_sm_app_ef(inst, alloc),
        "envy_graph": [{"envier": i, "envied": j, "weight": w} for i, j, w in edges],
    }
    lines = [f"level: {level}", f"degree of envy: {record['degree_of_envy']}",
             f"SM-app-EF: {record['sm_app_ef']}"]
    lines += [f"  {inst.agent_names[i]} -> {inst.agent_names[j]} (approved by {w})" for i, j, w in edges]
    if args.k is not None:
        violated = check_assignment(build_model(normalize(inst)), alloc, args.k)
        record["k_app_envy_free"] = level.is_free_at(args.k)
        record["mip_violations"] = violated
        lines.append(f"({args.k}-app envy)-free: {level.is_free_at(args.k)}")
        lines.append("MIP constraints: " + ("all satisfied" if not violated else ", ".join(violated)))
    _emit(args, record, "\n".join(lines))
    return EXIT_OK


def cmd_emit_lp(args) -> int:
    inst = io.read_instance(args.file)
    Path(args.output).write_text(export_lp(build_model(normalize(inst))))
    return EXIT_OK


def cmd_ef_from_2app(args) -> int:
    inst = io.read_instance(args.file)
    alloc = io.read_allocation(args.alloc, inst)
    steps = list(two_app_ef_swaps(inst, alloc))
    result = ef_from_two_app_ef(inst, alloc)
    record = {
        "allocation": list(result.owner),
        "swaps": [[s.agent_a, s.agent_b] for s in steps],
    }
    if args.output:
        io.write_allocation(result, args.output)
    _emit(args, record, f"{len(steps)} swaps\nenvy-free allocation:\n" + _bundles_text(inst, result))
    return EXIT_OK


def _concentration(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def cmd_gen(args) -> int:
    m = args.n if args.culture == "hap" else args.m
    if m is None:
        raise ValueError("--m is required for this culture")
    config = GenConfig(args.n, m, Culture(args.culture), args.seed, args.concentration, args.filter_non_ef)
    inst = next(iter(generate_batch(config, 1, budget=args.budget)))
    io.write_instance(inst, args.output)
    return EXIT_OK


def parse_range(text: str) -> list[int]:
    """'3..6' -> [3, 4, 5, 6]; '3,5' -> [3, 5]; '4' -> [4]."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",")]


def parse_m(text: str, n: int) -> int:
    """Item count: a number, or 'an+b' in n such as 'n+2' or '2n'."""
    expr = text.replace(" ", "").lower()
    if expr.isdigit():
        return int(expr)
    match = re.fullmatch(r"(\d*)n([+-]\d+)?", expr)
    if not match:
        raise ValueError(f"bad item-count expression {text!r}")
    return int(match.group(1) or 1) * n + int(match.group(2) or 0)


def cmd_experiment(args) -> int:
    rows, outcomes = [], []
    for n in parse_range(args.n_range):
        m = n if args.culture == "hap" or args.hap else parse_m(args.m, n)
        gen = GenConfig(n, m, Culture(args.culture), args.seed, args.concentration, args.filter_non_ef)
        config = ExperimentConfig(gen, args.count, args.budget, args.timeout, args.hap)
        outs = run_experiment(config, workers=args.workers)
        outcomes.extend(outs)
        row = summarize(outs)
        rows.append(row)
        print(",".join(map(str, row.as_list())), file=sys.stderr)
    write_report(rows, args.output)
    write_k_over_n(outcomes, kn_path(args.output))
    return EXIT_OK if all(o.optimal for o in outcomes) else EXIT_BUDGET


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="approval-envy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimal K for an instance")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds")
    s.add_argument("--method", choices=["search", "highs", "external"], default="search")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("hap", help="house allocation: one item per agent")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_hap)

    s = sub.add_parser("check", help="level and envy graph of an allocation")
    s.add_argument("file")
    s.add_argument("--alloc", required=True)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("emit-lp", help="write the MIP in LP format")
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_emit_lp)

    s = sub.add_parser("ef-from-2app", help="swap a (2-app envy)-free allocation to EF")
    s.add_argument("file")
    s.add_argument("--alloc", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_ef_from_2app)

    for name, func in (("gen", cmd_gen), ("experiment", cmd_experiment)):
        s = sub.add_parser(name)
        s.add_argument("--culture", choices=[c.value for c in Culture], default="uniform")
        s.add_argument("--concentration", type=_concentration, default=0.0)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--filter-non-ef", action="store_true", help="keep only instances without EF allocations")
        s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        s.add_argument("-o", "--output", required=True)
        s.set_defaults(func=func)
        if name == "gen":
            s.add_argument("--n", type=int, required=True)
            s.add_argument("--m", type=int)
        else:
            s.add_argument("--n-range", required=True, help="e.g. 3..6")
            s.add_argument("--m", default="n+2", help="number or expression in n, e.g. 2n")
            s.add_argument("--count", type=int, default=60)
            s.add_argument("--timeout", type=float, default=None, help="per-instance seconds")
            s.add_argument("--hap", action="store_true", help="solve as house allocation (m = n)")
            s.add_argument("--workers", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.FormatError, ValueError, IndexError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
