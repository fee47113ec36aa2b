"""Mixed-integer encoding of the minimum-K problem, LP-format export/import,
and a feasibility checker for (allocation, K) pairs.

Variables (1-based in names):
    z_i_j    agent i receives item j
    e_k_i_h  by agent k's utilities, agent i's bundle is strictly worse than h's
    x_i_h    switch for the "i does not envy h, or few approve" disjunction
    K        the approval threshold being minimized
"""
from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Allocation, NormalizedInstance

SOLVER_ENV = "APPROVAL_ENVY_LP_SOLVER"
ROUND_TOL = 1e-6


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[int, str], ...]
    sense: str  # "=", "<=" or ">="
    rhs: int

    @property
    def family(self) -> int:
        return int(self.name[1])

    def lhs(self, values: dict[str, int]) -> int:
        return sum(c * values[v] for c, v in self.terms)

    def holds(self, values: dict[str, int]) -> bool:
        lhs = self.lhs(values)
        if self.sense == "=":
            return lhs == self.rhs
        if self.sense == "<=":
            return lhs <= self.rhs
        return lhs >= self.rhs


def z(i: int, j: int) -> str:
    return f"z_{i + 1}_{j + 1}"


def e(k: int, i: int, h: int) -> str:
    return f"e_{k + 1}_{i + 1}_{h + 1}"


def x(i: int, h: int) -> str:
    return f"x_{i + 1}_{h + 1}"


def _terms(coefs: dict[str, int]) -> tuple[tuple[int, str], ...]:
    return tuple((c, v) for v, c in coefs.items() if c != 0)


def _bundle_diff(u_row, i: int, h: int, m: int, sign: int = 1) -> dict[str, int]:
    """Coefficients of sign * sum_j u(k, j) (z_h^j - z_i^j), merged by variable."""
    coefs: dict[str, int] = {}
    for j in range(m):
        if u_row[j]:
            coefs[z(h, j)] = coefs.get(z(h, j), 0) + sign * u_row[j]
            coefs[z(i, j)] = coefs.get(z(i, j), 0) - sign * u_row[j]
    return coefs


@dataclass(frozen=True)
class MipModel:
    n: int
    m: int
    big_m: int
    int_utilities: tuple[tuple[int, ...], ...]
    constraints: tuple[LinearConstraint, ...]

    @property
    def binaries(self) -> list[str]:
        n, m = self.n, self.m
        return (
            [z(i, j) for i in range(n) for j in range(m)]
            + [e(k, i, h) for k in range(n) for i in range(n) for h in range(n)]
            + [x(i, h) for i in range(n) for h in range(n)]
        )

    def family(self, f: int) -> list[LinearConstraint]:
        return [c for c in self.constraints if c.family == f]


def build_model(norm: NormalizedInstance) -> MipModel:
    U = [tuple(int(v) for v in row) for row in norm.int_utilities]
    n, m = norm.n, norm.m
    big_m = 1 + max((sum(row) for row in U), default=0)
    cons: list[LinearConstraint] = []
    for j in range(m):
        cons.append(LinearConstraint(f"c1_{j + 1}", tuple((1, z(i, j)) for i in range(n)), "=", 1))
    # M e >= diff   <=>   M e - diff >= 0
    for k in range(n):
        for i in range(n):
            for h in range(n):
                coefs = {e(k, i, h): big_m, **_bundle_diff(U[k], i, h, m, sign=-1)}
                cons.append(LinearConstraint(f"c2_{k + 1}_{i + 1}_{h + 1}", _terms(coefs), ">=", 0))
    # diff >= 1 - M (1 - e)   <=>   diff - M e >= 1 - M
    for k in range(n):
        for i in range(n):
            for h in range(n):
                coefs = {**_bundle_diff(U[k], i, h, m), e(k, i, h): -big_m}
                cons.append(
                    LinearConstraint(f"c3_{k + 1}_{i + 1}_{h + 1}", _terms(coefs), ">=", 1 - big_m)
                )
    for i in range(n):
        for h in range(n):
            cons.append(
                LinearConstraint(f"c4_{i + 1}_{h + 1}", ((1, e(i, i, h)), (-1, x(i, h))), "<=", 0)
            )
    # sum_k e <= K - 1 + n (1 - x)   <=>   sum_k e - K + n x <= n - 1
    for i in range(n):
        for h in range(n):
            terms = tuple((1, e(k, i, h)) for k in range(n)) + ((-1, "K"), (n, x(i, h)))
            cons.append(LinearConstraint(f"c5_{i + 1}_{h + 1}", terms, "<=", n - 1))
    return MipModel(n, m, big_m, tuple(U), tuple(cons))


def assignment_values(model: MipModel, alloc: Allocation, K: int) -> dict[str, int]:
    """Variable values induced by an allocation: e from the strict bundle
    comparisons, x = e_iih."""
    n, m = model.n, model.m
    values: dict[str, int] = {"K": K}
    for i in range(n):
        for j in range(m):
            values[z(i, j)] = int(alloc.owner[j] == i)
    V = np.zeros((n, n), dtype=object)
    for j, o in enumerate(alloc.owner):
        for k in range(n):
            V[k, o] += model.int_utilities[k][j]
    for k in range(n):
        for i in range(n):
            for h in range(n):
                values[e(k, i, h)] = int(V[k, h] - V[k, i] >= 1)
    for i in range(n):
        for h in range(n):
            values[x(i, h)] = values[e(i, i, h)]
    return values


def violations(model: MipModel, values: dict[str, int]) -> list[str]:
    """Names of violated constraints, plus bound/integrality problems."""
    bad = [c.name for c in model.constraints if not c.holds(values)]
    if not 1 <= values["K"] <= model.n:
        bad.append("bound_K")
    bad.extend(f"binary_{v}" for v in model.binaries if values[v] not in (0, 1))
    return bad


def check_assignment(model: MipModel, alloc: Allocation, K: int) -> list[str]:
    """Empty list iff (alloc, K) extends to a feasible point of the model."""
    if not 1 <= K <= model.n:
        raise ValueError(f"K = {K} outside [1, {model.n}]")
    if len(alloc.owner) != model.m or any(not 0 <= o < model.n for o in alloc.owner):
        raise ValueError("allocation does not match the model dimensions")
    return violations(model, assignment_values(model, alloc, K))


# ---------------------------------------------------------------- LP format

_PER_LINE = 8


def _fmt_expr(terms) -> list[str]:
    parts = []
    for idx, (c, v) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else f"{abs(c)} "
        if idx == 0:
            parts.append(f"{'- ' if c < 0 else ''}{mag}{v}")
        else:
            parts.append(f"{sign} {mag}{v}")
    return [" ".join(parts[s:s + _PER_LINE]) for s in range(0, len(parts), _PER_LINE)]


def export_lp(model: MipModel) -> str:
    out = [
        f"\\ minimum approval-envy threshold: n={model.n} m={model.m} M={model.big_m}",
        "Minimize",
        " obj: K",
        "Subject To",
    ]
    for c in model.constraints:
        chunks = _fmt_expr(c.terms)
        chunks[-1] += f" {c.sense} {c.rhs}"
        out.append(f" {c.name}: {chunks[0]}")
        out.extend(f"   {chunk}" for chunk in chunks[1:])
    out.append("Bounds")
    out.append(f" 1 <= K <= {model.n}")
    out.append("Binaries")
    names = model.binaries
    for s in range(0, len(names), 10):
        out.append(" " + " ".join(names[s:s + 10]))
    out.append("Generals")
    out.append(" K")
    out.append("End")
    return "\n".join(out) + "\n"


class LPParseError(ValueError):
    pass


_SECTION = re.compile(
    r"^(minimize|minimise|min|maximize|maximise|max|subject to|such that|st|s\.t\.|"
    r"bounds|binaries|binary|bin|generals|general|gen|end)$",
    re.IGNORECASE,
)
_VAR = re.compile(r"^(z|e|x)_(\d+(?:_\d+)+)$|^K$")


def _parse_expr(tokens: list[str], where: str) -> tuple[tuple[int, str], ...]:
    terms = []
    sign, coef = 1, None
    for tok in tokens:
        if tok in "+-":
            sign = -1 if tok == "-" else 1
        elif re.fullmatch(r"\d+", tok):
            coef = int(tok)
        elif _VAR.match(tok):
            terms.append((sign * (1 if coef is None else coef), tok))
            sign, coef = 1, None
        else:
            raise LPParseError(f"{where}: unexpected token {tok!r}")
    return tuple(terms)


def parse_lp(text: str) -> MipModel:
    """Read back a model written by :func:`export_lp`.

    Utilities are recovered from the coefficients of the family-2
    constraints, so the result compares equal to the exported model.
    """
    sections: dict[str, list[str]] = defaultdict(list)
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if _SECTION.match(key):
            current = {"minimise": "minimize", "min": "minimize", "st": "subject to",
                       "s.t.": "subject to", "such that": "subject to", "binary": "binaries",
                       "bin": "binaries", "general": "generals", "gen": "generals"}.get(key, key)
            if current in ("maximize", "maximise", "max"):
                raise LPParseError(f"line {lineno}: the model minimizes K")
            continue
        if current is None:
            raise LPParseError(f"line {lineno}: content before any section")
        sections[current].append(line)

    cons_tokens: list[list[str]] = []
    for line in sections["subject to"]:
        toks = line.replace("<=", " <= ").replace(">=", " >= ").split()
        if toks and toks[0].endswith(":"):
            cons_tokens.append(toks)
        elif cons_tokens:
            cons_tokens[-1].extend(toks)
        else:
            raise LPParseError(f"constraint without a name: {line!r}")
    constraints = []
    for toks in cons_tokens:
        name = toks[0][:-1]
        body = toks[1:]
        senses = [i for i, t in enumerate(body) if t in ("=", "<=", ">=", "=<", "=>")]
        if len(senses) != 1:
            raise LPParseError(f"{name}: expected exactly one relation")
        s = senses[0]
        sense = {"=<": "<=", "=>": ">="}.get(body[s], body[s])
        try:
            rhs = int(" ".join(body[s + 1:]).replace(" ", ""))
        except ValueError:
            raise LPParseError(f"{name}: right-hand side must be an integer") from None
        constraints.append(LinearConstraint(name, _parse_expr(body[:s], name), sense, rhs))

    binaries = " ".join(sections["binaries"]).split()
    zs = [tuple(int(p) for p in v.split("_")[1:]) for v in binaries if v.startswith("z_")]
    es = [v for v in binaries if v.startswith("e_")]
    n = round(len(es) ** (1 / 3)) if es else 0
    if n < 1 or n**3 != len(es):
        raise LPParseError("cannot infer the number of agents from the e variables")
    m = len(zs) // n
    if len(zs) != n * m:
        raise LPParseError("z variables do not form an n x m grid")
    by_name = {c.name: c for c in constraints}
    U = [[0] * m for _ in range(n)]
    big_m = None
    for k in range(n):
        if n > 1:
            coefs = dict((v, c) for c, v in by_name[f"c2_{k + 1}_1_2"].terms)
            for j in range(m):
                U[k][j] = -coefs.get(z(1, j), 0)
        c2 = dict((v, c) for c, v in by_name[f"c2_{k + 1}_1_1"].terms)
        big_m = c2[e(k, 0, 0)]
    # with one agent the utilities never enter the constraints and stay zero
    return MipModel(n, m, big_m, tuple(tuple(r) for r in U), tuple(constraints))


def parse_solution(text: str, tol: float = ROUND_TOL) -> dict[str, int]:
    """Parse whitespace-separated ``name value`` lines, rounding to integers."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if len(parts) != 2 or not _VAR.match(parts[0]):
            continue
        val = float(parts[1])
        rounded = round(val)
        if abs(val - rounded) > tol:
            raise ValueError(f"line {lineno}: {parts[0]} = {val} is not integral")
        values[parts[0]] = int(rounded)
    return values


def decode_solution(model: MipModel, values: dict[str, int]) -> tuple[Allocation, int]:
    owner = []
    for j in range(model.m):
        holders = [i for i in range(model.n) if values.get(z(i, j), 0) == 1]
        if len(holders) != 1:
            raise ValueError(f"item {j + 1} held by {len(holders)} agents in the solution")
        owner.append(holders[0])
    return Allocation(tuple(owner)), values["K"]


def solution_violations(model: MipModel, values: dict[str, int]) -> list[str]:
    """Check a solver's point; missing variables count as 0."""
    full = {v: values.get(v, 0) for v in model.binaries}
    full["K"] = values.get("K", 0)
    return violations(model, full)


def run_external_solver(
    model: MipModel, command: str | None = None, workdir: str | os.PathLike | None = None
) -> tuple[Allocation, int] | None:
    """Solve with an external LP-format solver.

    ``command`` (or the environment variable named by ``SOLVER_ENV``) is a
    template with ``{lp}`` and ``{sol}`` placeholders; the solver must write
    ``name value`` lines to ``{sol}``. An empty solution file means infeasible.
    """
    command = command or os.environ.get(SOLVER_ENV)
    if not command:
        raise RuntimeError(f"no solver configured; set {SOLVER_ENV} or export the LP only")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp, sol = Path(tmp, "model.lp"), Path(tmp, "model.sol")
        lp.write_text(export_lp(model))
        args = [a.format(lp=lp, sol=sol) for a in shlex.split(command)]
        subprocess.run(args, check=True, capture_output=True)
        text = sol.read_text() if sol.exists() else ""
    values = parse_solution(text)
    if not values:
        return None
    bad = solution_violations(model, values)
    if bad:
        raise ValueError(f"solver returned an infeasible point: {bad[:5]}")
    return decode_solution(model, values)


def solve_highs(model: MipModel, time_limit: float | None = None):
    """Solve the model with scipy's HiGHS MILP interface.

    Returns ``(allocation, K, optimal)`` or None when the model is infeasible
    (a unanimous envy instance).
    """
    from scipy.optimize import Bounds, LinearConstraint as SciConstraint, milp
    from scipy.sparse import lil_matrix

    names = model.binaries + ["K"]
    col = {v: i for i, v in enumerate(names)}
    A = lil_matrix((len(model.constraints), len(names)))
    lo = np.empty(len(model.constraints))
    hi = np.empty(len(model.constraints))
    for r, c in enumerate(model.constraints):
        for coef, v in c.terms:
            A[r, col[v]] = coef
        lo[r] = c.rhs if c.sense in ("=", ">=") else -np.inf
        hi[r] = c.rhs if c.sense in ("=", "<=") else np.inf
    cost = np.zeros(len(names))
    cost[col["K"]] = 1
    ub = np.ones(len(names))
    ub[col["K"]] = model.n
    lb = np.zeros(len(names))
    lb[col["K"]] = 1
    options = {} if time_limit is None else {"time_limit": time_limit}
    res = milp(
        cost,
        constraints=SciConstraint(A.tocsr(), lo, hi),
        integrality=np.ones(len(names)),
        bounds=Bounds(lb, ub),
        options=options,
    )
    if res.x is None:
        if res.status == 2:
            return None
        raise TimeoutError(res.message)
    values = {v: int(round(res.x[i])) for v, i in col.items()}
    alloc, K = decode_solution(model, values)
    return alloc, K, res.status == 0
