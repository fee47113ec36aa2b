"""JSON instance and allocation files.

Instance document::

    {"agents": ["a1", "a2"], "items": ["o1", "o2", "o3"],
     "utilities": [[1, "7/2", 0], [2, 2, "1/3"]]}

Utilities are integers or "p/q" strings; non-integral values are always
written as strings so the round trip is exact. An allocation file is a JSON
list of owner indices, one per item.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import Allocation, Instance, to_fraction, validate_allocation

INSTANCE_KEYS = ("agents", "items", "utilities")


class FormatError(ValueError):
    pass


def _encode(u: Fraction):
    return u.numerator if u.denominator == 1 else f"{u.numerator}/{u.denominator}"


def instance_to_dict(inst: Instance) -> dict:
    return {
        "agents": list(inst.agent_names),
        "items": list(inst.item_names),
        "utilities": [[_encode(u) for u in row] for row in inst.utilities],
    }


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise FormatError("instance document must be a JSON object")
    for key in doc:
        if key not in INSTANCE_KEYS:
            raise FormatError(f"unknown key {key!r}")
    if "utilities" not in doc:
        raise FormatError("missing key 'utilities'")
    rows = doc["utilities"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise FormatError("'utilities' must be a non-empty list of rows")
    parsed = []
    for i, row in enumerate(rows):
        out = []
        for j, value in enumerate(row):
            if isinstance(value, float):
                raise FormatError(f"utilities[{i}][{j}]: floats are not exact, use 'p/q'")
            try:
                out.append(to_fraction(value))
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise FormatError(f"utilities[{i}][{j}]: {exc}") from None
        parsed.append(out)
    agents = doc.get("agents", [])
    items = doc.get("items", [])
    if agents and len(agents) != len(parsed):
        raise FormatError(f"{len(agents)} agents declared but {len(parsed)} utility rows")
    widths = {len(r) for r in parsed}
    if len(widths) != 1:
        raise FormatError(f"utility rows have different lengths {sorted(widths)}")
    if items and len(items) != widths.pop():
        raise FormatError(f"{len(items)} items declared but rows have {len(parsed[0])} entries")
    try:
        return Instance.from_rows(parsed, agents, items)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def read_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def read_allocation(path, inst: Instance | None = None) -> Allocation:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, list) or not all(isinstance(o, int) and not isinstance(o, bool) for o in doc):
        raise FormatError("allocation must be a JSON list of integer owner indices")
    alloc = Allocation(tuple(doc))
    if inst is not None:
        problems = validate_allocation(inst, alloc)
        if problems:
            raise FormatError("; ".join(problems))
    return alloc


def write_allocation(alloc: Allocation, path) -> None:
    Path(path).write_text(json.dumps(list(alloc.owner)) + "\n")
