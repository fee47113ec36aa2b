import csv
import json

import pytest

from approval_envy.cli import main, parse_m, parse_range
from approval_envy.core import Instance
from approval_envy.experiment import REPORT_HEADER
from approval_envy.io import read_allocation, read_instance, write_allocation, write_instance


@pytest.fixture
def files(tmp_path, example1, squared):
    inst, alloc = tmp_path / "ex1.json", tmp_path / "alloc.json"
    write_instance(example1, inst)
    write_allocation(squared, alloc)
    return inst, alloc


def test_solve(files, capsys):
    assert main(["solve", str(files[0])]) == 0
    out = capsys.readouterr().out
    assert out.startswith("min K = 3") and "a1: {" in out
    assert main(["solve", str(files[0]), "--json"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["k"] == 3 and record["optimal"] and len(record["witness"]) == 6


def test_solve_highs(files, capsys):
    assert main(["solve", str(files[0]), "--method", "highs"]) == 0
    assert capsys.readouterr().out.startswith("min K = 3")


def test_solve_unanimous(tmp_path, capsys):
    path = tmp_path / "u.json"
    write_instance(Instance.from_rows([[9, 1, 1], [9, 2, 1]]), path)
    assert main(["solve", str(path)]) == 0
    assert "unanimous envy instance" in capsys.readouterr().out


def test_budget_exit_code(tmp_path):
    from approval_envy.gen import gen_uniform

    path = tmp_path / "big.json"
    write_instance(gen_uniform(7, 14, 4), path)
    assert main(["solve", str(path), "--timeout", "0.01"]) == 3


def test_invalid_input_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"utilities": [[1, 0.5]]}')
    assert main(["solve", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.json")]) == 2


def test_hap(tmp_path, capsys):
    path = tmp_path / "h.json"
    write_instance(Instance.from_rows([[5, 4, 3, 2, 1]] * 5), path)
    assert main(["hap", str(path)]) == 0
    assert "unanimous envy instance" in capsys.readouterr().out
    write_instance(Instance.from_rows([[3, 2, 1], [1, 3, 2], [2, 1, 3]]), path)
    assert main(["hap", str(path), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["k"] == 1


def test_check(files, capsys):
    assert main(["check", str(files[0]), "--alloc", str(files[1]), "--k", "2", "--json"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["level"] == "Level(3)" and not record["k_app_envy_free"]
    assert "c5_2_3" in record["mip_violations"]
    assert {(e["envier"], e["envied"], e["weight"]) for e in record["envy_graph"]} == {(1, 2, 2), (2, 0, 2)}
    assert main(["check", str(files[0]), "--alloc", str(files[1])]) == 0
    assert "level: Level(3)" in capsys.readouterr().out


def test_emit_lp(files, tmp_path):
    out = tmp_path / "m.lp"
    assert main(["emit-lp", str(files[0]), "-o", str(out)]) == 0
    assert "Subject To" in out.read_text()


def test_ef_from_2app(tmp_path, capsys):
    inst = Instance.from_rows([[1, 5], [5, 1]])
    ipath, apath, opath = tmp_path / "i.json", tmp_path / "a.json", tmp_path / "o.json"
    write_instance(inst, ipath)
    apath.write_text("[0, 1]")
    assert main(["ef-from-2app", str(ipath), "--alloc", str(apath), "-o", str(opath)]) == 0
    assert read_allocation(opath) .owner == (1, 0)
    assert "1 swaps" in capsys.readouterr().out


def test_gen(tmp_path):
    out = tmp_path / "g.json"
    assert main(["gen", "--n", "3", "--m", "5", "--seed", "4", "-o", str(out)]) == 0
    assert read_instance(out).m == 5
    assert main(["gen", "--culture", "hap", "--n", "4", "-o", str(out)]) == 0
    assert read_instance(out).m == 4
    assert main(["gen", "--n", "3", "-o", str(out)]) == 2


def test_experiment(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["experiment", "--n-range", "3..4", "--count", "5", "--filter-non-ef", "-o", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == REPORT_HEADER
    assert [r[:2] for r in rows[1:]] == [["3", "5"], ["4", "6"]]
    assert all(r[6] == "0.0" for r in rows[1:])
    kn = list(csv.reader((tmp_path / "r_kn.csv").open()))
    assert len(kn) == 1 + 10


def test_parsers():
    assert parse_range("3..6") == [3, 4, 5, 6]
    assert parse_range("3,5") == [3, 5]
    assert [parse_m(t, 4) for t in ("7", "n+2", "2n-1", "2n")] == [7, 6, 7, 8]
    with pytest.raises(ValueError):
        parse_m("n*n", 3)
