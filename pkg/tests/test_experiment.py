import csv
import math

from approval_envy.experiment import (
    ExperimentConfig, Outcome, REPORT_HEADER, kn_path, run_experiment, summarize, write_report,
)
from approval_envy.gen import Culture, GenConfig


def _o(k, optimal=True, elapsed=1.0, n=4):
    return Outcome(n, 6, "uniform", k, optimal, elapsed)


def test_summary_arithmetic():
    outs = [_o(4), _o(3), _o(None), _o(2, elapsed=3.0), _o(3, optimal=False, elapsed=99.0)]
    row = summarize(outs)
    assert row.count == 5
    assert row.pct_opt == 80.0 and row.pct_uei == 20.0
    # levels <= ceil(4/2) = 2 are SM-app-EF
    assert row.pct_smaef == 20.0
    assert math.isclose(row.mean_k_over_n, (1.0 + 0.75 + 0.5) / 3)
    assert math.isclose(row.mean_time_s, 1.5)


def test_summary_all_unanimous_is_nan():
    row = summarize([_o(None), _o(None)])
    assert math.isnan(row.mean_k_over_n) and row.as_list()[7] == "NaN"


def test_report_sorted(tmp_path):
    rows = [summarize([_o(4, n=5)]), summarize([_o(3, n=3)])]
    path = tmp_path / "r.csv"
    write_report(rows, path)
    lines = list(csv.reader(path.open()))
    assert lines[0] == REPORT_HEADER and [l[0] for l in lines[1:]] == ["3", "5"]
    assert kn_path(path).name == "r_kn.csv"


def test_run_is_deterministic_and_filters():
    config = ExperimentConfig(GenConfig(3, 4, seed=3, filter_non_ef=True), count=6)
    a = run_experiment(config)
    b = run_experiment(config, workers=2)
    assert [o.k for o in a] == [o.k for o in b]
    assert len(a) == 6 and all(o.k != 1 for o in a)


def test_hap_label_and_solver():
    config = ExperimentConfig(GenConfig(5, 5, Culture.CORRELATED, seed=1, concentration=10), count=4, hap=True)
    assert config.label == "hap-correlated:10" and config.uses_hap
    outs = run_experiment(config)
    assert len(outs) == 4 and all(o.optimal for o in outs)
