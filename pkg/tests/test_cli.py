import csv
import json

import pytest

from hypermatch import __version__
from hypermatch.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_replay_figure(capsys, tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run_cli(capsys, "replay", "--family", "complete:q=4,r=3", "--policy", "fcfm",
                           "--arrivals", "2,3,4,1,1,2,3,3,4,2,2", "--trace", str(trace))
    assert code == 0
    rep = json.loads(out)
    assert [(m["step"], m["hyperedge"]) for m in rep["matches"]] == [(3, [2, 3, 4]), (7, [1, 2, 3]), (9, [1, 3, 4])]
    assert rep["final_buffer"] == [2, 2]
    assert len(trace.read_text().splitlines()) == 11


def test_analyze_fano(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--family", "fano", "--mu", "uniform")
    rep = json.loads(out)
    assert code == 0 and rep["triggers"] == []
    n2 = next(c for c in rep["conditions"] if c["condition"] == "N2")
    assert n2["member"]
    assert rep["header"]["version"] == __version__ and rep["header"]["numeric_mode"] == "exact"


def test_analyze_complete_minus_example(capsys, tmp_path):
    out_csv = tmp_path / "v.csv"
    code, out, _ = run_cli(capsys, "analyze", "--family", "complete-minus:q=5,r=3,J=[[1,2,3]]",
                           "--mu", "uniform", "--csv", str(out_csv))
    rep = json.loads(out)
    assert code == 0 and rep["triggers"] == []
    verdicts = {c["condition"]: c["member"] for c in rep["conditions"]}
    assert verdicts["S1"] and verdicts["A"] and verdicts["S"]
    assert rep["regions"]["drift_coefficients"]["lambda_i"]["4"] == "-488/625"
    rows = list(csv.DictReader(out_csv.open()))
    assert [r["condition"] for r in rows][:3] == ["N1_plus", "N1_minus", "N1_minusminus"]


def test_reports_are_byte_identical(capsys):
    argv = ["analyze", "--family", "cycle:q=6,r=3,l=2", "--mu", "1,2,3,4,5,6"]
    _, a, _ = run_cli(capsys, *argv)
    _, b, _ = run_cli(capsys, *argv)
    assert a == b


def test_simulate_outputs(capsys, tmp_path):
    out_csv, out_json = tmp_path / "r.csv", tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "simulate", "--family", "complete:q=4,r=3", "--policy", "ml",
                         "--horizon", "5000", "--reps", "8", "--seed", "3",
                         "--out", str(out_csv), "--json", str(out_json))
    assert code == 0
    rep = json.loads(out_json.read_text())
    assert rep["header"]["seeds"]["base_seed"] == 3 and rep["stats"]["reps"] == 8
    assert len(out_csv.read_text().splitlines()) == 9


def test_oracle_drift_family(capsys):
    code, out, _ = run_cli(capsys, "oracle", "drift", "--graph-family", "complete-minus:q=5,r=3,J=[[1,2,3]]",
                           "--family", "x*e4")
    assert code == 0
    assert json.loads(out)["result"]["slopes"]["4"] == "-488/625"


def test_oracle_drift_state(capsys):
    code, out, _ = run_cli(capsys, "oracle", "drift", "--hypergraph", "complete:q=4,r=3", "--state", "3,2,0,0",
                           "--steps", "1")
    assert code == 0 and json.loads(out)["result"]["expected_delta_L"] == "-1"


def test_oracle_stationary(capsys):
    code, out, _ = run_cli(capsys, "oracle", "stationary", "--hypergraph", "complete:q=4,r=3", "--cap", "30")
    assert code == 0
    assert json.loads(out)["result"]["mean_total_count"] == pytest.approx(4.0, abs=1e-3)


def test_generate_and_file_input(capsys, tmp_path):
    path = tmp_path / "h.json"
    assert main(["generate", "--family", "fano", "--out", str(path)]) == 0
    code, out, _ = run_cli(capsys, "analyze", "--hypergraph", str(path), "--skip-oracle")
    assert code == 0 and json.loads(out)["hypergraph"]["q"] == 7


@pytest.mark.parametrize("argv", [
    ["analyze", "--family", "petersen"],
    ["analyze", "--family", "fano", "--mu", "1,2,3"],
    ["analyze", "--family", "fano", "--mu", "1,0,1,1,1,1,1"],
    ["analyze"],
    ["replay", "--family", "fano", "--arrivals", "1,9"],
    ["oracle", "drift", "--hypergraph", "fano"],
    ["oracle", "stationary", "--hypergraph", "fano", "--policy", "fcfm"],
])
def test_invalid_input_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2 and "invalid input" in err


def test_guard_exit_3(capsys):
    code, _, err = run_cli(capsys, "analyze", "--family", "cycle:q=21,r=3,l=2", "--skip-oracle")
    assert code == 3 and "guard" in err
