import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from weilbench import cli, lattice, spans
from weilbench.ff import make_field

SMALL_RUNS = {
    "hecke-verify": {"q": "5", "t": "2", "lift": "2"},
    "hecke-traces": {"q": "5", "t": "2"},
    "zeta-conj4": {"q": "5", "t": "2", "points": "3", "n_max": "3"},
    "zeta-product": {"q": "3", "order": "6"},
    "dyn-cheb": {"q": "2", "n": "3"},
    "dyn-torus": {"poly": "1,-1,2", "n_max": "3"},
    "span-zm": {"q": "2", "model": "frobenius"},
    "span-ray": {"q": "2", "n_max": "4"},
    "span-radon": {"q": "3"},
    "span-prop1": {"q": "7", "samples": "2"},
    "span-algebra": {"kind": "additive", "q": "5"},
    "lattice-partition": {"lattice": "2,2,1"},
    "lattice-transfer-check": {"n_max": "2", "m_max": "2"},
    "lattice-reduce": {"n": "2", "lattice": "2"},
    "charsum-xn": {"q": "5", "x": "3"},
}


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "R.json"
    path.write_text(json.dumps({"entries": [[{"num": [0, 1]}, {"num": [1]}], [{"num": [-1]}, {"num": [1]}]]}))
    return str(path)


def test_catalog():
    names = {e["name"]: e for e in cli.list_experiments()}
    assert "hecke-verify" in names and "lattice-transfer-check" in names
    assert "Hecke" in names["hecke-verify"]["topic"]
    assert "Transfer" in names["lattice-transfer-check"]["topic"]
    assert set(names) == set(SMALL_RUNS) | {"charsum-xprime"}


@pytest.mark.parametrize("name", sorted(SMALL_RUNS))
def test_every_experiment_runs(name):
    report, code = cli.run(name, SMALL_RUNS[name], seed=1)
    assert code == 0, report
    assert report["status"] in ("pass", "report-only")
    json.dumps(report)


def test_xprime_is_report_only(matrix_file):
    report, code = cli.run("charsum-xprime", {"q": "5", "matrix_file": matrix_file, "x": "3"})
    assert code == 0 and report["status"] == "report-only"
    assert report["results"]["size"] == 5 - 2
    assert "comparison" in report["results"]


def test_hecke_verify_report():
    report, _ = cli.run("hecke-verify", {"q": "5", "t": "2"})
    names = [c["name"] for c in report["results"]["checks"]]
    assert names[:4] == ["commutativity", "sum_identity", "klein_group", "closure"]


def test_literal_formula_fails_with_witness():
    report, code = cli.run("hecke-verify", {"q": "5", "t": "2", "literal": "true"})
    assert code == 1 and report["status"] == "fail"
    failing = [c for c in report["results"]["checks"] if c["status"] == "fail"]
    assert failing and all("witness" in c for c in failing)


def test_conj4_zero_sequence():
    report, _ = cli.run("zeta-conj4", {"q": "5", "t": "2", "points": "3", "n_max": "3"})
    assert report["results"]["sequence"] == ["0", "0", "0"]


def test_charsum_literal_is_report_only():
    report, code = cli.run("charsum-xn", {"q": "7", "x": "3", "literal": "1"})
    assert code == 0 and report["status"] == "report-only"
    assert not report["results"]["checks"]["real"]


def test_unknown_and_bad_params():
    with pytest.raises(cli.UsageError):
        cli.run("frobnicate", {})
    with pytest.raises(cli.UsageError):
        cli.run("span-radon", {"q": "3", "colour": "red"})
    with pytest.raises(cli.UsageError):
        cli.run("span-radon", {})
    with pytest.raises(cli.UsageError):
        cli.run("span-radon", {"q": "three"})


def test_budget_exceeded_is_structured():
    report, code = cli.run("hecke-verify", {"q": "401", "t": "2"})
    assert code == 1 and report["status"] == "fail"
    assert report["error"]["type"] == "budget" and report["error"]["size"] == 401


def test_determinism_excluding_timing():
    a, _ = cli.run("span-zm", {"q": "3", "model": "random"}, seed=7)
    b, _ = cli.run("span-zm", {"q": "3", "model": "random"}, seed=7)
    da, db = cli.deterministic_view(a), cli.deterministic_view(b)
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)
    assert "timing" in a and "timing" not in da


def test_main_exit_codes(capsys):
    assert cli.main(["run", "frobnicate"]) == 2
    assert cli.main(["run", "span-radon", "q=3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["results"]["holds"]
    assert cli.main(["span", "radon", "--q", "4"]) == 0
    assert cli.main(["run", "span-radon", "q"]) == 2
    assert cli.main(["bogus"]) == 2


def test_main_list(capsys):
    assert cli.main(["list"]) == 0
    cat = json.loads(capsys.readouterr().out)
    assert len(cat["experiments"]) == len(cli.REGISTRY)


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "zeta-product", "params": {"q": 2, "order": 4}}))
    out = tmp_path / "report.json"
    assert cli.main(["run", "zeta-product", "--config", str(cfg), "order=5", "--out", str(out)]) == 0
    capsys.readouterr()
    report = json.loads(out.read_text())
    assert report["params"] == {"q": 2, "order": 5}


def test_csv_export(tmp_path, capsys):
    path = tmp_path / "z.csv"
    assert cli.main(["span", "zm", "--q", "2", "--n-max", "2", "--m-max", "3", "--csv", str(path)]) == 0
    capsys.readouterr()
    rows = list(csv.reader(path.open()))
    assert rows == [["n", "m=1", "m=2", "m=3"], ["1", "2", "2", "2"], ["2", "2", "4", "2"]]
    assert cli.main(["span", "radon", "--q", "2", "--csv", str(path)]) == 2


def test_model_files(tmp_path):
    F = make_field(3)
    X = spans.ConstructibleSet.affine(F, 1)
    (x,) = X.variables()
    span_file = tmp_path / "sq.json"
    span_file.write_text(json.dumps(spans.correspondence_to_json(spans.graph(X, X, (x**2,)))))
    report, code = cli.run("span-zm", {"file": str(span_file), "n_max": "2", "m_max": "2"})
    assert code == 0 and report["results"]["oracle_agrees"]
    B = lattice.random_boltzmann(np.random.default_rng(0), [2, 2])
    model = tmp_path / "B.json"
    model.write_text(json.dumps(B.to_json()))
    report, code = cli.run("lattice-partition", {"model": str(model), "lattice": "2,3,1"})
    assert code == 0 and report["results"]["graph"] == report["results"]["transfer"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weilbench", "span", "radon", "--q", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
