import json
import subprocess
import sys

import pytest

from geo3 import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_bcv_hyperbolic(capsys):
    code, out, _ = run(capsys, "check", "--map", "bcv.projection", "--m", "-1", "--l", "1", "--points", "200", "--seed", "7")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1
    assert rep["kn"]["mean"] == pytest.approx(-4, abs=1e-12)
    assert rep["verdict"]["harmonic"] is True
    assert rep["residuals"]["rc"]["max"] <= 1e-7
    assert rep["map"]["classification"] == "(f)"


def test_check_nil_meets_expectation(capsys):
    code, out, _ = run(capsys, "check", "--map", "nil.example23", "--points", "200")
    assert code == 0
    assert json.loads(out)["verdict"]["harmonic"] is False


def test_unattainable_tolerance_is_a_violation(capsys):
    code, _, err = run(capsys, "check", "--map", "bcv.projection", "--m", "-1", "--l", "1", "--tol-harmonic", "1e-20")
    assert code == 1
    assert "violated" in err


def test_bcv_sweep_over_fifteen_cells(capsys):
    code, out, _ = run(capsys, "sweep", "--map", "bcv.projection", "--m=-1,-0.25,0,0.25,1", "--l", "0,1,2", "--points", "100")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["cells"]) == 15
    for cell in rep["cells"]:
        assert cell["harmonic"] and cell["kn_mean"] == pytest.approx(4 * cell["params"]["m"], abs=1e-7)
    assert {c["classification"] for c in rep["cells"]} == {f"({k})" for k in "abcdefg"}


def test_hopf_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--map", "berger.hopf", "--eps", "0.3,0.7,1,1.5", "--points", "100")
    assert code == 0
    assert all(c["kn_mean"] == pytest.approx(4) for c in json.loads(out)["cells"])


def test_empty_range_is_a_usage_error(capsys):
    assert run(capsys, "sweep", "--map", "bcv.projection", "--m", "", "--l", "1")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--map", "nope"],
        ["tables", "--space", "sol"],
        ["check", "--map", "nil.example23", "--points", "0"],
        ["check", "--map", "nil.example23", "--tol-identity", "-1"],
        ["check", "--map", "nil.example23", "--m", "1"],
        ["check", "--map", "berger.hopf", "--eps", "0"],
        ["check", "--map", "bcv.projection", "--m", "1,2"],
        ["frobnicate"],
        ["check"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_unwritable_output_path(capsys, tmp_path):
    assert run(capsys, "check", "--map", "nil.example23", "--out", str(tmp_path / "missing" / "r.json"))[0] == 2


def test_json_schema_and_round_trip(capsys, tmp_path):
    path = tmp_path / "r.json"
    assert run(capsys, "check", "--map", "cyl.remark21a", "--points", "50", "--out", str(path))[0] == 0
    text = path.read_text()
    rep = json.loads(text)
    for dotted in ("verdict.harmonic", "kn.mean", "residuals.rc.max"):
        node = rep
        for part in dotted.split("."):
            node = node[part]
    assert cli.to_json(rep) + "\n" == text


def test_floats_have_seventeen_significant_digits():
    assert cli.to_json({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert json.loads(cli.to_json({"x": 1 / 3}))["x"] == 1 / 3


def test_csv_has_one_row_per_point(capsys):
    code, out, _ = run(capsys, "check", "--map", "nil.example23", "--points", "25", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 26
    header = lines[0].split(",")
    assert {"rc1", "rc7", "rc0_8", "kappa1", "sigma"} <= set(header)


def test_reports_are_byte_identical_and_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("GEO3_SEED", "9")
    a = run(capsys, "check", "--map", "ex22.h2xr", "--points", "40")[1]
    b = run(capsys, "check", "--map", "ex22.h2xr", "--points", "40", "--seed", "9")[1]
    assert a == b
    monkeypatch.setenv("GEO3_SEED", "x")
    assert run(capsys, "check", "--map", "ex22.h2xr")[0] == 2


def test_timing_is_opt_in(capsys):
    assert "wall_time_s" not in run(capsys, "check", "--map", "ex21.product", "--points", "10")[1]
    assert "wall_time_s" in run(capsys, "check", "--map", "ex21.product", "--points", "10", "--timing")[1]


def test_tables_command(capsys):
    code, out, _ = run(capsys, "tables", "--space", "berger", "--eps", "0.7", "--points", "100")
    assert code == 0
    rep = json.loads(out)
    assert max(rep["residuals"]["tables"].values()) <= 1e-9


def test_list_command(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["catalog"]) == 13 and "berger.hopf" in rep["maps"]


def test_scaled_map_is_reported_as_not_a_submersion(capsys):
    code, out, _ = run(capsys, "check", "--map", "flat.scaled", "--points", "10")
    assert code == 0
    assert json.loads(out)["submersion"]["passed"] is False


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "geo3.cli", "check", "--map", "nil.example23", "--points", "20"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema"] == 1
