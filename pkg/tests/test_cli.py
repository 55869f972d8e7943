import json
import math
import subprocess
import sys

import pytest

from curvlab.cli import main
from curvlab.graphio import read_graph


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def tv(tmp_path, capsys):
    path = tmp_path / "tv.graph"
    assert run(capsys, "gen", "--two-vertex", "-o", path)[0] == 0
    return path


@pytest.fixture
def torus(tmp_path, capsys):
    path = tmp_path / "torus.graph"
    assert run(capsys, "gen", "--cayley", "torus", "--dims", 2, "--mod", 7, "-o", path)[0] == 0
    return path


def test_gen_families_roundtrip(tmp_path, capsys):
    cases = {
        "zd": ["--cayley", "zd", "--dims", 2, "--radius", 4],
        "cyc": ["--cayley", "cyclic", "--mod", 5],
        "sym": ["--cayley", "sym", "--n", 4, "--mode", "unnormalized"],
        "rand": ["--conductance-random", "--seed", 3, "--vertices", 12],
        "z": ["--example-z-nonh2", "--radius", 6],
    }
    sizes = {"zd": 41, "cyc": 5, "sym": 24, "rand": 12, "z": 13}
    for name, args in cases.items():
        path = tmp_path / f"{name}.graph"
        code, _, _ = run(capsys, "gen", *args, "-o", path)
        assert code == 0
        assert read_graph(path).n == sizes[name]
        code, out, _ = run(capsys, "validate", path)
        assert code == 0 and json.loads(out)["manifest"]["command"] == "validate"


def test_gen_to_stdout(capsys):
    code, out, _ = run(capsys, "gen", "--two-vertex")
    assert code == 0 and out.startswith("format kernel")


def test_validate_rejects_non_reversible(tmp_path, capsys):
    path = tmp_path / "bad.graph"
    path.write_text(
        "format kernel\nvertex a 1\nvertex b 1\nvertex c 1\nedge a b 1 0.5\nedge b c 0.5 1\n",
        encoding="utf-8",
    )
    code, out, err = run(capsys, "validate", path)
    assert code == 2
    rep = json.loads(out)
    assert rep["valid"] is False and rep["error"]["kind"] == "reversibility"
    assert set(rep["error"]["record"]) == {"a", "b"}
    assert "a" in err and "b" in err


def test_malformed_file_is_input_error(tmp_path, capsys):
    path = tmp_path / "junk.graph"
    path.write_text("format kernel\nvertex a\n", encoding="utf-8")
    code, out, err = run(capsys, "validate", path)
    assert code == 2 and out == "" and "line 2" in err


def test_curvature_exit_codes(tv, torus, capsys):
    code, out, _ = run(capsys, "curvature", tv, "--k", 1.5, "--n", 2, "--oracle-trials", 500)
    assert code == 3
    assert json.loads(out)["verdict"]["satisfied"] is False
    code, out, _ = run(capsys, "curvature", tv, "--k", 1, "--n", 2, "--oracle-trials", 500)
    assert code == 0
    code, out, _ = run(capsys, "curvature", torus, "--k", 0, "--n", 4, "--oracle-trials", 200)
    assert code == 0
    rep = json.loads(out)
    assert rep["oracle"]["disagreements"] == []


def test_curvature_profile(tv, capsys):
    code, out, _ = run(capsys, "curvature", tv, "--profile", "--n", "inf", "--oracle-trials", 500)
    assert code == 0
    prof = json.loads(out)["profile"]
    assert prof["K_inf_graph"] == pytest.approx(2.0, abs=1e-9)


def test_reports_are_byte_identical(torus, capsys):
    args = ("curvature", torus, "--profile", "--n", 4, "--oracle-trials", 200, "--seed", 7)
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second
    man = json.loads(first)["manifest"]
    assert man["wall_clock_seconds"] is None and man["seed"] == 7
    assert len(man["output_digest"]) == 64


def test_timing_flag_records_wall_clock(tv, capsys):
    _, out, _ = run(capsys, "curvature", tv, "--k", 0, "--oracle-trials", 100, "--timing")
    assert json.loads(out)["manifest"]["wall_clock_seconds"] >= 0


def test_heat(torus, tmp_path, capsys):
    csv = tmp_path / "heat.csv"
    code, out, _ = run(capsys, "heat", torus, "--t", "0.1,1", "--random-corpus", 3, "--audit", "0,4", "--csv", csv)
    assert code == 0
    rep = json.loads(out)
    assert rep["audit"]["pass"] is True
    assert all(s["stochastic_residual"] <= 1e-12 for s in rep["semigroup"])
    assert len(csv.read_text().splitlines()) == 1 + 2 * 49


def test_vacuous_audit_is_refused(torus, tv, capsys):
    code, out, err = run(capsys, "heat", torus, "--t", 1, "--random-corpus", 1, "--audit", "0.5,inf")
    assert code == 5 and out == "" and "CD(0.5" in err
    code, out, err = run(capsys, "heat", tv, "--t", 1, "--random-corpus", 1, "--audit=-1,2")
    assert code == 5 and out == ""


def test_modified_heat(torus, tmp_path, capsys):
    u0 = tmp_path / "u0.txt"
    u0.write_text(f"0,0 {math.sqrt(0.225)!r}\n", encoding="utf-8")
    sidecar = tmp_path / "side.json"
    csv = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys,
        "modified-heat", torus, "--u0", u0, "--horizon", 0.04, "--step", 0.001, "--method", "both",
        "--verify", "decay,oscillation,liyau,harnack,comparison", "--n", 4,
        "--sidecar", sidecar, "--csv", csv,
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["pass"] is True
    names = [r["name"] for r in rep["inequalities"]]
    assert names == ["gradient_decay", "edge_oscillation", "li_yau", "harnack", "comparison_lower", "comparison_upper"]
    side = json.loads(sidecar.read_text())
    assert side["oracle_deviation"] <= 1e-6
    assert csv.read_text().startswith("t,vertex,u,gamma_u,laplacian_u")


def test_modified_heat_constant_data(tv, tmp_path, capsys):
    u0 = tmp_path / "u0.txt"
    u0.write_text("a 1\nb 1\n", encoding="utf-8")
    code, out, _ = run(capsys, "modified-heat", tv, "--u0", u0, "--horizon", 1, "--step", 0.1, "--verify", "oscillation,liyau", "--n", 1)
    assert code == 0 and json.loads(out)["pass"]


def test_modified_heat_refusals(tv, tmp_path, capsys):
    big = tmp_path / "big.txt"
    big.write_text("b 1.2\n", encoding="utf-8")
    code, out, err = run(capsys, "modified-heat", tv, "--u0", big, "--horizon", 0.1, "--step", 0.001, "--verify", "oscillation")
    assert code == 5 and out == ""
    code, out, _ = run(capsys, "modified-heat", tv, "--u0", big, "--horizon", 0.1, "--step", 0.001)
    assert code == 5 and out == ""
    small = tmp_path / "small.txt"
    small.write_text("b 0.5\n", encoding="utf-8")
    code, _, _ = run(capsys, "modified-heat", tv, "--u0", small, "--horizon", 0.1, "--step", 0.001, "--verify", "liyau")
    assert code == 5
    code, _, err = run(capsys, "modified-heat", tv, "--u0", small, "--horizon", 0.1, "--step", 0.001, "--gamma", 2.0)
    assert code == 2 and "gamma" in err


def test_harnack_pairs_file(tv, tmp_path, capsys):
    u0 = tmp_path / "u0.txt"
    u0.write_text("b 0.9\n", encoding="utf-8")
    pairs = tmp_path / "pairs.txt"
    pairs.write_text("a b 0.01 0.05\nb a 0.02 0.1\n", encoding="utf-8")
    code, out, _ = run(capsys, "modified-heat", tv, "--u0", u0, "--horizon", 0.1, "--step", 0.001, "--verify", "harnack", "--n", 1, "--pairs", pairs)
    assert code == 0
    assert json.loads(out)["inequalities"][0]["samples"] == 2
    pairs.write_text("a b 0.0105 0.05\n", encoding="utf-8")
    code, _, err = run(capsys, "modified-heat", tv, "--u0", u0, "--horizon", 0.1, "--step", 0.001, "--verify", "harnack", "--n", 1, "--pairs", pairs)
    assert code == 2 and "grid node" in err


def test_console_script_entry_point(tv):
    res = subprocess.run([sys.executable, "-m", "curvlab.cli", "validate", str(tv)], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["alpha_observed"] == 1.0
