import io
import json
import subprocess
import sys

import pytest

from vortexsym.cli import run


def call(*argv, env=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("argv,code", [
    (["check", "gen", "--case", "gen-vT", "--eq", "eq2", "--mode", "prolonged"], 0),
    (["check", "gen", "--case", "gen-20", "--T", "t^2", "--H", "a2*a3"], 0),
    (["check", "gen", "--case", "contact-basis-25", "--field", "v7", "--mode", "direct"], 0),
    (["check", "gen", "--case", "example-3"], 1),
    (["check", "flow", "--case", "example-3"], 1),
    (["check", "inv", "--case", "example-1", "--expr", "exp(ln(k1)) - k1"], 2),
    (["check", "gen", "--case", "no-such-entry"], 3),
    (["check", "gen", "--case", "contact-24", "--mode", "prolonged"], 3),
    (["check", "inv", "--case", "example-1", "--expr", "k1 +* 2"], 3),
    (["frobnicate"], 3),
])
def test_exit_code_matrix(argv, code):
    got, out, err = call(*argv)
    assert got == code, out + err


def test_det_derive_compare():
    code, out, _ = call("det", "derive", "--eq", "eq2", "--ansatz", "point", "--reduction", "free", "--compare", "paper")
    assert code == 0
    assert "system equivalent to Eqs. (4)-(7)" in out


def test_det_compare_round_trip(tmp_path):
    code, out, _ = call("det", "derive", "--format", "json")
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(json.loads(out)["system"]))
    code, out, _ = call("det", "compare", str(path))
    assert code == 0


def test_bad_json_file_reports_position(tmp_path):
    path = tmp_path / "f.json"
    path.write_text('{"coefficients": {"k1": }')
    code, _, err = call("check", "gen", "--file", str(path))
    assert code == 3 and "line 1" in err


def test_bad_dsl_in_file_reports_position(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"space": "J1(R,R6)", "coefficients": {"k1": "k1 *"}}))
    code, _, err = call("check", "gen", "--file", str(path))
    assert code == 3 and "position" in err


def test_field_file(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"space": "J1(R,R6)", "coefficients": {"k1": "k1", "n1": "-n1"}}))
    assert call("check", "gen", "--file", str(path))[0] == 0


def test_json_schema_and_header():
    code, out, _ = call("check", "gen", "--case", "gen-vH", "--format", "json")
    doc = json.loads(out)
    assert doc["schema"] == "1" and doc["exit_code"] == 0
    assert doc["results"][0]["verdict"] == "verified"
    code, text, _ = call("check", "gen", "--case", "gen-vH")
    assert "seed=20240917" in text.splitlines()[0]


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv("VORTEXSYM_SEED", "11")
    doc = json.loads(call("check", "gen", "--case", "gen-vT", "--format", "json")[1])
    assert doc["config"]["seed"] == 11
    doc = json.loads(call("check", "gen", "--case", "gen-vT", "--format", "json", "--seed", "5")[1])
    assert doc["config"]["seed"] == 5


def test_bad_seed_env(monkeypatch):
    monkeypatch.setenv("VORTEXSYM_SEED", "abc")
    assert call("casebook", "list")[0] == 3


def test_deterministic_json():
    argv = ("check", "solution", "--case", "example-3", "--field", "instantiated", "--format", "json")
    assert call(*argv)[1] == call(*argv)[1]


def test_casebook_list_and_emit():
    code, out, _ = call("casebook", "list")
    assert code == 0 and "gen-20" in out
    code, out, _ = call("casebook", "emit", "gen-vH", "--format", "json")
    assert json.loads(out)["entry"]["id"] == "gen-vH"


def test_bracket_table():
    code, out, _ = call("bracket", "table", "--case", "table-1")
    assert code == 0 and "vT[1]" in out


def test_num_commands(tmp_path):
    csv = tmp_path / "c.csv"
    code, out, _ = call("num", "solve", "--preset", "plus-one", "--csv", str(csv))
    assert code == 0 and csv.read_text().startswith("t,k1")
    code, out, _ = call("num", "transport", "--preset", "exp", "--case", "example-1", "--s", "0.25", "--s", "-1")
    assert code == 0
    code, out, _ = call("num", "transport", "--preset", "plus-one", "--case", "example-3", "--s", "1")
    assert code == 1
    code, out, _ = call("num", "reparam")
    assert code == 0


def test_scenario_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"n1": "1", "n2": "0", "n3": "0", "k2": "0", "k3": "0", "k1_0": 2.0, "h": 0.01}))
    assert call("num", "solve", "--scenario", str(path))[0] == 0
    path.write_text(json.dumps({"n1": "1"}))
    assert call("num", "solve", "--scenario", str(path))[0] == 3


def test_claims_run_subset():
    code, out, _ = call("claims", "run", "--id", "table1-abelian", "--id", "thm1-membership", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    ids = [r["claim"] for r in doc["results"]]
    assert ids == ["table1-abelian", "thm1-membership"]
    assert doc["results"][0]["paper_agreement"] == "conflicts"
    assert doc["results"][1]["paper_agreement"] == "agrees"


def test_claims_unknown_id():
    assert call("claims", "run", "--id", "nope")[0] == 3


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "vortexsym.cli", "casebook", "list"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and "eq1" in proc.stdout
