import json
import subprocess
import sys

import pytest

from superspecial import cli
from superspecial import superspecial_search as ss


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classdata(capsys):
    code, out, _ = run(capsys, "classdata", "-52")
    assert code == 0 and "h = 2" in out and "h' = 1" in out and "consistent" in out
    code, out, _ = run(capsys, "classdata", "-11", "--json")
    assert code == 0 and json.loads(out)["s"] == 0
    code, out, _ = run(capsys, "classdata", "-3")
    assert "elliptic point" in out


@pytest.mark.parametrize("argv", [("classdata", "5"), ("classdata", "-5"), ("classdata", "abc"),
                                  ("cmpoly", "-52", "--prec", "10")])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "usage error" in err


def test_cmpoly(capsys):
    code, out, _ = run(capsys, "cmpoly", "-19", "--json")
    assert code == 0 and json.loads(out)["coeffs"] == ["64", "-81"]
    code, out, _ = run(capsys, "cmpoly", "-11")
    assert code == 1 and "error" in out


def test_checks(capsys):
    code, out, _ = run(capsys, "checks", "-219", "--json")
    body = json.loads(out)
    assert code == 0 and body["ok"] and len(body["rows"]) == 5
    code, out, _ = run(capsys, "checks", "-11")
    assert code == 1


def test_find_and_verify(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = run(capsys, "find", "--minpoly", "x + 1/2", "--out", str(path))
    assert code == 0 and "case 1" in out
    code, out, _ = run(capsys, "verify", str(path), "--minpoly", "x + 1/2")
    assert code == 0 and out.strip() == "pass"
    body = json.loads(path.read_text())
    body["N"] = "35"
    path.write_text(json.dumps(body))
    code, out, _ = run(capsys, "verify", str(path), "--json")
    assert code == 1 and "N mismatch" in json.loads(out)["reasons"]


def test_find_failures(capsys, tmp_path):
    code, out, _ = run(capsys, "find", "--minpoly", "x^2 + 2", "--out", str(tmp_path / "c.json"))
    assert code == 1 and "no case applies" in out
    code, out, _ = run(capsys, "find", "--minpoly", "x + 1/2", "--l-max", "100", "--out", str(tmp_path / "c.json"))
    assert code == 1 and "exhausted" in out
    code, _, _ = run(capsys, "find", "--minpoly", "x +* 1", "--out", str(tmp_path / "c.json"))
    assert code == 2


def test_verify_unreadable(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, _ = run(capsys, "verify", str(bad))
    assert code == 2


def test_equidist(capsys):
    code, out, _ = run(capsys, "equidist", "--bound", "500", "--json")
    body = json.loads(out)
    assert code == 0 and body["units"] == {"2": [1, 1], "3": [2, 1], "6": [5, 2]}


def test_regen_table(capsys, tmp_path, monkeypatch):
    # --table sets the environment variable; register it so it is restored
    monkeypatch.delenv(cli.cm.TABLE_ENV, raising=False)
    out_path = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "regen-table", "-52", "-19", "--out", str(out_path))
    assert code == 0 and "2 records" in out
    code, out, _ = run(capsys, "cmpoly", "-52", "--table", str(out_path), "--json")
    assert json.loads(out)["coeffs"] == ["15625", "5184"]


def test_family_discriminants():
    assert cli.family_discriminants(40) == [-19, -52, -148]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "superspecial", "classdata", "-19"], capture_output=True, text=True)
    assert r.returncode == 0 and "h = 1" in r.stdout
