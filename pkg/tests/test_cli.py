import json
import subprocess
import sys

import pytest

from k3kit.cli import VerificationReport, Case, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_classify_lists_75_rows(capsys):
    code, out = run(capsys, "classify", "--json")
    rows = json.loads(out.out)
    assert code == 0 and len(rows) == 75
    assert {"name", "r", "l", "delta", "g", "k", "signature"} <= set(rows[0])


def test_lift_r21_scaled(capsys):
    code, out = run(capsys, "lift", "--lattice", "(A1+)perp", "--form", "F", "--ell", "32", "--json")
    data = json.loads(out.out)
    assert code == 0
    assert data["weight"] == str(-(5**3) * 41 * 32)
    assert data["canonical"] == "32*D- + 32793*D+ - H"
    assert data["integrality"]["ell"] == 32


def test_combined_lift_u(capsys):
    code, out = run(capsys, "lift", "--lattice", "U", "--form", "combined", "--json")
    data = json.loads(out.out)
    assert data["weight"] == str(-4 * 513 * 1023)
    assert data["canonical"] == "513*D - 32*H"


def test_vvmf_check(capsys):
    code, out = run(capsys, "vvmf", "--lattice", "U*2+A1*3", "--order", "60", "--check")
    data = json.loads(out.out)
    assert code == 0 and data["modularity"]["ok"]


def test_divisors_command(capsys):
    code, out = run(capsys, "divisors", "--M", "U(2)", "--json")
    data = json.loads(out.out)
    assert code == 0
    assert data["chi8"]["vanishes_identically"]
    assert data["upsilon"]["divisor"] == "131070*D + 16*H1"
    assert data["balance"]["ok"]


def test_theta_char(capsys):
    code, out = run(capsys, "theta", "--omega", "[[[0, 1]]]", "--char", "0,0")
    data = json.loads(out.out)
    assert abs(data["value"][0] - 1.0864348112133080) < 1e-14


def test_theta_identity_is_seed_deterministic(capsys):
    _, a = run(capsys, "theta", "--identity", "petersson", "--trials", "2", "--seed", "7", "--json")
    _, b = run(capsys, "theta", "--identity", "petersson", "--trials", "2", "--seed", "7", "--json")
    strip = lambda s: [{k: v for k, v in c.items() if k != "seconds"} for c in json.loads(s)["cases"]]
    assert strip(a.out) == strip(b.out)


def test_unknown_lattice_exit_code(capsys):
    code, out = run(capsys, "lift", "--lattice", "Q7")
    assert code == 2 and "error" in out.err


def test_verify_fast_suites(capsys):
    code, out = run(capsys, "verify", "table", "--json")
    assert code == 0
    code, out = run(capsys, "verify", "--balance", "--json")
    data = json.loads(out.out)
    assert code == 0 and "fail" not in data["counts"]
    assert data["counts"]["inconclusive"] == 5


def test_report_exit_status():
    rep = VerificationReport("x", [Case("a", "pass"), Case("b", "inconclusive")])
    assert rep.exit_code == 0
    rep.cases.append(Case("c", "fail"))
    assert rep.exit_code == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "k3kit", "verify", "table"], capture_output=True, text=True)
    assert res.returncode == 0 and "PASS" in res.stdout
