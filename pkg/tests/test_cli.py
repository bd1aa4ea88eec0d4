import json
import os
import subprocess
import sys

import pytest

from majorana_ent import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rep_examples(capsys):
    code, out, _ = run(capsys, "rep", "--modes", "2")
    d = json.loads(out)
    assert code == 0 and d["dim"] == 2 and d["residual"] == 0 and d["algebra_dim"] == 4
    code, out, _ = run(capsys, "rep", "--modes", "3")
    d = json.loads(out)
    assert d["dim"] == 4 and d["algebra_dim"] == 8
    code, _, err = run(capsys, "rep", "--modes", "25")
    assert code == 2 and "cap" in err


def test_check_examples(capsys):
    code, out, _ = run(capsys, "check", "--modes", "2", "--split", "1", "--state", "f11")
    assert code == 0 and json.loads(out)["verdict"] == "Entangled"
    code, out, _ = run(capsys, "check", "--modes", "4", "--split", "2", "--state", "e-basis:0")
    assert json.loads(out)["verdict"] == "Separable"
    code, out, _ = run(capsys, "check", "--modes", "4", "--split", "2", "--state", "phi:c1,c3")
    d = json.loads(out)
    assert d["verdict"] == "Entangled"
    assert d["witness"]["kind"] == "odd_odd"
    assert d["witness"]["value"] == [0, -1]


def test_check_unknown_exits_zero(capsys):
    code, out, _ = run(capsys, "check", "--modes", "2", "--split", "1", "--state", "1 + (0.5,0) c1")
    assert code == 0
    assert json.loads(out)["verdict"] in {"Separable", "Entangled", "Unknown"}


def test_check_config_errors(capsys):
    assert run(capsys, "check", "--modes", "2", "--split", "1", "--state", "e-basis:9")[0] == 2
    assert run(capsys, "check", "--modes", "4", "--split", "7", "--state", "psi")[0] == 2
    assert run(capsys, "check", "--modes", "4", "--split", "2", "--state", "f11")[0] == 2
    assert run(capsys, "check", "--modes", "11", "--split", "2", "--state", "psi")[0] == 2
    assert run(capsys, "check", "--modes", "4", "--split", "2", "--state", "0")[0] == 2


def test_sweep_examples(capsys):
    code, out, _ = run(capsys, "sweep", "--n-list", "8:64:8", "--generator", "local", "--p", "0", "--probe", "phi")
    assert code == 0
    exp = float(out.splitlines()[-1].split()[1].split("=")[1])
    assert abs(exp - 1.0) <= 0.05
    assert run(capsys, "sweep", "--n-list", "")[0] == 2
    assert run(capsys, "sweep", "--n-list", "8,6")[0] == 2


def test_sweep_balanced_exponent_reported(capsys):
    """Balanced N=8..64 exponent stays near 2.9: the subleading terms of the cubic bias the fit."""
    code, out, _ = run(capsys, "sweep", "--n-list", "8:64:8")
    last = out.splitlines()[-1]
    assert last.startswith("# exponent=")
    exp = float(last.split()[1].split("=")[1])
    assert 2.8 < exp < 3.0


def test_qfi_and_gns_and_decompose(capsys):
    code, out, _ = run(capsys, "qfi", "--modes", "4", "--spectral", "1,2")
    d = json.loads(out)
    assert d["variance"] == 9 and d["closed_form"] == 9
    code, out, _ = run(capsys, "gns", "--modes", "2", "--state", "(0.6,0) 1 + (0,0.8) c1c2")
    d = json.loads(out)
    assert code == 0 and d["dim"] == 4 and d["norm_sq"] == 1
    code, out, _ = run(capsys, "decompose", "--modes", "4", "--basis", "f")
    d = json.loads(out)
    assert code == 0 and d["commutant_dimension"] == 16
    assert run(capsys, "decompose", "--modes", "8")[0] == 2
    assert run(capsys, "qfi", "--modes", "3")[0] == 2


def test_determinism_and_out(tmp_path, capsys):
    args = ["check", "--modes", "4", "--split", "2", "--state", "phi:c1,c3"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    target = tmp_path / "r.json"
    assert cli.main(["--out", str(target), *args]) == 0
    assert target.read_text() == first


def test_module_entry_point():
    env = dict(os.environ)
    p = subprocess.run(
        [sys.executable, "-m", "majorana_ent", "rep", "--modes", "2"], capture_output=True, text=True, env=env
    )
    assert p.returncode == 0 and json.loads(p.stdout)["dim"] == 2


@pytest.mark.parametrize("text,expected", [("8,16", [8, 16]), ("8:24:8", [8, 16, 24])])
def test_parse_n_list(text, expected):
    assert cli.parse_n_list(text) == expected
