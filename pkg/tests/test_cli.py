import csv
import json
import subprocess
import sys

import pytest

from ptwhardy.cli import ALPHA_COLUMNS, HARDY_COLUMNS, MAXIMAL_COLUMNS, main


@pytest.fixture
def grid(tmp_path):
    space, omega = tmp_path / "space.json", tmp_path / "omega.json"
    assert main(["gen-space", "--kind", "grid-minus-set", "--rows", "3", "--cols", "3", "--out-space", str(space), "--out-omega", str(omega), "--out", str(tmp_path / "gen.json")]) == 0
    return space, omega


@pytest.fixture
def path3(tmp_path):
    space, omega = tmp_path / "p.json", tmp_path / "po.json"
    assert main(["gen-space", "--kind", "path", "--n", "3", "--out-space", str(space), "--out-omega", str(omega), "--out", str(tmp_path / "g.json")]) == 0
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"values": {"v0": 0, "v1": 1, "v2": 0}}))
    return space, omega, f


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_gen_space_report(grid, tmp_path):
    rep = json.loads((tmp_path / "gen.json").read_text())
    assert rep["vertices"] == 9 and rep["complement"] == ["r01c01"]
    assert rep["D"] > 1


def test_maximal_csv(path3, tmp_path):
    space, _, f = path3
    out = tmp_path / "m.csv"
    assert main(["maximal", "--space", str(space), "--f", str(f), "--p", "1", "--r", "1.5", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == MAXIMAL_COLUMNS
    assert float(rows[1]["value"]) == 1.0
    assert float(rows[0]["value"]) == 0.5


def test_hardy_check_exit_codes(path3, tmp_path):
    space, omega, _ = path3
    out = tmp_path / "h.csv"
    assert main(["hardy-check", "--space", str(space), "--omega", str(omega), "--trials", "4", "--out", str(out)]) == 0
    assert list(read_csv(out)[0]) == HARDY_COLUMNS
    g = tmp_path / "g1.json"
    g.write_text(json.dumps({"values": {"v0": 1, "v1": 1, "v2": 1}}))
    assert main(["hardy-check", "--space", str(space), "--omega", str(omega), "--g", str(g), "--c-h", "0.5", "--p", "1", "--out", str(tmp_path / "h.json")]) == 1
    rep = json.loads((tmp_path / "h.json").read_text())
    assert rep["pass"] is False and rep["violations"]


def test_poincare_check(path3, tmp_path):
    space, _, _ = path3
    out = tmp_path / "pc.json"
    assert main(["poincare-check", "--space", str(space), "--c-a", "0.5", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True
    assert main(["poincare-check", "--space", str(space), "--c-a", "0.4", "--out", str(out)]) == 1


def test_alpha_taus(grid, tmp_path):
    space, omega = grid
    out = tmp_path / "a.csv"
    assert main(["alpha", "--space", str(space), "--omega", str(omega), "--tau", "0,0.5", "--tau", "1", "--nu", "2", "--kappa", "2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ALPHA_COLUMNS
    assert [float(r["tau"]) for r in rows] == [0.0, 0.5, 1.0]
    assert float(rows[0]["value"]) == 0.0


def test_errors_exit_two(tmp_path, grid, capsys):
    space, omega = grid
    assert main(["maximal", "--space", str(tmp_path / "missing.json"), "--f", "x", "--r", "1"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["alpha", "--space", str(bad), "--omega", str(omega), "--tau", "0.1"]) == 2
    assert main(["alpha", "--space", str(space), "--omega", str(omega), "--tau", "0.1", "--x", "nowhere"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["alpha", "--space", str(space), "--omega", str(omega), "--tau", "-1"])
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_self_improve_is_byte_stable(grid, tmp_path):
    space, omega = grid
    outs = []
    for run in range(2):
        out = tmp_path / f"si{run}.json"
        args = ["self-improve", "--space", str(space), "--omega", str(omega), "--tau", "0.2", "--trials", "1", "--estimate-trials", "8", "--out", str(out)]
        assert main(args) in (0, 1)
        outs.append((out.read_bytes(), out.with_suffix(".csv").read_bytes()))
    assert outs[0] == outs[1]
    rep = json.loads(outs[0][0])
    assert "not a proof" in rep["evidence"]


def test_module_entry_point(path3):
    space, _, f = path3
    res = subprocess.run([sys.executable, "-m", "ptwhardy", "maximal", "--space", str(space), "--f", str(f), "--r", "0"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["rows"][1]["value"] == 1.0
