import json
import subprocess
import sys

import pytest

from twin_isle.cli import run, value_range


def out(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr()


def test_field_origin(capsys):
    code, cap = out(capsys, ["field", "--nu", "0.7", "--q", "0.4", "--regime", "globalized", "--at", "0,0"])
    assert code == 0 and cap.out == "0,0\n"


def test_field_json(capsys):
    code, cap = out(capsys, ["field", "--nu", "0.7", "--q", "0.4", "--regime", "globalized",
                             "--at", "0.5,0", "--format", "json"])
    assert json.loads(cap.out)["v_b"] == pytest.approx(0.175)


@pytest.mark.parametrize("argv", [
    ["field", "--nu", "1.5", "--q", "0.4", "--regime", "globalized", "--at", "0,0"],
    ["field", "--nu", "0.5", "--q", "0.4", "--regime", "bogus", "--at", "0,0"],
    ["field", "--nu", "0.5", "--q", "0.4", "--regime", "autarky", "--at", "0"],
    ["sweep", "--metric", "eta", "--nu", "0.7", "--q-range", "0.3:0.1:0.05"],
    ["sweep", "--metric", "eta", "--nu", "0.7", "--q-range", "0.5:1.5:0.5"],
    ["shocks", "--nu", "0.7", "--q", "0.4"],
    ["basins", "--nu", "0.7", "--q", "0.4", "--regime", "autarky", "--resolution", "1"],
    ["integrate", "--nu", "0.7", "--q", "0.4", "--regime", "globalized", "--x0", "1.2,0", "--t-max", "1"],
])
def test_invalid_arguments_exit_2(capsys, argv):
    assert run(argv) == 2


def test_computation_failure_exits_1(capsys):
    code, cap = out(capsys, ["separatrix", "--nu", "0.7", "--q", "0.4", "--offset", "0.5"])
    assert code == 1 and "ValueError" in cap.err


def test_value_range_inclusive():
    assert value_range("0.05:0.35:0.05") == [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
    assert value_range("0.2:0.2:0.1") == [0.2]


def test_sweep_eta_increasing(capsys):
    code, cap = out(capsys, ["sweep", "--metric", "eta", "--nu", "0.7", "--q-range", "0.05:0.35:0.05"])
    lines = cap.out.splitlines()
    assert lines[0] == "q,nu,value" and len(lines) == 8
    values = [float(l.split(",")[2]) for l in lines[1:]]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_sweep_closed_form_metrics(capsys):
    code, cap = out(capsys, ["sweep", "--metric", "ratio-tilde", "--nu-range", "0.7:0.7:0.1",
                             "--q-range", "0.5:0.5:0.1"])
    assert cap.out.splitlines()[1] == "0.5,0.7,0.65"


def test_equilibria_json(capsys):
    code, cap = out(capsys, ["equilibria", "--nu", "0.7", "--q", "0.4", "--regime", "globalized"])
    eqs = json.loads(cap.out)
    assert [e["class"] for e in eqs] == ["StableNode", "Saddle", "StableNode"]
    assert set(eqs[0]) == {"location", "eigenvalues", "eigenvectors", "class"}


def test_separatrix_files(tmp_path, capsys):
    code = run(["separatrix", "--nu", "0.7", "--q", "0.2", "--out-dir", str(tmp_path)])
    assert code == 0
    info = json.loads((tmp_path / "separatrix_exit.json").read_text())
    assert info["exit_type"] == "eta"
    assert info["exit_value"] == pytest.approx(0.43681911521884975, abs=1e-8)
    assert (tmp_path / "separatrix.csv").read_text().startswith("x_a,x_b\n")


def test_separatrix_linear(capsys):
    code, cap = out(capsys, ["separatrix", "--nu", "0.7", "--q", "0.5", "--linear"])
    assert code == 0
    assert "1,0.15000000000000002" in cap.out and '"Trapezoid"' in cap.out


def test_integrate_csv(capsys):
    code, cap = out(capsys, ["integrate", "--nu", "0.7", "--q", "0.4", "--regime", "globalized",
                             "--x0", "0.3,0.1", "--t-max", "2"])
    lines = cap.out.splitlines()
    assert lines[0] == "t,x_a,x_b" and lines[1] == "0,0.3,0.1"
    assert float(lines[-1].split(",")[0]) == pytest.approx(2.0)


def test_basins_outputs(tmp_path):
    assert run(["basins", "--nu", "0.7", "--q", "0.4", "--regime", "autarky", "--resolution", "10",
                "--out-dir", str(tmp_path)]) == 0
    rows = (tmp_path / "basins.csv").read_text().splitlines()
    assert len(rows) == 10 and rows[0] == "0,0,0,0,3,3,3,3,3,3"
    report = json.loads((tmp_path / "basins_report.json").read_text())
    assert report["area_to_origin"] == pytest.approx(0.16)


def test_shocks_summary(tmp_path):
    assert run(["shocks", "--nu", "0.7", "--q", "0.4", "--grid", "21", "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "shocks_summary.json").read_text())
    assert summary["BothRecover"] == pytest.approx(0.16, abs=2 / 21)
    assert sum(summary.values()) == pytest.approx(1.0)


def test_approx_compare(capsys):
    code, cap = out(capsys, ["approx-compare", "--nu-range", "0.7:0.7:0.1", "--q-range", "0.5:0.5:0.1",
                             "--resolution", "20"])
    header, row = cap.out.splitlines()
    assert header == "q,nu,area_numeric,area_tilde,abs_diff"
    q, nu, num, tilde, diff = map(float, row.split(","))
    assert tilde == 0.575 and diff == pytest.approx(abs(num - tilde))


@pytest.mark.parametrize("argv", [
    ["shocks", "--nu", "0.7", "--q", "0.4", "--samples", "300", "--seed", "9"],
    ["basins", "--nu", "0.7", "--q", "0.3", "--regime", "globalized", "--resolution", "24"],
])
def test_byte_identical_reruns(tmp_path, monkeypatch, argv):
    texts = []
    for threads in ("1", "3"):
        monkeypatch.setenv("TWIN_ISLE_THREADS", threads)
        d = tmp_path / threads
        assert run(argv + ["--out-dir", str(d)]) == 0
        texts.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert texts[0] == texts[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "twin_isle", "field", "--nu", "0.7", "--q", "0.4",
                          "--regime", "autarky", "--at", "0.5,0.5"], capture_output=True, text=True)
    assert res.returncode == 0
    assert [float(v) for v in res.stdout.split(",")] == pytest.approx([0.0175, 0.0175])
