import json
import subprocess
import sys

import numpy as np
import pytest

from bifree.cli import fmt_complex, main, parse_complex, parse_point


@pytest.fixture
def files(tmp_path):
    delta = tmp_path / "delta.json"
    delta.write_text(json.dumps({"atoms": [[0, 0, 1.0]]}))
    two = tmp_path / "two.json"
    two.write_text(json.dumps({"atoms": [[1, 1, 0.5], [-1, -1, 0.5]]}))
    jump = tmp_path / "jump.json"
    jump.write_text(json.dumps({"atoms": [[1, 1, 1.0]]}))
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"gamma": [0, 0], "rho1": {"atoms": [[0, 0, 1]]},
                                "rho2": {"atoms": [[0, 0, 1]]}, "rho": {"atoms": [[0, 0, 0.5]]}}))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"gamma": [0, 0], "rho1": {"atoms": [[0, 0, 1]]},
                               "rho2": {"atoms": [[0, 0, 1]]}, "rho": {"atoms": [[0, 0, 1.2]]}}))
    nan = tmp_path / "nan.json"
    nan.write_text('{"atoms": [[0, 0, NaN]]}')
    return {p.stem: str(p) for p in (delta, two, jump, good, bad, nan)} | {"dir": tmp_path}


@pytest.mark.parametrize("text,value", [("i", 1j), ("-2i", -2j), ("1-0.5i", 1 - 0.5j), ("3", 3)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_point_and_format():
    assert parse_point("i,2i") == (1j, 2j)
    assert fmt_complex(-1 + 0j) == "-1+0i"


def test_eval_g_dirac(files, capsys):
    assert main(["eval-g", files["delta"], "--point", "i,i"]) == 0
    assert capsys.readouterr().out.strip() == "-1+0i"


def test_eval_r_point_mass_is_zero(files, capsys):
    assert main(["eval-r", files["delta"], "--point", "0.01-0.02i,-0.03i"]) == 0
    val = complex(capsys.readouterr().out.strip().replace("i", "j"))
    assert abs(val) < 1e-14


def test_gaussian_csv(files, capsys):
    out = files["dir"] / "g.csv"
    assert main(["gaussian", "--range", "-2.5", "2.5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,u,density"
    assert len(lines) == 101 * 101 + 1
    assert "0,0,0.10132118364233778" in lines


def test_gaussian_r_points(capsys):
    assert main(["gaussian", "--c", "0.5", "--point", "i,i"]) == 0
    # R(i, i) = -1 - 1 - 0.5
    assert capsys.readouterr().out.strip() == "-2.5+0i"


def test_lk_validate_verdicts(files, capsys):
    assert main(["lk-validate", files["good"]]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "VALID"
    assert main(["lk-validate", files["bad"]]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "INVALID"
    assert report["version"]


def test_lk_decompose_and_eval(files, capsys):
    assert main(["lk-decompose", files["good"]]) == 0
    dec = json.loads(capsys.readouterr().out)["decomposition"]
    assert dec["gaussian"]["c"] == 0.5
    assert main(["lk-eval", files["good"], "--point", "i,i"]) == 0
    assert capsys.readouterr().out.strip() == "-2.5+0i"


def test_semigroup_is_linear_in_t(files, capsys):
    assert main(["semigroup", files["good"], "--t", "0.5", "2", "--point", "i,i"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows == ["0.5 -1.25+0i", "2 -5+0i"]


def test_poisson_points(files, capsys):
    assert main(["poisson", "--lam", "1", "--jump", files["jump"], "--point", "0.5i,0.5i"]) == 0
    val = complex(capsys.readouterr().out.strip().replace("i", "j"))
    assert val == pytest.approx(-1 + 1 / (1 - 0.5j) ** 2)


def test_convolve_with_cumulants(files):
    out = files["dir"] / "c.csv"
    cum = files["dir"] / "k.json"
    rc = main(["convolve", files["two"], files["two"], "--grid", "21", "--out", str(out),
               "--cumulants", str(cum)])
    assert rc == 0
    tab = json.loads(cum.read_text())
    k11 = [v for m, n, v in tab["kappa"] if (m, n) == (1, 1)][0]
    assert k11 == pytest.approx(2.0, abs=1e-8)
    assert len(out.read_text().splitlines()) == 21 * 21 + 1


def test_invert_quintuple(files):
    out = files["dir"] / "inv.csv"
    assert main(["invert", files["good"], "--grid", "11", "--out", str(out)]) == 0
    vals = np.loadtxt(out, delimiter=",", skiprows=1)
    assert vals.shape == (121, 3) and np.all(vals[:, 2] >= 0)


def test_invert_rejects_invalid_quintuple(files, capsys):
    assert main(["invert", files["bad"]]) == 1
    assert "invalid" in capsys.readouterr().err


def test_clt_demo_table(files, capsys):
    report = files["dir"] / "clt.json"
    assert main(["clt-demo", "--n", "100", "1000", "--json", str(report)]) == 0
    out = capsys.readouterr().out
    assert "order(a)" in out and "equivalence: consistent" in out
    assert json.loads(report.read_text())["command"] == "clt-demo"


def test_poisson_demo(files, capsys):
    assert main(["poisson-demo", "--jump", files["jump"], "--n", "100", "1000"]) == 0
    assert "poisson" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["eval-g", "/nonexistent.json", "--point", "i,i"],
    ["eval-g", "NAN", "--point", "i,i"],
    ["eval-g", "DELTA", "--point", "nonsense"],
    ["eval-g", "DELTA", "--point", "1,i"],
    ["gaussian", "--c", "3"],
    ["no-such-command"],
])
def test_bad_input_exits_one(files, argv, capsys):
    argv = [files["nan"] if a == "NAN" else files["delta"] if a == "DELTA" else a for a in argv]
    assert main(argv) == 1


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "bifree.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "bifree" in proc.stdout
