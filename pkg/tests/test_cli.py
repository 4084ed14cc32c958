import csv
import io
import subprocess
import sys

import pytest

from mroot.cli import main

from cli_grid import GRID, argv_for


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


CASES = [(cmd, f, code) for cmd, row in GRID.items() for f, code in row.items()]


@pytest.mark.parametrize("cmd,fixture,code", CASES, ids=[f"{' '.join(c)}-{f}" for c, f, _ in CASES])
def test_exit_code_grid(fixtures, cmd, fixture, code):
    got, out, err = run(argv_for(cmd, fixtures / f"{fixture}.fm"))
    assert got == code, out + err
    if code == 2:
        assert err.startswith("mroot: error:") and out == ""
    else:
        assert out.startswith("$ mroot ")


@pytest.mark.parametrize("name", ["bad_degree", "bad_dim", "bad_syntax"])
@pytest.mark.parametrize("cmd", [("validate",), ("spray",), ("check", "dually-flat"), ("scurv", "--x", "0", "0")])
def test_bad_files_exit_2(fixtures, name, cmd):
    code, out, err = run(argv_for(cmd, fixtures / f"{name}.fm"))
    assert code == 2
    assert "line" in err and "column" in err


def test_missing_file_and_bad_args(tmp_path):
    assert run(["validate", str(tmp_path / "nope.fm")])[0] == 2
    assert run(["curvature", "x.fm", "--which", "nonsense"])[0] == 2
    assert run([])[0] == 2


def test_pass_lines(fixtures):
    assert "D == 0" in run(["check", "dually-flat", str(fixtures / "minkowski.fm")])[1]
    assert "closed form spray == definitional spray" in run(["spray", str(fixtures / "uq.fm"), "--crosscheck"])[1]
    out = run(["check", "isotropy", str(fixtures / "quartic.fm"), "--target", "E"])[1]
    assert "class = 1/4" in out and "-7/4" in out
    out = run(["check", "isotropy", str(fixtures / "quartic.fm"), "--target", "E", "--convention", "F"])[1]
    assert "class = 3/4" in out and "-5/4" in out


def test_undecidable_is_reported(fixtures):
    code, out, _ = run(["check", "proj-flat", str(fixtures / "square_generalized.fm")])
    assert code == 3
    assert "undecidable" in out


def test_geodesic(fixtures, tmp_path):
    p = tmp_path / "g.csv"
    code, out, _ = run(["geodesic", str(fixtures / "quartic.fm"), "--x0", "0", "0", "--y0", "0.6", "0.8",
                        "--steps", "100", "--dt", "1e-3", "--out", str(p)])
    assert code == 0
    assert "x(T) = (6.000000e-02, 8.000000e-02)" in out
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["t", "x1", "x2", "v1", "v2", "F"] and len(rows) == 102


def test_geodesic_input_errors(fixtures):
    f = str(fixtures / "uq.fm")
    assert run(["geodesic", f, "--x0", "0", "--y0", "1", "0"])[0] == 2
    assert run(["geodesic", f, "--x0", "-3", "0", "--y0", "1", "0.2"])[0] == 2


def test_scurv(fixtures):
    code, out, _ = run(["scurv", str(fixtures / "quartic.fm"), "--x", "0", "0"])
    assert code == 0
    S = float(out.splitlines()[1].split("=")[1])
    assert abs(S) < 1e-6
    assert run(["scurv", str(fixtures / "quartic.fm"), "--x", "0", "0", "--y", "1", "0"])[0] == 2


def test_funk_validate():
    code, out, _ = run(["funk-validate", "--points", "20"])
    assert code == 0
    assert out.count(" ok") == 4


@pytest.mark.parametrize("argv", [
    ["check", "dually-flat", "quartic_x.fm"],
    ["check", "proj-flat", "closed_beta.fm"],
    ["curvature", "uq.fm", "--which", "riemann"],
    ["scurv", "uq.fm", "--x", "0.1", "0.1"],
    ["check", "isotropy", "uq.fm", "--target", "J"],
])
def test_reports_byte_identical(fixtures, argv):
    argv = [str(fixtures / a) if a.endswith(".fm") else a for a in argv]
    assert run(argv) == run(argv)


def test_timings_flag(fixtures):
    out = run(["--timings", "validate", str(fixtures / "quartic.fm")])[1]
    assert out.rstrip().splitlines()[-1].startswith("time: ")


def test_module_entry_point(fixtures):
    r = subprocess.run([sys.executable, "-m", "mroot", "validate", str(fixtures / "quartic.fm")],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("$ mroot validate")
