import subprocess
import sys
import textwrap

import pytest

from diagpde import cli


def cfg(tmp_path, body):
    p = tmp_path / "run.ini"
    p.write_text(textwrap.dedent(body))
    return str(p)


SMALL = """
[grid]
n = 2, 2
[coefficient]
K = 2
[evolution]
t = 0.3
eps_hs = 1e-8
[design]
m = 1, 1
[region]
x = 0:0.4
y = 0.3:1
[verify]
n = 1
cases = 14
"""


def test_unknown_key_and_section(tmp_path):
    assert cli.main(["forward", "--config", cfg(tmp_path, "[grid]\nsize = 3\n")]) == 2
    assert cli.main(["forward", "--config", cfg(tmp_path, "[colour]\nn = 3\n")]) == 2
    assert cli.main(["forward", "--config", str(tmp_path / "missing.ini")]) == 2
    assert cli.main(["forward", "--config", cfg(tmp_path, SMALL), "--threads", "0"]) == 2


def test_cap_exceeded(tmp_path):
    c = cfg(tmp_path, SMALL + "[run]\ncap = 8\n")
    assert cli.main(["forward", "--config", c, "--out", str(tmp_path / "o")]) == 4


def test_forward_outputs(tmp_path):
    out = tmp_path / "fw"
    assert cli.main(["forward", "--config", cfg(tmp_path, SMALL), "--out", str(out)]) == 0
    rows = (out / "state.csv").read_text().splitlines()
    assert rows[0] == "component,ix,iy,x,y,re,im,norm" and len(rows) == 1 + 64
    summary = dict(l.split(",") for l in (out / "forward_summary.csv").read_text().splitlines()[1:])
    assert float(summary["deviation_from_matrix"]) < 1e-7
    assert (out / "w1.pgm").read_bytes().startswith(b"P5\n4 4\n255\n")


def test_landscape_is_deterministic(tmp_path):
    c = cfg(tmp_path, SMALL)
    for d in ("a", "b"):
        assert cli.main(["landscape", "--config", c, "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "landscape.csv").read_text()
    assert a == (tmp_path / "b" / "landscape.csv").read_text()
    assert len(a.splitlines()) == 5
    assert (tmp_path / "a" / "objective.csv").exists()
    assert (tmp_path / "a" / "F_blockenc.pgm.txt").read_text().startswith("min ")


def test_verify_be_and_corruption(tmp_path):
    c = cfg(tmp_path, SMALL)
    assert cli.main(["verify-be", "--config", c, "--out", str(tmp_path / "v"), "--seed", "7"]) == 0
    first = (tmp_path / "v" / "verify.csv").read_text()
    assert cli.main(["verify-be", "--config", c, "--out", str(tmp_path / "v"), "--seed", "7"]) == 0
    assert first == (tmp_path / "v" / "verify.csv").read_text()
    bad = cfg(tmp_path, SMALL + "corrupt_alpha = true\n")
    assert cli.main(["verify-be", "--config", bad, "--out", str(tmp_path / "w")]) == 3
    assert ",fail" in (tmp_path / "w" / "verify.csv").read_text()


def test_fit_fourier(tmp_path):
    out = tmp_path / "ff"
    assert cli.main(["fit-fourier", "--config", cfg(tmp_path, SMALL), "--out", str(out)]) == 0
    assert len((out / "fourier.csv").read_text().splitlines()) == 1 + 25
    assert "residual_scan" in (out / "residual.csv").read_text()


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "diagpde", "fit-fourier", "--config", cfg(tmp_path, SMALL),
                        "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert r.returncode == 0 and "fitted 25 coefficients" in r.stdout
    r = subprocess.run([sys.executable, "-m", "diagpde", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2
