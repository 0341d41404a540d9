"""Command-line interface: output shapes, exit codes, diagnostics."""

import json
import math

import pytest

from k3heights import cli
from k3heights.errors import InputError

SEED1_HASH = "3e450e347f5b9218b30c4b0b3f9edd5d6e42f7691eeb9c59c1b5707c199af2e3"


def run(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_dumps17_round_trips_special_values():
    text = cli.dumps17({"a": math.inf, "b": [1.0, -math.inf], "c": True, "d": None})
    assert "Infinity" in text and "-Infinity" in text
    back = json.loads(text)
    assert back["a"] == math.inf and back["b"][1] == -math.inf
    assert back["c"] is True and back["d"] is None
    assert cli.dumps17(0.1) == "0.10000000000000001"
    assert "NaN" in cli.dumps17(math.nan)
    with pytest.raises(InputError):
        cli.dumps17(object())


def test_surface_check(capsys):
    rc, out, _ = run(capsys, "surface", "check")
    assert rc == 0
    data = json.loads(out)
    assert data["hash"] == SEED1_HASH
    assert data["nonzero_coefficients"] == 16
    assert data["origin_on_surface"] is True
    rc, out, _ = run(capsys, "surface", "check", "--seed", "2")
    assert rc == 0 and json.loads(out)["hash"] != SEED1_HASH


def test_point_find(capsys):
    rc, out, _ = run(capsys, "point", "find", "--bound", "4")
    assert rc == 0
    rows = json.loads(out)
    assert len(rows) == 72
    assert all("point" in r and "height" in r for r in rows)
    rc, out, _ = run(capsys, "point", "find", "--bound", "4", "--limit", "5")
    assert rc == 0 and len(json.loads(out)) == 5
    rc, out, _ = run(capsys, "point", "find", "--bound", "6", "--fixed", "2")
    assert rc == 0 and len(json.loads(out)) == 1


def test_orbit_command(capsys):
    rc, out, _ = run(capsys, "orbit", "--word", "1,2", "--point", "1:1,1:1,1:2")
    assert rc == 0
    data = json.loads(out)
    assert data["word"] == "1,2" and data["reason"] == "completed"
    assert len(data["points"]) == 3 and len(data["heights"]) == 3
    rc, out, _ = run(
        capsys, "orbit", "--word", "1,2", "--repeat", "2", "--point", "1:1,1:1,1:2"
    )
    assert json.loads(out)["word"] == "1,2,1,2"
    rc, out, _ = run(capsys, "orbit", "--word", "1", "--point", "0:1,0:1,0:1")
    data = json.loads(out)
    assert data["reason"] == "periodic" and data["period"] == [0, 1]


def test_height_cusp(capsys):
    rc, out, _ = run(capsys, "height", "--alpha", "cusp:3")
    assert rc == 0
    data = json.loads(out)
    assert data["alpha"]["kind"] == "cusp" and data["alpha"]["E"] == [0, 0, 1]
    assert data["height"]["value"] == pytest.approx(0.577668524651544, rel=1e-9)
    assert data["height"]["converged"] is True


def test_height_irrational_and_nonconvergence(capsys):
    rc, out, _ = run(capsys, "height", "--alpha", "theta:0.8")
    assert rc == 0
    data = json.loads(out)
    assert data["height"]["value"] == pytest.approx(0.051851477851876396, rel=1e-9)
    # unreachable tolerance: partial result is still printed, exit code 2
    rc, out, _ = run(
        capsys, "height", "--alpha", "theta:0.8", "--tol", "1e-12",
        "--max-letters", "25",
    )
    assert rc == 2
    data = json.loads(out)
    assert data["height"]["converged"] is False
    assert data["height"]["value"] > 0.0


def test_height_irr_alpha_form(capsys):
    # irr takes the boundary ray at the angle of the given class
    rc, out, _ = run(capsys, "height", "--alpha", "irr:4,0,0")
    assert rc == 0
    data = json.loads(out)
    assert data["alpha"]["kind"] == "irrational"
    assert data["alpha"]["theta"] == pytest.approx(0.0, abs=1e-9)


def test_vcan_command(capsys):
    rc, out, _ = run(capsys, "vcan", "--word", "1,2", "--tol", "1e-3")
    assert rc == 0
    data = json.loads(out)
    assert data["vcan"]["value"] == pytest.approx(2.310586334802171, rel=1e-9)
    rc, _, err = run(capsys, "vcan", "--word", "1,2,3", "--tol", "1e-3")
    assert rc == 1 and "parabolic" in err.lower()


def test_starset_command(capsys, tmp_path):
    out_path = str(tmp_path / "star.csv")
    rc, out, _ = run(
        capsys, "starset", "--out", out_path, "--samples", "16",
        "--tol", "1e-2", "--max-letters", "30",
    )
    data = json.loads(out)
    assert data["samples"] == 16 and data["out"] == out_path
    lines = open(out_path, encoding="ascii").read().splitlines()
    assert len(lines) == 17
    assert lines[0].startswith("theta,alpha0")
    n_false = sum(1 for ln in lines[1:] if ",false," in ln)
    assert data["nonconverged"] == n_false
    assert rc == (0 if n_false == 0 else 2)


def test_starset_cache_determinism(capsys, tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    cache = str(tmp_path / "cache")
    for out_path in (out1, out2):
        run(
            capsys, "starset", "--out", str(out_path), "--samples", "16",
            "--tol", "1e-2", "--max-letters", "30", "--cache-dir", cache,
        )
    assert out1.read_bytes() == out2.read_bytes()


def test_total_height_command(capsys):
    rc, out, _ = run(
        capsys, "total-height", "--samples", "16", "--tol", "1e-2",
        "--max-letters", "30",
    )
    assert rc in (0, 2)
    data = json.loads(out)
    assert data["n_samples"] == 16
    assert data["value"] > 0.0
    rc, out, _ = run(
        capsys, "total-height", "--samples", "16", "--tol", "1e-2",
        "--max-letters", "30", "--depth", "1",
    )
    data = json.loads(out)
    assert len(data["rows"]) == 4
    assert data["rows"][0]["word"] == ""
    assert data["max_relative_deviation"] < 0.2


def test_verify_command(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "wehler")
    assert rc == 0
    data = json.loads(out)
    assert data["passed"] is True
    assert all(c["passed"] for c in data["suites"]["wehler"])


def test_verify_names_failure(capsys):
    rc, out, err = run(
        capsys, "verify", "--suite", "wehler", "--point", "1:1,1:1,1:1"
    )
    assert rc == 3
    assert "wehler.on-surface" in err
    assert json.loads(out)["passed"] is False


def test_bad_inputs_name_the_flag(capsys):
    rc, _, err = run(capsys, "height", "--alpha", "bogus")
    assert rc == 1 and "--alpha" in err
    rc, _, err = run(capsys, "height", "--alpha", "cusp:3", "--point", "1:1")
    assert rc == 1 and "--point" in err
    rc, _, err = run(capsys, "orbit", "--word", "1,4")
    assert rc == 1 and "--word" in err
    rc, _, err = run(
        capsys, "surface", "check", "--surface", "/nonexistent/surface.json"
    )
    assert rc == 1 and "--surface" in err
    rc, _, err = run(capsys, "height", "--alpha", "cusp:1", "--tol", "-1")
    assert rc == 1 and "--tol" in err
