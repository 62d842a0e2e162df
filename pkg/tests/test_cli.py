import io
import json
import subprocess
import sys

import numpy as np
import pytest

from vortex_chorus import analysis, spheres
from vortex_chorus.cli import run
from vortex_chorus.export import (
    empty_trajectory,
    export_trajectory,
    read_trajectory_csv,
    trajectory_header,
)
from vortex_chorus.hamiltonians import SystemSpec, regular_polygon
from vortex_chorus.integrate import flow


def _csv_header(path):
    with open(path) as fh:
        return fh.readline().strip().split(",")


def test_simulate_csv_columns(tmp_path):
    out = tmp_path / "traj.csv"
    code = run(["simulate", "--family", "euler", "--n", "4", "--init", "thomson",
                "--T", "10", "--tol", "1e-10", "--out", str(out)])
    assert code == 0
    header = _csv_header(out)
    assert header == ["t", "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4", "H", "I", "P", "Q"]
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows.shape[1] == 13


def test_three_vortex_csv_has_eleven_columns(tmp_path):
    out = tmp_path / "t3.csv"
    assert run(["simulate", "--n", "3", "--T", "1", "--samples", "5", "--out", str(out)]) == 0
    assert len(_csv_header(out)) == 11


def test_csv_round_trip_bitwise(tmp_path):
    spec = SystemSpec.euler(3)
    traj = flow(spec, regular_polygon(3) + np.array([0, 0.1j, -0.05]), 2.0, samples=7)
    path = tmp_path / "r.csv"
    export_trajectory(traj, path)
    back = read_trajectory_csv(path, spec)
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.states, traj.states)
    assert np.array_equal(back.integrals, traj.integrals)


def test_empty_trajectory_header_only():
    buf = io.StringIO()
    export_trajectory(empty_trajectory(SystemSpec.euler(2)), buf)
    assert buf.getvalue() == ",".join(trajectory_header(2)) + "\n"


def test_json_mirrors_fields(tmp_path, capsys):
    assert run(["simulate", "--n", "3", "--T", "1", "--samples", "4", "--format", "json"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert set(rec) == {"family", "n", "gamma", "t", "states", "H", "I", "P", "Q"}
    assert len(rec["t"]) == 4 and len(rec["states"][0]) == 6


def test_sphere_report_line(capsys):
    code = run(["sphere", "--target", "cpn1", "--n", "3", "--check-equivariance", "--samples", "100"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    val = float(next(l for l in lines if l.startswith("max_defect=")).split("=")[1])
    assert val < 1e-12


def test_sphere_area_and_calibration(capsys):
    assert run(["sphere", "--n", "4", "--target", "cpn2", "--area", "full"]) == 0
    out = capsys.readouterr().out
    assert abs(float(out.split("=")[1]) - np.pi) < 1e-6
    assert run(["sphere", "--n", "4", "--calibrate", "--area", "unit_disc"]) == 0
    out = capsys.readouterr().out
    area = float(out.splitlines()[-1].split("=")[1])
    assert abs(area - np.pi / 2) < 1e-7


@pytest.mark.parametrize(
    "argv, code",
    [
        (["bogus"], 64),
        (["simulate", "--n", "notanint"], 64),
        ([], 64),
        (["sphere", "--target", "cpn2", "--n", "5"], 1),
        (["simulate", "--init", "state", "--n", "2", "--state", "0,0,0,0"], 1),
        (["search", "--n", "3", "--gamma", "1,1,2", "--I", "1"], 1),
        (["search", "--n", "3"], 1),
        (["sphere", "--n", "3", "--area", "full", "--quad-tol", "1e-300"], 2),
        (["simulate", "--family", "bec", "--n", "2", "--init", "state", "--state", "0.5,0,2,0"], 1),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert run(argv) == code


def test_usage_text_on_error(capsys):
    assert run(["simulate", "--format", "xml"]) == 64
    assert "usage" in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": {"family": "euler", "n": 5}, "T": 0.5, "samples": 3}))
    assert run(["simulate", "--config", str(cfg), "--format", "json"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["n"] == 5 and len(rec["t"]) == 3
    assert run(["simulate", "--config", str(cfg), "--n", "3", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 3


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["simulate", "--config", str(cfg)]) == 64


def test_search_empty_is_success(capsys):
    code = run(["search", "--family", "euler", "--n", "3", "--I", "3", "--starts", "2",
                "--perturbation", "0", "--require-nontrivial", "--workers", "1"])
    assert code == 0
    assert json.loads(capsys.readouterr().out) == []


def test_search_records(capsys):
    code = run(["search", "--family", "euler", "--n", "3", "--I", "3", "--starts", "1",
                "--perturbation", "0", "--workers", "1"])
    assert code == 0
    (rec,) = json.loads(capsys.readouterr().out)
    assert rec["classification"] == "TrivialRelativeEquilibrium"
    assert rec["residual"] < 1e-9


def test_sweep_empty_levels(capsys):
    assert run(["sweep", "--n", "3", "--I", "3"]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_reduce_equilibrium(capsys):
    assert run(["reduce", "--family", "bec", "--n", "3", "--radius", "0.3", "--equilibrium",
                "--T", "2", "--samples", "9"]) == 0
    rec = json.loads(capsys.readouterr().out)
    eq = rec["equilibrium"]
    assert eq["residual"] < 1e-10
    assert abs(eq["omega"] - eq["phase_rate_omega"]) < 1e-8
    assert rec["fs_diameter"] < 1e-10


# thin shell: CLI output equals the library call

def test_simulate_matches_library(tmp_path):
    out = tmp_path / "a.csv"
    assert run(["simulate", "--n", "4", "--init", "random", "--seed", "3", "--T", "2",
                "--samples", "5", "--out", str(out)]) == 0
    from vortex_chorus.hamiltonians import random_state

    spec = SystemSpec.euler(4)
    z0 = random_state(4, np.random.default_rng(3), 1.0, min_sep=0.3)
    buf = io.StringIO()
    export_trajectory(flow(spec, z0, 2.0, tol=1e-10, samples=5), buf)
    assert out.read_text() == buf.getvalue()


def test_analyze_matches_library(capsys):
    assert run(["analyze", "trap", "--alpha", "0.3", "--beta", "0.7", "--n", "4"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["coefficient"] == analysis.polygon_trap_coefficient(0.3, 0.7, 4)
    assert run(["analyze", "maximality", "--n", "5", "--trials", "200", "--seed", "2"]) == 0
    rec = json.loads(capsys.readouterr().out)
    lib = analysis.ngon_maximality_test(5, 1.0, 200, 2)
    assert rec["passed"] is True and rec["margin"] == lib.margin


def test_analyze_probe_and_shub(capsys):
    from vortex_chorus.hamiltonians import energy

    c = energy(SystemSpec.euler(4), regular_polygon(4)) + 0.05
    assert run(["analyze", "probe", "--n", "4", "--I", "4", "--c", repr(c), "--samples", "3"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["success_rate"] == 1.0
    assert run(["analyze", "probe", "--n", "4", "--I", "4", "--c", repr(c - 0.1)]) == 1
    assert run(["analyze", "trap", "--n", "3"]) == 1
    assert run(["analyze", "shub", "--n", "3", "--I", "0.3", "--starts", "10"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["passed"] and rec["converged"] > 0


def test_sphere_matches_library(capsys):
    assert run(["sphere", "--n", "6", "--check-equivariance", "--samples", "20", "--seed", "4"]) == 0
    line = capsys.readouterr().out.splitlines()[0]
    s = spheres.SphereMap.make(6, "cpn1")
    lib = spheres.equivariance_defect(s, list(spheres.random_points(20, 4)))
    assert line == f"max_defect={lib:.6e}"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vortex_chorus", "sphere", "--n", "3",
                           "--check-equivariance"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("max_defect=")
