import json

import numpy as np
import pytest
import yaml

from cdnozzle.cli import main
from cdnozzle.io import FIELD_COLUMNS, check_manifest, read_solution, read_table

from conftest import unit_background_config


def write_config(path, amplitude=1e-4, **solver):
    c = unit_background_config(**solver)
    c["geometry"]["wall_minus"] = {"kind": "cosine", "amplitude": amplitude, "center": 0.5, "width": 0.4}
    path.write_text(yaml.safe_dump(c))
    return str(path)


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = write_config(d / "case.yaml")
    assert main(["solve", "--config", cfg, "--out", str(d / "run")]) == 0
    return d, cfg


def test_solve_writes_manifest(solved):
    d, _ = solved
    run = d / "run"
    m = json.loads((run / "manifest.json").read_text())
    assert set(m["files"]) == {"field_minus.csv", "field_plus.csv", "cd_trace.csv", "history.csv", "config.yaml"}
    assert m["solver"]["converged"] and m["grid"]["N2"] == 32
    assert m["inlet"]["mass_correction"] == {"minus": 0.0, "plus": 0.0}
    assert check_manifest(run) == []
    t = read_table(run / "field_plus.csv", FIELD_COLUMNS)
    assert t["y1"].size == (m["grid"]["N1"] + 1) * 33


def test_solve_is_deterministic(solved):
    d, cfg = solved
    assert main(["solve", "--config", cfg, "--out", str(d / "again")]) == 0
    for name in ("field_minus.csv", "field_plus.csv", "cd_trace.csv", "history.csv"):
        assert (d / "run" / name).read_bytes() == (d / "again" / name).read_bytes()


def test_roundtrip_preserves_field(solved):
    d, _ = solved
    problem, sol, _ = read_solution(d / "again")
    assert sol.iterations == len(sol.history)
    assert np.max(np.abs(sol.Zhat["minus"])) > 0


def test_verify_pass_and_tamper(solved, capsys):
    d, _ = solved
    assert main(["verify", str(d / "run")]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert json.loads((d / "run" / "report.json").read_text())["passed"]
    assert check_manifest(d / "run") == []
    # perturb the stored pressure: the field no longer solves the equations
    path = d / "again" / "field_plus.csv"
    lines = path.read_text().splitlines()
    cols = lines[0].split(",")
    k = cols.index("P")
    for r in range(1, len(lines), 7):
        v = lines[r].split(",")
        v[k] = repr(float(v[k]) * 1.001)
        lines[r] = ",".join(v)
    path.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--out", str(d / "again")]) == 5
    err = capsys.readouterr().err
    assert "manifest_checksums" in err and "residual_transformed" in err


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("gas: [1, 2\n")
    assert main(["solve", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    c = unit_background_config()
    c["solver"]["cfl"] = 3.0
    bad.write_text(yaml.safe_dump(c))
    assert main(["solve", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["verify", str(tmp_path / "missing")]) == 2
    assert "error" in capsys.readouterr().err


def test_iteration_error_exit_3(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", picard_max=2)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_breakdown_exit_4(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", amplitude=0.05)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 4
    assert "PerturbationTooLargeError" in capsys.readouterr().err


def test_bundled_config_name(tmp_path):
    assert main(["solve", "--config", "background", "--out", str(tmp_path / "bg")]) == 0
    assert main(["verify", str(tmp_path / "bg")]) == 0


def test_study_commands(tmp_path):
    cfg = write_config(tmp_path / "c.yaml")
    assert main(["study", "stability", "--config", cfg, "--out", str(tmp_path / "s"),
                 "--amplitudes", "0.25,0.5,1"]) == 0
    rep = json.loads((tmp_path / "s" / "report.json").read_text())
    assert 0.9 <= rep["slope"] <= 1.1
    assert (tmp_path / "s" / "stability.csv").is_file()
    assert main(["study", "convergence", "--config", cfg, "--out", str(tmp_path / "c"), "--grids", "16,32,64"]) == 0
    assert check_manifest(tmp_path / "c") == []
    with pytest.raises(SystemExit):
        main(["study", "convergence", "--config", cfg, "--out", str(tmp_path / "c"), "--grids", "a,b"])
