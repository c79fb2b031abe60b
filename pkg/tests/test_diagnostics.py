import copy
import json

import numpy as np
import pytest

from cdnozzle.diagnostics import (DiagnosticsReport, boundary_checks, convergence_study, fitted_order,
                                  hyperbolicity, invariants_at_nodes, physical_residual, residual_transformed,
                                  stability_study, streamline_invariants, verify_field)
from cdnozzle.gasdyn import PrimitiveState
from cdnozzle.io import _jsonable
from cdnozzle.lagrangian import to_physical_field
from cdnozzle.problem import load_and_validate
from cdnozzle.solver import picard_solve

from conftest import unit_background_config


def bump_config(amplitude=1e-4):
    c = unit_background_config()
    c["geometry"]["wall_minus"] = {"kind": "cosine", "amplitude": amplitude, "center": 0.5, "width": 0.4}
    return c


def test_fitted_order():
    h = np.array([0.1, 0.05, 0.025])
    assert fitted_order(h, 3 * h ** 2) == pytest.approx(2.0, abs=1e-12)
    assert np.isnan(fitted_order(h[:2], h[:2]))
    assert np.isnan(fitted_order(h, [1.0, 0.0, -1.0]))


def test_background_diagnostics(background_problem, background_solution):
    rep = verify_field(background_solution, background_problem)
    assert rep.passed, rep.failed
    assert rep.residual_transformed["relative"] < 1e-10
    assert rep.physical_residual["sup"] <= 1e-8
    b = rep.boundary
    assert max(b["cd_pressure_jump"], b["cd_slope_jump"], b["wall_slip"], b["g_cd_slope_defect"]) <= 1e-12
    assert rep.conservation["streamlines"]["sup"] < 1e-10


def test_demo_verify_passes(demo_problem, demo_solution):
    rep = verify_field(demo_solution, demo_problem)
    assert rep.passed, rep.failed
    names = {c.name for c in rep.checks}
    assert {"hyperbolicity", "residual_transformed", "cd_pressure_jump", "cd_slope_jump", "wall_slip",
            "g_cd_at_inlet", "invariants_at_nodes"} <= names
    d = rep.to_dict()
    json.dumps(d, default=_jsonable)
    assert "field" not in d["residual_transformed"]


def test_boundary_checks_demo(demo_problem, demo_solution):
    b = boundary_checks(demo_solution, demo_problem)
    assert b["cd_pressure_jump"] <= 1e-8 and b["cd_slope_jump"] <= 1e-8
    assert b["wall_slip"] <= 1e-10
    assert b["g_cd_slope_constant"] == pytest.approx(b["g_cd_slope_defect"] / demo_solution.grid.dy1 ** 2)


def test_fault_injection_detected(demo_problem, demo_solution):
    bad = copy.copy(demo_solution)
    rng = np.random.default_rng(0)
    s = bad.state["plus"]
    bad.state = {**bad.state, "plus": PrimitiveState(s.rho, s.u1, s.u2, s.P * (1 + 1e-3 * rng.normal(size=s.P.shape)))}
    rep = verify_field(bad, demo_problem)
    assert not rep.passed
    assert {"residual_transformed", "cd_pressure_jump", "invariants_at_nodes"} <= set(rep.failed)


def test_residuals_see_wrong_physics(demo_problem, demo_solution):
    # the same field judged without the Coriolis term must look much worse
    good = physical_residual(to_physical_field(demo_solution, demo_problem.geom, 1.0), 1.4)
    wrong = physical_residual(to_physical_field(demo_solution, demo_problem.geom, 0.0), 1.4)
    assert wrong["relative"] > 10 * good["relative"]
    r = residual_transformed(demo_solution, demo_problem)
    assert r["where"] is not None and r["relative"] == pytest.approx(r["sup"] / r["scale"])


def test_invariants_and_hyperbolicity(demo_problem, demo_solution):
    assert invariants_at_nodes(demo_solution, demo_problem.gas)["sup"] < 1e-12
    h = hyperbolicity(demo_solution, demo_problem.gas)
    assert h["ok"] and h["max_lambda1"] < 0 < h["min_lambda2"]
    phys = to_physical_field(demo_solution, demo_problem.geom)
    assert streamline_invariants(phys, demo_solution.B, demo_solution.A, 1.4)["sup"] < 1e-6


def test_hyperbolicity_flags_subsonic(demo_problem, demo_solution):
    bad = copy.copy(demo_solution)
    s = bad.state["minus"]
    bad.state = {**bad.state, "minus": PrimitiveState(s.rho, 0.1 * s.u1, s.u2, s.P)}
    assert not hyperbolicity(bad, demo_problem.gas)["ok"]


def test_report_add():
    r = DiagnosticsReport()
    r.add("a", 1.0, 2.0)
    r.add("b", 3.0, 2.0)
    r.add("c", 3.0, 2.0, ok=True)
    assert not r.passed and r.failed == ["b"]


def test_small_stability_study():
    res = stability_study(bump_config(), [0.25, 0.5, 1.0])
    assert len(res["rows"]) == 3 and not res["excluded"]
    assert 0.9 <= res["slope"] <= 1.1
    assert all(1.8 <= q["ratio"] <= 2.2 for q in res["ratios"])
    assert res["sigma_span"] == pytest.approx(4.0, rel=1e-3)


def test_stability_study_excludes_breakdown():
    with pytest.warns(RuntimeWarning, match="excluded"):
        res = stability_study(bump_config(), [0.5, 1.0, 500.0])
    assert [e["amplitude"] for e in res["excluded"]] == [500.0]


def test_small_convergence_study():
    p = load_and_validate(bump_config())
    res = convergence_study(p, (16, 32, 64))
    assert len(res["rows"]) == 3
    assert res["orders"]["residual"] > 1.5
    assert res["orders"]["streamline_drift"] > 1.5
    assert all(r["gap"] > 0 for r in res["rows"]) and res["passed"]
    with pytest.raises(ValueError):
        convergence_study(p, (16, 24))


def test_uniform_background_without_coriolis():
    p = load_and_validate(unit_background_config(0.0))
    sol = picard_solve(p)
    phys = to_physical_field(sol, p.geom, 0.0)
    for k in ("minus", "plus"):
        assert np.ptp(phys.rho[k]) < 1e-14 and np.ptp(phys.P[k]) < 1e-14
    assert physical_residual(phys, 1.4)["sup"] < 1e-12


def test_corrupted_cd_trace_located(demo_problem, demo_solution):
    bad = copy.copy(demo_solution)
    s = bad.state["plus"]
    P = s.P.copy()
    P[57, 0] *= 1 + 1e-6
    bad.state = {**bad.state, "plus": PrimitiveState(s.rho, s.u1, s.u2, P)}
    b = boundary_checks(bad, demo_problem)
    assert b["cd_pressure_jump"] > 1e-5
    assert b["cd_pressure_jump_at_y1"] == pytest.approx(demo_solution.grid.y1[57])


def test_zero_amplitude_stability_point():
    res = stability_study(bump_config(), [0.0, 0.5, 1.0])
    zero = [r for r in res["rows"] if r["amplitude"] == 0.0][0]
    assert zero["sigma"] == 0.0 and zero["deviation"] <= 1e-10
