import copy

import numpy as np
import pytest
from scipy import integrate

from cdnozzle.errors import ConfigError
from cdnozzle.problem import (BUMPS, bump, cosine_bump, load_and_validate, scaled_config, shape_function)

from conftest import unit_background_config


def test_bump_shapes_and_derivatives():
    x = np.linspace(0.05, 0.95, 301)
    for f in BUMPS.values():
        phi, d1, d2 = f(x, 0.5, 0.3)
        assert f(0.5, 0.5, 0.3)[0] == pytest.approx(1.0)
        h = 1e-5
        np.testing.assert_allclose(d1, (f(x + h, 0.5, 0.3)[0] - f(x - h, 0.5, 0.3)[0]) / (2 * h), atol=1e-6)
        np.testing.assert_allclose(d2, (f(x + h, 0.5, 0.3)[1] - f(x - h, 0.5, 0.3)[1]) / (2 * h), atol=1e-4)
        assert np.all(phi[np.abs(x - 0.5) >= 0.3] == 0)
    assert bump(0.9, 0.5, 0.3)[0] == 0.0 and cosine_bump(0.9, 0.5, 0.3)[0] == 0.0


def test_shape_function_kinds():
    f, df = shape_function(np.array([0.0, 0.5, 1.0]), "uniform")
    np.testing.assert_array_equal(f, 1.0)
    np.testing.assert_array_equal(df, 0.0)
    with pytest.raises(ConfigError):
        shape_function(0.5, "zigzag")


def test_unit_problem_loads():
    p = load_and_validate(unit_background_config())
    assert p.gas.gamma == 1.4 and p.cfg.N2 == 32
    assert p.sigma == 0.0
    for layer in ("minus", "plus"):
        d = p.inlet_data()[layer]
        np.testing.assert_array_equal(d.Zhat, 0.0)


@pytest.mark.parametrize("mutate, match", [
    (lambda c: c.pop("geometry"), "geometry"),
    (lambda c: c.update(extra=1), "unknown keys"),
    (lambda c: c["solver"].update(N2=4), "N2"),
    (lambda c: c["solver"].update(cfl=1.5), "cfl"),
    (lambda c: c["solver"].update(mode="explicit"), "mode"),
    (lambda c: c["solver"].update(coriolis_factor=0.5), "coriolis"),
    (lambda c: c["gas"].update(gamma=0.9), "gamma"),
    (lambda c: c["background"].update(Pbar="high"), "number"),
    (lambda c: c["background"].update(Pbar=-1.0), "Pbar"),
    (lambda c: c["geometry"].update(L=0.0), "L"),
    (lambda c: c["inlet"].update(perturbation={"T": {"amplitude": 1.0}}), "unknown keys"),
    (lambda c: c["inlet"].update(perturbation={"P": {"amplitude": 0.01, "layers": ["top"]}}), "layers"),
    (lambda c: c["inlet"].update(perturbation={"P": {"amplitude": 0.01, "shape": "spike"}}), "shape"),
])
def test_config_errors(mutate, match):
    c = unit_background_config()
    mutate(c)
    with pytest.raises(ConfigError, match=match):
        load_and_validate(c)


def test_crossing_walls_rejected():
    c = unit_background_config()
    c["geometry"]["wall_plus"] = {"kind": "cosine", "amplitude": 1.2, "center": 0.5, "width": 0.3}
    c["geometry"]["wall_minus"] = {"kind": "cosine", "amplitude": 1.2, "center": 0.5, "width": 0.3}
    with pytest.raises(ConfigError):
        load_and_validate(c)


def test_incompatible_inlet_rejected():
    c = unit_background_config()
    # uniform pressure offset on one layer only: pressure jumps at the interface
    c["inlet"]["perturbation"] = {"P": {"amplitude": 0.01, "shape": "uniform", "layers": ["plus"]}}
    with pytest.raises(ConfigError, match="contact discontinuity"):
        load_and_validate(c)
    c["inlet"]["perturbation"] = {"u2": {"amplitude": 0.01, "shape": "uniform", "layers": ["plus"]}}
    with pytest.raises(ConfigError, match="incompatible"):
        load_and_validate(c)


def test_subsonic_inlet_rejected():
    c = unit_background_config()
    c["inlet"]["perturbation"] = {"u1": {"amplitude": -1.0, "shape": "cosine", "center": 0.5, "width": 0.3}}
    with pytest.raises(ConfigError, match="supersonic"):
        load_and_validate(c)


def test_mass_correction_restores_flux(demo_problem):
    inlet = demo_problem.inlet
    assert inlet.mass_correction["minus"] != 0.0
    assert inlet.mass_correction["plus"] == 0.0
    for layer in ("minus", "plus"):
        assert inlet.mass_flux(layer) == pytest.approx(demo_problem.bg.m(layer), rel=1e-12)


def test_mass_correction_keeps_boundary_data(demo_problem):
    inlet, bg = demo_problem.inlet, demo_problem.bg
    for x in (-1.0, -0.04, 0.0):
        s = inlet.evaluate(x, "minus")
        assert float(s.rho) == pytest.approx(float(bg.rho(x, "minus")), rel=1e-14)


def test_inlet_derivative_matches_finite_differences(demo_problem):
    inlet = demo_problem.inlet
    h = 1e-6
    for layer, x in (("minus", np.linspace(-0.95, -0.05, 19)), ("plus", np.linspace(0.05, 0.95, 19))):
        d = inlet.derivative(x, layer)
        sp, sm = inlet.evaluate(x + h, layer), inlet.evaluate(x - h, layer)
        for k, name in enumerate(("rho", "u1", "u2", "P")):
            fd = (getattr(sp, name) - getattr(sm, name)) / (2 * h)
            np.testing.assert_allclose(d[k], fd, rtol=1e-6, atol=1e-6 * max(1.0, np.max(np.abs(fd))))


def test_lagrangian_inlet_spans_layers(demo_problem):
    data = demo_problem.inlet_data(64)
    bg = demo_problem.bg
    for layer in ("minus", "plus"):
        d = data[layer]
        assert d.y2[0] == pytest.approx(bg.y2_span(layer)[0]) and d.y2[-1] == pytest.approx(bg.y2_span(layer)[1])
        assert np.all(np.diff(d.x2) > 0)
        # mass coordinate of each node reproduced by quadrature of rho u1
        inlet = demo_problem.inlet
        k = 20
        val, _ = integrate.quad(lambda s: float(inlet.evaluate(s, layer).rho * inlet.evaluate(s, layer).u1),
                                0.0, float(d.x2[k]), epsabs=1e-12)
        assert val == pytest.approx(float(d.y2[k]), rel=1e-9, abs=1e-9)


def test_unperturbed_inlet_is_background_image(background_problem):
    data = background_problem.inlet_data(32)
    for layer in ("minus", "plus"):
        d = data[layer]
        b = background_problem.bg.at(d.y2, layer)
        np.testing.assert_array_equal(d.Z1, b.Z1)
        np.testing.assert_allclose(d.x2, b.x2, atol=1e-14)


def test_sigma_homogeneity(demo_config, demo_problem):
    s1 = demo_problem.sigma
    assert s1 > 0
    s_half = load_and_validate(scaled_config(demo_config, 0.5)).sigma
    assert s_half == pytest.approx(0.5 * s1, rel=1e-3)
    assert load_and_validate(scaled_config(demo_config, 0.0)).sigma == pytest.approx(0.0, abs=1e-10)


def test_scaled_config_leaves_original(demo_config):
    c = copy.deepcopy(demo_config)
    s = scaled_config(c, 2.0)
    assert c == demo_config
    assert s["geometry"]["wall_plus"]["amplitude"] == 2 * demo_config["geometry"]["wall_plus"]["amplitude"]


def test_with_solver(demo_problem):
    p = demo_problem.with_solver(N2=64)
    assert p.cfg.N2 == 64 and p.bg is demo_problem.bg
    q = demo_problem.with_solver(coriolis_factor=0)
    assert q.bg.coriolis == 0.0
    with pytest.raises(ConfigError):
        demo_problem.with_solver(picard_max=0)
