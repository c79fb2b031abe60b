import numpy as np
import pytest

from cdnozzle.background import (BackgroundSpec, VelocityProfile, background_riemann, build_background,
                                 lagrangian_background_state, mass_flux_quadrature)
from cdnozzle.errors import ConfigError, DomainError
from cdnozzle.gasdyn import ThermoInvariants, d_matrix, source_H, source_H_state, eigenvalues, RiemannPair

from conftest import GAS


def unit_spec(coriolis=1.0, **kw):
    d = dict(gamma=1.4, Pbar=1.0, A_minus=1.2, A_plus=1.0, u_minus=VelocityProfile("constant", 2.2),
             u_plus=VelocityProfile("constant", 2.0), coriolis=coriolis)
    d.update(kw)
    return BackgroundSpec(**d)


@pytest.fixture(scope="module")
def unit_bg():
    return build_background(unit_spec())


@pytest.fixture(scope="module")
def shear_bg():
    return build_background(BackgroundSpec(1.4, 100.0, 40.0, 50.0, VelocityProfile("constant", 22.0),
                                           VelocityProfile("polynomial", coeffs=[20.0, 2.0])))


def test_unit_density_value(unit_bg):
    # (1 - 0.4/1.4 * 2 * 0.1)^(1/0.4)
    assert float(unit_bg.rho(0.1, "plus")) == pytest.approx(0.8632, abs=1e-4)
    assert float(unit_bg.rho(0.1, "plus")) == pytest.approx((1 - 0.4 / 1.4 * 0.2) ** 2.5, rel=1e-14)
    assert float(unit_bg.P(0.0, "plus")) == pytest.approx(1.0, abs=1e-15)
    assert float(unit_bg.P(0.0, "minus")) == pytest.approx(1.0, abs=1e-15)


def test_pressure_balance(shear_bg):
    x = np.linspace(0.02, 0.98, 50)
    for layer, xs in (("plus", x), ("minus", -x)):
        h = 1e-6
        dP = (shear_bg.P(xs + h, layer) - shear_bg.P(xs - h, layer)) / (2 * h)
        np.testing.assert_allclose(dP, -shear_bg.rho(xs, layer) * shear_bg.u(xs, layer), rtol=1e-7)


def test_mass_flux_closed_form_vs_quadrature(unit_bg, shear_bg):
    for bg in (unit_bg, shear_bg):
        for layer in ("minus", "plus"):
            assert bg.m(layer) == pytest.approx(mass_flux_quadrature(bg, layer), rel=1e-12)


def test_mass_coordinate_without_coriolis():
    bg = build_background(unit_spec(coriolis=0.0))
    # uniform density 1 in the plus layer, u = 2  ->  y2 = 2 x2
    assert float(bg.mass_coordinate(0.3, "plus")) == pytest.approx(0.6, abs=1e-14)
    np.testing.assert_allclose(bg.x2b(np.array([0.2, 1.0]), "plus"), [0.1, 0.5], atol=1e-14)


def test_x2b_roundtrip(shear_bg):
    for layer, x in (("minus", np.linspace(-1, 0, 41)), ("plus", np.linspace(0, 1, 41))):
        y = shear_bg.mass_coordinate(x, layer)
        np.testing.assert_allclose(shear_bg.x2b(y, layer), x, atol=1e-12)
    with pytest.raises(DomainError):
        shear_bg.x2b(shear_bg.m_plus * 1.01, "plus")


def test_lagrangian_images(shear_bg):
    y2 = np.linspace(0.0, shear_bg.m_plus, 33)
    s = lagrangian_background_state(y2, "plus", shear_bg)
    x2 = shear_bg.x2b(y2, "plus")
    np.testing.assert_allclose(s.P, shear_bg.P(x2, "plus"), rtol=1e-12)
    np.testing.assert_allclose(s.rho, shear_bg.rho(x2, "plus"), rtol=1e-12)
    np.testing.assert_allclose(s.P, 100.0 - y2, rtol=1e-14)
    z = background_riemann(y2, "plus", shear_bg)
    assert abs(float(z.Z1[0])) < 1e-13 and abs(float(z.Z2[0])) < 1e-13
    np.testing.assert_array_equal(z.Z1, -z.Z2)


def test_eigenvalue_symmetry(shear_bg):
    for layer in ("minus", "plus"):
        lo, hi = shear_bg.y2_span(layer)
        s = lagrangian_background_state(np.linspace(lo, hi, 17), layer, shear_bg)
        lam1, lam2 = eigenvalues(s, GAS)
        np.testing.assert_array_equal(lam1, -lam2)
        assert np.all(lam2 > 0)


def test_background_annihilates_source(shear_bg, unit_bg):
    for bg in (shear_bg, unit_bg):
        for layer in ("minus", "plus"):
            lo, hi = bg.y2_span(layer)
            b = bg.at(np.linspace(lo, hi, 65), layer)
            H = source_H(RiemannPair(b.Z1, b.Z2), ThermoInvariants(b.B, b.A), b, GAS)
            scale = float(np.max(np.abs(b.lam2 / (b.rho * b.u) / b.u)))
            assert np.max(np.abs(H[0])) <= 1e-12 * max(1.0, scale)
            assert np.max(np.abs(H[1])) <= 1e-12 * max(1.0, scale)


def test_d_matrix_richardson(shear_bg):
    b = shear_bg.at(np.linspace(0.0, shear_bg.m_plus, 9), "plus")
    D1 = d_matrix(b, GAS, 1e-4)
    D2 = d_matrix(b, GAS, 5e-5)
    D3 = d_matrix(b, GAS, 1e-6)
    rich = (4 * D2 - D1) / 3
    np.testing.assert_allclose(D3, rich, rtol=1e-6, atol=1e-9)


def test_source_H_state_default_slopes(shear_bg):
    b = shear_bg.at(np.linspace(0.0, shear_bg.m_plus, 5), "plus")
    s = b.state()
    H = source_H_state(s, eigenvalues(s, GAS), ThermoInvariants(b.B, b.A), b, GAS)
    assert np.max(np.abs(H[0])) < 1e-12 and np.max(np.abs(H[1])) < 1e-12


def test_subsonic_background_rejected():
    with pytest.raises(ConfigError, match="supersonic"):
        build_background(unit_spec(u_plus=VelocityProfile("constant", 1.0)))


def test_nonpositive_velocity_and_missing_jump():
    with pytest.raises(ConfigError, match="positive"):
        build_background(unit_spec(u_minus=VelocityProfile("polynomial", coeffs=[2.2, 3.0])))
    with pytest.raises(ConfigError, match="differ"):
        build_background(unit_spec(A_minus=1.0))
    assert build_background(unit_spec(A_minus=1.0), require_jump=False).m_minus > 0


def test_velocity_profiles():
    tab = VelocityProfile("table", x=[-1.0, 0.0, 1.0], u=[2.0, 2.2, 2.5])
    assert float(tab(0.0)) == pytest.approx(2.2)
    with pytest.raises(DomainError):
        tab(1.5)
    with pytest.raises(ConfigError):
        VelocityProfile("table", x=[0.0, 0.0], u=[1.0, 1.0])
    with pytest.raises(ConfigError):
        VelocityProfile.from_config({"kind": "constant", "value": 1.0, "bogus": 2})
    p = VelocityProfile.from_config({"kind": "polynomial", "coeffs": [1.0, 2.0]})
    assert float(p.integral(1.0)) == pytest.approx(2.0)
    assert float(p.deriv(0.3)) == pytest.approx(2.0)


def test_layer_names(unit_bg):
    assert unit_bg.m("-") == unit_bg.m_minus and unit_bg.m(1) == unit_bg.m_plus
    with pytest.raises(DomainError):
        unit_bg.m("middle")
