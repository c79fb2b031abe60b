"""Background shear flows with a flat contact discontinuity at x2 = 0.

Each layer carries a prescribed axial velocity u_b(x2) > 0 and a constant
entropy A_b; the transverse momentum balance P_b' = -f rho_b u_b (f is the
Coriolis factor) then fixes density and pressure.  In mass coordinates the
pressure is exactly linear: P_b(y2) = Pbar - f y2, which makes the
Lagrangian images cheap and accurate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, DomainError
from .gasdyn import GasConstants, PrimitiveState, RiemannPair, prandtl_meyer

LAYERS = ("minus", "plus")
_SPAN = {"minus": (-1.0, 0.0), "plus": (0.0, 1.0)}


def _layer(layer) -> str:
    key = {"-": "minus", "+": "plus", -1: "minus", 1: "plus", 0: "minus"}.get(layer, layer)
    if key not in LAYERS:
        raise DomainError(f"unknown layer {layer!r}")
    return key


class VelocityProfile:
    """Axial velocity u(x2) with derivative and the integral from 0."""

    def __init__(self, kind="constant", value=None, coeffs=None, x=None, u=None):
        self.kind = kind
        if kind == "constant":
            if value is None:
                raise ConfigError("constant velocity profile needs 'value'")
            self._poly = Polynomial([float(value)])
        elif kind == "polynomial":
            if not coeffs:
                raise ConfigError("polynomial velocity profile needs 'coeffs'")
            self._poly = Polynomial([float(c) for c in coeffs])
        elif kind == "table":
            if x is None or u is None or len(x) != len(u) or len(x) < 2:
                raise ConfigError("table velocity profile needs equal-length 'x' and 'u' (>= 2 points)")
            x = np.asarray(x, float)
            if np.any(np.diff(x) <= 0):
                raise ConfigError("table velocity profile 'x' must be strictly increasing")
            self._poly = None
            self._interp = PchipInterpolator(x, np.asarray(u, float), extrapolate=False)
            self._d = self._interp.derivative()
            self._int = self._interp.antiderivative()
            self._x = x
        else:
            raise ConfigError(f"unknown velocity profile kind {kind!r}")
        self._spec = dict(kind=kind, value=value, coeffs=coeffs,
                          x=None if x is None else list(map(float, x)),
                          u=None if u is None else list(map(float, u)))

    @classmethod
    def from_config(cls, d):
        if isinstance(d, (int, float)):
            return cls("constant", value=float(d))
        if not isinstance(d, dict):
            raise ConfigError("velocity profile must be a number or a mapping")
        known = {"kind", "value", "coeffs", "x", "u"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown velocity profile keys {sorted(extra)}")
        return cls(**d)

    def to_config(self):
        return {k: v for k, v in self._spec.items() if v is not None}

    def _table_check(self, x):
        x = np.asarray(x, float)
        if np.any(x < self._x[0] - 1e-12) or np.any(x > self._x[-1] + 1e-12):
            raise DomainError("x2 outside the tabulated velocity profile")
        return np.clip(x, self._x[0], self._x[-1])

    def __call__(self, x):
        if self._poly is not None:
            return self._poly(np.asarray(x, float))
        return self._interp(self._table_check(x))

    def deriv(self, x, order=1):
        if self._poly is not None:
            return self._poly.deriv(order)(np.asarray(x, float))
        if order == 1:
            return self._d(self._table_check(x))
        return self._interp.derivative(order)(self._table_check(x))

    def integral(self, x):
        """Integral of u from 0 to x."""
        if self._poly is not None:
            P = self._poly.integ()
            return P(np.asarray(x, float)) - P(0.0)
        xx = self._table_check(x)
        return self._int(xx) - self._int(0.0)


@dataclass
class BackgroundSpec:
    gamma: float
    Pbar: float
    A_minus: float
    A_plus: float
    u_minus: VelocityProfile
    u_plus: VelocityProfile
    coriolis: float = 1.0

    def A(self, layer):
        return self.A_minus if _layer(layer) == "minus" else self.A_plus

    def u(self, layer):
        return self.u_minus if _layer(layer) == "minus" else self.u_plus


@dataclass
class BackgroundSample:
    """Background state at mass coordinates y2 of one layer (all arrays broadcast with y2)."""

    layer: str
    y2: np.ndarray
    x2: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    P: np.ndarray
    c: np.ndarray
    B: np.ndarray
    A: np.ndarray
    dB: np.ndarray
    lam2: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    nu_ref: float
    coriolis: float

    def state(self) -> PrimitiveState:
        return PrimitiveState(self.rho, self.u, np.zeros_like(self.u), self.P)

    def riemann(self) -> RiemannPair:
        return RiemannPair(self.Z1, self.Z2)


@dataclass
class BackgroundFlow:
    spec: BackgroundSpec
    gas: GasConstants
    m_minus: float
    m_plus: float
    nu_ref: dict = field(default_factory=dict)
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def Pbar(self):
        return self.spec.Pbar

    @property
    def coriolis(self):
        return self.spec.coriolis

    def m(self, layer):
        return self.m_minus if _layer(layer) == "minus" else self.m_plus

    def y2_span(self, layer):
        return (-self.m_minus, 0.0) if _layer(layer) == "minus" else (0.0, self.m_plus)

    # -- physical profiles -------------------------------------------------
    def _base(self, x2, layer):
        gm, A, f = self.gas.gamma, self.spec.A(layer), self.spec.coriolis
        return (self.spec.Pbar / A) ** ((gm - 1.0) / gm) - f * (gm - 1.0) / (gm * A) * self.spec.u(layer).integral(x2)

    def rho(self, x2, layer):
        base = self._base(x2, layer)
        if np.any(np.logical_not(base > 0)):
            raise DomainError("background density undefined (nonpositive base)")
        return base ** (1.0 / (self.gas.gamma - 1.0))

    def P(self, x2, layer):
        return self.spec.A(layer) * self.rho(x2, layer) ** self.gas.gamma

    def u(self, x2, layer):
        return self.spec.u(layer)(x2)

    def c(self, x2, layer):
        return np.sqrt(self.gas.gamma * self.P(x2, layer) / self.rho(x2, layer))

    def B(self, x2, layer):
        gm = self.gas.gamma
        return 0.5 * self.u(x2, layer) ** 2 + gm * self.P(x2, layer) / ((gm - 1.0) * self.rho(x2, layer))

    def state(self, x2, layer) -> PrimitiveState:
        u = self.u(x2, layer)
        return PrimitiveState(self.rho(x2, layer), u, np.zeros_like(u), self.P(x2, layer))

    def mass_coordinate(self, x2, layer):
        """y2 = integral of rho_b u_b from 0 to x2 (closed form through the pressure balance)."""
        layer = _layer(layer)
        f = self.spec.coriolis
        if f != 0.0:
            return (self.spec.Pbar - self.P(x2, layer)) / f
        return self.rho(0.0, layer) * self.spec.u(layer).integral(x2)

    def x2b(self, y2, layer):
        """Inverse of ``mass_coordinate`` on the layer."""
        layer = _layer(layer)
        y2 = np.asarray(y2, float)
        lo, hi = self.y2_span(layer)
        tol = 1e-12 * max(1.0, hi - lo)
        if np.any(y2 < lo - tol) or np.any(y2 > hi + tol):
            raise DomainError(f"y2 outside [{lo:.6g}, {hi:.6g}] for layer {layer}")
        y2 = np.clip(y2, lo, hi)
        gm, A, f = self.gas.gamma, self.spec.A(layer), self.spec.coriolis
        prof = self.spec.u(layer)
        if f != 0.0:
            Pt = self.spec.Pbar - f * y2
            target = ((self.spec.Pbar / A) ** ((gm - 1.0) / gm) - (Pt / A) ** ((gm - 1.0) / gm)) * gm * A / ((gm - 1.0) * f)
        else:
            target = y2 / self.rho(0.0, layer)
        xs, Us = self._tables[layer]
        x = np.interp(target, Us, xs)
        a, b = _SPAN[layer]
        for _ in range(6):
            x = np.clip(x - (prof.integral(x) - target) / prof(x), a, b)
        return x

    # -- Lagrangian images ------------------------------------------------
    def at(self, y2, layer) -> BackgroundSample:
        layer = _layer(layer)
        y2 = np.asarray(y2, float)
        gm, A, f = self.gas.gamma, self.spec.A(layer), self.spec.coriolis
        x2 = self.x2b(y2, layer)
        Pt = self.spec.Pbar - f * y2 if f != 0.0 else np.full_like(y2, self.spec.Pbar)
        rho = (Pt / A) ** (1.0 / gm)
        u = self.spec.u(layer)(x2)
        c = np.sqrt(gm * Pt / rho)
        B = 0.5 * u ** 2 + gm * Pt / ((gm - 1.0) * rho)
        dB = (self.spec.u(layer).deriv(x2) - f) / rho
        lam2 = rho * u * c / np.sqrt(u ** 2 - c ** 2)
        Lam = self.nu_ref[layer] - prandtl_meyer(u / c, self.gas)
        return BackgroundSample(layer=layer, y2=y2, x2=x2, rho=rho, u=u, P=Pt, c=c, B=B,
                                A=np.full_like(y2, A), dB=dB, lam2=lam2, Z1=-Lam, Z2=Lam,
                                nu_ref=self.nu_ref[layer], coriolis=f)

    def cd_invariants(self, layer):
        """(B, A) of the background on the contact discontinuity."""
        return float(self.B(0.0, layer)), float(self.spec.A(layer))


def build_background(spec: BackgroundSpec, n_check: int = 4001, require_jump: bool = True) -> BackgroundFlow:
    """Construct and validate the two background layers."""
    g = GasConstants(spec.gamma)
    if not (spec.Pbar > 0):
        raise ConfigError("background.Pbar must be positive")
    if not (spec.A_minus > 0 and spec.A_plus > 0):
        raise ConfigError("background entropy constants must be positive")
    if require_jump and spec.A_minus == spec.A_plus:
        raise ConfigError("A_minus must differ from A_plus (no contact discontinuity otherwise)")
    bg = BackgroundFlow(spec=spec, gas=g, m_minus=0.0, m_plus=0.0)
    gm = g.gamma
    for layer in LAYERS:
        a, b = _SPAN[layer]
        xs = np.linspace(a, b, n_check)
        u = spec.u(layer)(xs)
        if np.any(~np.isfinite(u)) or np.any(np.logical_not(u > 0)):
            k = int(np.flatnonzero(np.logical_not(u > 0))[0])
            raise ConfigError(f"background u_{layer} must be positive: fails at x2={xs[k]:.6g}")
        c2 = gm * spec.A(layer) ** (1.0 / gm) * spec.Pbar ** ((gm - 1.0) / gm) \
            - spec.coriolis * (gm - 1.0) * spec.u(layer).integral(xs)
        bad = np.logical_not((c2 > 0) & (c2 < u ** 2))
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise ConfigError(f"background layer {layer} is not supersonic at x2={xs[k]:.6g} "
                              f"(c^2={c2[k]:.6g}, u^2={u[k] ** 2:.6g})")
        bg._tables[layer] = (xs, spec.u(layer).integral(xs))
    y_lo = bg.mass_coordinate(-1.0, "minus")
    y_hi = bg.mass_coordinate(1.0, "plus")
    bg.m_minus, bg.m_plus = float(-y_lo), float(y_hi)
    for layer in LAYERS:
        M0 = spec.u(layer)(0.0) / bg.c(0.0, layer)
        bg.nu_ref[layer] = float(prandtl_meyer(M0, g))
    return bg


def mass_flux_quadrature(bg: BackgroundFlow, layer) -> float:
    """Layer mass flux by adaptive quadrature (independent of the closed form)."""
    layer = _layer(layer)
    a, b = _SPAN[layer]
    val, _ = integrate.quad(lambda s: float(bg.rho(s, layer) * bg.u(s, layer)), a, b,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def lagrangian_background_state(y2, layer, bg: BackgroundFlow) -> PrimitiveState:
    return bg.at(y2, layer).state()


def background_riemann(y2, layer, bg: BackgroundFlow) -> RiemannPair:
    return bg.at(y2, layer).riemann()
