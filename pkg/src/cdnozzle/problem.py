"""Problem setup: configuration, nozzle walls, inlet data and its Lagrangian image.

A configuration is a nested mapping (normally read from YAML)::

    gas:        {gamma}
    background: {Pbar, A_minus, A_plus, u_profile_minus, u_profile_plus}
    geometry:   {L, wall_minus, wall_plus}
    inlet:      {perturbation: {<var>: {amplitude, shape, ...}}}
    solver:     {N2, N1, cfl, picard_tol, picard_max, delta_max, mode, coriolis_factor}

Walls are g+ = 1 - a*phi(x1), g- = -1 + a*phi(x1) with a smooth bump phi,
so a > 0 narrows the channel.  Inlet perturbations are added to the
background primitives, with shapes written in the layer coordinate
s = |x2| in [0, 1].  Density or axial-velocity perturbations change the
layer mass flux; it is restored by a density correction supported strictly
inside the layer, so the data still match the background near the walls and
the contact discontinuity.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .background import LAYERS, BackgroundFlow, BackgroundSpec, VelocityProfile, build_background
from .errors import ConfigError, DomainError
from .gasdyn import (GasConstants, PrimitiveState, invariants_of_state,
                     riemann_from_primitive)

COMPAT_TOL = 1e-10
VARIABLES = ("rho", "u1", "u2", "P")
MASS_CORRECTION_SUPPORT = (0.5, 0.45)   # (center, half-width) of psi in |x2|


# ---------------------------------------------------------------------------
# smooth shapes

def bump(x, center=0.5, width=0.25):
    """C-infinity bump exp(1 - 1/(1 - r^2)), r = (x - center)/width; value 1 at the centre.

    Returns (phi, phi', phi'') with derivatives in x.
    """
    x = np.asarray(x, float)
    r = (x - center) / width
    inside = np.abs(r) < 1.0
    t = np.where(inside, 1.0 - r ** 2, 1.0)
    phi = np.where(inside, np.exp(1.0 - 1.0 / t), 0.0)
    d1 = np.where(inside, -2.0 * r * phi / t ** 2, 0.0) / width
    d2 = np.where(inside, phi * (-2.0 / t ** 2 + 4.0 * r ** 2 / t ** 4 - 8.0 * r ** 2 / t ** 3), 0.0) / width ** 2
    return phi, d1, d2


def cosine_bump(x, center=0.5, width=0.25):
    """C^3 bump cos^4(pi r / 2), r = (x - center)/width; value 1 at the centre.

    Gentler than ``bump`` (max |phi''| ~ 2.5/width^2 instead of ~21/width^2),
    so it is resolved on coarse grids; used where grid convergence is measured.
    Returns (phi, phi', phi'') with derivatives in x.
    """
    x = np.asarray(x, float)
    r = (x - center) / width
    inside = np.abs(r) < 1.0
    a = 0.5 * np.pi
    c, s = np.cos(a * r), np.sin(a * r)
    phi = np.where(inside, c ** 4, 0.0)
    d1 = np.where(inside, -4.0 * a * c ** 3 * s, 0.0) / width
    d2 = np.where(inside, 4.0 * a * a * (3.0 * c ** 2 * s ** 2 - c ** 4), 0.0) / width ** 2
    return phi, d1, d2


BUMPS = {"bump": bump, "cosine": cosine_bump}


def shape_function(s, shape="bump", center=0.5, width=0.25):
    """Perturbation shape on s in [0, 1] with its first derivative."""
    s = np.asarray(s, float)
    if shape in BUMPS:
        phi, d1, _ = BUMPS[shape](s, center, width)
        return phi, d1
    if shape == "uniform":
        return np.ones_like(s), np.zeros_like(s)
    if shape == "sine":
        return np.sin(np.pi * s), np.pi * np.cos(np.pi * s)
    raise ConfigError(f"unknown perturbation shape {shape!r}")


# ---------------------------------------------------------------------------
# geometry

@dataclass
class WallSpec:
    kind: str = "flat"
    amplitude: float = 0.0
    center: float = 0.5
    width: float = 0.25

    def phi(self, x1):
        if self.kind == "flat" or self.amplitude == 0.0:
            z = np.zeros_like(np.asarray(x1, float))
            return z, z, z
        if self.kind in BUMPS:
            return BUMPS[self.kind](x1, self.center, self.width)
        raise ConfigError(f"unknown wall kind {self.kind!r}")


@dataclass
class NozzleGeometry:
    L: float
    wall_minus: WallSpec = field(default_factory=WallSpec)
    wall_plus: WallSpec = field(default_factory=WallSpec)

    def g(self, x1, layer, order=0):
        """Wall position (order 0) or its derivatives; layer 'plus' is the upper wall."""
        if layer == "plus":
            ph = self.wall_plus.phi(x1)
            return 1.0 - self.wall_plus.amplitude * ph[0] if order == 0 else -self.wall_plus.amplitude * ph[order]
        ph = self.wall_minus.phi(x1)
        return -1.0 + self.wall_minus.amplitude * ph[0] if order == 0 else self.wall_minus.amplitude * ph[order]

    def validate(self, n=4001):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ConfigError("geometry.L must be positive")
        for name, w in (("wall_minus", self.wall_minus), ("wall_plus", self.wall_plus)):
            if w.kind not in ("flat",) + tuple(BUMPS):
                raise ConfigError(f"geometry.{name}.kind must be one of flat, {', '.join(BUMPS)}")
            if w.kind in BUMPS:
                if not (w.width > 0):
                    raise ConfigError(f"geometry.{name}.width must be positive")
                if w.amplitude < 0:
                    raise ConfigError(f"geometry.{name}: negative amplitude moves the wall outside |x2| <= 1")
                if w.center - w.width < 0:
                    raise ConfigError(f"geometry.{name}: bump support reaches x1=0; walls must satisfy g(0) = +-1")
        x = np.linspace(0.0, self.L, n)
        gp, gm = self.g(x, "plus"), self.g(x, "minus")
        bad = gm >= gp
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise ConfigError(f"geometry: walls cross (g- >= g+) at x1={x[k]:.6g}")
        return self


# ---------------------------------------------------------------------------
# inlet

@dataclass
class Perturbation:
    var: str
    amplitude: float
    shape: str = "bump"
    center: float = 0.5
    width: float = 0.25
    layers: tuple = LAYERS

    def values(self, x2, layer):
        """Perturbation and its x2-derivative on a layer (zero if the layer is not selected)."""
        x2 = np.asarray(x2, float)
        if layer not in self.layers or self.amplitude == 0.0:
            z = np.zeros_like(x2)
            return z, z
        sign = 1.0 if layer == "plus" else -1.0
        f, df = shape_function(sign * x2, self.shape, self.center, self.width)
        return self.amplitude * f, self.amplitude * sign * df


@dataclass
class InletProfile:
    bg: BackgroundFlow
    perturbations: list = field(default_factory=list)
    # density correction rho -> rho (1 + kappa psi) restoring the background mass flux
    mass_correction: dict = field(default_factory=lambda: {"minus": 0.0, "plus": 0.0})

    def is_perturbed(self, layer):
        return any(p.amplitude != 0.0 and layer in p.layers for p in self.perturbations) \
            or self.mass_correction[layer] != 0.0

    def _dev(self, x2, layer):
        d = {v: [np.zeros_like(x2), np.zeros_like(x2)] for v in VARIABLES}
        for p in self.perturbations:
            a, da = p.values(x2, layer)
            d[p.var][0] = d[p.var][0] + a
            d[p.var][1] = d[p.var][1] + da
        return d

    @staticmethod
    def correction_shape(x2, layer):
        """Interior weight psi of the mass correction and its x2-derivative.

        psi vanishes with three derivatives well before the walls and the
        contact discontinuity, so the corrected data stay compatible there.
        """
        sign = 1.0 if layer == "plus" else -1.0
        psi, dpsi, _ = cosine_bump(sign * np.asarray(x2, float), *MASS_CORRECTION_SUPPORT)
        return psi, sign * dpsi

    def evaluate(self, x2, layer):
        """Primitive inlet state (rho, u1, u2, P) at x2."""
        x2 = np.asarray(x2, float)
        bg = self.bg
        d = self._dev(x2, layer)
        psi, _ = self.correction_shape(x2, layer)
        rho = (bg.rho(x2, layer) + d["rho"][0]) * (1.0 + self.mass_correction[layer] * psi)
        return PrimitiveState(rho, bg.u(x2, layer) + d["u1"][0], d["u2"][0], bg.P(x2, layer) + d["P"][0])

    def derivative(self, x2, layer):
        """x2-derivatives of (rho, u1, u2, P)."""
        x2 = np.asarray(x2, float)
        bg = self.bg
        f = bg.coriolis
        rho_b, u_b = bg.rho(x2, layer), bg.u(x2, layer)
        c2 = bg.gas.gamma * bg.P(x2, layer) / rho_b
        d = self._dev(x2, layer)
        k = self.mass_correction[layer]
        psi, dpsi = self.correction_shape(x2, layer)
        drho = (-f * rho_b * u_b / c2 + d["rho"][1]) * (1.0 + k * psi) + (rho_b + d["rho"][0]) * k * dpsi
        du1 = bg.spec.u(layer).deriv(x2) + d["u1"][1]
        return drho, du1, d["u2"][1], -f * rho_b * u_b + d["P"][1]

    def mass_flux(self, layer):
        a, b = (-1.0, 0.0) if layer == "minus" else (0.0, 1.0)

        def flux(x):
            st = self.evaluate(x, layer)
            return float(st.rho * st.u1)

        val, _ = integrate.quad(flux, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def deviation(self, x2, layer):
        """U0 - U_b as an array of shape (4, n)."""
        s = self.evaluate(x2, layer)
        b = self.bg.state(x2, layer)
        return np.array([s.rho - b.rho, s.u1 - b.u1, s.u2 - b.u2, s.P - b.P])


@dataclass
class LagrangianInletData:
    """Inlet data on the solver's y2 nodes of one layer."""

    layer: str
    y2: np.ndarray
    x2: np.ndarray
    B: np.ndarray
    A: np.ndarray
    dB: np.ndarray
    dA: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    Z1b: np.ndarray
    Z2b: np.ndarray

    @property
    def Zhat(self):
        return np.stack([self.Z1 - self.Z1b, self.Z2 - self.Z2b], axis=-1)


# ---------------------------------------------------------------------------
# solver configuration

MODES = ("picard_lp", "direct")


@dataclass
class SolverConfig:
    N2: int = 128
    N1: int | None = None
    cfl: float = 0.8
    picard_tol: float = 1e-10
    picard_max: int = 30
    delta_max: float = 0.1
    mode: str = "picard_lp"
    coriolis_factor: float = 1.0

    def validate(self):
        if int(self.N2) != self.N2 or self.N2 < 8:
            raise ConfigError("solver.N2 must be an integer >= 8")
        if self.N1 is not None and (int(self.N1) != self.N1 or self.N1 < 8):
            raise ConfigError("solver.N1 must be an integer >= 8 (or omitted)")
        if not (0 < self.cfl <= 1):
            raise ConfigError("solver.cfl must lie in (0, 1]")
        if not (self.picard_tol > 0):
            raise ConfigError("solver.picard_tol must be positive")
        if int(self.picard_max) != self.picard_max or self.picard_max < 1:
            raise ConfigError("solver.picard_max must be a positive integer")
        if not (self.delta_max > 0):
            raise ConfigError("solver.delta_max must be positive")
        if self.mode not in MODES:
            raise ConfigError(f"solver.mode must be one of {MODES}")
        if self.coriolis_factor not in (0, 1):
            raise ConfigError("solver.coriolis_factor must be 0 or 1")
        self.N2 = int(self.N2)
        self.N1 = None if self.N1 is None else int(self.N1)
        self.picard_max = int(self.picard_max)
        self.coriolis_factor = float(self.coriolis_factor)
        return self


@dataclass
class Problem:
    gas: GasConstants
    bg: BackgroundFlow
    geom: NozzleGeometry
    inlet: InletProfile
    cfg: SolverConfig
    config: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    def inlet_data(self, N2=None):
        N2 = self.cfg.N2 if N2 is None else N2
        if N2 not in self._cache:
            self._cache[N2] = inlet_to_lagrangian(self.inlet, self.geom, self.bg, self.gas, N2)
        return self._cache[N2]

    def with_solver(self, **changes) -> "Problem":
        cfg = SolverConfig(**{**asdict(self.cfg), **changes}).validate()
        if cfg.coriolis_factor != self.cfg.coriolis_factor:
            conf = copy.deepcopy(self.config)
            conf.setdefault("solver", {}).update(changes)
            return load_and_validate(conf)
        return Problem(self.gas, self.bg, self.geom, self.inlet, cfg, self.config, self._cache)

    @property
    def sigma(self):
        if "sigma" not in self._cache:
            self._cache["sigma"] = sigma_measure(self.inlet, self.geom, self.bg)
        return self._cache["sigma"]


# ---------------------------------------------------------------------------
# config parsing

_TOP_KEYS = {"gas", "background", "geometry", "inlet", "solver"}
_BG_KEYS = {"Pbar", "A_minus", "A_plus", "u_profile_minus", "u_profile_plus", "require_jump"}
_GEOM_KEYS = {"L", "wall_minus", "wall_plus"}
_WALL_KEYS = {"kind", "amplitude", "center", "width"}
_PERT_KEYS = {"amplitude", "shape", "center", "width", "layers"}
_SOLVER_KEYS = {"N2", "N1", "cfl", "picard_tol", "picard_max", "delta_max", "mode", "coriolis_factor"}


def _section(d, name, keys, required=()):
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise ConfigError(f"{name} must be a mapping")
    extra = set(d) - set(keys)
    if extra:
        raise ConfigError(f"unknown keys in {name}: {sorted(extra)}")
    for k in required:
        if k not in d:
            raise ConfigError(f"missing required key {name}.{k}")
    return d


def _num(d, key, name, default=None):
    v = d.get(key, default)
    if v is None:
        raise ConfigError(f"missing required key {name}.{key}")
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}.{key} must be a number, got {v!r}") from None
    if math.isnan(v):
        raise ConfigError(f"{name}.{key} is NaN")
    return v


def _wall(d, name):
    d = _section(d, name, _WALL_KEYS)
    return WallSpec(kind=d.get("kind", "flat"), amplitude=_num(d, "amplitude", name, 0.0),
                    center=_num(d, "center", name, 0.5), width=_num(d, "width", name, 0.25))


def _perturbations(d):
    d = _section(d, "inlet.perturbation", VARIABLES)
    out = []
    for var, p in d.items():
        name = f"inlet.perturbation.{var}"
        p = _section(p, name, _PERT_KEYS)
        layers = p.get("layers", list(LAYERS))
        if isinstance(layers, str):
            layers = [layers]
        if not set(layers) <= set(LAYERS):
            raise ConfigError(f"{name}.layers must be a subset of {list(LAYERS)}")
        shape = p.get("shape", "bump")
        if shape not in tuple(BUMPS) + ("uniform", "sine"):
            raise ConfigError(f"{name}.shape must be one of {', '.join(BUMPS)}, uniform, sine")
        pert = Perturbation(var=var, amplitude=_num(p, "amplitude", name, 0.0), shape=shape,
                            center=_num(p, "center", name, 0.5), width=_num(p, "width", name, 0.25),
                            layers=tuple(layers))
        if shape in BUMPS and not (pert.width > 0):
            raise ConfigError(f"{name}.width must be positive")
        out.append(pert)
    return out


def load_and_validate(config: dict) -> Problem:
    """Build a fully validated Problem from a configuration mapping."""
    if not isinstance(config, dict):
        raise ConfigError("configuration must be a mapping")
    _section(config, "config", _TOP_KEYS, required=("background", "geometry"))
    gas_d = _section(config.get("gas"), "gas", {"gamma"})
    try:
        gas = GasConstants(_num(gas_d, "gamma", "gas", 1.4))
    except DomainError as e:
        raise ConfigError(f"gas.gamma: {e}") from None
    sd = _section(config.get("solver"), "solver", _SOLVER_KEYS)
    cfg = SolverConfig(**sd).validate()

    bd = _section(config["background"], "background", _BG_KEYS,
                  required=("Pbar", "A_minus", "A_plus", "u_profile_minus", "u_profile_plus"))
    spec = BackgroundSpec(gamma=gas.gamma, Pbar=_num(bd, "Pbar", "background"),
                          A_minus=_num(bd, "A_minus", "background"), A_plus=_num(bd, "A_plus", "background"),
                          u_minus=VelocityProfile.from_config(bd["u_profile_minus"]),
                          u_plus=VelocityProfile.from_config(bd["u_profile_plus"]),
                          coriolis=cfg.coriolis_factor)
    try:
        bg = build_background(spec, require_jump=bool(bd.get("require_jump", True)))
    except DomainError as e:
        raise ConfigError(f"background: {e}") from None

    gd = _section(config["geometry"], "geometry", _GEOM_KEYS, required=("L",))
    geom = NozzleGeometry(L=_num(gd, "L", "geometry"), wall_minus=_wall(gd.get("wall_minus"), "geometry.wall_minus"),
                          wall_plus=_wall(gd.get("wall_plus"), "geometry.wall_plus")).validate()

    idict = _section(config.get("inlet"), "inlet", {"perturbation"})
    inlet = InletProfile(bg=bg, perturbations=_perturbations(idict.get("perturbation")))
    validate_inlet(inlet, geom)
    return Problem(gas=gas, bg=bg, geom=geom, inlet=inlet, cfg=cfg, config=copy.deepcopy(config))


def validate_inlet(inlet: InletProfile, geom: NozzleGeometry, n: int = 4001):
    """Positivity, supersonic state, mass matching and corner/CD compatibility."""
    g = inlet.bg.gas
    for layer in LAYERS:
        if inlet.is_perturbed(layer) and any(p.var in ("rho", "u1") and layer in p.layers and p.amplitude
                                             for p in inlet.perturbations):
            inlet.mass_correction[layer] = 0.0
            m0 = inlet.mass_flux(layer)
            inlet.mass_correction[layer] = 1.0
            m1 = inlet.mass_flux(layer) - m0
            if not (m1 > 0):
                raise ConfigError(f"inlet layer {layer}: nonpositive mass flux")
            inlet.mass_correction[layer] = (inlet.bg.m(layer) - m0) / m1
        x = np.linspace(-1.0, 0.0, n) if layer == "minus" else np.linspace(0.0, 1.0, n)
        try:
            s = inlet.evaluate(x, layer)
        except DomainError as e:
            raise ConfigError(f"inlet layer {layer}: {e}") from None
        for name, arr in (("rho", s.rho), ("P", s.P), ("u1", s.u1)):
            bad = np.logical_not(arr > 0)
            if np.any(bad):
                k = int(np.flatnonzero(bad)[0])
                raise ConfigError(f"inlet layer {layer}: {name} must be positive, fails at x2={x[k]:.6g}")
        c2 = g.gamma * s.P / s.rho
        bad = np.logical_not(s.u1 ** 2 > c2)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise ConfigError(f"inlet layer {layer}: not supersonic (u1^2 <= c^2) at x2={x[k]:.6g}")
    sm, sp = inlet.evaluate(0.0, "minus"), inlet.evaluate(0.0, "plus")
    if abs(float(sp.P - sm.P)) > COMPAT_TOL:
        raise ConfigError(f"inlet incompatible at the contact discontinuity: P+(0) - P-(0) = {float(sp.P - sm.P):.3g}")
    if abs(float(sp.u2 / sp.u1 - sm.u2 / sm.u1)) > COMPAT_TOL:
        raise ConfigError("inlet incompatible at the contact discontinuity: flow slopes differ")
    for layer, x in (("minus", -1.0), ("plus", 1.0)):
        s = inlet.evaluate(x, layer)
        slope = float(geom.g(0.0, layer, 1))
        if abs(float(s.u2 / s.u1) - slope) > COMPAT_TOL:
            raise ConfigError(f"inlet incompatible with wall {layer} at the corner: W0 - g'(0) = "
                              f"{float(s.u2 / s.u1) - slope:.3g}")
    return inlet


# ---------------------------------------------------------------------------
# Lagrangian inlet data

def inlet_to_lagrangian(inlet: InletProfile, geom: NozzleGeometry, bg: BackgroundFlow,
                        g: GasConstants, N2: int, n_dense: int = 4097) -> dict:
    """Inlet data on the uniform y2 nodes of both layers (dict keyed by layer)."""
    out = {}
    for layer in LAYERS:
        lo, hi = bg.y2_span(layer)
        y2 = np.linspace(lo, hi, N2 + 1)
        bgs = bg.at(y2, layer)
        if not inlet.is_perturbed(layer):
            out[layer] = LagrangianInletData(layer, y2, bgs.x2, bgs.B, bgs.A, bgs.dB, np.zeros_like(y2),
                                             bgs.Z1, bgs.Z2, bgs.Z1, bgs.Z2)
            continue
        a, b = (-1.0, 0.0) if layer == "minus" else (0.0, 1.0)
        xs = np.linspace(a, b, n_dense)

        def flux(x):
            s = inlet.evaluate(x, layer)
            return s.rho * s.u1

        fl = flux(xs)
        if np.any(np.logical_not(fl > 0)):
            raise DomainError(f"nonpositive inlet mass flux in layer {layer}")
        F = CubicSpline(xs, fl).antiderivative()
        F0 = F(0.0)
        Ys = F(xs) - F0
        x2 = np.interp(y2, Ys, xs)
        for _ in range(4):
            x2 = np.clip(x2 - (F(x2) - F0 - y2) / flux(x2), a, b)
        x2[0], x2[-1] = (a, 0.0) if layer == "minus" else (0.0, b)
        s = inlet.evaluate(x2, layer)
        inv = invariants_of_state(s, g)
        drho, du1, du2, dP = inlet.derivative(x2, layer)
        gm = g.gamma
        mf = s.rho * s.u1
        dB = (s.u1 * du1 + s.u2 * du2 + gm / (gm - 1.0) * (dP / s.rho - s.P * drho / s.rho ** 2)) / mf
        dA = (dP / s.rho ** gm - gm * s.P * drho / s.rho ** (gm + 1.0)) / mf
        z = riemann_from_primitive(s.u2 / s.u1, s.P, inv, bg.nu_ref[layer], g)
        out[layer] = LagrangianInletData(layer, y2, x2, inv.B, inv.A, dB, dA, z.Z1, z.Z2, bgs.Z1, bgs.Z2)
    return out


# ---------------------------------------------------------------------------
# perturbation size

def sigma_measure(inlet: InletProfile, geom: NozzleGeometry, bg: BackgroundFlow, n: int = 2001) -> float:
    """Discrete C^1 proxy of the perturbation size.

    Per layer: sup|U0 - Ub| + sup|d/dx2 (U0 - Ub)| (maxima over the four
    primitive components); per wall: sup|g -+ 1| + sup|g'| + sup|g''|.
    Derivatives are second-order finite differences on n samples.
    """
    total = 0.0
    for layer in LAYERS:
        x = np.linspace(-1.0, 0.0, n) if layer == "minus" else np.linspace(0.0, 1.0, n)
        dev = inlet.deviation(x, layer)
        ddev = np.gradient(dev, x, axis=1, edge_order=2)
        total += float(np.max(np.abs(dev))) + float(np.max(np.abs(ddev)))
    x1 = np.linspace(0.0, geom.L, n)
    for layer, ref in (("minus", -1.0), ("plus", 1.0)):
        w = geom.g(x1, layer) - ref
        d1 = np.gradient(w, x1, edge_order=2)
        d2 = np.gradient(d1, x1, edge_order=2)
        total += float(np.max(np.abs(w)) + np.max(np.abs(d1)) + np.max(np.abs(d2)))
    return total


def scaled_config(config: dict, t: float) -> dict:
    """Copy of a configuration with every wall and inlet amplitude multiplied by t."""
    c = copy.deepcopy(config)
    geom = c.get("geometry", {})
    for w in ("wall_minus", "wall_plus"):
        if isinstance(geom.get(w), dict) and "amplitude" in geom[w]:
            geom[w]["amplitude"] = float(geom[w]["amplitude"]) * t
    pert = (c.get("inlet") or {}).get("perturbation") or {}
    for p in pert.values():
        if isinstance(p, dict) and "amplitude" in p:
            p["amplitude"] = float(p["amplitude"]) * t
    return c

