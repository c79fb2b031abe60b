"""Pointwise gas dynamics of the steady rotating Euler system.

Every function here is a pure function of its arguments and accepts numpy
arrays (broadcasting like ufuncs) unless stated otherwise.

Notation
--------
B  Bernoulli function  |u|^2/2 + gamma P / ((gamma-1) rho)
A  entropy function    P / rho^gamma
h  specific enthalpy   gamma/(gamma-1) A^(1/gamma) P^((gamma-1)/gamma)
Z1, Z2  Riemann invariants  arctan W -/+ Lambda(P; B, A),  W = u2/u1

Lambda is an antiderivative in P of ``lambda_prime``.  At fixed (B, A) it
equals minus the Prandtl-Meyer function of the local Mach number, so it is
evaluated in closed form; the quadrature route is kept as an independent
check (``Lambda_quadrature``).  The solver anchors Lambda by a reference
Prandtl-Meyer angle ``nu_ref``: Lambda = nu_ref - nu(M(P; B, A)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, HyperbolicityError, RangeError

__all__ = [
    "GasConstants", "PrimitiveState", "ThermoInvariants", "RiemannPair", "CdCoupling",
    "eos_bundle", "enthalpy", "invariants_of_state", "eigenvalues", "sonic_pressure",
    "mach_number", "prandtl_meyer", "prandtl_meyer_max", "lambda_prime", "lambda_partials",
    "Lambda", "Lambda_quadrature", "nu_anchor", "riemann_lambda", "invert_pressure",
    "primitive_from_riemann", "riemann_from_primitive", "source_K", "source_K_state",
    "characteristic_rhs", "j_factor", "source_H", "source_H_state", "d_matrix", "cd_coupling",
    "cd_reference_pressures", "tau_coefficients", "mean_lambda_prime", "mean_lambda_prime_quad",
]


@dataclass(frozen=True)
class GasConstants:
    gamma: float = 1.4

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 1.0):
            raise DomainError(f"adiabatic exponent must exceed 1, got {self.gamma!r}")


@dataclass
class PrimitiveState:
    """Density, axial and transverse velocity, pressure (scalars or arrays)."""

    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    P: np.ndarray

    @property
    def W(self):
        return self.u2 / self.u1

    @property
    def q2(self):
        return self.u1 ** 2 + self.u2 ** 2

    def sound_speed(self, g: GasConstants):
        return np.sqrt(g.gamma * self.P / self.rho)

    def check(self, g: GasConstants):
        """Raise unless every sample is an admissible supersonic state."""
        rho, P, u1 = np.asarray(self.rho), np.asarray(self.P), np.asarray(self.u1)
        if np.any(np.logical_not(rho > 0)) or np.any(np.logical_not(P > 0)):
            raise DomainError("density and pressure must be positive")
        if np.any(np.logical_not(u1 > 0)):
            raise HyperbolicityError("axial velocity must be positive")
        c2 = g.gamma * P / rho
        if np.any(np.logical_not(u1 ** 2 > c2)):
            raise HyperbolicityError("axial velocity is not supersonic (u1^2 <= c^2)")
        return self


@dataclass
class ThermoInvariants:
    B: np.ndarray
    A: np.ndarray


@dataclass
class RiemannPair:
    Z1: np.ndarray
    Z2: np.ndarray

    @property
    def flow_angle(self):
        return 0.5 * (self.Z1 + self.Z2)

    @property
    def halfdiff(self):
        return 0.5 * (self.Z2 - self.Z1)


@dataclass
class CdCoupling:
    alpha: np.ndarray
    beta: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    tau3: np.ndarray
    tau4: np.ndarray
    Q: float


# ---------------------------------------------------------------------------
# thermodynamics

def eos_bundle(P, A, g: GasConstants):
    """Density and sound speed from pressure and entropy function."""
    P = np.asarray(P, dtype=float)
    A = np.asarray(A, dtype=float)
    if np.any(np.logical_not(P > 0)) or np.any(np.logical_not(A > 0)):
        raise DomainError("pressure and entropy function must be positive")
    rho = (P / A) ** (1.0 / g.gamma)
    return rho, np.sqrt(g.gamma * P / rho)


def enthalpy(P, A, g: GasConstants):
    gm = g.gamma
    return gm / (gm - 1.0) * np.asarray(A, float) ** (1.0 / gm) * np.asarray(P, float) ** ((gm - 1.0) / gm)


def invariants_of_state(s: PrimitiveState, g: GasConstants) -> ThermoInvariants:
    gm = g.gamma
    B = 0.5 * (s.u1 ** 2 + s.u2 ** 2) + gm * s.P / ((gm - 1.0) * s.rho)
    A = s.P / s.rho ** gm
    return ThermoInvariants(B=B, A=A)


def eigenvalues(s: PrimitiveState, g: GasConstants):
    """Characteristic slopes dy2/dy1 of the Lagrangian system, lambda1 < 0 < lambda2 near shear flow."""
    c2 = g.gamma * s.P / s.rho
    c = np.sqrt(c2)
    u1, u2 = s.u1, s.u2
    a2 = u1 ** 2 - c2
    r2 = u1 ** 2 + u2 ** 2 - c2
    if np.any(np.logical_not(a2 > 0)) or np.any(np.logical_not(r2 > 0)):
        raise HyperbolicityError("sonic state: eigenvalues undefined (u1^2 <= c^2 or q^2 <= c^2)")
    pre = s.rho * u1 * c2 / a2
    root = np.sqrt(r2) / c
    return pre * (u2 / u1 - root), pre * (u2 / u1 + root)


def j_factor(s: PrimitiveState, g: GasConstants):
    """J = sqrt(q^2 - c^2) / (rho c u1^2), the pressure weight of the (W, P) characteristic form."""
    c = s.sound_speed(g)
    return np.sqrt(s.q2 - c ** 2) / (s.rho * c * s.u1 ** 2)


# ---------------------------------------------------------------------------
# the Lambda function

def sonic_pressure(inv: ThermoInvariants, g: GasConstants):
    """Upper end of the supersonic window: the pressure where q^2 = c^2."""
    gm = g.gamma
    h_star = 2.0 * np.asarray(inv.B, float) / (gm + 1.0)
    return ((gm - 1.0) * h_star / (gm * np.asarray(inv.A, float) ** (1.0 / gm))) ** (gm / (gm - 1.0))


def _mach2(P, inv, g):
    h = enthalpy(P, inv.A, g)
    return 2.0 * (inv.B - h) / ((g.gamma - 1.0) * h), h


def _check_window(P, inv, g, what="pressure"):
    P = np.asarray(P, float)
    if np.any(np.logical_not(P > 0)) or np.any(np.logical_not(np.asarray(inv.A) > 0)) or np.any(np.logical_not(np.asarray(inv.B) > 0)):
        raise DomainError(f"{what} outside the supersonic window (nonpositive P, A or B)")
    if np.any(np.logical_not(P < sonic_pressure(inv, g))):
        raise DomainError(f"{what} outside the supersonic window (q^2 <= c^2)")


def mach_number(P, inv: ThermoInvariants, g: GasConstants):
    _check_window(P, inv, g)
    m2, _ = _mach2(P, inv, g)
    return np.sqrt(m2)


def prandtl_meyer(M, g: GasConstants):
    gm = g.gamma
    k = np.sqrt((gm + 1.0) / (gm - 1.0))
    t = np.sqrt(np.asarray(M, float) ** 2 - 1.0)
    return k * np.arctan(t / k) - np.arctan(t)


def prandtl_meyer_max(g: GasConstants):
    gm = g.gamma
    return 0.5 * np.pi * (np.sqrt((gm + 1.0) / (gm - 1.0)) - 1.0)


def lambda_prime(P, inv: ThermoInvariants, g: GasConstants):
    """dLambda/dP = sqrt(q^2 - c^2) / (rho c q^2), strictly positive inside the window."""
    _check_window(P, inv, g)
    gm = g.gamma
    P = np.asarray(P, float)
    A, B = inv.A, inv.B
    h = enthalpy(P, A, g)
    num = np.sqrt(2.0 * B - (gm + 1.0) * h)
    den = 2.0 * np.sqrt(gm) * A ** (-0.5 / gm) * (B - h) * P ** ((gm + 1.0) / (2.0 * gm))
    return num / den


def _dnu_dm2(m2, g):
    return np.sqrt(m2 - 1.0) / (2.0 * m2 * (1.0 + 0.5 * (g.gamma - 1.0) * m2))


def lambda_partials(P, inv: ThermoInvariants, g: GasConstants):
    """Partial derivatives (dP, dB, dA) of Lambda = nu_ref - nu(M(P; B, A))."""
    _check_window(P, inv, g)
    gm = g.gamma
    P = np.asarray(P, float)
    m2, h = _mach2(P, inv, g)
    w = _dnu_dm2(m2, g)
    dP = w * 2.0 * inv.B / (gm * P * h)
    dB = -w * 2.0 / ((gm - 1.0) * h)
    dA = w * 2.0 * inv.B / ((gm - 1.0) * gm * inv.A * h)
    return dP, dB, dA


def nu_anchor(Pref, inv: ThermoInvariants, g: GasConstants):
    """Anchor angle making Lambda(Pref) = 0 for these invariants."""
    return prandtl_meyer(mach_number(Pref, inv, g), g)


def riemann_lambda(P, inv: ThermoInvariants, nu_ref, g: GasConstants):
    return nu_ref - prandtl_meyer(mach_number(P, inv, g), g)


def Lambda(P, inv: ThermoInvariants, Pref, g: GasConstants):
    """Definite integral of ``lambda_prime`` from Pref to P (closed form)."""
    return riemann_lambda(P, inv, nu_anchor(Pref, inv, g), g)


def Lambda_quadrature(P: float, inv: ThermoInvariants, Pref: float, g: GasConstants,
                      epsabs: float = 1e-12) -> float:
    """Scalar adaptive Gauss-Kronrod evaluation of the same integral."""
    lo, hi = min(P, Pref), max(P, Pref)
    _check_window(np.array([lo, hi]), ThermoInvariants(float(inv.B), float(inv.A)), g)
    val, _ = integrate.quad(lambda s: float(lambda_prime(s, inv, g)), Pref, P,
                            epsabs=epsabs, epsrel=1e-13, limit=200)
    return val


def invert_pressure(halfdiff, inv: ThermoInvariants, nu_ref, g: GasConstants,
                    P0=None, tol: float = 1e-14, maxiter: int = 200):
    """Solve Lambda(P) = halfdiff for P inside the supersonic window.

    Bisection-safeguarded Newton iteration using ``lambda_prime``; the bracket
    is the supersonic window shrunk by a relative margin of 1e-9.  ``P0`` is an
    optional initial guess (same shape as the result).
    """
    halfdiff, B, A, nu_ref = np.broadcast_arrays(*(np.asarray(a, float) for a in (halfdiff, inv.B, inv.A, nu_ref)))
    shape = halfdiff.shape
    halfdiff, B, A, nu_ref = (a.ravel().copy() for a in (halfdiff, B, A, nu_ref))
    if np.any(np.logical_not(A > 0)) or np.any(np.logical_not(B > 0)):
        raise DomainError("entropy and Bernoulli functions must be positive")
    target = nu_ref - halfdiff
    numax = prandtl_meyer_max(g)
    iv = ThermoInvariants(B, A)
    p_sonic = sonic_pressure(iv, g)
    lo = p_sonic * 1e-9
    hi = p_sonic * (1.0 - 1e-9)
    nu_lo = prandtl_meyer(np.sqrt(_mach2(lo, iv, g)[0]), g)
    nu_hi = prandtl_meyer(np.sqrt(_mach2(hi, iv, g)[0]), g)
    bad = np.logical_not((target > 0) & (target < numax) & (target <= nu_lo) & (target >= nu_hi))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise RangeError(f"Riemann-invariant half difference {halfdiff[k]:.6g} not attainable "
                         f"by a supersonic pressure (perturbation too large)")

    def resid(p):
        m2, _ = _mach2(p, iv, g)
        return nu_ref - prandtl_meyer(np.sqrt(m2), g) - halfdiff

    if P0 is None:
        P = np.sqrt(lo * hi)
    else:
        P = np.broadcast_to(np.asarray(P0, float), shape).ravel().copy()
        P = np.where((P > lo) & (P < hi), P, np.sqrt(lo * hi))
    for _ in range(maxiter):
        f = resid(P)
        hi = np.where(f > 0, P, hi)
        lo = np.where(f <= 0, P, lo)
        m2, h = _mach2(P, iv, g)
        fp = _dnu_dm2(m2, g) * 2.0 * B / (g.gamma * P * h)
        step = f / fp
        Pn = P - step
        outside = np.logical_not((Pn > lo) & (Pn < hi))
        Pn = np.where(outside, np.sqrt(lo * hi), Pn)
        done = (np.abs(f) <= tol * (1.0 + np.abs(halfdiff))) | (np.abs(step) <= 4e-16 * P)
        P = np.where(done, P, Pn)
        if np.all(done):
            break
    f = resid(P)
    if np.any(np.abs(f) > 1e-12):
        raise RangeError("pressure inversion failed to reach 1e-12 accuracy")
    return P.reshape(shape)


# ---------------------------------------------------------------------------
# Riemann invariants <-> primitives

def riemann_from_primitive(W, P, inv: ThermoInvariants, nu_ref, g: GasConstants) -> RiemannPair:
    lam = riemann_lambda(P, inv, nu_ref, g)
    th = np.arctan(W)
    return RiemannPair(th - lam, th + lam)


def primitive_from_riemann(z: RiemannPair, inv: ThermoInvariants, nu_ref, g: GasConstants,
                           P0=None) -> PrimitiveState:
    ssum = np.asarray(z.Z1, float) + np.asarray(z.Z2, float)
    if np.any(np.logical_not(np.abs(ssum) < np.pi)):
        raise HyperbolicityError("flow angle outside (-pi/2, pi/2)")
    W = np.tan(0.5 * ssum)
    P = invert_pressure(0.5 * (np.asarray(z.Z2, float) - np.asarray(z.Z1, float)), inv, nu_ref, g, P0=P0)
    h = enthalpy(P, inv.A, g)
    q2 = 2.0 * (inv.B - h)
    u1 = np.sqrt(q2 / (1.0 + W ** 2))
    rho, c = eos_bundle(P, inv.A, g)
    s = PrimitiveState(rho=rho, u1=u1, u2=W * u1, P=P)
    if np.any(np.logical_not(u1 ** 2 > c ** 2)):
        raise HyperbolicityError("recovered state has subsonic axial velocity (u1^2 <= c^2)")
    return s


# ---------------------------------------------------------------------------
# sources

def source_K_state(s: PrimitiveState, g: GasConstants, coriolis: float = 1.0):
    """Coriolis source of the Riemann-invariant system, compact form."""
    c2 = g.gamma * s.P / s.rho
    c = np.sqrt(c2)
    q2 = s.q2
    den = q2 * (s.u1 ** 2 - c2)
    first = -s.u1 * (q2 - c2) / den
    second = c * s.u2 * np.sqrt(q2 - c2) / den
    return coriolis * (first + second), coriolis * (first - second)


def source_K(z: RiemannPair, inv: ThermoInvariants, nu_ref, g: GasConstants, coriolis: float = 1.0):
    return source_K_state(primitive_from_riemann(z, inv, nu_ref, g), g, coriolis)


def characteristic_rhs(s: PrimitiveState, g: GasConstants, coriolis: float = 1.0):
    """Right-hand sides of the (W, P) characteristic equations.

    Dividing by 1 + W^2 gives the source of the Riemann-invariant form, which
    is how the compact ``source_K_state`` is cross-checked.
    """
    lam1, lam2 = eigenvalues(s, g)
    W = s.u2 / s.u1
    r1 = -(lam1 / (s.rho * s.u1) + W) * W / s.u1 - 1.0 / s.u1
    r2 = -(lam2 / (s.rho * s.u1) + W) * W / s.u1 - 1.0 / s.u1
    return coriolis * r1, coriolis * r2


def source_H_state(s: PrimitiveState, lam, inv: ThermoInvariants, bgs, g: GasConstants, inv_slope=None):
    """Deviation-system source for an already recovered state ``s`` with eigenvalues ``lam``."""
    f = bgs.coriolis
    lam1, lam2 = lam
    K1, K2 = source_K_state(s, g, f)
    if inv_slope is None:
        inv_slope = (bgs.dB, 0.0)
    _, LB, LA = lambda_partials(s.P, inv, g)
    _, LBb, _ = lambda_partials(bgs.P, ThermoInvariants(bgs.B, bgs.A), g)
    strat = LB * inv_slope[0] + LA * inv_slope[1] - LBb * bgs.dB
    H1 = K1 - f * lam1 / (bgs.lam2 * bgs.u) - lam1 * strat
    H2 = K2 + f * lam2 / (bgs.lam2 * bgs.u) + lam2 * strat
    return H1, H2


def source_H(z: RiemannPair, inv: ThermoInvariants, bgs, g: GasConstants, inv_slope=None, P0=None):
    """Source of the deviation system for the full Riemann pair ``z``.

    ``bgs`` is a background sample (``BackgroundFlow.at``) at the same y2.
    ``inv_slope`` = (dB/dy2, dA/dy2) of the streamline invariants; it defaults
    to the background's own slopes.  The terms proportional to these slopes
    come from the y2-dependence of Lambda through (B, A); they vanish
    identically on the background.
    """
    s = primitive_from_riemann(z, inv, bgs.nu_ref, g, P0=P0)
    return source_H_state(s, eigenvalues(s, g), inv, bgs, g, inv_slope)


def d_matrix(bgs, g: GasConstants, rel_step: float = 1e-6):
    """Jacobian dH_i/dZ_j at the background pair by central differences; shape (..., 2, 2)."""
    inv = ThermoInvariants(bgs.B, bgs.A)
    Z1b, Z2b = np.asarray(bgs.Z1, float), np.asarray(bgs.Z2, float)
    out = np.empty(np.shape(Z1b) + (2, 2))
    for j in range(2):
        base = Z1b if j == 0 else Z2b
        hstep = rel_step * np.maximum(1.0, np.abs(base))
        e1 = hstep if j == 0 else 0.0
        e2 = hstep if j == 1 else 0.0
        Hp = source_H(RiemannPair(Z1b + e1, Z2b + e2), inv, bgs, g, P0=bgs.P)
        Hm = source_H(RiemannPair(Z1b - e1, Z2b - e2), inv, bgs, g, P0=bgs.P)
        for i in range(2):
            out[..., i, j] = (Hp[i] - Hm[i]) / (2.0 * hstep)
    return out


def tau_coefficients(alpha, beta):
    s = alpha + beta
    return (beta - alpha) / s, 2.0 * alpha / s, 2.0 * beta / s, 1.0 / s


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def mean_lambda_prime(P, Pstar, inv: ThermoInvariants, g: GasConstants):
    """Average of lambda_prime over the segment from Pstar to P (16-point Gauss-Legendre, vectorised)."""
    P = np.asarray(P, float)
    t = 0.5 * (_GL_NODES + 1.0)
    pts = Pstar + np.multiply.outer(P - Pstar, t)
    B = np.asarray(inv.B, float)[..., None]
    A = np.asarray(inv.A, float)[..., None]
    vals = lambda_prime(pts, ThermoInvariants(B, A), g)
    return 0.5 * np.sum(vals * _GL_WEIGHTS, axis=-1)


def mean_lambda_prime_quad(P: float, Pstar: float, inv: ThermoInvariants, g: GasConstants) -> float:
    """Adaptive-quadrature version of ``mean_lambda_prime`` (scalar)."""
    val, _ = integrate.quad(lambda s: float(lambda_prime(Pstar + s * (P - Pstar), inv, g)),
                            0.0, 1.0, epsabs=1e-12, epsrel=1e-12)
    return val


def cd_reference_pressures(inv_minus0: ThermoInvariants, inv_plus0: ThermoInvariants, bg, g: GasConstants):
    """Pressures of the zero pair on the interface and the mismatch source Q.

    Returns (Pstar_minus, Pstar_plus, Q); Pstar is the pressure of Z = (0, 0)
    under the inlet invariants of the layer at y2 = 0.
    """
    nu_m, nu_p = bg.nu_ref["minus"], bg.nu_ref["plus"]
    Pb_m = float(invert_pressure(0.0, ThermoInvariants(*bg.cd_invariants("minus")), nu_m, g, P0=bg.Pbar))
    Pb_p = float(invert_pressure(0.0, ThermoInvariants(*bg.cd_invariants("plus")), nu_p, g, P0=bg.Pbar))
    Ps_m = float(invert_pressure(0.0, inv_minus0, nu_m, g, P0=bg.Pbar))
    Ps_p = float(invert_pressure(0.0, inv_plus0, nu_p, g, P0=bg.Pbar))
    return Ps_m, Ps_p, (Pb_m - Ps_m) + (Ps_p - Pb_p)


def cd_coupling(P_minus, P_plus, inv_minus0: ThermoInvariants, inv_plus0: ThermoInvariants,
                bg, g: GasConstants) -> CdCoupling:
    """Coefficients of the linearised pressure condition on the contact discontinuity.

    ``P_minus``/``P_plus`` may be arrays over y1; the inlet invariants are those
    of each layer at y2 = 0.  alpha, beta average lambda_prime from the pressure
    of the zero Riemann pair (under the inlet invariants) to the current pressure,
    so that P = Pstar + alpha (Z2 - Z1) holds exactly on the minus side (beta on
    the plus side).
    """
    Ps_m, Ps_p, Q = cd_reference_pressures(inv_minus0, inv_plus0, bg, g)
    alpha = 0.5 / mean_lambda_prime(P_minus, Ps_m, inv_minus0, g)
    beta = 0.5 / mean_lambda_prime(P_plus, Ps_p, inv_plus0, g)
    t1, t2, t3, t4 = tau_coefficients(alpha, beta)
    return CdCoupling(alpha=alpha, beta=beta, tau1=t1, tau2=t2, tau3=t3, tau4=t4, Q=Q)
