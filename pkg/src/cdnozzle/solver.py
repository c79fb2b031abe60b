"""Characteristic marching in mass-Lagrangian coordinates.

Unknowns are the deviations Zhat = Z - Z_b of the Riemann pair from the
background, stored per layer as arrays of shape (N1+1, N2+1, 2) on uniform
grids y1 in [0, L] and y2 in [-m-, 0] (minus) or [0, m+] (plus).

Each y1 step traces the two characteristics back from every node to the
previous level (midpoint rule on interpolated eigenvalues), interpolates
the previous level at the feet with local 4-point Lagrange stencils that
never straddle a layer boundary, and integrates the source along the step
with the trapezoidal rule.  Boundary nodes take one traced family and one
closure: the slip condition on the walls and the two interface conditions
on the contact discontinuity.

``picard_solve`` iterates linear problems with coefficients frozen from the
previous iterate; ``direct_march`` is a one-pass predictor-corrector on the
full nonlinear system, used as an independent oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .background import LAYERS
from .errors import (BreakdownError, DomainError, HyperbolicityError, IterationError,
                     PerturbationTooLargeError)
from .gasdyn import (RiemannPair, ThermoInvariants, cd_reference_pressures, d_matrix,
                     eigenvalues, invert_pressure, lambda_prime, mean_lambda_prime, primitive_from_riemann,
                     source_H_state)
from .problem import Problem

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# grid and interpolation

@dataclass
class Grid:
    L: float
    N1: int
    N2: int
    y1: np.ndarray
    y2: dict

    @property
    def dy1(self):
        return self.L / self.N1

    def dy2(self, layer):
        return self.y2[layer][1] - self.y2[layer][0]


def cfl_steps(problem: Problem, N2: int, cfl: float) -> int:
    """Number of y1 steps making max|lambda_b| dy1 / dy2 <= cfl in both layers."""
    need = 0.0
    for layer in LAYERS:
        lo, hi = problem.bg.y2_span(layer)
        y2 = np.linspace(lo, hi, N2 + 1)
        lam = problem.bg.at(y2, layer).lam2
        need = max(need, float(np.max(lam)) * N2 / (hi - lo))
    return max(8, int(math.ceil(problem.geom.L * need / cfl)))


def make_grid(problem: Problem, N2=None, N1=None) -> Grid:
    N2 = problem.cfg.N2 if N2 is None else int(N2)
    N1 = problem.cfg.N1 if N1 is None else N1
    if N1 is None:
        N1 = cfl_steps(problem, N2, problem.cfg.cfl)
    y2 = {layer: np.linspace(*problem.bg.y2_span(layer), N2 + 1) for layer in LAYERS}
    return Grid(L=problem.geom.L, N1=int(N1), N2=N2, y1=np.linspace(0.0, problem.geom.L, int(N1) + 1), y2=y2)


def lagrange4(yq, y0, dy, N):
    """Indices and weights of 4-point Lagrange interpolation on nodes y0 + j*dy, j = 0..N.

    Stencils are shifted inwards near the ends so that they never leave the
    node range.  Returns (idx, w) with trailing dimension 4.
    """
    s = (np.asarray(yq, float) - y0) / dy
    base = np.clip(np.floor(s).astype(int) - 1, 0, N - 3)
    t = s - base
    w = np.stack([-(t - 1) * (t - 2) * (t - 3) / 6.0,
                  t * (t - 2) * (t - 3) / 2.0,
                  -t * (t - 1) * (t - 3) / 2.0,
                  t * (t - 1) * (t - 2) / 6.0], axis=-1)
    idx = base[..., None] + np.arange(4)
    return idx, w


def _gather(values, idx, w):
    """sum_k values[idx[..., k]] * w[..., k] for values of shape (N2+1,) or (N2+1, c)."""
    v = values[idx]
    if v.ndim == w.ndim + 1:
        return np.einsum("...kc,...k->...c", v, w)
    return np.sum(v * w, axis=-1)


@dataclass
class CharacteristicFoot:
    origin: str
    y1: float
    y2: float
    path: tuple = ()


def characteristic_foot(lam_prev, lam_next, y2_nodes, j, dy1, y1_next=0.0, family=2):
    """Backward foot of one characteristic from node j of a level (scalar convenience wrapper).

    ``lam_prev``/``lam_next`` are the family's eigenvalues on the previous and
    the new level.  The origin kind is 'interior' if the foot lies strictly
    inside the layer on a previous level, 'entrance' if that level is y1 = 0,
    otherwise the boundary it crosses ('cd', 'wall').
    """
    N = len(y2_nodes) - 1
    lo, hi, dy = y2_nodes[0], y2_nodes[-1], y2_nodes[1] - y2_nodes[0]
    lj = lam_next[j]
    if (family == 1 and not lj < 0) or (family == 2 and not lj > 0):
        raise HyperbolicityError(f"eigenvalue of family {family} has the wrong sign at node {j}")
    ym = y2_nodes[j] - 0.5 * dy1 * lj
    idx, w = lagrange4(np.clip(ym, lo, hi), lo, dy, N)
    lm = 0.5 * (_gather(lam_prev, idx, w) + _gather(lam_next, idx, w))
    foot = float(y2_nodes[j] - dy1 * lm)
    origin = "interior"
    if foot <= lo or foot >= hi:
        at_cd = (foot <= lo and lo == 0.0) or (foot >= hi and hi == 0.0)
        origin = "cd" if at_cd else "wall"
        edge = lo if foot <= lo else hi
        frac = (y2_nodes[j] - edge) / (y2_nodes[j] - foot)
        return CharacteristicFoot(origin, y1_next - frac * dy1, float(edge), (float(ym),))
    y1_foot = y1_next - dy1
    if abs(y1_foot) <= 1e-12 * max(1.0, abs(y1_next)):
        origin = "entrance"
    return CharacteristicFoot(origin, y1_foot, foot, (float(ym),))


def trace_feet(lam, y2_nodes, dy1):
    """Feet of one family for every node of every level 1..N1 (vectorised midpoint rule).

    ``lam`` has shape (N1+1, N2+1).  Returns (feet, clamped) where feet has
    shape (N1, N2+1) and clamped is the boolean mask of feet that left the layer.
    """
    N = len(y2_nodes) - 1
    lo, hi, dy = y2_nodes[0], y2_nodes[-1], y2_nodes[1] - y2_nodes[0]
    lam_prev, lam_next = lam[:-1], lam[1:]
    ym = np.clip(y2_nodes - 0.5 * dy1 * lam_next, lo, hi)
    idx, w = lagrange4(ym, lo, dy, N)
    rows = np.arange(lam_prev.shape[0])[:, None, None]
    lm = 0.5 * (np.sum(lam_prev[rows, idx] * w, axis=-1) + np.sum(lam_next[rows, idx] * w, axis=-1))
    feet = y2_nodes - dy1 * lm
    clamped = (feet < lo) | (feet > hi)
    return np.clip(feet, lo, hi), clamped


# ---------------------------------------------------------------------------
# frozen coefficients

@dataclass
class LayerData:
    layer: str
    y2: np.ndarray
    inv: ThermoInvariants
    slope: tuple
    bgs: object
    Zb: np.ndarray
    Z0hat: np.ndarray
    D: np.ndarray


def layer_data(problem: Problem, grid: Grid) -> dict:
    data = problem.inlet_data(grid.N2)
    out = {}
    for layer in LAYERS:
        d = data[layer]
        bgs = problem.bg.at(grid.y2[layer], layer)
        out[layer] = LayerData(layer=layer, y2=grid.y2[layer], inv=ThermoInvariants(d.B, d.A),
                               slope=(d.dB, d.dA), bgs=bgs, Zb=np.stack([bgs.Z1, bgs.Z2], axis=-1),
                               Z0hat=d.Zhat, D=d_matrix(bgs, problem.gas))
    return out


@dataclass
class Frozen:
    """Iterate-dependent coefficients on the whole grid, per layer."""

    state: dict
    lam: dict
    H: dict


def evaluate_fields(problem: Problem, ld: dict, Zhat: dict, where: str = "") -> Frozen:
    """Primitives, eigenvalues and deviation sources of an iterate (all nodes)."""
    g = problem.gas
    state, lam, H = {}, {}, {}
    for layer in LAYERS:
        L = ld[layer]
        Z = Zhat[layer] + L.Zb
        try:
            s = primitive_from_riemann(RiemannPair(Z[..., 0], Z[..., 1]), L.inv, L.bgs.nu_ref, g)
            lm = eigenvalues(s, g)
            h = source_H_state(s, lm, L.inv, L.bgs, g, L.slope)
        except (DomainError, ArithmeticError) as e:
            if isinstance(e, BreakdownError) and not isinstance(e, HyperbolicityError):
                raise
            raise HyperbolicityError(f"loss of hyperbolicity in layer {layer}{where}: {e}") from e
        bad = np.logical_not((lm[0] < 0) & (lm[1] > 0))
        if np.any(bad):
            n, j = np.unravel_index(int(np.flatnonzero(bad)[0]), bad.shape)
            raise HyperbolicityError(f"eigenvalue signs violated (need lambda1 < 0 < lambda2) in layer {layer}"
                                     f"{where} at y1 index {n}, y2 index {j}")
        state[layer], lam[layer], H[layer] = s, lm, np.stack(h, axis=-1)
    return Frozen(state, lam, H)


def _cd_coefficients(problem, ld, frozen):
    g = problem.gas
    inv_m = ThermoInvariants(ld["minus"].inv.B[-1], ld["minus"].inv.A[-1])
    inv_p = ThermoInvariants(ld["plus"].inv.B[0], ld["plus"].inv.A[0])
    Ps_m, Ps_p, Q = cd_reference_pressures(inv_m, inv_p, problem.bg, g)
    Pm = frozen.state["minus"].P[:, -1]
    Pp = frozen.state["plus"].P[:, 0]
    alpha = 0.5 / mean_lambda_prime(Pm, Ps_m, inv_m, g)
    beta = 0.5 / mean_lambda_prime(Pp, Ps_p, inv_p, g)
    return alpha, beta, Q


# ---------------------------------------------------------------------------
# the linear problem

@dataclass
class _Stencils:
    idx: dict
    w: dict
    clamped: int


def _stencils(grid, lam_by_layer):
    idx, w, clamped = {}, {}, 0
    for layer in LAYERS:
        y2 = grid.y2[layer]
        for fam in (0, 1):
            feet, cl = trace_feet(lam_by_layer[layer][fam], y2, grid.dy1)
            # the inflow boundary of each family takes a closure, not a trace
            used = np.ones_like(cl)
            if fam == 0:
                used[:, -1] = False
            else:
                used[:, 0] = False
            clamped += int(np.count_nonzero(cl & used))
            idx[layer, fam], w[layer, fam] = lagrange4(feet, y2[0], y2[1] - y2[0], grid.N2)
    return _Stencils(idx, w, clamped)


def _wall_targets(problem, grid):
    return {layer: 2.0 * np.arctan(problem.geom.g(grid.y1, layer, 1)) for layer in LAYERS}


def solve_LP(problem: Problem, grid: Grid, ld: dict, Zhat: dict, frozen: Frozen = None) -> tuple:
    """One linear problem: coefficients frozen from ``Zhat``; returns (Zbar, info)."""
    if frozen is None:
        frozen = evaluate_fields(problem, ld, Zhat)
    dy1 = grid.dy1
    h = 0.5 * dy1
    F = {layer: frozen.H[layer] - np.einsum("jab,njb->nja", ld[layer].D, Zhat[layer]) for layer in LAYERS}
    st = _stencils(grid, frozen.lam)
    alpha, beta, Q = _cd_coefficients(problem, ld, frozen)
    wall = _wall_targets(problem, grid)

    # foot-interpolated D rows (y2-only coefficients)
    Dfoot = {}
    for layer in LAYERS:
        D = ld[layer].D
        for fam in (0, 1):
            Dfoot[layer, fam] = _gather(D[:, fam, :], st.idx[layer, fam], st.w[layer, fam])
    Minv = {layer: np.linalg.inv(np.eye(2) - h * ld[layer].D) for layer in LAYERS}

    Zbar = {layer: np.empty_like(Zhat[layer]) for layer in LAYERS}
    for layer in LAYERS:
        Zbar[layer][0] = ld[layer].Z0hat
    N2 = grid.N2
    for n in range(grid.N1):
        rhs = {}
        for layer in LAYERS:
            Zp, Fp, Fn = Zbar[layer][n], F[layer][n], F[layer][n + 1]
            r = np.empty((N2 + 1, 2))
            for fam in (0, 1):
                idx, w = st.idx[layer, fam][n], st.w[layer, fam][n]
                Zf = _gather(Zp, idx, w)
                Ff = _gather(Fp[:, fam], idx, w)
                Df = Dfoot[layer, fam][n]
                r[:, fam] = Zf[:, fam] + h * (np.sum(Df * Zf, axis=-1) + Ff + Fn[:, fam])
            rhs[layer] = r
            Zbar[layer][n + 1, 1:-1] = np.einsum("jab,jb->ja", Minv[layer][1:-1], r[1:-1])
        # lower wall: Z1 traced, Z1 + Z2 = 2 arctan g-'
        Dm = ld["minus"].D[0]
        A = np.array([[1.0 - h * Dm[0, 0], -h * Dm[0, 1]], [1.0, 1.0]])
        Zbar["minus"][n + 1, 0] = np.linalg.solve(A, [rhs["minus"][0, 0], wall["minus"][n + 1]])
        # upper wall: Z2 traced
        Dp = ld["plus"].D[-1]
        A = np.array([[-h * Dp[1, 0], 1.0 - h * Dp[1, 1]], [1.0, 1.0]])
        Zbar["plus"][n + 1, -1] = np.linalg.solve(A, [rhs["plus"][-1, 1], wall["plus"][n + 1]])
        # interface: unknowns (Z1-, Z2-, Z1+, Z2+); Z2- and Z1+ traced
        Dm, Dp = ld["minus"].D[-1], ld["plus"].D[0]
        a, b = alpha[n + 1], beta[n + 1]
        A = np.array([[-h * Dm[1, 0], 1.0 - h * Dm[1, 1], 0.0, 0.0],
                      [0.0, 0.0, 1.0 - h * Dp[0, 0], -h * Dp[0, 1]],
                      [1.0, 1.0, -1.0, -1.0],
                      [-a, a, b, -b]])
        v = np.linalg.solve(A, [rhs["minus"][-1, 1], rhs["plus"][0, 0], 0.0, Q])
        Zbar["minus"][n + 1, -1] = v[:2]
        Zbar["plus"][n + 1, 0] = v[2:]
    info = {"clamped": st.clamped, "Q": Q, "alpha": alpha, "beta": beta}
    return Zbar, info


def cd_closure(z1_plus, z2_minus, alpha, beta, Q):
    """Interface closure given the incoming invariants: returns (Z1-, Z2+).

    Equivalent to the two interface conditions Z1- + Z2- = Z1+ + Z2+ and
    alpha Z2- + beta Z1+ = alpha Z1- + beta Z2+ + Q.
    """
    t1 = (beta - alpha) / (alpha + beta)
    t2 = 2.0 * alpha / (alpha + beta)
    t3 = 2.0 * beta / (alpha + beta)
    t4 = 1.0 / (alpha + beta)
    z2_plus = t1 * z1_plus + t2 * z2_minus - t4 * Q
    z1_minus = t3 * z1_plus - t1 * z2_minus - t4 * Q
    return z1_minus, z2_plus


# ---------------------------------------------------------------------------
# norms and fields

def discrete_norm_C1(field: dict, grid: Grid) -> float:
    """max over layers/components of sup|f|, sup|d f/dy1|, sup|d f/dy2| (second-order differences)."""
    out = 0.0
    for layer, f in field.items():
        f = np.asarray(f, float)
        if not np.any(f):
            continue
        d1 = np.gradient(f, grid.y1, axis=0, edge_order=2)
        d2 = np.gradient(f, grid.y2[layer], axis=1, edge_order=2)
        out = max(out, float(np.max(np.abs(f))), float(np.max(np.abs(d1))), float(np.max(np.abs(d2))))
    return out


@dataclass
class SolutionField:
    grid: Grid
    mode: str
    Zhat: dict
    Zb: dict
    B: dict
    A: dict
    state: dict
    lam: dict
    history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    clamped: int = 0
    meta: dict = field(default_factory=dict)

    def Z(self, layer):
        return self.Zhat[layer] + self.Zb[layer]

    @property
    def deviation_norm(self):
        return discrete_norm_C1(self.Zhat, self.grid)

    def cd_trace(self):
        sm, sp = self.state["minus"], self.state["plus"]
        return {"P_minus": sm.P[:, -1], "P_plus": sp.P[:, 0],
                "W_minus": (sm.u2 / sm.u1)[:, -1], "W_plus": (sp.u2 / sp.u1)[:, 0]}

    def wall_trace(self):
        sm, sp = self.state["minus"], self.state["plus"]
        return {"W_minus": (sm.u2 / sm.u1)[:, 0], "W_plus": (sp.u2 / sp.u1)[:, -1]}


def _finalize(problem, grid, ld, Zhat, mode, history, iterations, converged, clamped, meta=None):
    fr = evaluate_fields(problem, ld, Zhat, " (final field)")
    return SolutionField(grid=grid, mode=mode, Zhat=Zhat, Zb={k: np.broadcast_to(ld[k].Zb, Zhat[k].shape).copy()
                                                              for k in LAYERS},
                         B={k: ld[k].inv.B for k in LAYERS}, A={k: ld[k].inv.A for k in LAYERS},
                         state=fr.state, lam=fr.lam, history=history, iterations=iterations,
                         converged=converged, clamped=clamped, meta=meta or {})


def random_initial_iterate(grid: Grid, radius: float, seed: int = 0, modes: int = 3) -> dict:
    """Smooth random deviation field with discrete C^1 norm equal to ``radius``."""
    rng = np.random.default_rng(seed)
    out = {}
    s1 = grid.y1 / grid.L
    for layer in LAYERS:
        y2 = grid.y2[layer]
        s2 = (y2 - y2[0]) / (y2[-1] - y2[0])
        f = np.zeros((grid.N1 + 1, grid.N2 + 1, 2))
        for c in range(2):
            for k in range(modes):
                for l in range(modes):
                    a = rng.normal() / (1 + k + l) ** 2
                    f[..., c] += a * np.outer(np.cos(np.pi * k * s1), np.cos(np.pi * l * s2))
        out[layer] = f
    scale = radius / discrete_norm_C1(out, grid)
    return {k: v * scale for k, v in out.items()}


# ---------------------------------------------------------------------------
# solvers

def picard_solve(problem: Problem, grid: Grid = None, initial: dict = None) -> SolutionField:
    """Fixed-point iteration over linear problems until the C^1 update norm drops below tolerance."""
    cfg = problem.cfg
    grid = make_grid(problem) if grid is None else grid
    ld = layer_data(problem, grid)
    shape = (grid.N1 + 1, grid.N2 + 1, 2)
    Zhat = {k: np.zeros(shape) for k in LAYERS} if initial is None else {k: np.array(initial[k], float)
                                                                            for k in LAYERS}
    history = []
    clamped = 0
    for it in range(1, cfg.picard_max + 1):
        frozen = evaluate_fields(problem, ld, Zhat, f" (Picard sweep {it})")
        Zbar, info = solve_LP(problem, grid, ld, Zhat, frozen)
        clamped = info["clamped"]
        diff = discrete_norm_C1({k: Zbar[k] - Zhat[k] for k in LAYERS}, grid)
        size = discrete_norm_C1(Zbar, grid)
        if not (np.isfinite(diff) and np.isfinite(size)):
            raise HyperbolicityError(f"non-finite iterate in Picard sweep {it}")
        history.append({"iteration": it, "update_norm": diff, "deviation_norm": size})
        log.debug("picard sweep %d: update %.3e deviation %.3e", it, diff, size)
        if size > cfg.delta_max:
            raise PerturbationTooLargeError(
                f"iterate left the admissible set in sweep {it}: deviation norm {size:.4g} > delta_max "
                f"{cfg.delta_max:.4g}")
        Zhat = Zbar
        if diff < cfg.picard_tol:
            return _finalize(problem, grid, ld, Zhat, "picard_lp", history, it, True, clamped,
                             {"Q": info["Q"]})
    raise IterationError(f"Picard iteration did not converge in {cfg.picard_max} sweeps "
                         f"(last update norm {history[-1]['update_norm']:.3e})", history=history)


def _cd_nonlinear(z2m, z1p, inv_m, inv_p, nu_m, nu_p, g, P0):
    """Nonlinear interface closure: equal slopes and equal pressures; returns (Z1-, Z2+)."""
    s = z2m + z1p
    Pm = Pp = P0
    for _ in range(50):
        Pm = float(invert_pressure(z2m - 0.5 * s, inv_m, nu_m, g, P0=Pm))
        Pp = float(invert_pressure(0.5 * s - z1p, inv_p, nu_p, g, P0=Pp))
        f = Pm - Pp
        fp = -0.5 / float(lambda_prime(Pm, inv_m, g)) - 0.5 / float(lambda_prime(Pp, inv_p, g))
        step = f / fp
        s -= step
        if abs(step) < 1e-15 * max(1.0, abs(s)):
            break
    return s - z2m, s - z1p


def direct_march(problem: Problem, grid: Grid = None) -> SolutionField:
    """Single pass with Heun predictor-corrector on the nonlinear deviation system."""
    g = problem.gas
    grid = make_grid(problem) if grid is None else grid
    ld = layer_data(problem, grid)
    dy1, N2 = grid.dy1, grid.N2
    shape = (grid.N1 + 1, grid.N2 + 1, 2)
    Z = {k: np.zeros(shape) for k in LAYERS}
    for k in LAYERS:
        Z[k][0] = ld[k].Z0hat
    wall = _wall_targets(problem, grid)
    inv_m = ThermoInvariants(ld["minus"].inv.B[-1], ld["minus"].inv.A[-1])
    inv_p = ThermoInvariants(ld["plus"].inv.B[0], ld["plus"].inv.A[0])
    nu = problem.bg.nu_ref
    clamped = 0

    def level_fields(Zlev, n):
        lamd, Hd = {}, {}
        for k in LAYERS:
            L = ld[k]
            Zf = Zlev[k] + L.Zb
            try:
                s = primitive_from_riemann(RiemannPair(Zf[:, 0], Zf[:, 1]), L.inv, L.bgs.nu_ref, g)
                lm = eigenvalues(s, g)
            except (DomainError, ArithmeticError) as e:
                raise HyperbolicityError(f"loss of hyperbolicity in layer {k} at y1 index {n}: {e}") from e
            if np.any(np.logical_not((lm[0] < 0) & (lm[1] > 0))):
                raise HyperbolicityError(f"eigenvalue signs violated in layer {k} at y1 index {n}")
            lamd[k] = np.stack(lm)
            Hd[k] = np.stack(source_H_state(s, lm, L.inv, L.bgs, g, L.slope), axis=-1)
        return lamd, Hd

    def step(n, lam_prev, lam_next, H_prev, H_next):
        nonlocal clamped
        new = {}
        for k in LAYERS:
            y2 = grid.y2[k]
            r = np.empty((N2 + 1, 2))
            for fam in (0, 1):
                feet, cl = trace_feet(np.stack([lam_prev[k][fam], lam_next[k][fam]]), y2, dy1)
                inner = cl[0, :-1] if fam == 0 else cl[0, 1:]
                clamped += int(np.count_nonzero(inner))
                idx, w = lagrange4(feet[0], y2[0], y2[1] - y2[0], N2)
                Zf = _gather(Z[k][n][:, fam], idx, w)
                Hf = _gather(H_prev[k][:, fam], idx, w)
                r[:, fam] = Zf + 0.5 * dy1 * (Hf + H_next[k][:, fam])
            new[k] = r
        new["minus"][0, 1] = wall["minus"][n + 1] - new["minus"][0, 0]
        new["plus"][-1, 0] = wall["plus"][n + 1] - new["plus"][-1, 1]
        z1m, z2p = _cd_nonlinear(new["minus"][-1, 1], new["plus"][0, 0], inv_m, inv_p,
                                 nu["minus"], nu["plus"], g, problem.bg.Pbar)
        new["minus"][-1, 0] = z1m
        new["plus"][0, 1] = z2p
        return new

    lam_n, H_n = level_fields({k: Z[k][0] for k in LAYERS}, 0)
    for n in range(grid.N1):
        # predictor: coefficients lagged at level n (explicit Euler in the source)
        pred = step(n, lam_n, lam_n, H_n, H_n)
        lam_p, H_p = level_fields(pred, n + 1)
        corr = step(n, lam_n, lam_p, H_n, H_p)
        for k in LAYERS:
            Z[k][n + 1] = corr[k]
        lam_n, H_n = level_fields(corr, n + 1)
        level_sup = max(float(np.max(np.abs(corr[k]))) for k in LAYERS)
        if level_sup > problem.cfg.delta_max:
            raise PerturbationTooLargeError(f"deviation {level_sup:.4g} exceeded delta_max "
                                            f"{problem.cfg.delta_max:.4g} at y1 index {n + 1}")
    size = discrete_norm_C1(Z, grid)
    if size > problem.cfg.delta_max:
        raise PerturbationTooLargeError(f"deviation norm {size:.4g} > delta_max {problem.cfg.delta_max:.4g}")
    return _finalize(problem, grid, ld, Z, "direct", [{"iteration": 1, "update_norm": 0.0,
                                                         "deviation_norm": size}], 1, True, clamped)


def solve(problem: Problem, grid: Grid = None) -> SolutionField:
    if problem.cfg.mode == "direct":
        return direct_march(problem, grid)
    return picard_solve(problem, grid)
