"""Verification of solved fields.

Every check here is a pure function of a stored ``SolutionField`` (plus the
problem it was solved for), so a report can be regenerated from the written
tables.  Checks:

* residual of the (W, P) characteristic equations in Lagrangian coordinates;
* interface and wall conditions, and the interface-slope identity
  g_cd' = W on the recovered contact discontinuity;
* residual of the conservative physical system on the reconstructed mesh;
* conservation of (B, A): at the nodes, and along streamlines traced in
  physical space through the reconstructed field;
* stability (deviation vs perturbation size) and grid-convergence studies.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .background import LAYERS
from .errors import BreakdownError, IterationError
from .gasdyn import GasConstants, characteristic_rhs, eigenvalues, invariants_of_state, j_factor
from .lagrangian import PhysicalField, mass_consistency, to_physical_field
from .problem import Problem, load_and_validate, scaled_config
from .solver import cfl_steps, direct_march, make_grid, picard_solve

log = logging.getLogger(__name__)

# thresholds for a single stored field
CD_TOL = 1e-8
WALL_TOL = 1e-10
GCD0_TOL = 1e-8
INVARIANT_TOL = 1e-10
# residual / scale of the characteristic equations must stay below
# RESIDUAL_CONST * (L/N1)^2 (scheme-order bound with a generous constant)
RESIDUAL_CONST = 50.0
# acceptance thresholds of the studies
ORDER_MIN = 1.5
SLOPE_RANGE = (0.9, 1.1)
RATIO_RANGE = (1.8, 2.2)
GAP_FACTOR = 5.0
GAP_SHRINK = 3.0


def fitted_order(h, err):
    """Least-squares slope of log(err) against log(h); needs three usable points."""
    h, err = np.asarray(h, float), np.asarray(err, float)
    ok = (h > 0) & (err > 0) & np.isfinite(err)
    if np.count_nonzero(ok) < 3:
        return float("nan")
    return float(np.polyfit(np.log(h[ok]), np.log(err[ok]), 1)[0])


def _d(f, y, axis):
    return np.gradient(f, y, axis=axis, edge_order=2)


# ---------------------------------------------------------------------------
# transformed system

def residual_transformed(field, problem: Problem) -> dict:
    """Residual of the two (W, P) characteristic equations at every node.

    Derivatives are second-order differences within each layer (one-sided at
    the walls and on either side of the interface, never across it).
    ``scale`` is the size of the right-hand sides, for relative statements.
    """
    grid, g, f = field.grid, problem.gas, problem.bg.coriolis
    res, scale = {}, 0.0
    for layer in LAYERS:
        s = field.state[layer]
        y2 = grid.y2[layer]
        W = s.u2 / s.u1
        lam1, lam2 = eigenvalues(s, g)
        J = j_factor(s, g)
        r1, r2 = characteristic_rhs(s, g, f)
        W1, W2, P1, P2 = _d(W, grid.y1, 0), _d(W, y2, 1), _d(s.P, grid.y1, 0), _d(s.P, y2, 1)
        e1 = (W1 + lam1 * W2) - J * (P1 + lam1 * P2) - r1
        e2 = (W1 + lam2 * W2) + J * (P1 + lam2 * P2) - r2
        res[layer] = np.stack([e1, e2], axis=-1)
        scale = max(scale, float(np.max(np.abs(J * lam2))), 1.0 / float(np.min(s.u1)))
    allr = np.concatenate([r.ravel() for r in res.values()])
    sup = float(np.max(np.abs(allr)))
    where = None
    if sup > 0:
        for layer in LAYERS:
            r = np.abs(res[layer]).max(axis=-1)
            if r.max() == sup:
                i, j = np.unravel_index(int(r.argmax()), r.shape)
                where = {"layer": layer, "y1": float(grid.y1[i]), "y2": float(grid.y2[layer][j])}
    return {"field": res, "sup": sup, "rms": float(np.sqrt(np.mean(allr ** 2))), "scale": scale,
            "relative": sup / scale, "where": where}


# ---------------------------------------------------------------------------
# boundaries

def boundary_checks(field, problem: Problem, phys: PhysicalField = None) -> dict:
    """Maxima over y1 of the interface jumps, wall slip and interface-slope defect."""
    geom, y1 = problem.geom, field.grid.y1
    phys = to_physical_field(field, geom, problem.bg.coriolis) if phys is None else phys
    cd, wl = field.cd_trace(), field.wall_trace()
    dP = np.abs(cd["P_plus"] - cd["P_minus"])
    dW = np.abs(cd["W_plus"] - cd["W_minus"])
    slip = {k: np.abs(wl[f"W_{k}"] - geom.g(y1, k, 1)) for k in LAYERS}
    slope = np.abs(phys.g_cd_prime - 0.5 * (cd["W_minus"] + cd["W_plus"]))
    return {
        "cd_pressure_jump": float(dP.max()), "cd_pressure_jump_at_y1": float(y1[dP.argmax()]),
        "cd_slope_jump": float(dW.max()), "cd_slope_jump_at_y1": float(y1[dW.argmax()]),
        "wall_slip_minus": float(slip["minus"].max()), "wall_slip_plus": float(slip["plus"].max()),
        "wall_slip": float(max(slip["minus"].max(), slip["plus"].max())),
        "g_cd_at_inlet": float(abs(phys.g_cd[0])),
        "g_cd_inlet_quadrature": inlet_quadrature_estimate(field),
        "g_cd_sup": float(np.max(np.abs(phys.g_cd))),
        "g_cd_slope_defect": float(slope.max()),
        "g_cd_slope_constant": float(slope.max() / field.grid.dy1 ** 2),
        "upper_wall_closure": phys.wall_mismatch,
    }


def inlet_quadrature_estimate(field) -> float:
    """A-posteriori error scale |S_h - S_2h| of the Simpson integral giving g_cd(0).

    The interface ordinate is a quadrature of 1/(rho u1) across the lower layer,
    so g_cd(0) = 0 holds only up to this error (nan if N2 is odd).
    """
    if field.grid.N2 % 2:
        return float("nan")
    s = field.state["minus"]
    f, y2 = 1.0 / (s.rho[0] * s.u1[0]), field.grid.y2["minus"]
    return float(abs(simpson(f, x=y2) - simpson(f[::2], x=y2[::2])))


# ---------------------------------------------------------------------------
# physical system

def physical_residual(phys: PhysicalField, gamma: float, collar: int = 2) -> dict:
    """Residual of the four conservative equations on the reconstructed mesh.

    The mesh is (x1, x2(y1, y2)); since dx2/dy2 = 1/(rho u1) the chain rule
    gives d/dx2 = rho u1 d/dy2 and d/dx1 = d/dy1 - (dx2/dy1) rho u1 d/dy2,
    with dx2/dy1 differenced from the reconstructed ordinates.  Nodes within
    ``collar`` cells of a wall, of the interface, or of the ends are skipped.
    """
    f = phys.coriolis
    out = {"mass": 0.0, "momentum_x1": 0.0, "momentum_x2": 0.0, "energy": 0.0}
    rel = 0.0
    x1 = phys.x1
    inner = (slice(collar, -collar), slice(collar, -collar))
    for layer in LAYERS:
        rho, u1, u2, P, x2 = (d[layer] for d in (phys.rho, phys.u1, phys.u2, phys.P, phys.x2))
        y2 = phys.y2[layer]
        m = rho * u1
        sl = _d(x2, x1, 0)

        def dx1(F):
            return _d(F, x1, 0) - sl * m * _d(F, y2, 1)

        def dx2(F):
            return m * _d(F, y2, 1)

        B = 0.5 * (u1 ** 2 + u2 ** 2) + gamma * P / ((gamma - 1.0) * rho)
        eqs = {
            "mass": dx1(rho * u1) + dx2(rho * u2),
            "momentum_x1": dx1(rho * u1 ** 2 + P) + dx2(rho * u1 * u2) - f * rho * u2,
            "momentum_x2": dx1(rho * u1 * u2) + dx2(rho * u2 ** 2 + P) + f * rho * u1,
            "energy": dx1(rho * u1 * B) + dx2(rho * u2 * B),
        }
        # flux magnitudes per unit length, for a dimensionless summary
        scales = {"mass": rho * u1, "momentum_x1": rho * u1 ** 2 + P, "momentum_x2": rho * u1 ** 2 + P,
                  "energy": rho * u1 * B}
        for k, e in eqs.items():
            r = float(np.max(np.abs(e[inner])))
            out[k] = max(out[k], r)
            rel = max(rel, r / float(np.max(np.abs(scales[k]))))
    out["sup"] = max(out.values())
    out["relative"] = rel
    return out


# ---------------------------------------------------------------------------
# conservation of the streamline invariants

def invariants_at_nodes(field, gas: GasConstants) -> dict:
    """Relative defect of (B, A) recomputed from the stored primitives."""
    out = {}
    for layer in LAYERS:
        inv = invariants_of_state(field.state[layer], gas)
        out[f"B_{layer}"] = float(np.max(np.abs(inv.B / field.B[layer] - 1.0)))
        out[f"A_{layer}"] = float(np.max(np.abs(inv.A / field.A[layer] - 1.0)))
    out["sup"] = max(out.values())
    return out


def streamline_invariants(phys: PhysicalField, B0: dict, A0: dict, gamma: float) -> dict:
    """Relative change of (B, A) along streamlines traced through the physical field.

    Streamlines start at every entrance node and follow dx2/dx1 = u2/u1 with
    Heun steps between the sampled x1 columns; primitives are read off each
    column by cubic splines in x2.  Nothing here uses the Lagrangian
    structure of the solver, so drift measures the accuracy of the
    reconstructed physical flow.
    """
    x1 = phys.x1
    out = {}
    for layer in LAYERS:
        cols = [CubicSpline(phys.x2[layer][i], np.stack([phys.rho[layer][i], phys.u1[layer][i],
                                                          phys.u2[layer][i], phys.P[layer][i]], axis=-1))
                for i in range(len(x1))]
        x = phys.x2[layer][0].copy()
        eB = eA = 0.0
        for i in range(len(x1) - 1):
            h = x1[i + 1] - x1[i]
            v0 = cols[i](x)
            k0 = v0[:, 2] / v0[:, 1]
            vp = cols[i + 1](x + h * k0)
            x = x + 0.5 * h * (k0 + vp[:, 2] / vp[:, 1])
            rho, u1, u2, P = cols[i + 1](x).T
            B = 0.5 * (u1 ** 2 + u2 ** 2) + gamma * P / ((gamma - 1.0) * rho)
            A = P / rho ** gamma
            eB = max(eB, float(np.max(np.abs(B / B0[layer] - 1.0))))
            eA = max(eA, float(np.max(np.abs(A / A0[layer] - 1.0))))
        out[f"B_{layer}"], out[f"A_{layer}"] = eB, eA
    out["sup"] = max(out.values())
    return out


def hyperbolicity(field, gas: GasConstants) -> dict:
    """Extreme eigenvalues over all nodes; ``ok`` iff lambda1 < 0 < lambda2 everywhere."""
    try:
        lam = [eigenvalues(field.state[k], gas) for k in LAYERS]
    except ArithmeticError as e:
        return {"max_lambda1": float("nan"), "min_lambda2": float("nan"), "ok": False, "error": str(e)}
    lam1 = max(float(np.max(l[0])) for l in lam)
    lam2 = min(float(np.min(l[1])) for l in lam)
    return {"max_lambda1": lam1, "min_lambda2": lam2, "ok": bool(lam1 < 0.0 < lam2)}


# ---------------------------------------------------------------------------
# report

@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""


@dataclass
class DiagnosticsReport:
    residual_transformed: dict = field(default_factory=dict)
    physical_residual: dict = field(default_factory=dict)
    boundary: dict = field(default_factory=dict)
    conservation: dict = field(default_factory=dict)
    hyperbolicity: dict = field(default_factory=dict)
    mass: dict = field(default_factory=dict)
    stability: dict = None
    convergence: dict = None
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def add(self, name, value, threshold, ok=None, note=""):
        ok = bool(value <= threshold) if ok is None else bool(ok)
        self.checks.append(Check(name, float(value), float(threshold), ok, note))

    def to_dict(self):
        return {
            "passed": self.passed, "failed": self.failed,
            "checks": [c.__dict__ for c in self.checks],
            "residual_transformed": {k: v for k, v in self.residual_transformed.items() if k != "field"},
            "physical_residual": self.physical_residual, "boundary": self.boundary,
            "conservation": self.conservation, "hyperbolicity": self.hyperbolicity, "mass": self.mass,
            "stability": self.stability, "convergence": self.convergence,
        }


def verify_field(field, problem: Problem) -> DiagnosticsReport:
    """Run every single-field diagnostic and attach pass/fail checks."""
    g = problem.gas
    phys = to_physical_field(field, problem.geom, problem.bg.coriolis)
    rep = DiagnosticsReport()
    rep.hyperbolicity = hyperbolicity(field, g)
    rep.residual_transformed = residual_transformed(field, problem)
    rep.physical_residual = physical_residual(phys, g.gamma)
    rep.boundary = boundary_checks(field, problem, phys)
    nodes = invariants_at_nodes(field, g)
    lines = streamline_invariants(phys, field.B, field.A, g.gamma)
    rep.conservation = {"nodes": nodes, "streamlines": lines}
    rep.mass = mass_consistency(phys, problem.geom, {k: problem.bg.m(k) for k in LAYERS})

    h2 = field.grid.dy1 ** 2
    b = rep.boundary
    rep.add("hyperbolicity", 0.0 if rep.hyperbolicity["ok"] else 1.0, 0.0,
            note="lambda1 < 0 < lambda2 at every node")
    rep.add("residual_transformed", rep.residual_transformed["relative"], RESIDUAL_CONST * h2,
            note="relative sup residual of the characteristic equations vs C*dy1^2")
    rep.add("cd_pressure_jump", b["cd_pressure_jump"], CD_TOL)
    rep.add("cd_slope_jump", b["cd_slope_jump"], CD_TOL)
    rep.add("wall_slip", b["wall_slip"], WALL_TOL)
    quad = b["g_cd_inlet_quadrature"]
    rep.add("g_cd_at_inlet", b["g_cd_at_inlet"], max(GCD0_TOL, quad) if np.isfinite(quad) else GCD0_TOL,
            note="|g_cd(0)| vs max(tol, Simpson h/2h difference)")
    rep.add("invariants_at_nodes", nodes["sup"], INVARIANT_TOL,
            note="(B, A) recomputed from primitives vs entrance values")
    return rep


# ---------------------------------------------------------------------------
# studies

def stability_study(config: dict, amplitudes, N2: int = None) -> dict:
    """Deviation norm D against perturbation size sigma for scaled copies of ``config``.

    Non-convergent amplitudes are recorded and excluded with a warning.
    """
    rows, excluded = [], []
    for t in sorted(set(float(a) for a in amplitudes)):
        pb = load_and_validate(scaled_config(config, t))
        if N2 is not None:
            pb = pb.with_solver(N2=N2)
        try:
            sol = picard_solve(pb)
        except (IterationError, BreakdownError) as e:
            msg = f"amplitude {t:g} excluded: {type(e).__name__}: {e}"
            warnings.warn(msg, RuntimeWarning)
            excluded.append({"amplitude": t, "error": type(e).__name__, "message": str(e)})
            continue
        rows.append({"amplitude": t, "sigma": pb.sigma, "deviation": sol.deviation_norm,
                     "iterations": sol.iterations, "hyperbolic": hyperbolicity(sol, pb.gas)["ok"]})
    pos = [r for r in rows if r["sigma"] > 0]
    slope = fitted_order([r["sigma"] for r in pos], [r["deviation"] for r in pos])
    ratios = []
    for r in pos:
        for s in pos:
            if np.isclose(s["amplitude"], 0.5 * r["amplitude"], rtol=1e-12):
                ratios.append({"amplitude": r["amplitude"], "ratio": r["deviation"] / s["deviation"]})
    constant = max((r["deviation"] / r["sigma"] for r in pos), default=float("nan"))
    span = (max(r["sigma"] for r in pos) / min(r["sigma"] for r in pos)) if pos else float("nan")
    ok = (SLOPE_RANGE[0] <= slope <= SLOPE_RANGE[1] and len(ratios) > 0
          and all(RATIO_RANGE[0] <= q["ratio"] <= RATIO_RANGE[1] for q in ratios))
    return {"rows": rows, "excluded": excluded, "slope": slope, "ratios": ratios,
            "constant": constant, "sigma_span": span, "passed": bool(ok)}


def _coincident(fine, coarse_shape):
    """Restrict a fine-grid array (both axes refined by 2) to the coarse nodes."""
    return fine[::2, ::2][: coarse_shape[0], : coarse_shape[1]]


def convergence_study(problem: Problem, grids=(32, 64, 128), direct: bool = True) -> dict:
    """Refinement study with N2 doubling and N1 doubling in step.

    Per grid: characteristic residual, physical residual, streamline drift of
    (B, A), interface-slope defect and, optionally, the Picard/direct gap.
    The discretization error of a grid is measured against the next finer
    grid at coincident nodes.
    """
    grids = [int(n) for n in grids]
    if any(b != 2 * a for a, b in zip(grids, grids[1:])):
        raise ValueError("grids must double successively")
    N1_0 = problem.cfg.N1 or cfl_steps(problem, grids[0], problem.cfg.cfl)
    rows, sols = [], []
    for k, N2 in enumerate(grids):
        pb = problem.with_solver(N2=N2, N1=N1_0 * 2 ** k)
        grid = make_grid(pb)
        sol = picard_solve(pb, grid)
        phys = to_physical_field(sol, pb.geom, pb.bg.coriolis)
        row = {"N2": N2, "N1": grid.N1, "h": 1.0 / N2, "iterations": sol.iterations,
               "residual": residual_transformed(sol, pb)["sup"],
               "physical_residual": physical_residual(phys, pb.gas.gamma)["relative"],
               "streamline_drift": streamline_invariants(phys, sol.B, sol.A, pb.gas.gamma)["sup"],
               "g_cd_slope_defect": boundary_checks(sol, pb, phys)["g_cd_slope_defect"],
               "hyperbolic": hyperbolicity(sol, pb.gas)["ok"]}
        if direct:
            dm = direct_march(pb, grid)
            row["hyperbolic"] = row["hyperbolic"] and hyperbolicity(dm, pb.gas)["ok"]
            row["gap"] = max(float(np.max(np.abs(dm.Z(l) - sol.Z(l)))) for l in LAYERS)
        rows.append(row)
        sols.append(sol)
    for k in range(len(grids) - 1):
        c, f = sols[k], sols[k + 1]
        rows[k]["error"] = max(float(np.max(np.abs(_coincident(f.Z(l), c.Z(l).shape) - c.Z(l))))
                               for l in LAYERS)
    out = {"rows": rows, "orders": {}}
    for key in ("residual", "physical_residual", "streamline_drift", "g_cd_slope_defect", "error"):
        use = [r for r in rows if key in r]
        out["orders"][key] = fitted_order([r["h"] for r in use], [r[key] for r in use])
    out["pairwise_residual_orders"] = [float(np.log2(a["residual"] / b["residual"]))
                                       for a, b in zip(rows, rows[1:])]
    ok = out["orders"]["residual"] >= ORDER_MIN
    if direct:
        out["gap_ratios"] = [a["gap"] / b["gap"] for a, b in zip(rows, rows[1:])]
        out["gap_within"] = [r["gap"] <= GAP_FACTOR * r["error"] for r in rows if "error" in r]
        ok = ok and all(q >= GAP_SHRINK for q in out["gap_ratios"]) and all(out["gap_within"])
    out["passed"] = bool(ok)
    return out
