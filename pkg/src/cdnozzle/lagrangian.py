"""Inverse mass-Lagrangian transform.

With y1 = x1 and y2 the cumulative mass flux measured from the contact
discontinuity, the physical ordinate follows from dx2/dy2 = 1/(rho u1):

    x2(y1, y2) = g-(y1) + int_{-m-}^{y2} dy2' / (rho u1).

Integrals use cumulative composite Simpson along each y1 level of the solver
grid; the minus layer starts on the lower wall and the plus layer continues
from the recovered interface x2 = g_cd(y1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .background import LAYERS
from .errors import SolutionInvalidError
from .problem import NozzleGeometry


@dataclass
class PhysicalField:
    """Primitives on the curvilinear physical mesh (x1, x2(y1, y2)) of each layer."""
    x1: np.ndarray
    y2: dict                  # mass coordinate of each sample row (fixed per layer)
    x2: dict
    rho: dict
    u1: dict
    u2: dict
    P: dict
    g_cd: np.ndarray
    g_cd_prime: np.ndarray
    wall_mismatch: float      # sup |x2(y1, m+) - g+(y1)|: total-mass closure of the quadrature
    coriolis: float = 1.0

    def column(self, i, layer):
        """Samples of one x1 column: (x2, rho, u1, u2, P)."""
        return tuple(d[layer][i] for d in (self.x2, self.rho, self.u1, self.u2, self.P))

    def resample(self, i, x2q):
        """Primitives at arbitrary ordinates x2q of column i (piecewise cubic per layer)."""
        x2q = np.asarray(x2q, dtype=float)
        out = np.full((4,) + x2q.shape, np.nan)
        for layer in LAYERS:
            x = self.x2[layer][i]
            sel = (x2q >= x[0]) & (x2q <= x[-1])
            for k, d in enumerate((self.rho, self.u1, self.u2, self.P)):
                out[k][sel] = CubicSpline(x, d[layer][i])(x2q[sel])
        return out


def _mass_flux(field, layer):
    s = field.state[layer]
    flux = s.rho * s.u1
    if not np.all(np.isfinite(flux)) or np.any(flux <= 0.0):
        bad = np.argwhere(~(np.isfinite(flux) & (flux > 0.0)))[0]
        raise SolutionInvalidError(
            f"nonpositive mass flux rho*u1 in layer {layer} at y1={field.grid.y1[bad[0]]:.6g}, "
            f"y2={field.grid.y2[layer][bad[1]]:.6g}")
    return flux


def _layer_x2(field, layer, base):
    y2 = field.grid.y2[layer]
    flux = _mass_flux(field, layer)
    return base[:, None] + cumulative_simpson(1.0 / flux, x=y2, axis=1, initial=0.0)


def inverse_map_x2(field, geom: NozzleGeometry) -> dict:
    """Physical ordinate x2 at every node of both layers."""
    x2m = _layer_x2(field, "minus", geom.g(field.grid.y1, "minus"))
    x2p = _layer_x2(field, "plus", x2m[:, -1])
    return {"minus": x2m, "plus": x2p}


def _slope(y1, v):
    return np.gradient(v, y1, edge_order=2)


def recover_cd_curve(field, geom: NozzleGeometry):
    """Interface ordinate g_cd(y1) and its slope (centered inside, one-sided at the ends)."""
    y1 = field.grid.y1
    g = _layer_x2(field, "minus", geom.g(y1, "minus"))[:, -1]
    return g, _slope(y1, g)


def to_physical_field(field, geom: NozzleGeometry, coriolis=1.0) -> PhysicalField:
    y1 = field.grid.y1
    x2 = inverse_map_x2(field, geom)
    g_cd = x2["minus"][:, -1]
    st = field.state
    return PhysicalField(
        x1=y1.copy(), y2={k: field.grid.y2[k].copy() for k in LAYERS}, x2=x2,
        rho={k: st[k].rho for k in LAYERS}, u1={k: st[k].u1 for k in LAYERS},
        u2={k: st[k].u2 for k in LAYERS}, P={k: st[k].P for k in LAYERS},
        g_cd=g_cd, g_cd_prime=_slope(y1, g_cd),
        wall_mismatch=float(np.max(np.abs(x2["plus"][:, -1] - geom.g(y1, "plus")))),
        coriolis=coriolis)


def mass_consistency(phys: PhysicalField, geom: NozzleGeometry, m: dict) -> dict:
    """Mass flux through each layer from a physical-space Simpson quadrature, minus m."""
    out = {}
    for layer in LAYERS:
        x2 = phys.x2[layer]
        flux = phys.rho[layer] * phys.u1[layer]
        total = np.array([cumulative_simpson(f, x=x)[-1] for f, x in zip(flux, x2)])
        out[layer] = float(np.max(np.abs(total - m[layer])))
    return out
