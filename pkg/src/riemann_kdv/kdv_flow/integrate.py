"""Holomorphic integration of the Shiffman flow of a Riemann-type Gauss map.

u = u(g) moves by KdV and y = g^(-1/2) by y_t = u'y - 2uy'; the new Gauss map
is 1/y^2.  A second route evolves g directly by its own flow.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cylinder_field import flux_from_periods
from ..errors import ValidationError
from .poles import PoleTrack, cauchy_riemann_residual, cross_times, track_pole
from .schrodinger import schrodinger_solve
from .sources import RiemannSource
from .spectral import DEFAULT_DPS, ContourField, mp_abs, precision, to_complex
from .taylor import _TAIL_FRACTION, taylor_flow, taylor_flow_g


@dataclass
class ShiffmanIntegration:
    t: float
    tau: complex
    order: int
    g: ContourField                 # g_tau = 1/y^2 on the working contour
    y: ContourField
    u: ContourField
    periods0: tuple                 # (int dz/g, int g dz) at tau = 0
    periods: tuple
    flux0: np.ndarray
    flux: np.ndarray
    taylor_convergence: float
    g_consistency: float            # sup |g_direct y^2 - 1|
    schrodinger_residual: float     # sup |y'' + u y| / sup |u y|
    ode_defect: float               # marched y vs Taylor y, relative
    track: PoleTrack | None = None
    cr_residual: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def period_drift(self) -> float:
        return float(max(abs(self.periods[0] - self.periods0[0]), abs(self.periods[1] - self.periods0[1])))

    @property
    def flux_drift(self) -> float:
        return float(np.max(np.abs(self.flux - self.flux0)))

    def report(self) -> dict:
        return {
            "t": self.t, "tau": [self.tau.real, self.tau.imag], "order": self.order,
            "period_drift": self.period_drift, "flux_drift": self.flux_drift,
            "taylor_convergence": self.taylor_convergence, "g_consistency": self.g_consistency,
            "schrodinger_residual": self.schrodinger_residual, "ode_defect": self.ode_defect,
            "cr_residual": self.cr_residual,
        }


def _periods(y: ContourField, g: ContourField) -> tuple:
    with precision(y.dps):
        A = y.like(y.samples ** 2, twist=0.0).integral()
    return A, g.integral()


def nodes_for_distance(d: float, dps: int = DEFAULT_DPS) -> int:
    """Power of two N whose top-quarter Fourier modes exp(-2 pi d k) pass the tail check."""
    need = _TAIL_FRACTION * dps * np.log(10) / (2 * np.pi * d * 3 / 8)
    return max(64, 1 << int(np.ceil(np.log2(need))))


def nodes_for_circle(radius: float, clearance: float, dps: int = DEFAULT_DPS) -> int:
    """N for a circle of the given radius whose nearest outside pole is clearance from the centre."""
    need = _TAIL_FRACTION * dps * np.log(10) / (np.log(clearance / radius) * 3 / 8)
    return max(64, 1 << int(np.ceil(np.log2(need))))


def integrate_shiffman(t: float = 1.0, tau: complex = 0.01, order: int = 8, n: int | None = None,
                       dps: int = DEFAULT_DPS, track: bool = True, track_n: int | None = None,
                       track_radius: float | None = None, track_h: float | None = None) -> ShiffmanIntegration:
    """Evolve the Riemann example R(t) to complex Shiffman time tau."""
    if order < 1:
        raise ValidationError("order must be at least 1")
    tau = complex(tau)
    src = RiemannSource(t, dps)
    # the working contour Re z = t/4 sits t/4 from the divisor
    n = n or nodes_for_distance(min(t, 1.0) / 4, dps)
    u0, y0, g0 = src.u_field(n=n), src.y_field(n=n), src.g_field(n=n)
    res = taylor_flow(u0, tau, order, y0)
    u, y = res.u, res.y
    with precision(dps):
        g = y.like(1 / y.samples ** 2, twist=0.0)
    P0, P = _periods(y0, g0), _periods(y, g)
    F0, F = flux_from_periods(*P0), flux_from_periods(*P)

    g_direct, conv_g = taylor_flow_g(g0, tau, order)
    with precision(dps):
        cons = float(np.max(mp_abs(g_direct.samples * y.samples ** 2 - 1)))
        yd = y.derivatives(2)
        uy = u.samples * y.samples
        sres = float(np.max(mp_abs(yd[2] + uy))) / (float(np.max(mp_abs(uy))) or 1.0)
    sol = schrodinger_solve(u, complex(yd[0][0]), complex(yd[1][0]))
    yv = to_complex(y.samples)
    ode = float(np.max(np.abs(sol.y - yv)) / np.max(np.abs(yv)))

    out = ShiffmanIntegration(t, tau, order, g, y, u, P0, P, F0, F,
                              max(res.convergence, conv_g), cons, sres, ode)
    if track:
        # divisor image: the double pole of u at the zero (t + i)/2 of g
        radius = track_radius or 0.2 * min(t, 1.0)
        track_n = track_n or nodes_for_circle(radius, min(t, 1.0), dps)
        uc = src.u_field("circle", track_n, center=complex(t, 1) / 2, radius=radius)
        h = track_h or (abs(tau) / 2 if tau else 1e-3)
        times = cross_times(tau, h)
        fields = [taylor_flow(uc, s, order).u for s in times]
        out.track = track_pole(fields, times)
        out.cr_residual = cauchy_riemann_residual(out.track)
    return out
