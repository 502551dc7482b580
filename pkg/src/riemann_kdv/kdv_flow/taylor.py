"""Short-time complex evolution by Taylor series in t.

The m-th t-derivative of u (and of y under the coupled Schrodinger flow) is an
exact differential polynomial obtained by prolonging the flow m times; its
value on a contour comes from spectral z-derivatives of the samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

from ..diffpoly import DiffPoly, kdv_flow_rhs, kdv_operator, shiffman_flow_rhs
from ..errors import PoleOnContour, RadiusExceeded, ValidationError
from .spectral import ContourField, exact_scalar, mp_abs, precision, to_mp

# a contour whose raw spectrum has not decayed to 10^(-TAIL_FRACTION * dps) is
# under-resolved: the high z-derivatives in the time coefficients amplify the
# truncation error
_TAIL_FRACTION = 0.75


def y_flow_rhs(n: int = 1) -> DiffPoly:
    """dy/dt_n = P_n(u)' y - 2 P_n(u) y'."""
    P = kdv_operator(n)
    y = DiffPoly.var("y")
    return P.derive() * y - 2 * P * y.derive()


@lru_cache(maxsize=None)
def time_derivatives(m_max: int, n: int = 1, with_y: bool = False) -> tuple:
    """(D_0..D_m_max for u, and for y if requested) under the t_n flow."""
    F = kdv_flow_rhs(n)
    flows = {"u": F}
    if with_y:
        flows["y"] = y_flow_rhs(n)
    du = [DiffPoly.var("u")]
    dy = [DiffPoly.var("y")] if with_y else []
    for _ in range(m_max):
        du.append(du[-1].prolong({"u": F}))
        if with_y:
            dy.append(dy[-1].prolong(flows))
    return tuple(du), tuple(dy)


@lru_cache(maxsize=None)
def g_time_derivatives(m_max: int, n: int = 1) -> tuple:
    """D_0..D_m_max for g under dg/dt_n = -2 D(g P_n(u(g)))."""
    F = shiffman_flow_rhs(n)
    out = [DiffPoly.var("g")]
    for _ in range(m_max):
        out.append(out[-1].prolong({"g": F}))
    return tuple(out)


def evaluate_on(poly: DiffPoly, fields: dict, cache: dict | None = None) -> np.ndarray:
    """Samples of a differential polynomial given ContourFields for its variables."""
    cache = {} if cache is None else cache
    jets = {}
    for name, f in fields.items():
        need = poly.max_order(name)
        if need < 0:
            continue
        have = cache.get(name)
        if have is None or len(have) <= need:
            have = f.derivatives(need)
            cache[name] = have
        jets[name] = have
    dps = next(iter(fields.values())).dps
    with precision(dps):
        val = poly.evaluate(jets, scalar=exact_scalar)
        if not isinstance(val, np.ndarray):
            n = next(iter(fields.values())).n
            val = np.full(n, to_mp(val) if not hasattr(val, "real") else val, dtype=object)
        return val


def noise_bound(poly: DiffPoly, fields: dict, cache: dict) -> float:
    """First-order bound on the error of poly from the jet errors of its variables.

    Evaluates sum |c| |monomial| with every |f^(j)| raised by its error bound
    and subtracts the unperturbed value.
    """
    dps = next(iter(fields.values())).dps
    with precision(dps):
        absj, bumped = {}, {}
        for name, jets in cache.items():
            delta = fields[name].derivative_noise(len(jets) - 1)
            absj[name] = [np.array([abs(x) for x in v], dtype=object) for v in jets]
            bumped[name] = [a + d for a, d in zip(absj[name], delta)]
        scalar = lambda c: abs(exact_scalar(c))  # noqa: E731
        hi, lo = poly.evaluate(bumped, scalar=scalar), poly.evaluate(absj, scalar=scalar)
        diff = hi - lo
        return float(np.max(diff)) if np.ndim(diff) else float(diff)


def check_contour(f: ContourField, limit: float | None = None) -> float:
    limit = 10.0 ** (-_TAIL_FRACTION * f.dps) if limit is None else limit
    tail = f.tail_ratio()
    if not tail < limit:
        raise PoleOnContour(f"spectrum on the contour decays only to {tail:.2e}; a pole is too close or N is too small")
    return tail


@dataclass
class TaylorResult:
    u: ContourField
    y: ContourField | None
    order: int
    convergence: float          # sup |S_M - S_{M+2}| / sup |S_M| (u and y combined)
    radius_estimate: float
    coefficient_norms: list     # sup |D_m| / m! for u


def _radius(norms: list, noise: list) -> float:
    """Ratio test sqrt(a_m / a_{m+2}) on the two highest orders standing above rounding noise."""
    good = [m for m in range(1, len(norms)) if norms[m] > 1e6 * noise[m]]
    if len(good) < 3 or good[-1] != len(norms) - 1:
        return float("inf")
    m = good[-1]
    if m - 2 not in good:
        return float("inf")
    return float(np.sqrt(norms[m - 2] / norms[m]))


def taylor_flow(u0: ContourField, t: complex, order: int = 8, y0: ContourField | None = None,
                n: int = 1, check: bool = True) -> TaylorResult:
    """u(., t) (and y(., t)) on the contour of u0 as the order-M Taylor sum in t."""
    if order < 0:
        raise ValidationError("order must be non-negative")
    if y0 is not None and (y0.kind != u0.kind or y0.n != u0.n):
        raise ValidationError("u and y must live on the same contour")
    t = complex(t)
    if check:
        check_contour(u0)
        if y0 is not None:
            check_contour(y0)
    M2 = order + 2
    du, dy = time_derivatives(M2, n, y0 is not None)
    fields = {"u": u0}
    if y0 is not None:
        fields["y"] = y0
    cache: dict = {}
    with precision(u0.dps):
        tm = to_mp(t)
        fact = gmpy2.mpfr(1)
        power = gmpy2.mpc(1)
        su = np.array(u0.samples, dtype=object)
        sy = np.array(y0.samples, dtype=object) if y0 is not None else None
        su_M = sy_M = None
        norms = [float(np.max(mp_abs(u0.samples)))]
        noise = [0.0]
        for m in range(1, M2 + 1):
            fact *= m
            power *= tm
            Du = evaluate_on(du[m], fields, cache)
            norms.append(float(np.max(mp_abs(Du))) / float(fact))
            noise.append(noise_bound(du[m], fields, cache) / float(fact))
            su = su + Du * (power / fact)
            if y0 is not None:
                Dy = evaluate_on(dy[m], fields, cache)
                sy = sy + Dy * (power / fact)
            if m == order:
                su_M = su.copy()
                sy_M = sy.copy() if sy is not None else None
        if order == 0:
            su_M = np.array(u0.samples, dtype=object)
            sy_M = np.array(y0.samples, dtype=object) if y0 is not None else None
        diff = float(np.max(mp_abs(su - su_M))) / (float(np.max(mp_abs(su_M))) or 1.0)
        if y0 is not None:
            diff = max(diff, float(np.max(mp_abs(sy - sy_M))) / (float(np.max(mp_abs(sy_M))) or 1.0))
    rho = _radius(norms, noise)
    if check and abs(t) >= rho:
        raise RadiusExceeded(f"|t| = {abs(t):.3g} beyond the estimated radius {rho:.3g}")
    return TaylorResult(u0.like(su_M), y0.like(sy_M) if y0 is not None else None,
                        order, diff, rho, norms)


def taylor_flow_g(g0: ContourField, t: complex, order: int = 8, n: int = 1):
    """Order-M Taylor sum of the Gauss-map flow and sup |S_M - S_{M+2}| / sup |S_M|."""
    d = g_time_derivatives(order + 2, n)
    cache: dict = {}
    with precision(g0.dps):
        tm = to_mp(complex(t))
        fact = gmpy2.mpfr(1)
        power = gmpy2.mpc(1)
        s = np.array(g0.samples, dtype=object)
        s_M = s.copy()
        for m in range(1, order + 3):
            fact *= m
            power *= tm
            s = s + evaluate_on(d[m], {"g": g0}, cache) * (power / fact)
            if m == order:
                s_M = s.copy()
        conv = float(np.max(mp_abs(s - s_M))) / (float(np.max(mp_abs(s_M))) or 1.0)
    return g0.like(s_M), conv


def taylor_flow_recursive(u0: ContourField, t: complex, order: int) -> ContourField:
    """Independent route: Cauchy-Kovalevskaya recursion
    (m+1) u_{m+1} = -u_m''' - 3 sum_j (u_j u_{m-j})'."""
    t = complex(t)
    with precision(u0.dps):
        coeffs = [np.array(u0.samples, dtype=object)]
        for m in range(order):
            um = u0.like(coeffs[m])
            conv = sum(coeffs[j] * coeffs[m - j] for j in range(m + 1))
            nxt = -um.derivatives(3)[3] - 3 * u0.like(conv).derivatives(1)[1]
            coeffs.append(nxt / (m + 1))
        tm = to_mp(t)
        out = np.array(coeffs[-1], dtype=object)
        for m in range(order - 1, -1, -1):
            out = coeffs[m] + tm * out
        return u0.like(out)
