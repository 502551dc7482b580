"""Meromorphic Gauss maps on the cylinder C/<i>, the Weierstrass representation
with height differential dz, period map, flux and the Montiel-Ros map.

Conventions (pinned by tests):
  * the cylinder is C/<i>; gamma is the circle {Re z = x0} oriented by
    increasing Im z;
  * Psi = (1/2 (1/g - g), i/2 (1/g + g), 1) dz and X = Re int_{z0}^z Psi;
  * flux = Im of the gamma-period of Psi, so F3 = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import comb

from .errors import (BranchPointOnGrid, ContourHitsDivisor, PathHitsDivisor,
                     QuadratureNotConverged, ValidationError)

JetFn = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class CylinderPoint:
    """Point of C/<i>, stored with Im z in [0, 1)."""

    z: complex

    @classmethod
    def of(cls, z) -> "CylinderPoint":
        z = complex(z)
        y = z.imag - math.floor(z.imag)
        if y >= 1.0:
            y = 0.0
        return cls(complex(z.real, y))

    def lift(self, k: int) -> complex:
        return self.z + 1j * k


@dataclass(frozen=True)
class DivisorPoint:
    point: CylinderPoint
    order: int


# -- jet algebra --------------------------------------------------------------

def reciprocal_jet(J: np.ndarray) -> np.ndarray:
    """Jets of 1/G from jets of G (G nonzero)."""
    n = J.shape[0] - 1
    H = np.empty_like(J)
    H[0] = 1.0 / J[0]
    for m in range(1, n + 1):
        acc = sum(comb(m, k, exact=True) * J[k] * H[m - k] for k in range(1, m + 1))
        H[m] = -acc * H[0]
    return H


def product_jet(J1: np.ndarray, J2: np.ndarray) -> np.ndarray:
    n = min(J1.shape[0], J2.shape[0]) - 1
    out = np.zeros((n + 1,) + J1.shape[1:], dtype=complex)
    for m in range(n + 1):
        for k in range(m + 1):
            out[m] = out[m] + comb(m, k, exact=True) * J1[k] * J2[m - k]
    return out


def _nearest_divisor_distance(points: np.ndarray, divisor_lifts: np.ndarray) -> np.ndarray:
    if divisor_lifts.size == 0:
        return np.full(points.shape, np.inf)
    return np.min(np.abs(points[..., None] - divisor_lifts), axis=-1)


class MeromorphicField:
    """A meromorphic function on C/<i> with exact derivative jets.

    ``jet_fn(z, order)`` returns an array of shape (order+1, *z.shape) with
    g, g', ..., g^(order).  ``divisor`` lists the zeros (positive order) and
    poles (negative order) in one horizontal period ``x_period`` (or all of
    them when ``x_period`` is None).  ``reciprocal_fn`` optionally supplies exact
    jets of 1/g, used at and near poles.
    """

    def __init__(self, jet_fn: JetFn, divisor: Sequence[DivisorPoint] = (),
                 x_period: float | None = None, reciprocal_fn: JetFn | None = None,
                 name: str = "field"):
        self._jet_fn = jet_fn
        self.divisor = tuple(divisor)
        self.x_period = x_period
        self._reciprocal_fn = reciprocal_fn
        self.name = name

    def __repr__(self):
        return f"MeromorphicField({self.name!r}, divisor={len(self.divisor)} points)"

    def jet(self, z, order: int = 2) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.asarray(self._jet_fn(z, order), dtype=complex)

    def __call__(self, z):
        return self.jet(z, 0)[0]

    def reciprocal_jet(self, z, order: int = 2) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self._reciprocal_fn is not None:
            return np.asarray(self._reciprocal_fn(z, order), dtype=complex)
        return reciprocal_jet(self.jet(z, order))

    def reciprocal(self) -> "MeromorphicField":
        div = [DivisorPoint(d.point, -d.order) for d in self.divisor]
        return MeromorphicField(self.reciprocal_jet, div, self.x_period, self.jet, f"1/{self.name}")

    def sphere_jet(self, z, order: int = 2):
        """Jets of g where |g| <= 1 and of 1/g elsewhere, with the flip mask.

        Quantities built from the spherical metric are evaluated on the chart
        in which the value is bounded, so they stay finite at poles.
        """
        z = np.asarray(z, dtype=complex)
        near_pole = self.near_divisor(z, sign=-1)
        J = np.empty((order + 1,) + z.shape, dtype=complex)
        flip = np.zeros(z.shape, dtype=bool)
        safe = ~near_pole
        if np.any(safe):
            J[:, safe] = self.jet(z[safe], order)
            flip[safe] = np.abs(J[0, safe]) > 1
        idx = flip | near_pole
        if np.any(idx):
            J[:, idx] = self.reciprocal_jet(z[idx], order)
            flip[idx] = True
        return J, flip

    # divisor bookkeeping
    def divisor_lifts(self, x_lo: float, x_hi: float, y_lo: float = -1.0, y_hi: float = 2.0,
                      sign: int = 0) -> list[tuple[complex, int]]:
        """Divisor points (as complex numbers) with x_lo <= Re <= x_hi, y_lo <= Im <= y_hi."""
        out = []
        for d in self.divisor:
            if sign and np.sign(d.order) != sign:
                continue
            base = d.point.z
            if self.x_period:
                n_lo = math.floor((x_lo - base.real) / self.x_period) - 1
                n_hi = math.ceil((x_hi - base.real) / self.x_period) + 1
                shifts = [n * self.x_period for n in range(n_lo, n_hi + 1)]
            else:
                shifts = [0.0]
            for s in shifts:
                for k in range(math.floor(y_lo) - 1, math.ceil(y_hi) + 2):
                    w = base + s + 1j * k
                    if x_lo <= w.real <= x_hi and y_lo <= w.imag <= y_hi:
                        out.append((w, d.order))
        return out

    def distance_to_divisor(self, z, sign: int = 0) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if not self.divisor:
            return np.full(z.shape, np.inf)
        pad = 1.0 + (self.x_period or 0.0)
        lo = float(np.min(z.real)) - pad if z.size else 0.0
        hi = float(np.max(z.real)) + pad if z.size else 0.0
        ylo = float(np.min(z.imag)) - 1 if z.size else 0.0
        yhi = float(np.max(z.imag)) + 1 if z.size else 0.0
        lifts = np.array([w for w, o in self.divisor_lifts(lo, hi, ylo, yhi, sign)], dtype=complex)
        return _nearest_divisor_distance(z, lifts)

    def near_divisor(self, z, sign: int = 0, radius: float | None = None) -> np.ndarray:
        if radius is None:
            radius = 0.25 * self.divisor_spacing()
        return self.distance_to_divisor(z, sign) < radius

    def nearest_divisor(self, z):
        """(index into ``divisor``, offset z - lift) of the nearest divisor lift."""
        z = np.asarray(z, dtype=complex)
        idx = np.full(z.shape, -1, dtype=int)
        off = np.full(z.shape, np.inf + 0j, dtype=complex)
        if not self.divisor or z.size == 0:
            return idx, off
        pad = 1.0 + (self.x_period or 0.0)
        for i, d in enumerate(self.divisor):
            single = MeromorphicField(self._jet_fn, (d,), self.x_period)
            lifts = np.array([w for w, _ in single.divisor_lifts(
                float(z.real.min()) - pad, float(z.real.max()) + pad,
                float(z.imag.min()) - 1, float(z.imag.max()) + 1)], dtype=complex)
            if lifts.size == 0:
                continue
            w = z[..., None] - lifts
            k = np.argmin(np.abs(w), axis=-1)
            best = np.take_along_axis(w, k[..., None], -1)[..., 0]
            better = np.abs(best) < np.abs(off)
            idx[better] = i
            off[better] = best[better]
        return idx, off

    def local_series(self, index: int, n_terms: int = 48):
        """Taylor coefficients at a divisor point of g (zeros) or 1/g (poles).

        Returns (coefficients, radius) where the series is trusted for
        |w| <= radius.  The default uses Cauchy integrals on a circle of half
        the divisor spacing; subclasses with closed forms override it.
        """
        key = (index, n_terms)
        cache = self.__dict__.setdefault("_series_cache", {})
        if key not in cache:
            d = self.divisor[index]
            R = 0.5 * self.divisor_spacing()
            n = 4 * n_terms
            z, _ = circle_nodes(d.point.z, R, n)
            vals = self.jet(z, 0)[0] if d.order > 0 else self.reciprocal_jet(z, 0)[0]
            c = np.fft.fft(vals)[:n_terms] / n / R ** np.arange(n_terms)
            cache[key] = (c, 0.4 * R)
        return cache[key]

    def divisor_spacing(self) -> float:
        """Smallest distance between distinct divisor points (including translates)."""
        pts = [w for w, _ in self.divisor_lifts(-3 * (self.x_period or 1.0), 3 * (self.x_period or 1.0))]
        best = 1.0
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                if abs(a - b) > 1e-12:
                    best = min(best, abs(a - b))
        return best


# -- simple fields -------------------------------------------------------------

def constant_field(c: complex) -> MeromorphicField:
    c = complex(c)
    if c == 0:
        raise ValidationError("constant Gauss map must be nonzero")

    def jet(z, order):
        out = np.zeros((order + 1,) + np.shape(z), dtype=complex)
        out[0] = c
        return out

    return MeromorphicField(jet, (), None, None, f"const({c})")


def exponential_field(k: complex, scale: complex = 1.0) -> MeromorphicField:
    """g = scale * exp(k z); periodic on C/<i> iff k in 2 pi Z."""
    k = complex(k)
    scale = complex(scale)

    def jet(z, order):
        e = scale * np.exp(k * z)
        return np.stack([k ** m * e for m in range(order + 1)])

    def rjet(z, order):
        e = np.exp(-k * z) / scale
        return np.stack([(-k) ** m * e for m in range(order + 1)])

    return MeromorphicField(jet, (), None, rjet, f"{scale}*exp({k}z)")


def product_field(f: MeromorphicField, h: MeromorphicField, name: str | None = None) -> MeromorphicField:
    """Pointwise product; the divisor of f is kept (h assumed zero-free on use)."""
    def jet(z, order):
        return product_jet(f.jet(z, order), h.jet(z, order))

    return MeromorphicField(jet, f.divisor, f.x_period, None, name or f"{f.name}*{h.name}")


# -- argument principle ----------------------------------------------------------

def circle_nodes(center: complex, radius: float, n: int):
    theta = 2 * np.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * theta)
    dz = 1j * radius * np.exp(1j * theta) * (2 * np.pi / n)
    return z, dz


def argument_count(g: MeromorphicField, center: complex, radius: float, n: int = 512) -> complex:
    """(1/2 pi i) of the integral of g'/g over the circle |z - center| = radius."""
    z, dz = circle_nodes(center, radius, n)
    J = g.jet(z, 1)
    return complex(np.sum(J[1] / J[0] * dz) / (2j * np.pi))


def verify_divisor(g: MeromorphicField, radius: float | None = None) -> list[tuple[DivisorPoint, complex]]:
    if radius is None:
        radius = 0.2 * g.divisor_spacing()
    return [(d, argument_count(g, d.point.z, radius)) for d in g.divisor]


# -- periods and flux ---------------------------------------------------------

@dataclass
class ResidueRecord:
    point: complex
    order: int
    numeric: complex
    closed_form: complex
    error_estimate: float


@dataclass
class PeriodData:
    A: complex
    B: complex
    residues: list[ResidueRecord]
    error_estimate: float
    nodes: int

    def closure_defect(self) -> float:
        """|B - conj(A)|."""
        return abs(self.B - np.conj(self.A))

    def max_residue(self) -> float:
        return max((abs(r.numeric) for r in self.residues), default=0.0)

    def in_immersed_class(self, tol: float = 1e-8) -> bool:
        return self.closure_defect() < tol and self.max_residue() < tol


def _trapezoid_converged(f: Callable[[int], complex], tol: float, n0: int, n_max: int,
                         scale: Callable[[int], float] | None = None):
    """Double the node count until successive values agree to tol relative to
    max(1, |value|, scale(n)); scale is the size of the integrand."""
    n = n0
    prev = f(n)
    while n < n_max:
        n *= 2
        cur = f(n)
        err = abs(cur - prev)
        ref = max(1.0, abs(cur), scale(n) if scale else 0.0)
        if err <= tol * ref:
            return cur, err, n
        prev = cur
    raise QuadratureNotConverged(f"trapezoid rule not converged with {n_max} nodes (last change {err:.3e})")


def _check_contour(g: MeromorphicField, x0: float, clearance: float):
    for w, _ in g.divisor_lifts(x0 - 1.0 - (g.x_period or 0), x0 + 1.0 + (g.x_period or 0)):
        if abs(w.real - x0) < clearance:
            raise ContourHitsDivisor(f"contour Re z = {x0} passes within {clearance} of divisor point {w}")


def contour_integrals(g: MeromorphicField, x0: float, tol: float = 1e-14, n0: int = 32,
                      n_max: int = 1 << 16, clearance: float = 1e-6):
    """(int_gamma dz/g, int_gamma g dz, error estimate, nodes) on gamma = {Re z = x0}."""
    _check_contour(g, x0, clearance)
    cache = {}

    def both(n):
        if n not in cache:
            z = x0 + 1j * np.arange(n) / n
            J, flip = g.sphere_jet(z, 0)
            gv = np.where(flip, 1.0 / J[0], J[0])
            inv = np.where(flip, J[0], 1.0 / J[0])
            cache[n] = (1j * np.mean(inv), 1j * np.mean(gv))
        return cache[n]

    A, errA, nA = _trapezoid_converged(lambda n: both(n)[0], tol, n0, n_max)
    B, errB, nB = _trapezoid_converged(lambda n: both(n)[1], tol, n0, n_max)
    return A, B, max(errA, errB), max(nA, nB)


def _circle_integral(fun, center, radius, tol, n0=64, n_max=1 << 14):
    cache = {}

    def vals(n):
        if n not in cache:
            z, dz = circle_nodes(center, radius, n)
            cache[n] = fun(z) * dz
        return cache[n]

    return _trapezoid_converged(lambda n: complex(np.sum(vals(n))), tol, n0, n_max,
                                lambda n: float(np.sum(np.abs(vals(n)))))


def residue_closed_form(g: MeromorphicField, point: complex, order: int) -> complex:
    """-(2/3) F'''/F''^2 at the point, with F = g at zeros and F = 1/g at poles.

    This is the residue of dz/g at an order-two zero (of g dz at an order-two pole).
    """
    F = g.jet(np.array([point]), 3) if order > 0 else g.reciprocal_jet(np.array([point]), 3)
    return complex(-(2.0 / 3.0) * F[3, 0] / F[2, 0] ** 2)


def period_map(g: MeromorphicField, x0: float, tol: float = 1e-14, residue_radius: float | None = None,
               clearance: float = 1e-6) -> PeriodData:
    A, B, err, n = contour_integrals(g, x0, tol, clearance=clearance)
    if residue_radius is None:
        residue_radius = 0.3 * g.divisor_spacing()
    res = []
    for d in g.divisor:
        p = d.point.z
        if d.order > 0:
            fun = lambda z: g.reciprocal_jet(z, 0)[0]   # dz/g around a zero
        else:
            fun = lambda z: g.jet(z, 0)[0]              # g dz around a pole
        val, e, _ = _circle_integral(fun, p, residue_radius, tol)
        val /= 2j * np.pi
        cf = residue_closed_form(g, p, d.order) if abs(d.order) == 2 else complex("nan")
        res.append(ResidueRecord(p, d.order, val, cf, e))
    return PeriodData(complex(A), complex(B), res, float(err), n)


@dataclass
class FluxVector:
    F: np.ndarray
    error_estimate: float

    def __iter__(self):
        return iter(self.F)


def flux_from_periods(A: complex, B: complex) -> np.ndarray:
    """Im of the gamma-period of Psi given A = int dz/g and B = int g dz."""
    return np.array([0.5 * (A - B).imag, 0.5 * (A + B).real, 1.0])


def flux(g: MeromorphicField, x0: float, tol: float = 1e-14) -> FluxVector:
    A, B, err, n = contour_integrals(g, x0, tol)
    # int_gamma dz = i exactly for the trapezoid rule, hence F3 = 1
    return FluxVector(flux_from_periods(A, B), float(err))


# -- immersion ------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def psi_components(gv: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """Coefficients of Psi/dz given g and 1/g; shape (3, ...)."""
    return np.stack([0.5 * (ginv - gv), 0.5j * (ginv + gv), np.ones_like(gv)])


def _segment_distance(p, a, b):
    ab = b - a
    if ab == 0:
        return abs(p - a)
    s = np.clip(((p - a) * np.conj(ab)).real / abs(ab) ** 2, 0, 1)
    return abs(p - (a + s * ab))


def integrate_psi(g: MeromorphicField, vertices: Sequence[complex], max_piece: float = 0.05,
                  clearance: float = 1e-8) -> np.ndarray:
    """Complex integral of Psi along the polyline through vertices; shape (len-1, 3).

    Row k holds the integral from vertices[0] to vertices[k+1].
    """
    verts = np.asarray(vertices, dtype=complex)
    out = np.zeros((len(verts) - 1, 3), dtype=complex)
    acc = np.zeros(3, dtype=complex)
    xs = verts.real
    lifts = g.divisor_lifts(xs.min() - 1, xs.max() + 1, verts.imag.min() - 1, verts.imag.max() + 1)
    for k in range(len(verts) - 1):
        a, b = verts[k], verts[k + 1]
        for w, _ in lifts:
            if _segment_distance(w, a, b) < clearance:
                raise PathHitsDivisor(f"segment {a}->{b} passes through divisor point {w}")
        pieces = max(1, int(math.ceil(abs(b - a) / max_piece)))
        edges = a + (b - a) * np.linspace(0, 1, pieces + 1)
        mids = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = mids[:, None] + half[:, None] * _GL_X[None, :]
        J, flip = g.sphere_jet(nodes, 0)
        gv = np.where(flip, 1.0 / J[0], J[0])
        ginv = np.where(flip, J[0], 1.0 / J[0])
        P = psi_components(gv, ginv)
        acc = acc + np.sum(P * (half[:, None] * _GL_W[None, :]), axis=(1, 2))
        acc[2] = b - verts[0]
        out[k] = acc
    return out


def immerse(g: MeromorphicField, z0: complex, z: complex, path: Sequence[complex] | None = None) -> np.ndarray:
    """X(z) = Re int_{z0}^{z} Psi along z0 -> path... -> z, with X(z0) = 0."""
    verts = [complex(z0), *(path or []), complex(z)]
    if len(verts) == 2 and verts[0] == verts[1]:
        return np.zeros(3)
    X = integrate_psi(g, verts)[-1].real
    X[2] = (complex(z) - complex(z0)).real
    return X


def gauss_normal(gv: np.ndarray) -> np.ndarray:
    """Unit normal (2 Re g, 2 Im g, |g|^2 - 1)/(|g|^2 + 1); shape (3, ...)."""
    d = 1 + np.abs(gv) ** 2
    return np.stack([2 * gv.real / d, 2 * gv.imag / d, (np.abs(gv) ** 2 - 1) / d])


def normal_from_sphere_jet(J0: np.ndarray, flip: np.ndarray) -> np.ndarray:
    N = gauss_normal(J0)
    N[1:] = np.where(flip, -N[1:], N[1:])
    return N


def normal_dz(J: np.ndarray, flip: np.ndarray | None = None) -> np.ndarray:
    """dN/dz from jets (g, g'); handles the 1/g chart when ``flip`` is set."""
    g, gp = J[0], J[1]
    cg = np.conj(g)
    d2 = (1 + np.abs(g) ** 2) ** 2
    Nz = np.stack([gp * (1 - cg ** 2) / d2, -1j * gp * (1 + cg ** 2) / d2, 2 * cg * gp / d2])
    if flip is not None:
        Nz[1:] = np.where(flip, -Nz[1:], Nz[1:])
    return Nz


# -- Montiel-Ros --------------------------------------------------------------

@dataclass
class JacobiSample:
    """Values of v on the uniform grid x (columns) by y (rows), z = x + i y.

    ``vz`` optionally carries exact values of dv/dz; otherwise it is computed by
    fourth-order finite differences.
    """

    x: np.ndarray
    y: np.ndarray
    v: np.ndarray
    vz: np.ndarray | None = None

    @property
    def z(self) -> np.ndarray:
        return self.x[None, :] + 1j * self.y[:, None]

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0])

    def derivative_z(self) -> np.ndarray:
        if self.vz is not None:
            return self.vz
        hx, hy = self.spacing
        vx = _fd4(self.v, hx, axis=1)
        vy = _fd4(self.v, hy, axis=0)
        return 0.5 * (vx - 1j * vy)


def _fd4(v, h, axis):
    """Fourth-order first derivative, with second-order one-sided edges."""
    v = np.moveaxis(np.asarray(v), axis, 0)
    d = np.empty_like(v)
    d[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    d[:2] = np.gradient(v[:5], h, axis=0, edge_order=2)[:2]
    d[-2:] = np.gradient(v[-5:], h, axis=0, edge_order=2)[-2:]
    return np.moveaxis(d, 0, axis)


def jacobi_sample_linear(g: MeromorphicField, x: np.ndarray, y: np.ndarray, a) -> JacobiSample:
    """The sample v = <N, a> with exact dv/dz."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    z = x[None, :] + 1j * y[:, None]
    J, flip = g.sphere_jet(z, 1)
    N = normal_from_sphere_jet(J[0], flip)
    Nz = normal_dz(J, flip)
    a = np.asarray(a, float)
    return JacobiSample(x, y, np.tensordot(a, N, 1), np.tensordot(a, Nz, 1))


@dataclass
class MontielRosResult:
    X: np.ndarray            # shape (3, ny, nx)
    support_residual: float  # sup |<X_v, N> - v|
    harmonic_residual: float  # sup |Delta X_v| on interior points (finite differences)
    spread: float            # sup |X_v - mean X_v|


def montiel_ros_map(g: MeromorphicField, sample: JacobiSample, branch_tol: float = 1e-10) -> MontielRosResult:
    """X_v = v N + (v_z N_zbar + v_zbar N_z)/|N_z|^2 on the sample grid."""
    z = sample.z
    J, flip = g.sphere_jet(z, 1)
    N = normal_from_sphere_jet(J[0], flip)
    Nz = normal_dz(J, flip)
    nz2 = np.sum(np.abs(Nz) ** 2, axis=0)
    if np.any(nz2 < branch_tol ** 2):
        raise BranchPointOnGrid("grid contains a branch point of the Gauss map")
    vz = sample.derivative_z()
    X = sample.v * N + 2 * np.real(vz * np.conj(Nz)) / nz2
    support = float(np.max(np.abs(np.sum(X * N, axis=0) - sample.v)))
    hx, hy = sample.spacing
    lap = ((X[:, 1:-1, 2:] - 2 * X[:, 1:-1, 1:-1] + X[:, 1:-1, :-2]) / hx ** 2
           + (X[:, 2:, 1:-1] - 2 * X[:, 1:-1, 1:-1] + X[:, :-2, 1:-1]) / hy ** 2)
    mean = X.reshape(3, -1).mean(axis=1)
    spread = float(np.max(np.abs(X - mean[:, None, None])))
    return MontielRosResult(X, support, float(np.max(np.abs(lap))), spread)
