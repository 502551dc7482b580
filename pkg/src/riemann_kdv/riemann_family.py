"""The one-parameter family of Riemann minimal examples.

For the torus C/(tZ + iZ) the Gauss map on the cylinder C/<i> is

    g_t(z) = a_t (P(z) - e2),      a_t = ((e1 - e2)(e2 - e3))^(-1/2),

with order-two poles at z = n t and order-two zeros at z = (n + 1/2) t + i/2.
Subtracting e2 puts a double zero at the half period (t + i)/2; at t = 1,
e2 = 0 and the map is a_1 P.  The half-period translation satisfies
g_t(z + (t+i)/2) = -1/g_t(z), which gives exact jets of 1/g_t and keeps every
evaluation away from catastrophic cancellation.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from . import cylinder_field as cf
from .cylinder_field import CylinderPoint, DivisorPoint, MeromorphicField
from .elliptic import EllipticInvariants, Lattice, invariants, laurent_coefficients, wp_jet
from .errors import BracketNotFound, ClipTooSmall, ValidationError

# jets at the zero come from a power series inside this radius (relative to min(t, 1))
_SERIES_RADIUS = 0.25
_SERIES_TERMS = 40


@dataclass(frozen=True)
class RiemannExample:
    t: float
    inv: EllipticInvariants
    a_t: float
    zero: complex
    pole: complex

    @property
    def branch_value(self) -> float:
        """r = a_t (e1 - e2); the branch values are 0, inf, r and -1/r."""
        return self.a_t * (self.inv.e1 - self.inv.e2)

    def antipodal_defect(self) -> float:
        e1, e2, e3 = self.inv.e1, self.inv.e2, self.inv.e3
        return abs(self.a_t ** 2 * (e1 - e2) * (e3 - e2) + 1)


def example(t: float) -> RiemannExample:
    lat = Lattice(float(t))
    inv = invariants(lat)
    a = ((inv.e1 - inv.e2) * (inv.e2 - inv.e3)) ** -0.5
    return RiemannExample(lat.t, inv, a, complex(lat.t / 2, 0.5), 0j)


def scale_at_unit_torus_literal(t: float) -> float:
    """1/sqrt(-P(i/2) P(t/2)), the normalisation written for the unshifted map."""
    inv = invariants(Lattice(float(t)))
    return 1.0 / math.sqrt(-inv.e3 * inv.e1)


def _zero_series(ex: RiemannExample) -> np.ndarray:
    """Taylor coefficients f_n of g_t(zero + w) = -(1/a) / (P(w) - e2)."""
    n = _SERIES_TERMS
    c = laurent_coefficients(ex.inv, n)
    # P(w) - e2 = w^-2 D(w^2), D = 1 - e2 s + sum_k c_k s^(k+1)
    D = np.zeros(n + 1)
    D[0] = 1.0
    D[1] = -ex.inv.e2
    for k in range(1, n):
        D[k + 1] = c[k - 1]
    R = np.zeros(n + 1)
    R[0] = 1.0
    for m in range(1, n + 1):
        R[m] = -sum(D[k] * R[m - k] for k in range(1, m + 1))
    f = np.zeros(2 * n + 3)
    f[2::2] = -R / ex.a_t   # w^2 * R(w^2)
    return f


def _poly_jets(coef: np.ndarray, w: np.ndarray, order: int) -> np.ndarray:
    out = np.empty((order + 1,) + w.shape, dtype=complex)
    c = coef.astype(complex)
    for k in range(order + 1):
        out[k] = np.polynomial.polynomial.polyval(w, c)
        c = np.polynomial.polynomial.polyder(c)
    return out


class RiemannField(MeromorphicField):
    def __init__(self, ex: RiemannExample):
        self.example = ex
        self.lattice = Lattice(ex.t)
        self._series = _zero_series(ex)
        divisor = (DivisorPoint(CylinderPoint.of(ex.pole), -2), DivisorPoint(CylinderPoint.of(ex.zero), 2))
        super().__init__(self._jet, divisor, ex.t, self._rjet, f"riemann(t={ex.t:g})")

    def _direct(self, z, order):
        J = self.example.a_t * wp_jet(z, self.lattice, order)
        J[0] = J[0] - self.example.a_t * self.example.inv.e2
        return J

    def _jet(self, z, order):
        ex = self.example
        lat = self.lattice
        w0 = lat.reduce(z)
        w2 = lat.reduce(z - ex.zero)
        out = np.empty((order + 1,) + z.shape, dtype=complex)
        series = np.abs(w2) < _SERIES_RADIUS * min(ex.t, 1.0)
        recip = (np.abs(w2) < np.abs(w0)) & ~series
        direct = ~(series | recip)
        if np.any(series):
            out[:, series] = _poly_jets(self._series, w2[series], order)
        if np.any(recip):
            out[:, recip] = -cf.reciprocal_jet(self._direct(w2[recip], order))
        if np.any(direct):
            out[:, direct] = self._direct(w0[direct], order)
        return out

    def local_series(self, index: int, n_terms: int = 48):
        # g at the zero has the series f; 1/g at the pole is -g(zero + w)
        sign = 1.0 if self.divisor[index].order > 0 else -1.0
        return sign * self._series, _SERIES_RADIUS * min(self.example.t, 1.0)

    def _rjet(self, z, order):
        # 1/g(z) = -g(z + (t+i)/2)
        return -self._jet(np.asarray(z) + self.example.zero, order)


@lru_cache(maxsize=64)
def gauss_map(t: float) -> RiemannField:
    if not t > 0:
        raise ValidationError("t must be positive")
    return RiemannField(example(t))


def working_contour(t: float) -> float:
    """x0 = t/4, halfway between the pole circle and the zero circle."""
    return t / 4.0


def period_data(t: float, tol: float = 1e-14) -> cf.PeriodData:
    return cf.period_map(gauss_map(t), working_contour(t), tol)


def flux_vector(t: float) -> np.ndarray:
    return cf.flux(gauss_map(t), working_contour(t)).F


def normalized_flux(t: float) -> np.ndarray:
    """Flux after the rotation by pi about the x3-axis, which has the form (h, 0, 1).

    With gamma oriented by increasing Im z the raw flux of g_t is (-h, 0, 1);
    rotating the surface by pi about x3 (g -> -g) flips the first two
    components.
    """
    F = flux_vector(t)
    return np.array([-F[0], -F[1], F[2]])


def flux_profile(t: float) -> float:
    """h(t) > 0, decreasing in t."""
    return float(normalized_flux(t)[0])


class FluxTable:
    """Cached samples of h on a log-spaced t grid, used to bracket inverses."""

    def __init__(self, t_min: float = 0.2, t_max: float = 5.0, n: int = 41):
        self.t = np.geomspace(t_min, t_max, n)
        self.h = np.array([flux_profile(float(s)) for s in self.t])
        if not np.all(np.diff(self.h) < 0):
            raise BracketNotFound("flux profile is not monotone on the sampled grid")

    def bracket(self, h: float) -> tuple[float, float]:
        if not (self.h[-1] <= h <= self.h[0]):
            raise BracketNotFound(f"h = {h} outside explored range [{self.h[-1]:.6g}, {self.h[0]:.6g}]")
        k = int(np.searchsorted(-self.h, -h))
        k = min(max(k, 1), len(self.t) - 1)
        return float(self.t[k - 1]), float(self.t[k])


@lru_cache(maxsize=1)
def _default_table() -> FluxTable:
    return FluxTable()


def flux_inverse(h: float, tol: float = 1e-12, table: FluxTable | None = None) -> float:
    """t with flux_profile(t) = h: bisection to a narrow bracket, then secant."""
    if not h > 0:
        raise ValidationError("h must be positive")
    table = table or _default_table()
    lo, hi = table.bracket(h)
    f_lo, f_hi = flux_profile(lo) - h, flux_profile(hi) - h
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    for _ in range(8):
        mid = math.sqrt(lo * hi)
        f_mid = flux_profile(mid) - h
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    a, fa, b, fb = lo, f_lo, hi, f_hi
    for _ in range(50):
        c = b - fb * (b - a) / (fb - fa)
        if not (min(lo, hi) <= c <= max(lo, hi)):
            c = 0.5 * (lo + hi)
        fc = flux_profile(c) - h
        if abs(fc) < tol:
            return c
        if (fc > 0) == (f_lo > 0):
            lo, f_lo = c, fc
        else:
            hi, f_hi = c, fc
        a, fa, b, fb = b, fb, c, fc
    raise BracketNotFound("secant iteration did not converge")


def family_table(ts) -> list[dict]:
    rows = []
    for t in ts:
        ex = example(t)
        rows.append({"t": ex.t, "a_t": ex.a_t, "e2": ex.inv.e2, "h": flux_profile(ex.t)})
    return rows


# -- mesh -----------------------------------------------------------------------

@dataclass
class Mesh:
    vertices: np.ndarray          # (nv, 3)
    normals: np.ndarray           # (nv, 3)
    faces: np.ndarray             # (nf, 3) int
    params: np.ndarray            # (nv,) complex parameter z of each vertex
    grid_shape: tuple[int, int]   # (ny, nx)
    clipped: int                  # number of grid vertices removed near ends
    end_rings: list = field(default_factory=list)  # (divisor point, vertex indices of its hole boundary)

    def to_obj(self) -> str:
        lines = ["# Riemann minimal example mesh"]
        lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in self.vertices]
        lines += [f"vn {x:.12g} {y:.12g} {z:.12g}" for x, y, z in self.normals]
        lines += [f"f {a + 1}//{a + 1} {b + 1}//{b + 1} {c + 1}//{c + 1}" for a, b, c in self.faces]
        return "\n".join(lines) + "\n"

    def to_ply(self) -> str:
        head = ["ply", "format ascii 1.0", f"element vertex {len(self.vertices)}",
                "property double x", "property double y", "property double z",
                "property double nx", "property double ny", "property double nz",
                f"element face {len(self.faces)}", "property list uchar int vertex_indices", "end_header"]
        body = [" ".join(f"{v:.12g}" for v in (*p, *n)) for p, n in zip(self.vertices, self.normals)]
        body += [f"3 {a} {b} {c}" for a, b, c in self.faces]
        return "\n".join(head + body) + "\n"


def _immersion_grid(g: RiemannField, x: np.ndarray, y: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Integral of Psi from z0 = i/4 to every kept grid node x + i y.

    Divisor points sit on Im z = 0 and Im z = 1/2.  Nodes with Im z < 1/2 are
    reached vertically from the row Im z = 1/4 and the rest from Im z = 3/4;
    the two rows are joined along the divisor-free line Re z = t/4.  Residues
    vanish, so the result does not depend on these choices.
    """
    t = g.example.t
    hop = t / 4
    out = np.full((3, len(y), len(x)), np.nan + 0j, dtype=complex)

    def along(start, verts, init):
        vals = cf.integrate_psi(g, [start, *verts])
        return init[:, None] + vals.T

    z0 = 0.25j
    to_hop = cf.integrate_psi(g, [z0, complex(hop, 0.25), complex(hop, 0.75)])
    starts = {0.25: (z0, np.zeros(3, complex)), 0.75: (complex(hop, 0.75), to_hop[-1])}
    for yb, (s0, v0) in starts.items():
        base = np.empty((3, len(x)), dtype=complex)
        right = np.flatnonzero(x >= s0.real)
        left = np.flatnonzero(x < s0.real)[::-1]
        for side in (right, left):
            if side.size:
                base[:, side] = along(s0, [complex(x[k], yb) for k in side], v0)
        rows = np.flatnonzero((y < 0.5) if yb == 0.25 else (y >= 0.5))
        up = rows[y[rows] >= yb]
        down = rows[y[rows] < yb][::-1]
        for k in range(len(x)):
            for seq in (up, down):
                seq = list(seq)
                # stop at the first clipped node; beyond it lies the divisor
                stop = next((i for i, j in enumerate(seq) if not keep[j, k]), len(seq))
                seq = seq[:stop]
                if seq:
                    out[:, seq, k] = along(complex(x[k], yb), [complex(x[k], y[j]) for j in seq], base[:, k])
    return out


def mesh(t: float, resolution: int = 24, height_range: tuple[float, float] | None = None,
         end_clip: float | None = None) -> Mesh:
    """Triangulated piece of the example with x3 in height_range.

    The parameter grid has ``resolution`` nodes per unit length in both
    directions (at least 8 around the circle).  Nodes within ``end_clip`` of a
    divisor point are removed; X(i/4) = 0 so that x3 = Re z.
    """
    g = gauss_map(t)
    if resolution <= 0:
        raise ValidationError("resolution must be positive")
    if end_clip is None:
        end_clip = 0.05 * t
    if height_range is None:
        height_range = (-0.5 * t, 0.5 * t)
    lo, hi = map(float, height_range)
    if not hi > lo:
        raise ValidationError("height_range must be increasing")
    ny = max(8, int(resolution))
    nx = max(2, int(round(resolution * (hi - lo)))) + 1
    x = np.linspace(lo, hi, nx)
    y = np.arange(ny) / ny
    h = max(x[1] - x[0], 1.0 / ny)
    if end_clip <= 0 or end_clip < 0.5 * h:
        raise ClipTooSmall(f"end_clip {end_clip} is below half the grid spacing {h:.4g}; "
                           "nodes next to an end would be kept")
    Z = x[None, :] + 1j * y[:, None]
    keep = g.distance_to_divisor(Z) >= end_clip
    X = _immersion_grid(g, x, y, keep).real
    X[2] = Z.real
    J, flip = g.sphere_jet(Z[keep], 0)
    N = cf.normal_from_sphere_jet(J[0], flip)
    index = -np.ones(Z.shape, dtype=int)
    index[keep] = np.arange(int(keep.sum()))
    verts = np.stack([X[0][keep], X[1][keep], X[2][keep]], axis=1)
    if not np.all(np.isfinite(verts)):
        raise ValidationError("some kept nodes were not reached by the path integration")
    faces = []
    for j in range(ny):
        jn = (j + 1) % ny
        for k in range(nx - 1):
            a, b, c, d = index[j, k], index[j, k + 1], index[jn, k + 1], index[jn, k]
            if min(a, b, c, d) < 0:
                continue
            faces.append((a, b, c))
            faces.append((a, c, d))
    rings = []
    for w, order in g.divisor_lifts(lo, hi, 0.0, 1.0):
        if w.imag >= 1.0:
            continue
        dist = np.min([np.abs(Z - (w + s)) for s in (-1j, 0, 1j)], axis=0)
        ring = keep & (dist < end_clip + 1.5 * h)
        if np.any(ring):
            rings.append((w, order, index[ring]))
    return Mesh(verts, N.T.copy(), np.array(faces, dtype=int).reshape(-1, 3), Z[keep],
                (ny, nx), int((~keep).sum()), rings)


def horizontal_circle_residuals(m: Mesh) -> list[tuple[float, float]]:
    """For each grid column (fixed height) away from the ends: (x3, relative circle-fit residual)."""
    out = []
    heights = np.round(m.params.real, 12)
    for hgt in np.unique(heights):
        sel = heights == hgt
        if sel.sum() < m.grid_shape[0]:
            continue  # column touched by clipping
        pts = m.vertices[sel][:, :2]
        out.append((float(hgt), circle_fit_residual(pts)))
    return out


def circle_fit_residual(pts: np.ndarray) -> float:
    """Relative residual of an algebraic least-squares circle fit."""
    x, y = pts[:, 0], pts[:, 1]
    M = np.stack([x, y, np.ones_like(x)], axis=1)
    rhs = x ** 2 + y ** 2
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    cx, cy = sol[0] / 2, sol[1] / 2
    r = math.sqrt(max(sol[2] + cx ** 2 + cy ** 2, 0.0))
    if r == 0:
        return float("inf")
    d = np.hypot(x - cx, y - cy)
    return float(np.max(np.abs(d - r)) / r)


def reflection_defect(m: Mesh) -> float:
    """Max distance from the reflection (x1, -x2, x3) of a vertex to the mesh, relative to its extent."""
    tree = cKDTree(m.vertices)
    refl = m.vertices * np.array([1.0, -1.0, 1.0])
    ext = np.ptp(m.vertices, axis=0).max()
    # the reflection is determined up to a translation in x2
    refl[:, 1] += 2 * np.mean(m.vertices[:, 1])
    d, _ = tree.query(refl)
    return float(d.max() / ext)


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
