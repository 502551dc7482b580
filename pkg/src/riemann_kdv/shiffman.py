"""Level-curve curvature, the Shiffman function, Jacobi residuals and the
conjugate pair (f(h), gdot(h)) attached to a meromorphic Gauss map.

For a Gauss map g on C/<i> with height differential dz:

    kappa = |g|/(1+|g|^2) Re(g'/g)
    S     = Im[(3/2)(g'/g)^2 - g''/g - (g'/g)^2/(1+|g|^2)]
    f(h)  = g^2 h'/g' + 2 g h/(1+|g|^2)
    gdot(h) = (g^3 h'/(2 g'))'

Both kappa and S change sign under g -> 1/g, so they are evaluated on the
chart where |g| <= 1.  Next to an order-two zero, write g = w^2 k(w); then

    S = Im[-2k'/(w k) + (1/2)(k'/k)^2 - k''/k + (g'/g)^2 |g|^2/(1+|g|^2)]

which has no cancellation and tends to -(1/2) Im(g''''(p)/g''(p)) when
k'(0) = 0 (the planar-end condition).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cylinder_field import (JacobiSample, MeromorphicField, circle_nodes, product_field)
from .diffpoly import DiffPoly
from .errors import AtEnd, DivisorBoundViolated, GridTooCoarse, ValidationError

# distance below which a point counts as lying on the divisor
_END_EPS = 1e-12


# -- curvature and Shiffman function ---------------------------------------------

def planar_curvature(g: MeromorphicField, z) -> np.ndarray:
    """kappa = |g|/(1+|g|^2) Re(g'/g); raises AtEnd on the divisor."""
    z = np.asarray(z, dtype=complex)
    if g.divisor and np.any(g.distance_to_divisor(z) < _END_EPS):
        raise AtEnd("curvature is undefined at a zero or pole of g")
    J, flip = g.sphere_jet(z, 1)
    a = np.abs(J[0])
    k = a / (1 + a ** 2) * np.real(J[1] / J[0])
    return np.where(flip, -k, k)


def _s_direct(J: np.ndarray) -> np.ndarray:
    x = J[1] / J[0]
    x2 = x * x
    return np.imag(1.5 * x2 - J[2] / J[0] - x2 / (1 + np.abs(J[0]) ** 2))


def _series_jets(c: np.ndarray, w: np.ndarray, order: int) -> np.ndarray:
    out = np.empty((order + 1,) + w.shape, dtype=complex)
    p = np.asarray(c, dtype=complex)
    for m in range(order + 1):
        out[m] = np.polynomial.polynomial.polyval(w, p)
        p = np.polynomial.polynomial.polyder(p)
    return out


def _s_local(coef: np.ndarray, w: np.ndarray, radius: float) -> np.ndarray:
    """S from the factorisation G = w^2 k(w), G the chart vanishing at w = 0."""
    b = np.asarray(coef[2:], dtype=complex)
    scale = np.max(np.abs(b[:4])) if b.size else 1.0
    b1 = b[1] if abs(b[1]) > 1e-12 * scale / max(radius, 1e-300) else 0.0
    K = _series_jets(b, w, 2)
    k, kp, kpp = K
    # (k'(w) - k'(0))/w as a series
    q = np.polynomial.polynomial.polyval(w, np.arange(2, b.size) * b[2:])
    at = w == 0
    if b1 and np.any(at):
        raise AtEnd("end is not planar: the limit of S does not exist")
    with np.errstate(divide="ignore", invalid="ignore"):
        kw = q + np.where(at, 0, b1 / np.where(at, 1, w))
    r = kp / k
    G2 = np.abs(w) ** 4 * np.abs(k) ** 2
    tail = (2 + w * r) ** 2 * np.conj(w) ** 2 * np.abs(k) ** 2 / (1 + G2)
    return np.imag(-2 * kw / k + 0.5 * r * r - kpp / k + tail)


def shiffman_value(g: MeromorphicField, z) -> np.ndarray:
    """Shiffman function with its continuous extension at planar ends."""
    z = np.asarray(z, dtype=complex)
    S = np.empty(z.shape, dtype=float)
    done = np.zeros(z.shape, dtype=bool)
    if g.divisor:
        idx, off = g.nearest_divisor(z)
        for i, d in enumerate(g.divisor):
            if abs(d.order) != 2:
                continue
            coef, radius = g.local_series(i)
            m = (idx == i) & (np.abs(off) <= radius)
            if np.any(m):
                S[m] = np.sign(d.order) * _s_local(coef, off[m], radius)
                done |= m
    rest = ~done
    if np.any(rest):
        J, flip = g.sphere_jet(z[rest], 2)
        s = _s_direct(J)
        S[rest] = np.where(flip, -s, s)
    return S


def end_value(g: MeromorphicField, index: int) -> float:
    """Limit of S at a divisor point: -(1/2) Im(G''''/G'') on the vanishing chart G."""
    d = g.divisor[index]
    coef, _ = g.local_series(index)
    # G'' = 2 b0 and G'''' = 24 b2 with b_n = coef[n + 2]
    return float(np.sign(d.order) * -0.5 * np.imag(24 * coef[4] / (2 * coef[2])))


def shiffman_grid(g: MeromorphicField, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """S on the tensor grid z = x + i y (rows follow y)."""
    z = np.asarray(x)[None, :] + 1j * np.asarray(y)[:, None]
    return shiffman_value(g, z)


def shiffman_csv(x: np.ndarray, y: np.ndarray, S: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re_z", "im_z", "S"])
    for i, yi in enumerate(y):
        for j, xj in enumerate(x):
            w.writerow([f"{xj:.12g}", f"{yi:.12g}", f"{S[i, j]:.12g}"])
    return buf.getvalue()


def perturbed_field(g: MeromorphicField, eps: float = 0.01, x_c: float = 0.0) -> MeromorphicField:
    """g (1 + eps sin(-2 pi i (z - x_c))); the factor is sin(2 pi Im z) on Re z = x_c.

    The factor is periodic in Im z and zero-free for |Re z - x_c| < 0.8, so
    the product keeps the divisor of g on that band.
    """
    a = -2j * np.pi

    def jet(z, order):
        arg = a * (z - x_c)
        out = np.empty((order + 1,) + np.shape(z), dtype=complex)
        for m in range(order + 1):
            out[m] = eps * a ** m * np.sin(arg + m * np.pi / 2)
        out[0] += 1
        return out

    factor = MeromorphicField(jet, (), None, None, f"1+{eps:g}sin")
    return product_field(g, factor, f"{g.name}*(1+{eps:g}sin)")


# -- Jacobi residual -------------------------------------------------------------

def jacobi_potential(g: MeromorphicField, z) -> np.ndarray:
    """2|g'|^2/(1+|g|^2)^2, finite at poles via the 1/g chart."""
    J, _ = g.sphere_jet(np.asarray(z, dtype=complex), 1)
    return 2 * np.abs(J[1]) ** 2 / (1 + np.abs(J[0]) ** 2) ** 2


def _lap9(v: np.ndarray, h: float) -> np.ndarray:
    """Nine-point Laplacian on interior nodes."""
    c = v[1:-1, 1:-1]
    edges = v[:-2, 1:-1] + v[2:, 1:-1] + v[1:-1, :-2] + v[1:-1, 2:]
    corners = v[:-2, :-2] + v[:-2, 2:] + v[2:, :-2] + v[2:, 2:]
    return (4 * edges + corners - 20 * c) / (6 * h * h)


@dataclass(frozen=True)
class JacobiResidual:
    residual: float          # sup |v_zzbar + P v| on the fine grid
    coarse_residual: float   # same on every other node
    error_estimate: float    # Richardson estimate |R_2h - R_h| / 3

    @property
    def ratio(self) -> float:
        return self.coarse_residual / self.residual if self.residual else float("inf")


def _residual(g, x, y, v, h):
    z = x[None, :] + 1j * y[:, None]
    P = jacobi_potential(g, z[1:-1, 1:-1])
    r = 0.25 * _lap9(v, h) + P * v[1:-1, 1:-1]
    return float(np.max(np.abs(r))) if r.size else 0.0


def jacobi_residual(g: MeromorphicField, sample: JacobiSample, coarse_factor: float = 2.0) -> JacobiResidual:
    """Residual of the Jacobi equation v_zzbar + 2|g'|^2/(1+|g|^2)^2 v = 0.

    GridTooCoarse is raised when the Richardson estimate exceeds
    ``coarse_factor`` times the residual, i.e. the two grids are not in the
    asymptotic regime of a second-order scheme.
    """
    hx, hy = sample.spacing
    if not np.isclose(hx, hy, rtol=1e-10):
        raise ValidationError("nine-point stencil needs equal spacing in x and y")
    x, y, v = np.asarray(sample.x), np.asarray(sample.y), np.real(np.asarray(sample.v))
    if v.shape[0] < 5 or v.shape[1] < 5:
        raise ValidationError("grid needs at least 5 nodes per direction")
    R = _residual(g, x, y, v, hx)
    R2 = _residual(g, x[::2], y[::2], v[::2, ::2], 2 * hx)
    est = abs(R2 - R) / 3
    if R > 0 and est > coarse_factor * R:
        raise GridTooCoarse(f"Richardson estimate {est:.3g} exceeds residual {R:.3g}")
    return JacobiResidual(R, R2, est)


def sample_function(x: np.ndarray, y: np.ndarray, fun: Callable) -> JacobiSample:
    z = np.asarray(x)[None, :] + 1j * np.asarray(y)[:, None]
    return JacobiSample(np.asarray(x, float), np.asarray(y, float), np.asarray(fun(z)))


# -- conjugate pair ---------------------------------------------------------------

def _h_jets(h, J: np.ndarray) -> np.ndarray:
    """h, h', h'' from jets of g (h a DiffPoly in g or a callable on jets)."""
    if isinstance(h, DiffPoly):
        if h.variables() - {"g"}:
            raise ValidationError("h must be an expression in g and its derivatives")
        jets = {"g": J}
        return np.stack([np.broadcast_to(np.asarray(p.evaluate(jets), dtype=complex), J.shape[1:])
                         for p in (h, h.derive(), h.derive(2))])
    return np.asarray(h(J), dtype=complex)


def _needed_order(h) -> int:
    if isinstance(h, DiffPoly):
        return max(h.max_order("g"), 0) + 2
    return 4


@dataclass
class BoundReport:
    point: complex
    order: int
    max_forbidden: float   # largest normalised Laurent coefficient that must vanish


@dataclass
class ConjugatePair:
    g: MeromorphicField
    h: object

    def _jets(self, z):
        z = np.asarray(z, dtype=complex)
        J = self.g.jet(z, max(_needed_order(self.h), 2))
        return J, _h_jets(self.h, J)

    def f(self, z) -> np.ndarray:
        """g^2 h'/g' + 2 g h/(1+|g|^2)."""
        J, H = self._jets(z)
        g, gp = J[0], J[1]
        return g * g * H[1] / gp + 2 * g * H[0] / (1 + np.abs(g) ** 2)

    def _gdot_terms(self, z) -> np.ndarray:
        J, H = self._jets(z)
        g, gp, gpp = J[0], J[1], J[2]
        return np.stack([1.5 * g * g * H[1], g ** 3 * H[2] / (2 * gp),
                         -g ** 3 * H[1] * gpp / (2 * gp * gp)])

    def gdot(self, z) -> np.ndarray:
        """(g^3 h'/(2g'))' expanded."""
        return self._gdot_terms(z).sum(axis=0)

    def divisor_bound(self, radius: float | None = None, n: int = 256) -> list[BoundReport]:
        """Laurent coefficients of gdot that must vanish: order >= 1 at zeros of g,
        pole order <= 3 at poles."""
        if radius is None:
            radius = 0.2 * self.g.divisor_spacing()
        out = []
        for d in self.g.divisor:
            z, _ = circle_nodes(d.point.z, radius, n)
            terms = self._gdot_terms(z)
            vals = terms.sum(axis=0)
            # normalise by the size of the individual terms so that gdot = 0 is not noise-amplified
            scale = float(np.max(np.abs(terms))) or 1.0
            c = np.fft.fft(vals) / n  # c[m] ~ a_m r^m, negative m wrap around
            if d.order > 0:
                bad = np.concatenate([c[:1], c[n // 2:]])
            else:
                bad = c[n // 2:n - 3]
            out.append(BoundReport(d.point.z, d.order, float(np.max(np.abs(bad))) / scale))
        return out

    def check_divisor_bound(self, tol: float = 1e-8, **kw) -> list[BoundReport]:
        rep = self.divisor_bound(**kw)
        for r in rep:
            if r.max_forbidden > tol:
                raise DivisorBoundViolated(
                    f"gdot violates the divisor bound at {r.point} (order {r.order}): {r.max_forbidden:.3g}")
        return rep


def conjugate_pair(g: MeromorphicField, h, check: bool = True, tol: float = 1e-8) -> ConjugatePair:
    pair = ConjugatePair(g, h)
    if check and g.divisor:
        pair.check_divisor_bound(tol)
    return pair
