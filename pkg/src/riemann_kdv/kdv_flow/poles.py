"""Double poles of u(., t) inside a disk, located by contour integrals."""
from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
import numpy as np

from ..errors import PoleCountMismatch, ResidueNonzero, ValidationError
from .spectral import ContourField, mp_abs, precision, to_mp


@dataclass
class PoleLocation:
    z0: complex
    z0_moment: complex       # second route: c - (1/4)(1/2 pi i) int (z-c)^2 u dz
    a_minus2: complex
    residue: float           # |a_-1| relative to the integrand size
    count: complex           # (1/2 pi i) int u/v dz, -1 for one double pole


def locate_pole(u: ContourField, residue_tol: float = 1e-10, count_tol: float = 1e-6) -> PoleLocation:
    """Pole z0 of u = -2/(z - z0)^2 + holomorphic inside the circle of u."""
    if u.kind != "circle":
        raise ValidationError("pole location needs a circle contour")
    r = u.radius
    with precision(u.dps):
        c = u.coefficients()
        k = np.fft.fftfreq(u.n, 1.0 / u.n).astype(int)
        R = gmpy2.mpfr(r)
        two_pi_i = 2 * gmpy2.const_pi() * gmpy2.mpc(0, 1)
        dz = u.dz_ds()
        size = float(np.sum(mp_abs(u.samples * dz))) / u.n
        res = float(abs(c[k == -1][0] * R)) / (size / (2 * np.pi) or 1.0)
        if res > residue_tol:
            raise ResidueNonzero(f"residue of u is {res:.2e} (relative); v would be multivalued")
        # v = antiderivative with zero constant term at the centre
        cv = np.array([gmpy2.mpc(0)] * u.n, dtype=object)
        pos = {int(kk): j for j, kk in enumerate(k)}
        for j, kk in enumerate(k):
            kk = int(kk)
            if kk == -1 or c[j] == 0 or kk + 1 not in pos:
                continue
            cv[pos[kk + 1]] = c[j] * R / (kk + 1)
        v = u.from_coefficients(cv)
        if np.any(mp_abs(v) == 0):
            raise PoleCountMismatch("v vanishes on the contour")
        count = complex(np.sum(u.samples / v * dz) / u.n / two_pi_i)
        if abs(count + 1) > count_tol:
            raise PoleCountMismatch(f"argument count {count.real:.6g} differs from -1 (one double pole)")
        z = u.nodes()
        z0 = -np.sum(z * u.samples / v * dz) / u.n / two_pi_i
        cen = to_mp(u.center)
        moment = cen - np.sum((z - cen) ** 2 * u.samples * dz) / u.n / two_pi_i / 4
        a2 = np.sum((z - z0) * u.samples * dz) / u.n / two_pi_i
        return PoleLocation(complex(z0), complex(moment), complex(a2), res, count)


@dataclass
class PoleTrack:
    center: complex
    radius: float
    times: np.ndarray
    z0: np.ndarray
    z0_moment: np.ndarray
    a_minus2: np.ndarray
    extra: dict = field(default_factory=dict)

    def max_a2_defect(self) -> float:
        return float(np.max(np.abs(self.a_minus2 + 2)))

    def route_defect(self) -> float:
        return float(np.max(np.abs(self.z0 - self.z0_moment)))

    def displacement(self) -> float:
        return float(np.max(np.abs(self.z0 - self.z0[0])))

    def check(self, tol: float = 1e-6) -> None:
        if self.max_a2_defect() > tol:
            raise ValidationError(f"a_-2 deviates from -2 by {self.max_a2_defect():.2e}")


def track_pole(fields, times) -> PoleTrack:
    """Locate the pole for each sample u(., t) (all on the same circle)."""
    fields = list(fields)
    times = np.asarray(times, dtype=complex)
    if len(fields) != len(times) or not fields:
        raise ValidationError("need one field per time")
    locs = [locate_pole(f) for f in fields]
    f0 = fields[0]
    return PoleTrack(f0.center, f0.radius, times,
                     np.array([p.z0 for p in locs]), np.array([p.z0_moment for p in locs]),
                     np.array([p.a_minus2 for p in locs]))


def cross_times(tau: complex, h: float) -> np.ndarray:
    """tau and the four points tau +- h, tau +- i h."""
    return np.array([tau, tau + h, tau - h, tau + 1j * h, tau - 1j * h])


def cauchy_riemann_residual(track: PoleTrack) -> float:
    """|dz0/dx + i dz0/dy| / 2 at the centre of a cross_times stencil, relative to max(1, |dz0/dt|)."""
    t = track.times
    if len(t) != 5:
        raise ValidationError("expected the five-point stencil of cross_times")
    h = abs(t[1] - t[0])
    z = track.z0
    dx = (z[1] - z[2]) / (2 * h)
    dy = (z[3] - z[4]) / (2 * h)
    return float(abs(dx + 1j * dy) / 2 / max(1.0, abs(dx)))
