"""Weierstrass elliptic function on rectangular tori C/(tZ + iZ).

The lattice sum is organised by rows: summing 1/(z - w)^2 over one row of the
lattice gives a closed-form csc^2, so

    P(z) = (pi/A)^2 [csc^2(pi z/A) - 1/3
                      + sum_{m != 0} (csc^2(pi (z - m B)/A) - csc^2(pi m B/A))]

with A the shorter generator and Im(B/A) >= 1.  Row m contributes O(q^(2|m|-1))
with q = exp(-pi Im(B/A)) <= exp(-pi), so a handful of rows reach machine
precision and the discarded tail has an explicit geometric bound.

Higher derivatives come from the algebraic identities P'' = 6P^2 - g2/2,
P''' = 12 P P', ... generated symbolically (see ``derivative_polynomials``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial import Polynomial

from .errors import Pole, PrecisionWarning, TruncationFailure, ValidationError

# relative tail tolerance for the row sums
_TAIL_TOL = 1e-18
_MAX_ROWS = 64
# below this distance to the lattice (relative to min(t, 1)) results are flagged
_NEAR_POLE = 1e-6


@dataclass(frozen=True)
class Lattice:
    """The rectangular lattice tZ + iZ."""

    t: float

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValidationError(f"lattice parameter must be positive, got {self.t!r}")

    @property
    def half_periods(self) -> tuple[complex, complex, complex]:
        """(t/2, (t+i)/2, i/2), the points where e1, e2, e3 are attained."""
        return (self.t / 2, (self.t + 1j) / 2, 0.5j)

    @property
    def basis(self) -> tuple[complex, complex]:
        """Generators (A, B) with |A| <= |B| and Im(B/A) = max(t, 1/t) >= 1."""
        if self.t <= 1:
            return complex(self.t), 1j
        return 1j, complex(-self.t)

    @property
    def nome_exponent(self) -> float:
        """Im(B/A); row m of the lattice sum decays like exp(-2 pi |m| Im(B/A))."""
        return max(self.t, 1.0 / self.t)

    def reduce(self, z):
        """Representative of z in the cell |Re z| <= t/2, |Im z| <= 1/2."""
        z = np.asarray(z, dtype=complex)
        x = z.real / self.t
        y = z.imag
        return (x - np.round(x)) * self.t + 1j * (y - np.round(y))


@dataclass(frozen=True)
class EllipticInvariants:
    """g2, g3 and the half-period values; all real for rectangular lattices."""

    g2: float
    g3: float
    e1: float
    e2: float
    e3: float

    def residuals(self) -> dict[str, float]:
        e1, e2, e3 = self.e1, self.e2, self.e3
        return {
            "sum": abs(e1 + e2 + e3),
            "g2": abs(self.g2 + 4 * (e1 * e2 + e1 * e3 + e2 * e3)),
            "g3": abs(self.g3 - 4 * e1 * e2 * e3),
        }


def _rows_needed(s: float, tol: float = _TAIL_TOL) -> tuple[int, float]:
    """Number of rows M and a bound on the discarded tail sum_{|m|>M}.

    For |Im w| >= a, |csc^2 w| <= 4 e^{-2a}/(1 - e^{-2a})^2.  A row with index m
    sits at |Im w| >= pi (|m| - 1/2) s for reduced z, and both csc^2 terms of the
    row obey this bound.
    """
    def row_bound(m):
        a = math.pi * (m - 0.5) * s
        r = math.exp(-2 * a)
        return 2 * 4 * r / (1 - r) ** 2

    for m_max in range(1, _MAX_ROWS + 1):
        first = row_bound(m_max + 1)
        ratio = math.exp(-2 * math.pi * s)
        tail = 2 * first / (1 - ratio)  # both signs of m, geometric majorant
        if tail < tol:
            return m_max, tail
    raise TruncationFailure(f"row sum needs more than {_MAX_ROWS} rows (Im tau = {s})")


def _csc2_cot(w):
    """csc^2(w) and cot(w), stable for large |Im w| and accurate near w = 0."""
    w = np.asarray(w, dtype=complex)
    sigma = np.where(w.imag >= 0, 1.0, -1.0)
    em1 = np.expm1(2j * sigma * w)        # p - 1 with p = exp(2 i sigma w), |p| <= 1
    p = em1 + 1.0
    csc2 = -4.0 * p / em1 ** 2
    cot = 1j * sigma * (p + 1.0) / em1
    return csc2, cot


@lru_cache(maxsize=256)
def invariants(lat: Lattice) -> EllipticInvariants:
    """Eisenstein invariants g2 = 60 sum' w^-4, g3 = 140 sum' w^-6 and e1, e2, e3."""
    A, B = lat.basis
    tau = B / A
    m_max, _ = _rows_needed(lat.nome_exponent)
    m = np.arange(1, m_max + 1)
    s, _ = _csc2_cot(np.pi * m * tau)
    pi = math.pi
    # row sums: sum_n (x + n)^-4 = pi^4 (s^2 - 2s/3), sum_n (x + n)^-6 = pi^6 (s^3 - s^2 + 2s/15)
    sum4 = pi ** 4 / 45 + 2 * np.sum(pi ** 4 * (s ** 2 - 2 * s / 3))
    sum6 = 2 * pi ** 6 / 945 + 2 * np.sum(pi ** 6 * (s ** 3 - s ** 2 + 2 * s / 15))
    g2 = complex(60 * sum4 / A ** 4)
    g3 = complex(140 * sum6 / A ** 6)
    e = [complex(_wp_pair(np.asarray(h), lat)[0]) for h in lat.half_periods]
    scale = max(1.0, abs(g2))
    for val in (g2, g3, *e):
        if abs(val.imag) > 1e-9 * scale:
            raise TruncationFailure(f"non-real invariant {val} for a rectangular lattice")
    return EllipticInvariants(g2.real, g3.real, e[0].real, e[1].real, e[2].real)


def _wp_pair(z, lat: Lattice):
    """(P(z), P'(z)) for reduced or unreduced z; no pole check."""
    A, B = lat.basis
    m_max, _ = _rows_needed(lat.nome_exponent)
    zr = lat.reduce(z)
    m = np.arange(-m_max, m_max + 1).reshape((-1,) + (1,) * zr.ndim)
    w = np.pi * (zr[None, ...] - m * B) / A
    c2, ct = _csc2_cot(w)
    mr = np.arange(1, m_max + 1)
    c2row, _ = _csc2_cot(np.pi * mr * B / A)
    # csc^2 is even, rows m and -m share the constant; row 0 contributes 1/3
    c2m_total = 1.0 / 3.0 + 2.0 * np.sum(c2row)
    k = np.pi / A
    wp = k ** 2 * (np.sum(c2, axis=0) - c2m_total)
    wpp = k ** 3 * np.sum(-2.0 * c2 * ct, axis=0)
    return wp, wpp


@lru_cache(maxsize=None)
def _derivative_polynomials_cached(order: int, g2: float, g3: float):
    even = {0: Polynomial([0.0, 1.0])}
    odd = {}
    x = Polynomial([0.0, 1.0])
    wp2 = 6 * x ** 2 - g2 / 2
    cubic = 4 * x ** 3 - g2 * x - g3
    for k in range(1, order + 1):
        if k % 2 == 1:
            odd[k] = even[k - 1].deriv()
        else:
            q = odd[k - 1]
            even[k] = wp2 * q + cubic * q.deriv()
    return even, odd


def derivative_polynomials(order: int, inv: EllipticInvariants):
    """Polynomials with P^(2j) = E_2j(P) and P^(2j+1) = P' * O_2j+1(P).

    Generated by d/dz E(P) = E'(P) P' and
    d/dz [P' O(P)] = (6P^2 - g2/2) O(P) + (4P^3 - g2 P - g3) O'(P).
    """
    return _derivative_polynomials_cached(int(order), float(inv.g2), float(inv.g3))


def wp_jet(z, lat: Lattice, order: int = 5, *, check_pole: bool = True) -> np.ndarray:
    """Array of shape (order+1, *z.shape) holding P, P', ..., P^(order) at z.

    Raises Pole at lattice points.  Within ~1e-6 of the lattice a
    PrecisionWarning is emitted (values are huge and differences of jets lose
    relative accuracy).
    """
    if order < 0:
        raise ValidationError("order must be non-negative")
    z = np.asarray(z, dtype=complex)
    zr = lat.reduce(z)
    dist = np.abs(zr)
    scale = min(lat.t, 1.0)
    if check_pole and np.any(dist <= 1e-14 * scale):
        raise Pole("P evaluated at a lattice point")
    if np.any(dist < _NEAR_POLE * scale):
        warnings.warn("P evaluated within 1e-6 of a lattice point", PrecisionWarning, stacklevel=2)
    inv = invariants(lat)
    wp, wpp = _wp_pair(zr, lat)
    even, odd = derivative_polynomials(order, inv)
    out = np.empty((order + 1,) + z.shape, dtype=complex)
    for k in range(order + 1):
        out[k] = even[k](wp) if k % 2 == 0 else wpp * odd[k](wp)
    return out


def wp(z, lat: Lattice):
    return wp_jet(z, lat, 0)[0]


def laurent_coefficients(inv: EllipticInvariants, n: int) -> list[float]:
    """c_1..c_n with P(z) = z^-2 + sum_k c_k z^(2k)."""
    c = [0.0, inv.g2 / 20, inv.g3 / 28]
    for k in range(3, n + 1):
        acc = sum(c[m] * c[k - 1 - m] for m in range(1, k - 1))
        c.append(3 * acc / ((2 * k + 3) * (k - 2)))
    return c[1:n + 1]


# -- extended precision -------------------------------------------------------

def _rows_needed_mp(s: float, dps: int) -> int:
    m, _ = _rows_needed(s, tol=10.0 ** (-dps - 5)) if dps <= 280 else (None, None)
    if m is None:
        raise TruncationFailure("requested precision too high")
    return m


def invariants_mp(lat: Lattice, dps: int):
    """(g2, g3, e1, e2, e3) as mpmath numbers at the current working precision."""
    with mpmath.workdps(dps):
        A, B = (mpmath.mpc(v) for v in lat.basis)
        tau = B / A
        m_max = _rows_needed_mp(lat.nome_exponent, dps)
        pi = mpmath.pi
        s4 = pi ** 4 / 45
        s6 = 2 * pi ** 6 / 945
        for m in range(1, m_max + 1):
            s = mpmath.csc(pi * m * tau) ** 2
            s4 += 2 * pi ** 4 * (s ** 2 - 2 * s / 3)
            s6 += 2 * pi ** 6 * (s ** 3 - s ** 2 + 2 * s / 15)
        g2 = mpmath.re(60 * s4 / A ** 4)
        g3 = mpmath.re(140 * s6 / A ** 6)
        half = [mpmath.mpf(lat.t) / 2, (mpmath.mpf(lat.t) + mpmath.mpc(0, 1)) / 2, mpmath.mpc(0, 1) / 2]
        e = [mpmath.re(wp_pair_mp(h, lat, dps)[0]) for h in half]
        return g2, g3, e[0], e[1], e[2]


def wp_pair_mp(z, lat: Lattice, dps: int):
    """(P(z), P'(z)) in extended precision for a single point z."""
    with mpmath.workdps(dps + 10):
        z = mpmath.mpc(z)
        t = mpmath.mpf(lat.t)
        x = mpmath.re(z) / t
        y = mpmath.im(z)
        z = (x - mpmath.nint(x)) * t + mpmath.mpc(0, 1) * (y - mpmath.nint(y))
        if abs(z) < mpmath.mpf(10) ** (-dps):
            raise Pole("P evaluated at a lattice point")
        A, B = (mpmath.mpc(v) for v in lat.basis)
        m_max = _rows_needed_mp(lat.nome_exponent, dps)
        k = mpmath.pi / A
        wp_sum = -mpmath.mpf(1) / 3
        wpp_sum = mpmath.mpc(0)
        for m in range(-m_max, m_max + 1):
            w = mpmath.pi * (z - m * B) / A
            s = mpmath.sin(w)
            c2 = 1 / s ** 2
            wp_sum += c2
            wpp_sum += -2 * c2 * mpmath.cos(w) / s
            if m != 0:
                wp_sum -= 1 / mpmath.sin(mpmath.pi * m * B / A) ** 2
        return +(k ** 2 * wp_sum), +(k ** 3 * wpp_sum)
