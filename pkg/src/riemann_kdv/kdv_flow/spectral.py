"""Extended-precision samples of holomorphic functions on closed contours.

Values are gmpy2 ``mpc`` numbers held in numpy object arrays.  Three contour
kinds are supported, all parametrised by s in [0, 1):

  * ``vertical``: z = x0 + i s (the circle Re z = x0 of C/<i>);
  * ``circle``:   z = c + r exp(2 pi i s);
  * ``real``:     z = L s (real period L).

A ``twist`` nu makes the samples quasi-periodic, f(s + 1) = exp(2 pi i nu) f(s);
nu = 1/2 holds antiperiodic functions such as y = g^(-1/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import gmpy2
import mpmath
import numpy as np

from ..errors import PoleOnContour, ValidationError

DEFAULT_DPS = 80


def bits(dps: int) -> int:
    return int(math.ceil(dps * 3.3219280948873626)) + 16


def precision(dps: int):
    """Context manager setting the gmpy2 working precision."""
    return gmpy2.context(gmpy2.get_context(), precision=bits(dps),
                               real_prec=bits(dps), imag_prec=bits(dps))


def to_mp(x):
    """Convert a Python/numpy/mpmath number to gmpy2 mpc at the current precision."""
    if isinstance(x, gmpy2.mpc(0).__class__):
        return x
    if isinstance(x, (mpmath.mpc, mpmath.mpf)):
        x = mpmath.mpc(x)
        return gmpy2.mpc(_mpf_to_gmpy(x.real), _mpf_to_gmpy(x.imag))
    x = complex(x)
    return gmpy2.mpc(x.real, x.imag)


def _mpf_to_gmpy(v: mpmath.mpf):
    sign, man, exp, _ = v._mpf_
    if not man:
        return gmpy2.mpfr(0)
    r = gmpy2.mul_2exp(gmpy2.mpfr(int(man)), exp)
    return -r if sign else r


def to_complex(a) -> np.ndarray:
    return np.array([complex(v) for v in np.ravel(a)], dtype=complex).reshape(np.shape(a))


def mp_array(values) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = to_mp(v)
    return out


def mp_abs(a) -> np.ndarray:
    return np.array([float(abs(v)) for v in np.ravel(a)]).reshape(np.shape(a))


def exact_scalar(c):
    """Exact Gaussian rational (diffpoly QI) to mpc."""
    re = gmpy2.mpfr(gmpy2.mpq(c.re.numerator, c.re.denominator))
    im = gmpy2.mpfr(gmpy2.mpq(c.im.numerator, c.im.denominator))
    return gmpy2.mpc(re, im)


@lru_cache(maxsize=32)
def _twiddles(n: int, b: int, inverse: bool):
    with gmpy2.context(gmpy2.get_context(), precision=b, real_prec=b, imag_prec=b):
        sgn = 1 if inverse else -1
        pi = gmpy2.const_pi()
        w = np.empty(n // 2, dtype=object)
        for k in range(n // 2):
            ang = sgn * 2 * pi * k / n
            w[k] = gmpy2.mpc(gmpy2.cos(ang), gmpy2.sin(ang))
        return w


def fft(a: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unnormalised radix-2 DFT of an object array (sum_j a_j exp(-+2 pi i jk/n))."""
    n = len(a)
    if n & (n - 1):
        raise ValidationError("FFT length must be a power of two")
    levels = n.bit_length() - 1
    rev = np.array([int(format(i, f"0{levels}b")[::-1], 2) if levels else 0 for i in range(n)])
    x = np.array(a, dtype=object)[rev]
    w_all = _twiddles(n, gmpy2.get_context().precision, inverse)
    size = 2
    while size <= n:
        half = size // 2
        w = w_all[:: n // size][:half]
        x = x.reshape(-1, size)
        even = x[:, :half].copy()
        odd = x[:, half:] * w
        x[:, :half] = even + odd
        x[:, half:] = even - odd
        x = x.reshape(-1)
        size *= 2
    return x


def _freqs(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n).astype(int)


@dataclass
class ContourField:
    """Samples f(z(s_j)), s_j = j/N, of a holomorphic function on a contour."""

    kind: str
    samples: np.ndarray
    dps: int = DEFAULT_DPS
    x0: float = 0.0
    center: complex = 0j
    radius: float = 1.0
    L: float = 1.0
    twist: float = 0.0
    _coef: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("vertical", "circle", "real"):
            raise ValidationError(f"unknown contour kind {self.kind!r}")
        if self.kind == "circle" and self.twist:
            raise ValidationError("circle contours carry single-valued functions only")
        n = len(self.samples)
        if n < 4 or n & (n - 1):
            raise ValidationError("number of samples must be a power of two >= 4")

    # construction
    @classmethod
    def from_function(cls, fn: Callable, kind: str, n: int = 256, dps: int = DEFAULT_DPS, **geom):
        """Sample fn(z) (returning Python, mpmath or gmpy2 numbers) at the contour nodes."""
        proto = cls(kind, np.zeros(n, dtype=object), dps, **geom)
        with precision(dps), mpmath.workdps(dps + 10):
            z = proto.nodes_mpmath()
            vals = np.empty(n, dtype=object)
            for j, zj in enumerate(z):
                try:
                    v = fn(zj)
                except ZeroDivisionError as exc:
                    raise PoleOnContour(f"function singular at contour node {complex(zj)}") from exc
                vals[j] = to_mp(v)
        return cls(kind, vals, dps, **geom)

    def like(self, samples: np.ndarray, twist: float | None = None) -> "ContourField":
        return ContourField(self.kind, samples, self.dps, self.x0, self.center, self.radius,
                            self.L, self.twist if twist is None else twist)

    @property
    def n(self) -> int:
        return len(self.samples)

    def s(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    def nodes_mpmath(self) -> list:
        out = []
        for j in range(self.n):
            s = mpmath.mpf(j) / self.n
            if self.kind == "vertical":
                out.append(mpmath.mpc(self.x0, s))
            elif self.kind == "circle":
                out.append(mpmath.mpc(self.center) + self.radius * mpmath.expjpi(2 * s))
            else:
                out.append(mpmath.mpc(self.L * s, 0))
        return out

    def nodes(self) -> np.ndarray:
        with precision(self.dps), mpmath.workdps(self.dps + 10):
            return mp_array(self.nodes_mpmath())

    def nodes_complex(self) -> np.ndarray:
        s = self.s()
        if self.kind == "vertical":
            return self.x0 + 1j * s
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * s)
        return self.L * s + 0j

    def dz_ds(self) -> np.ndarray:
        """z'(s) at the nodes (object array)."""
        with precision(self.dps):
            pi = gmpy2.const_pi()
            if self.kind == "vertical":
                return np.full(self.n, gmpy2.mpc(0, 1), dtype=object)
            if self.kind == "real":
                return np.full(self.n, gmpy2.mpc(self.L, 0), dtype=object)
            z = self.nodes()
            return 2 * pi * gmpy2.mpc(0, 1) * (z - to_mp(self.center))

    def values(self) -> np.ndarray:
        return to_complex(self.samples)

    # spectral representation
    def _phase(self, sign: int) -> np.ndarray:
        pi = gmpy2.const_pi()
        out = np.empty(self.n, dtype=object)
        for j in range(self.n):
            ang = sign * 2 * pi * self.twist * j / self.n
            out[j] = gmpy2.mpc(gmpy2.cos(ang), gmpy2.sin(ang))
        return out

    def coefficients(self) -> np.ndarray:
        """Fourier coefficients c_k (fftfreq order) of f(s) exp(-2 pi i nu s), noise-filtered."""
        if self._coef is None:
            with precision(self.dps):
                f = self.samples
                if self.twist:
                    f = f * self._phase(-1)
                c = fft(f) / self.n
                mags = mp_abs(c)
                floor = 10.0 ** (-(self.dps - 8)) * (mags.max() or 1.0)
                c[mags < floor] = gmpy2.mpc(0)
                self._coef = c
        return self._coef

    def from_coefficients(self, c: np.ndarray) -> np.ndarray:
        with precision(self.dps):
            f = fft(c, inverse=True)
            if self.twist:
                f = f * self._phase(1)
            return f

    def tail_ratio(self) -> float:
        """max |c_k| over the top quarter of frequencies relative to max |c_k| (raw FFT)."""
        with precision(self.dps):
            f = self.samples * (self._phase(-1) if self.twist else 1)
            mags = mp_abs(fft(f))
        k = np.abs(_freqs(self.n))
        top = mags[k >= 3 * self.n // 8].max()
        return float(top / (mags.max() or 1.0))

    def roundtrip_error(self) -> float:
        with precision(self.dps):
            back = self.from_coefficients(self.coefficients())
            return float(np.max(mp_abs(back - self.samples)) / (np.max(mp_abs(self.samples)) or 1.0))

    def derivatives(self, kmax: int) -> list[np.ndarray]:
        """Samples of the z-derivatives f, f', ..., f^(kmax)."""
        c0 = self.coefficients()
        out = [self.samples]
        if kmax == 0:
            return out
        with precision(self.dps):
            pi = gmpy2.const_pi()
            I = gmpy2.mpc(0, 1)
            k = _freqs(self.n)
            if self.kind in ("vertical", "real"):
                zp = I if self.kind == "vertical" else gmpy2.mpc(self.L)
                mult = np.array([2 * pi * I * (int(kk) + gmpy2.mpfr(self.twist)) / zp for kk in k], dtype=object)
                c = c0
                for _ in range(kmax):
                    c = c * mult
                    out.append(self.from_coefficients(c))
            else:
                r = gmpy2.mpfr(self.radius)
                pos = {int(kk): j for j, kk in enumerate(k)}
                c = c0
                for _ in range(kmax):
                    # f^(j) = sum a_n [n]_j (z-c)^(n-j): shift frequencies down by one per step
                    new = np.array([gmpy2.mpc(0)] * self.n, dtype=object)
                    for j, kk in enumerate(k):
                        m = int(kk) - 1
                        if m in pos and c[j] != 0:
                            new[pos[m]] = c[j] * int(kk) / r
                    c = new
                    out.append(self.from_coefficients(c))
        return out

    def derivative_noise(self, kmax: int) -> list:
        """Error bounds delta_j on sup |f^(j)|, j = 0..kmax.

        E(q) = max_{|k| >= q} |c_k| is the decreasing envelope of the retained
        spectrum, continued geometrically past the last retained mode.  A
        filtered mode is in error by min(E(|k|), filter floor), a retained one by rounding plus its
        alias E(N - |k|).  delta_j weights these by the j-th derivative multipliers.
        """
        c = self.coefficients()
        k = np.abs(_freqs(self.n))
        with precision(self.dps):
            mags = mp_abs(c)
        top = float(mags.max()) or 1.0
        half = self.n // 2
        per_q = np.zeros(half + 1)
        np.maximum.at(per_q, k, mags)
        env = np.maximum.accumulate(per_q[::-1])[::-1]
        K = int(np.nonzero(env)[0].max()) if env.any() else 0
        q1 = K // 2
        if K > q1 and env[q1] > 0:
            slope = (np.log10(env[K]) - np.log10(env[q1])) / (K - q1)
        else:
            slope = 0.0

        def envelope(q):
            q = np.asarray(q)
            inside = env[np.minimum(q, half)]
            outside = env[K] * 10.0 ** (slope * (q - K)) if K else np.zeros(q.shape)
            return np.where(q <= K, inside, outside)

        kept = mags > 0
        floor = 10.0 ** (-(self.dps - 8)) * top
        err = np.where(kept, 10.0 ** (-(self.dps - 2)) * top + envelope(self.n - k),
                       np.minimum(envelope(k), floor))
        kf = k.astype(float)
        if self.kind == "circle":
            mult = lambda j: ((kf + j) / self.radius) ** j  # noqa: E731
        else:
            period = 1.0 if self.kind == "vertical" else float(self.L)
            mult = lambda j: (2 * np.pi * (kf + abs(self.twist)) / period) ** j  # noqa: E731
        with precision(self.dps):
            return [gmpy2.mpfr(float(np.sum(err * mult(j)))) for j in range(kmax + 1)]

    def derivative(self, k: int = 1) -> "ContourField":
        return self.like(self.derivatives(k)[k])

    def integral(self) -> complex:
        """Contour integral of f dz by the trapezoid rule (spectrally accurate)."""
        with precision(self.dps):
            return complex(np.sum(self.samples * self.dz_ds()) / self.n)

    def integral_mp(self):
        with precision(self.dps):
            return np.sum(self.samples * self.dz_ds()) / self.n

    def sup(self) -> float:
        return float(np.max(mp_abs(self.samples)))
