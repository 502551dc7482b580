"""Pseudo-spectral KdV solver on a real periodic interval.

u_t = -u_xxx - 6 u u_x, Fourier in x with 2/3 dealiasing and ETDRK4 time
stepping (the contour-integral coefficients of Kassam and Trefethen).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CFLViolation, SpectralBlocking, ValidationError

# stability bound for dt * max|6 u| * k_max of the explicit part of ETDRK4
_CFL_LIMIT = 2.5


@dataclass
class RealTrajectory:
    x: np.ndarray
    times: np.ndarray
    states: np.ndarray              # (n_saved, N)
    invariants: np.ndarray          # (n_saved, 3)
    L: float
    dt: float
    tail: list = field(default_factory=list)

    def drift(self) -> np.ndarray:
        """Relative drift of the three invariants at the last saved time."""
        I0, I1 = self.invariants[0], self.invariants[-1]
        scale = np.where(np.abs(I0) > 0, np.abs(I0), 1.0)
        return np.abs(I1 - I0) / scale


def wavenumbers(n: int, L: float) -> np.ndarray:
    return 2 * np.pi / L * np.fft.fftfreq(n, 1.0 / n)


def invariants3(u: np.ndarray, L: float) -> np.ndarray:
    """(int u, int u^2, int (u_x^2/2 - u^3)) over one period, spectrally."""
    u = np.asarray(u, dtype=float)
    n = u.size
    k = wavenumbers(n, L)
    ux = np.real(np.fft.ifft(1j * k * np.fft.fft(u)))
    dx = L / n
    return np.array([np.sum(u) * dx, np.sum(u * u) * dx, np.sum(0.5 * ux * ux - u ** 3) * dx])


def spectral_tail(u: np.ndarray) -> float:
    """Energy fraction in the top third of retained modes."""
    c = np.abs(np.fft.rfft(u)) ** 2
    n = c.size
    tot = c.sum()
    return float(c[2 * n // 3:].sum() / tot) if tot > 0 else 0.0


def _etdrk4_coefficients(Lh: np.ndarray, dt: float, m: int = 64):
    r = np.exp(1j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
    LR = dt * Lh[:, None] + r[None, :]
    E = np.exp(dt * Lh)
    E2 = np.exp(dt * Lh / 2)
    Q = dt * np.mean((np.exp(LR / 2) - 1) / LR, axis=1)
    f1 = dt * np.mean((-4 - LR + np.exp(LR) * (4 - 3 * LR + LR ** 2)) / LR ** 3, axis=1)
    f2 = dt * np.mean((2 + LR + np.exp(LR) * (-2 + LR)) / LR ** 3, axis=1)
    f3 = dt * np.mean((-4 - 3 * LR - LR ** 2 + np.exp(LR) * (4 - LR)) / LR ** 3, axis=1)
    return E, E2, Q, f1, f2, f3


def evolve_real(u0: np.ndarray, L: float, T: float, dt: float, save_every: int = 0,
                tail_limit: float = 1e-6, initial_tail: float = 1e-10) -> RealTrajectory:
    """Integrate u_t = -u''' - 6uu' from u0 (samples on [0, L)) to time T."""
    u0 = np.asarray(u0, dtype=float)
    n = u0.size
    if n < 8 or n % 2:
        raise ValidationError("need an even number (>= 8) of samples")
    if not (T >= 0 and dt > 0):
        raise ValidationError("need T >= 0 and dt > 0")
    if spectral_tail(u0) > initial_tail:
        raise SpectralBlocking(f"initial data under-resolved (tail {spectral_tail(u0):.2e})")
    steps = int(round(T / dt))
    if steps and abs(steps * dt - T) > 1e-12 * max(T, 1):
        raise ValidationError("T must be an integer multiple of dt")
    k = wavenumbers(n, L)
    kmax = np.abs(k).max()
    dealias = np.abs(np.fft.fftfreq(n, 1.0 / n)) < n / 3
    Lh = 1j * k ** 3                     # -(ik)^3
    g = -3j * k * dealias                # N(u) = -3 (u^2)_x
    E, E2, Q, f1, f2, f3 = _etdrk4_coefficients(Lh, dt)

    def N(vh):
        v = np.real(np.fft.ifft(vh))
        return g * np.fft.fft(v * v)

    def check_cfl(u):
        if dt * 6 * np.max(np.abs(u)) * kmax * 2 / 3 > _CFL_LIMIT:
            raise CFLViolation(f"dt = {dt} too large for amplitude {np.max(np.abs(u)):.3g}")

    save_every = save_every or max(steps, 1)
    x = L * np.arange(n) / n
    vh = np.fft.fft(u0)
    check_cfl(u0)
    times, states, inv, tails = [0.0], [u0.copy()], [invariants3(u0, L)], [spectral_tail(u0)]
    for step in range(1, steps + 1):
        Nv = N(vh)
        a = E2 * vh + Q * Nv
        Na = N(a)
        b = E2 * vh + Q * Na
        Nb = N(b)
        c = E2 * a + Q * (2 * Nb - Nv)
        Nc = N(c)
        vh = E * vh + Nv * f1 + 2 * (Na + Nb) * f2 + Nc * f3
        if step % save_every == 0 or step == steps:
            u = np.real(np.fft.ifft(vh))
            if not np.all(np.isfinite(u)):
                raise CFLViolation("solution blew up")
            check_cfl(u)
            tl = spectral_tail(u)
            if tl > tail_limit:
                raise SpectralBlocking(f"spectral tail grew to {tl:.2e} at t = {step * dt:.4g}")
            times.append(step * dt)
            states.append(u)
            inv.append(invariants3(u, L))
            tails.append(tl)
    return RealTrajectory(x, np.array(times), np.array(states), np.array(inv), L, dt, tails)


def soliton(x: np.ndarray, c: float = 4.0, x0: float = 0.0, L: float | None = None) -> np.ndarray:
    """(c/2) sech^2(sqrt(c)/2 (x - x0)), periodised over L if given."""
    a = np.sqrt(c) / 2
    if L is None:
        return 0.5 * c / np.cosh(a * (x - x0)) ** 2
    d = (x - x0 + L / 2) % L - L / 2
    return 0.5 * c / np.cosh(a * d) ** 2


def peak_position(u: np.ndarray, L: float) -> float:
    """Location of the maximum of the trigonometric interpolant (Newton on u')."""
    n = u.size
    k = wavenumbers(n, L)
    uh = np.fft.fft(u)
    x = L * np.argmax(u) / n
    for _ in range(50):
        e = np.exp(1j * k * x) / n
        d1 = np.real(np.sum(1j * k * uh * e))
        d2 = np.real(np.sum(-(k ** 2) * uh * e))
        if d2 == 0:
            break
        step = d1 / d2
        x -= step
        if abs(step) < 1e-14:
            break
    return float(x % L)


@dataclass
class SolitonRun:
    speed: float
    drift: np.ndarray
    trajectory: RealTrajectory


def soliton_run(L: float = 40.0, T: float = 1.0, n: int = 512, dt: float = 1e-3, c: float = 4.0) -> SolitonRun:
    x = L * np.arange(n) / n
    x0 = L / 4
    u0 = soliton(x, c, x0, L)
    traj = evolve_real(u0, L, T, dt, save_every=max(1, int(round(0.05 / dt))))
    p0 = peak_position(traj.states[0], L)
    p1 = peak_position(traj.states[-1], L)
    dist = (p1 - p0) % L
    return SolitonRun(dist / T, traj.drift(), traj)
