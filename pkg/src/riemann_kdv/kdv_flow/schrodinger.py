"""y'' + u y = 0 marched along a contour, and the local behaviour of y at poles of u."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import StepRejected, ValidationError
from .spectral import ContourField, to_complex


@dataclass
class SchrodingerSolution:
    s: np.ndarray
    z: np.ndarray
    y: np.ndarray
    dy: np.ndarray            # dy/dz
    monodromy: complex        # y(s=1) / y(s=0) (ratio of the solution after one loop)
    monodromy_dy: complex

    def is_periodic(self, tol: float = 1e-8) -> bool:
        return abs(self.monodromy - 1) < tol and abs(self.monodromy_dy - 1) < tol

    def is_antiperiodic(self, tol: float = 1e-8) -> bool:
        return abs(self.monodromy + 1) < tol and abs(self.monodromy_dy + 1) < tol


class _Interpolant:
    """Trigonometric interpolant of u(s) and of z'(s) in double precision."""

    def __init__(self, u: ContourField):
        if u.twist:
            raise ValidationError("u must be single-valued on the contour")
        self.c = to_complex(u.coefficients())
        self.k = np.fft.fftfreq(u.n, 1.0 / u.n)
        self.kind, self.center, self.radius, self.L, self.x0 = u.kind, u.center, u.radius, u.L, u.x0

    def u(self, s: float) -> complex:
        return complex(np.dot(self.c, np.exp(2j * np.pi * self.k * s)))

    def z(self, s):
        if self.kind == "vertical":
            return self.x0 + 1j * s
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * s)
        return self.L * s

    def dz(self, s: float) -> complex:
        if self.kind == "vertical":
            return 1j
        if self.kind == "circle":
            return 2j * np.pi * self.radius * np.exp(2j * np.pi * s)
        return complex(self.L)


def schrodinger_solve(u: ContourField, y_a: complex, dy_a: complex, rtol: float = 1e-13,
                      atol: float = 1e-15) -> SchrodingerSolution:
    """Solve y'' + u y = 0 once around the contour of u from (y, y') at s = 0."""
    ip = _Interpolant(u)

    def rhs(s, w):
        zp = ip.dz(s)
        return [zp * w[1], -zp * ip.u(s) * w[0]]

    s_eval = np.append(np.arange(u.n) / u.n, 1.0)
    sol = solve_ivp(rhs, (0.0, 1.0), [complex(y_a), complex(dy_a)], method="DOP853",
                    t_eval=s_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise StepRejected(f"Schrodinger march failed: {sol.message}")
    y, dy = sol.y
    if not np.all(np.isfinite(y)):
        raise StepRejected("non-finite solution")
    mono = y[-1] / y[0] if y[0] != 0 else np.nan
    mono_d = dy[-1] / dy[0] if dy[0] != 0 else np.nan
    return SchrodingerSolution(s_eval[:-1], ip.z(s_eval[:-1]), y[:-1], dy[:-1], complex(mono), complex(mono_d))


def winding(values: np.ndarray) -> float:
    """Winding number of a closed sampled curve about 0."""
    v = np.append(values, values[0])
    return float(np.sum(np.angle(v[1:] / v[:-1])) / (2 * np.pi))


@dataclass
class PoleBehaviour:
    counts: list                 # argument-principle counts of y on shrinking circles
    kind: str                    # 'simple pole' or 'double zero'


def pole_behaviour(fields, y_a, dy_a) -> PoleBehaviour:
    """Classify y around a pole of u from circles shrinking onto it.

    fields are u samples on concentric circles, with y(z_a), y'(z_a) given at
    the start node of each circle.  Either y has a simple pole (count -1) or
    an order-two zero (count +2).
    """
    counts = []
    for f, ya, dya in zip(fields, y_a, dy_a):
        sol = schrodinger_solve(f, ya, dya)
        if not sol.is_periodic(1e-6):
            raise StepRejected(f"monodromy {sol.monodromy:.6g} around a pole of u is not trivial")
        counts.append(int(round(winding(sol.y))))
    kinds = {-1: "simple pole", 2: "double zero"}
    if len(set(counts)) != 1 or counts[0] not in kinds:
        raise ValidationError(f"inconsistent local behaviour {counts}")
    return PoleBehaviour(counts, kinds[counts[0]])
