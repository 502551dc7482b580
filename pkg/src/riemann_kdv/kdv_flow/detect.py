"""Finite-gap test: is the n-th KdV flow of u a combination of the lower ones?"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffpoly import DiffPoly, kdv_flow_rhs
from ..errors import Degenerate, ValidationError
from .spectral import ContourField, mp_abs, precision, to_complex, to_mp
from .taylor import evaluate_on


@dataclass
class Detection:
    n: int | None                  # smallest n with residual below threshold
    coefficients: list             # c_0..c_{n-1} with F_n = sum c_j F_j
    profile: list                  # relative residual for n = 0..n_max (r_0 = 1)
    threshold: float

    def drop(self, n: int | None = None) -> float:
        """Orders of magnitude lost from r_{n-1} to r_n."""
        n = self.n if n is None else n
        if not n:
            return 0.0
        a, b = self.profile[n - 1], self.profile[n]
        return float(np.log10(a / b)) if b > 0 else float("inf")


def term_scale(poly: DiffPoly, u: ContourField, cache: dict) -> float:
    """Sum over monomials of sup |coefficient * monomial| on the contour."""
    total = 0.0
    for m, c in poly.items():
        total += float(np.max(mp_abs(evaluate_on(DiffPoly({m: c}), {"u": u}, cache))))
    return total


def _lstsq_mp(cols: list, b: np.ndarray, sweeps: int = 3):
    """Least squares with double-precision solves refined against extended-precision residuals."""
    A = np.column_stack([to_complex(c) for c in cols])
    coef = np.zeros(len(cols), dtype=complex)
    r = np.array(b, dtype=object)
    for _ in range(sweeps):
        scale = float(np.max(mp_abs(r))) or 1.0
        rc = to_complex(r / scale)
        step, *_ = np.linalg.lstsq(A, rc, rcond=None)
        coef = coef + step * scale
        r = np.array(b, dtype=object)
        for j, cj in enumerate(coef):
            r = r - to_mp(cj) * cols[j]
    return coef, r


def detect_algebro_geometric(u: ContourField, n_max: int = 6, threshold: float = 1e-10) -> Detection:
    if n_max < 1:
        raise ValidationError("n_max must be at least 1")
    cache: dict = {}
    with precision(u.dps):
        flows, scales = [], []
        for n in range(n_max + 1):
            F = kdv_flow_rhs(n)
            flows.append(evaluate_on(F, {"u": u}, cache))
            scales.append(term_scale(F, u, cache))
        usize = max(1.0, u.sup())
        if scales[0] < 1e-30 * usize:
            raise Degenerate("u is constant on the contour; every flow vanishes")
        norms = [float(np.sqrt(np.sum(mp_abs(f) ** 2))) for f in flows]
        profile = [1.0]
        found, found_coef = None, []
        for n in range(1, n_max + 1):
            keep = [j for j in range(n) if norms[j] > 1e-30 * max(scales[j], 1e-300) * np.sqrt(u.n)]
            cols = [flows[j] / norms[j] for j in keep]
            if cols:
                coef, r = _lstsq_mp(cols, flows[n])
            else:
                coef, r = np.zeros(0, dtype=complex), flows[n]
            rel = float(np.max(mp_abs(r))) / scales[n]
            profile.append(rel)
            if found is None and rel < threshold:
                found = n
                full = np.zeros(n, dtype=complex)
                for j, cj in zip(keep, coef):
                    full[j] = cj / norms[j]
                found_coef = [complex(c) for c in full]
    return Detection(found, found_coef, profile, threshold)
