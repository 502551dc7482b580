"""Discrete Jacobi operator L = d_x^2 + d_y^2 + V on the flat cylinder.

The cylinder is parametrised by z = x + i y with y in [0, 1) (theta = 2 pi y).
y is discretised by Fourier collocation and x by second-order central
differences, either periodic (Floquet cell at quasimomentum 0) or on [-T, T]
with the Dirichlet-to-Neumann condition of the decaying solutions of the flat
operator outside.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .cylinder_field import MeromorphicField, normal_from_sphere_jet
from .errors import GapNotResolved, ResonantDelta, ValidationError


def potential(g: MeromorphicField, z) -> np.ndarray:
    """V = 8|g'|^2/(1+|g|^2)^2 (flat Laplacian d_x^2 + d_y^2 = 4 d_z d_zbar)."""
    J, _ = g.sphere_jet(np.asarray(z, dtype=complex), 1)
    return 8 * np.abs(J[1]) ** 2 / (1 + np.abs(J[0]) ** 2) ** 2


def linear_jacobi_fields(g: MeromorphicField, z) -> np.ndarray:
    """<N, e_j>, j = 1, 2, 3; shape (3, ...)."""
    J, flip = g.sphere_jet(np.asarray(z, dtype=complex), 0)
    return normal_from_sphere_jet(J[0], flip)


def _fourier_d2(n: int) -> np.ndarray:
    """Spectral second-derivative matrix for period-1 samples (real symmetric)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    return np.real(np.fft.ifft(-(2 * np.pi * k[:, None]) ** 2 * np.fft.fft(np.eye(n), axis=0), axis=0))


def _fourier_dtn(n: int) -> np.ndarray:
    """|d_y|: multiplier 2 pi |k| (decay rate of the flat solutions outside)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    return np.real(np.fft.ifft(2 * np.pi * np.abs(k)[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


@dataclass
class CylinderOperator:
    x: np.ndarray                  # nodes in x (periodic: cell [x0, x0 + period) without endpoint)
    n_theta: int
    V: np.ndarray                  # (n_x, n_theta) samples, real
    bc: str                        # 'periodic' or 'decaying'
    period: float | None = None
    _matrix: sp.csr_matrix | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.bc not in ("periodic", "decaying"):
            raise ValidationError(f"unknown boundary condition {self.bc!r}")
        if self.V.shape != (len(self.x), self.n_theta):
            raise ValidationError("V must have shape (n_x, n_theta)")
        if not np.all(np.isfinite(self.V)) or np.iscomplexobj(self.V):
            raise ValidationError("V must be real and finite")

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.n_theta) / self.n_theta

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def weights(self) -> np.ndarray:
        """Trapezoid weights in x (the discrete inner product)."""
        w = np.full(len(self.x), self.h)
        if self.bc == "decaying":
            w[0] = w[-1] = self.h / 2
        return w

    def matrix(self) -> sp.csr_matrix:
        """Symmetric form W^(1/2) L W^(-1/2), W the trapezoid weights."""
        if self._matrix is not None:
            return self._matrix
        nx, nt, h = len(self.x), self.n_theta, self.h
        main = np.full(nx, -2.0 / h ** 2)
        off = np.full(nx - 1, 1.0 / h ** 2)
        D = sp.diags([off, main, off], [-1, 0, 1], format="lil")
        if self.bc == "periodic":
            D[0, nx - 1] = D[nx - 1, 0] = 1.0 / h ** 2
        else:
            # ghost node from v' = +-|d_y| v; symmetric after the half-weight scaling
            D[0, 1] = D[nx - 1, nx - 2] = 2.0 / h ** 2
        A = sp.kron(D.tocsr(), sp.identity(nt)) + sp.kron(sp.identity(nx), sp.csr_matrix(_fourier_d2(nt)))
        A = A + sp.diags(self.V.ravel())
        if self.bc == "decaying":
            K = _fourier_dtn(nt)
            E0 = sp.csr_matrix(([1.0], ([0], [0])), shape=(nx, nx))
            E1 = sp.csr_matrix(([1.0], ([nx - 1], [nx - 1])), shape=(nx, nx))
            A = A - (2.0 / h) * (sp.kron(E0, sp.csr_matrix(K)) + sp.kron(E1, sp.csr_matrix(K)))
        s = np.repeat(np.sqrt(self.weights()), nt)
        A = sp.diags(s) @ A @ sp.diags(1 / s)
        self._matrix = A.tocsr()
        return self._matrix

    def asymmetry(self) -> float:
        A = self.matrix()
        d = abs(A - A.T)
        return float(d.max() / abs(A).max()) if d.nnz else 0.0

    def to_symmetric(self, v: np.ndarray) -> np.ndarray:
        """Grid function (n_x, n_theta) to the coordinates of matrix()."""
        return (np.sqrt(self.weights())[:, None] * v).ravel()

    def from_symmetric(self, c: np.ndarray) -> np.ndarray:
        return c.reshape(len(self.x), self.n_theta) / np.sqrt(self.weights())[:, None]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.from_symmetric(self.matrix() @ self.to_symmetric(v))


def flat_operator(n_x: int, n_theta: int, period: float = 1.0) -> CylinderOperator:
    x = np.arange(n_x) * period / n_x
    return CylinderOperator(x, n_theta, np.zeros((n_x, n_theta)), "periodic", period)


def catenoid_operator(T: float = 2.0, h: float = 0.01, n_theta: int = 16) -> CylinderOperator:
    """g = exp(2 pi z) truncated to [-T, T] with decaying exterior conditions."""
    n = int(round(2 * T / h))
    x = np.linspace(-T, T, n + 1)
    V = 8 * np.pi ** 2 / np.cosh(2 * np.pi * x) ** 2
    return CylinderOperator(x, n_theta, np.repeat(V[:, None], n_theta, axis=1), "decaying")


def field_operator(g: MeromorphicField, period: float, n_x: int, n_theta: int, x0: float = 0.0) -> CylinderOperator:
    """Floquet cell [x0, x0 + period) x [0, 1) for a field with g(z + period) = g(z)."""
    x = x0 + np.arange(n_x) * period / n_x
    y = np.arange(n_theta) / n_theta
    V = potential(g, x[:, None] + 1j * y[None, :])
    return CylinderOperator(x, n_theta, V, "periodic", period)


@dataclass
class KernelReport:
    dimension: int
    eigenvalues: np.ndarray        # the computed eigenvalues, sorted by |lambda|
    gap_ratio: float               # |lambda_{d+1}| / |lambda_d|
    vectors: np.ndarray            # kernel basis as grid functions, (d, n_x, n_theta)
    projection_residuals: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"dimension": self.dimension, "gap_ratio": self.gap_ratio,
                "eigenvalues": [float(v) for v in self.eigenvalues],
                "projection_residuals": [float(r) for r in self.projection_residuals]}


def kernel_dimension(op: CylinderOperator, threshold_ratio: float = 10.0, k: int = 8,
                     zero_scale: float | None = None, linear: np.ndarray | None = None) -> KernelReport:
    """Count eigenvalues near zero, certified by a relative gap.

    The dimension d is the largest index among the k eigenvalues of smallest
    modulus with |lambda_{d+1}| >= threshold_ratio |lambda_d| and
    |lambda_d| below ``zero_scale`` (default (2 pi)^2 / threshold_ratio, the
    first nonzero flat theta-eigenvalue divided by the ratio).
    """
    A = op.matrix()
    k = min(k, A.shape[0] - 2)
    # fixed start vector: ARPACK otherwise draws a random one
    v0 = np.cos(np.arange(A.shape[0]) * 0.7) + 1.0
    vals, vecs = eigsh(A, k=k, sigma=0.0, which="LM", v0=v0)
    order = np.argsort(np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    a = np.abs(vals)
    zero_scale = (2 * np.pi) ** 2 / threshold_ratio if zero_scale is None else zero_scale
    best, ratio = 0, 0.0
    for d in range(1, k):
        if a[d - 1] > zero_scale:
            break
        r = a[d] / a[d - 1] if a[d - 1] > 0 else np.inf
        if r >= threshold_ratio:
            best, ratio = d, r
    if best == 0:
        gaps = a[1:] / np.where(a[:-1] > 0, a[:-1], np.finfo(float).tiny)
        raise GapNotResolved(f"no relative gap >= {threshold_ratio} near zero (largest {gaps.max():.3g})")
    basis = np.array([op.from_symmetric(vecs[:, j]) for j in range(best)])
    rep = KernelReport(best, vals, float(ratio), basis)
    if linear is not None:
        Q = vecs[:, :best]
        for f in linear:
            c = op.to_symmetric(np.real(f))
            nrm = np.linalg.norm(c)
            rep.projection_residuals.append(float(np.linalg.norm(c - Q @ (Q.T @ c)) / nrm) if nrm else 0.0)
    return rep


# -- weighted estimate on S^1 x R ----------------------------------------------------

@dataclass
class WeightedEstimate:
    lhs: float        # ||exp(-delta t) U||
    rhs: float        # ||exp(-delta t) F|| / inf_j |delta^2 - j^2|
    ok: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else 0.0


def resonance_distance(delta: float) -> tuple[int, float]:
    """(j*, inf_j |delta^2 - j^2|) over integers j >= 0."""
    d2 = delta * delta
    j = int(np.floor(abs(delta)))
    cands = [(jj, abs(d2 - jj * jj)) for jj in (j, j + 1) if jj >= 0]
    return min(cands, key=lambda c: c[1])


def weighted_estimate_check(delta: float, coeffs: np.ndarray, modes_theta: np.ndarray,
                            freqs_t: np.ndarray, tol: float = 1e-12) -> WeightedEstimate:
    """Solve (d_t^2 + d_theta^2) U = F mode by mode and compare weighted norms.

    f = exp(-delta t) F has the finite expansion sum c_{jk} exp(i j theta + i s_k t);
    w = exp(-delta t) U solves ((d_t + delta)^2 + d_theta^2) w = f, so each mode is
    divided by (delta + i s)^2 - j^2, whose modulus is at least |delta^2 - j^2|.
    Norms are the L^2 norms on the torus carrying the expansion (Parseval).
    """
    _, dist = resonance_distance(delta)
    if dist < tol:
        raise ResonantDelta(f"delta^2 = {delta * delta} is an eigenvalue j^2 of the circle")
    c = np.asarray(coeffs, dtype=complex)
    j = np.asarray(modes_theta, dtype=float)[:, None]
    s = np.asarray(freqs_t, dtype=float)[None, :]
    if c.shape != (j.size, s.size):
        raise ValidationError("coeffs must have shape (len(modes_theta), len(freqs_t))")
    mult = (delta + 1j * s) ** 2 - j ** 2
    w = c / mult
    lhs = float(np.linalg.norm(w))
    rhs = float(np.linalg.norm(c)) / dist
    return WeightedEstimate(lhs, rhs, lhs <= rhs * (1 + 1e-12))


def random_band_limited(rng: np.random.Generator, j_max: int = 6, k_max: int = 6, period: float = 20.0):
    """Random coefficients on modes |j| <= j_max, s = 2 pi k / period with |k| <= k_max."""
    modes = np.arange(-j_max, j_max + 1)
    freqs = 2 * np.pi * np.arange(-k_max, k_max + 1) / period
    c = rng.standard_normal((modes.size, freqs.size)) + 1j * rng.standard_normal((modes.size, freqs.size))
    return c, modes, freqs


def saturation_ratio(delta: float) -> float:
    """lhs/rhs for F on the single mode (j*, s = 0); equals 1 for the exact multiplier."""
    j_star, _ = resonance_distance(delta)
    est = weighted_estimate_check(delta, np.ones((1, 1)), np.array([j_star]), np.array([0.0]))
    return est.ratio


def synthesize(coeffs, modes_theta, freqs_t, delta, t: np.ndarray, theta: np.ndarray):
    """Grid values of F and U for the expansion used in weighted_estimate_check."""
    c = np.asarray(coeffs, dtype=complex)
    j = np.asarray(modes_theta, dtype=float)
    s = np.asarray(freqs_t, dtype=float)
    mult = (delta + 1j * s[None, :]) ** 2 - j[:, None] ** 2
    E_t = np.exp(1j * s[:, None] * t[None, :])          # (k, nt)
    E_th = np.exp(1j * j[:, None] * theta[None, :])     # (j, ntheta)
    f = np.einsum("jk,kt,jp->tp", c, E_t, E_th)
    w = np.einsum("jk,kt,jp->tp", c / mult, E_t, E_th)
    weight = np.exp(delta * t)[:, None]
    return weight * f, weight * w
