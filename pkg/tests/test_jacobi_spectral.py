import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from riemann_kdv import jacobi_spectral as js
from riemann_kdv.errors import GapNotResolved, ResonantDelta
from riemann_kdv.riemann_family import gauss_map


def test_flat_operator_on_fourier_modes():
    op = js.flat_operator(32, 16, 2.0)
    X, Y = np.meshgrid(op.x, op.y, indexing="ij")
    k, j = 3, 2
    v = np.cos(2 * np.pi * (k * X / 2.0)) * np.cos(2 * np.pi * j * Y)
    lam = -(2 / op.h * np.sin(np.pi * k / 32)) ** 2 - (2 * np.pi * j) ** 2
    assert_allclose(op.apply(v), lam * v, atol=1e-9)
    assert op.asymmetry() < 1e-14


def test_flat_kernel_is_constants():
    rep = js.kernel_dimension(js.flat_operator(32, 8, 1.0))
    assert rep.dimension == 1
    assert np.ptp(rep.vectors[0]) < 1e-8 * np.abs(rep.vectors[0]).max()


def test_catenoid_potential_matches_gauss_map():
    from riemann_kdv.cylinder_field import exponential_field
    x = np.linspace(-1, 1, 5)
    V = js.potential(exponential_field(2 * np.pi), x + 0.3j)
    assert_allclose(V, 8 * np.pi ** 2 / np.cosh(2 * np.pi * x) ** 2, rtol=1e-12)


def test_catenoid_kernel():
    rep = js.kernel_dimension(js.catenoid_operator())
    assert rep.dimension == 3
    assert rep.gap_ratio > 10


def test_riemann_kernel_contains_linear_fields():
    g = gauss_map(1.0)
    op = js.field_operator(g, 1.0, 64, 32)
    z = op.x[:, None] + 1j * op.y[None, :]
    rep = js.kernel_dimension(op, linear=js.linear_jacobi_fields(g, z))
    assert rep.dimension == 3
    assert max(rep.projection_residuals) < 1e-3


def test_gap_not_resolved():
    with pytest.raises(GapNotResolved):
        js.kernel_dimension(js.flat_operator(16, 8, 1.0), threshold_ratio=1e20)


def test_resonance_distance():
    assert js.resonance_distance(1.3) == (1, pytest.approx(0.69))
    assert js.resonance_distance(2.9)[0] == 3


def test_resonant_delta_rejected():
    c, modes, freqs = js.random_band_limited(np.random.default_rng(0), 2, 2)
    with pytest.raises(ResonantDelta):
        js.weighted_estimate_check(2.0, c, modes, freqs)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0).filter(lambda d: abs(d - round(d)) > 1e-3), st.integers(0, 2 ** 31))
def test_weighted_estimate_property(delta, seed):
    c, modes, freqs = js.random_band_limited(np.random.default_rng(seed), 4, 4)
    est = js.weighted_estimate_check(delta, c, modes, freqs)
    assert est.ok
    assert est.ratio <= 1 + 1e-12


@pytest.mark.parametrize("delta", [0.3, 1.3, 2.6])
def test_estimate_is_saturated(delta):
    assert abs(js.saturation_ratio(delta) - 1) < 1e-12


def test_synthesized_solution_solves_equation():
    c, modes, freqs = js.random_band_limited(np.random.default_rng(3), 2, 2, period=2 * np.pi)
    t = np.linspace(0, 1, 2001)
    th = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    F, U = js.synthesize(c, modes, freqs, 0.7, t, th)
    h = t[1] - t[0]
    U_tt = (-U[4:] + 16 * U[3:-1] - 30 * U[2:-2] + 16 * U[1:-3] - U[:-4]) / (12 * h ** 2)
    k = np.fft.fftfreq(32, 1 / 32)
    U_thth = np.fft.ifft(-(k ** 2) * np.fft.fft(U, axis=1), axis=1)[2:-2]
    lap = U_tt + U_thth
    assert_allclose(lap, F[2:-2], atol=1e-7 * np.abs(F).max())
