import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemann_kdv.errors import Degenerate, PoleOnContour, RadiusExceeded, ResidueNonzero, ValidationError
from riemann_kdv.kdv_flow import (ContourField, RiemannSource, detect_algebro_geometric, elliptic_potential,
                                  evolve_real, integrate_shiffman, invariants3, local_solutions, locate_pole,
                                  schrodinger_solve, soliton_run, taylor_flow, taylor_flow_recursive, track_pole,
                                  winding)
from riemann_kdv.kdv_flow.integrate import nodes_for_circle
from riemann_kdv.kdv_flow.spectral import fft, mp_array, precision, to_complex


# spectral fields --------------------------------------------------------------

def test_fft_matches_numpy(rng):
    a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    with precision(30):
        got = to_complex(fft(mp_array(a)))
    assert_allclose(got, np.fft.fft(a), atol=1e-12)


def test_vertical_derivatives():
    f = ContourField.from_function(lambda z: mpmath.exp(2 * mpmath.pi * z), "vertical", 32, 40, x0=0.1)
    d = f.derivatives(3)
    z = f.nodes_complex()
    for k in range(4):
        assert_allclose(to_complex(d[k]), (2 * np.pi) ** k * np.exp(2 * np.pi * z), rtol=1e-25 ** 0.5)


def test_twisted_field():
    # exp(pi z) is antiperiodic along Re z = x0
    f = ContourField.from_function(lambda z: mpmath.exp(mpmath.pi * z), "vertical", 32, 40, x0=0.0, twist=0.5)
    assert_allclose(to_complex(f.derivatives(1)[1]), np.pi * f.values(), rtol=1e-15)


def test_circle_derivative_and_integral():
    f = ContourField.from_function(lambda z: 1 / z + z ** 2, "circle", 64, 40, center=0j, radius=0.5)
    assert_allclose(f.integral(), 2j * np.pi, rtol=1e-30 ** 0.5)
    z = f.nodes_complex()
    assert_allclose(to_complex(f.derivatives(1)[1]), -1 / z ** 2 + 2 * z, rtol=1e-12)


def test_noise_bounds_grow_with_order():
    u = elliptic_potential(1.0, "vertical", 128, 40, x0=0.3)
    d = [float(v) for v in u.derivative_noise(4)]
    assert all(b > a for a, b in zip(d, d[1:]))


# real line ---------------------------------------------------------------------

def test_soliton_speed_and_invariants():
    run = soliton_run()
    assert abs(run.speed - 4) < 0.04
    assert np.max(run.drift) < 1e-6


def test_invariants_of_constant():
    I = invariants3(np.full(16, 2.0), 4.0)
    assert_allclose(I, [8.0, 16.0, -32.0])


def test_taylor_matches_pseudospectral():
    L, N = 2 * np.pi, 32
    f = ContourField.from_function(lambda z: 0.3 * mpmath.cos(z), "real", N, 40, L=L)
    r = taylor_flow(f, 1e-3, 8, check=False)
    traj = evolve_real(0.3 * np.cos(L * np.arange(N) / N), L, 1e-3, 1e-5)
    assert np.max(np.abs(r.u.values() - traj.states[-1])) < 1e-8


def test_taylor_matches_recursion():
    f = ContourField.from_function(lambda z: 0.3 * mpmath.cosh(2 * mpmath.pi * z), "vertical", 32, 40)
    a = taylor_flow(f, 2e-3 + 1e-3j, 6, check=False).u
    b = taylor_flow_recursive(f, 2e-3 + 1e-3j, 6)
    assert np.max(np.abs(a.values() - b.values())) < 1e-25


# complex Taylor flow ---------------------------------------------------------------

def test_stationary_elliptic_potential():
    u0 = elliptic_potential(1.0, "vertical", 256, x0=0.25)
    r = taylor_flow(u0, 0.01j, 6)
    assert r.radius_estimate == float("inf")
    assert np.max(np.abs(r.u.values() - u0.values())) < 1e-20 * u0.sup()


def test_pole_on_contour_rejected():
    u0 = elliptic_potential(1.0, "vertical", 64, x0=0.02)
    with pytest.raises(PoleOnContour):
        taylor_flow(u0, 0.01)


def test_radius_exceeded():
    u = RiemannSource(0.5).u_field(n=512)
    with pytest.raises(RadiusExceeded):
        taylor_flow(u, 0.002, 8)


def test_negative_order():
    with pytest.raises(ValidationError):
        taylor_flow(elliptic_potential(1.0, "vertical", 64, x0=0.5), 0.01, -1)


# poles ----------------------------------------------------------------------------

def test_locate_elliptic_pole():
    u = elliptic_potential(1.3, "circle", 128, shift=0.1 + 0.05j, center=0.1j, radius=0.3)
    loc = locate_pole(u)
    assert abs(loc.z0 - (0.1 + 0.05j)) < 1e-30
    assert abs(loc.z0_moment - loc.z0) < 1e-30
    assert abs(loc.a_minus2 + 2) < 1e-30
    assert abs(loc.count + 1) < 1e-30


def test_simple_pole_rejected():
    u = ContourField.from_function(lambda z: 1 / z, "circle", 64, 40, center=0j, radius=0.5)
    with pytest.raises(ResidueNonzero):
        locate_pole(u)


def test_pole_translates_at_half_width():
    # off the square lattice the flow is the translation z -> z + 6 e2 tau,
    # so the pole of u moves to w2 - 6 e2 tau
    src = RiemannSource(0.5)
    w2 = complex(0.5, 1) / 2
    uc = src.u_field("circle", nodes_for_circle(0.1, 0.5), center=w2, radius=0.1)
    taus = [0, 1e-4, 1e-4j]
    tr = track_pole([taylor_flow(uc, s, 8).u for s in taus], taus)
    expect = w2 - 6 * complex(src.e2) * np.array(taus)
    assert np.max(np.abs(tr.z0 - expect)) < 1e-10
    assert tr.max_a2_defect() < 1e-10


def test_shiffman_translation_at_half_width():
    res = integrate_shiffman(0.5, 1e-4, 8, track=False)
    src = RiemannSource(0.5)
    shift = 6 * complex(src.e2) * 1e-4
    z = res.g.nodes_complex()
    exact = np.array([complex(src.g(mpmath.mpc(v + shift))) for v in z[::16]])
    assert_allclose(res.g.values()[::16], exact, rtol=1e-10)
    assert res.period_drift < 1e-10 and res.flux_drift < 1e-10
    assert res.g_consistency < 1e-10


# Riemann source and Schrodinger ---------------------------------------------------------

def test_riemann_potential_closed_form():
    src = RiemannSource(0.7, 40)
    with mpmath.workdps(40):
        for z in (0.1 + 0.2j, 0.3 + 0.9j):
            assert abs(src.u(z) - src.u_closed_form(z)) < 1e-30


def test_y_field_is_antiperiodic():
    y = RiemannSource(1.0, 40).y_field(n=64)
    assert y.twist == 0.5


def test_local_solutions_wronskian():
    src = RiemannSource(1.0, 30)
    y1, dy1, y2, dy2 = local_solutions(src, mpmath.mpc(0.3, 0.2))
    assert abs(y1 * dy2 - dy1 * y2 - 1) < 1e-14


def test_schrodinger_monodromy():
    # u = -pi^2 has the solution exp(pi z), antiperiodic along Re z = 0
    u = ContourField("vertical", mp_array(np.full(64, -np.pi ** 2 + 0j)), 30)
    sol = schrodinger_solve(u, 1.0, np.pi)
    assert sol.is_antiperiodic(1e-9)


# detection --------------------------------------------------------------------------------

def test_winding_of_unit_circle():
    assert abs(winding(np.exp(2j * np.pi * np.arange(50) / 50)) - 1) < 1e-12


def test_detection_elliptic():
    d = detect_algebro_geometric(elliptic_potential(1.0, "vertical", 128, 40, x0=0.3), 3)
    assert d.n == 1
    assert d.drop() > 20


def test_detection_riemann_fixture():
    src = RiemannSource(1.0)
    d = detect_algebro_geometric(src.u_field(n=256), 4)
    assert d.n == 1
    assert_allclose(d.coefficients, [0.0], atol=1e-10)


def test_detection_constant_is_degenerate():
    u = ContourField("vertical", mp_array(np.zeros(32)), 30)
    with pytest.raises(Degenerate):
        detect_algebro_geometric(u, 2)
