import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from riemann_kdv.elliptic import (Lattice, invariants, invariants_mp, laurent_coefficients, wp, wp_jet,
                                  wp_pair_mp)
from riemann_kdv.errors import Pole


def wp_theta(z, t):
    """Independent oracle: P for periods t and i through Jacobi theta functions."""
    with mpmath.workdps(30):
        q = mpmath.exp(-mpmath.pi / t)          # nome for tau = i / t
        v = mpmath.pi * mpmath.mpc(z) / t
        th2, th3 = mpmath.jtheta(2, 0, q), mpmath.jtheta(3, 0, q)
        k = (mpmath.pi / t) ** 2
        val = k * (th2 ** 2 * th3 ** 2 * mpmath.jtheta(4, v, q) ** 2 / mpmath.jtheta(1, v, q) ** 2
                   - (th2 ** 4 + th3 ** 4) / 3)
        return complex(val)


@pytest.mark.parametrize("t", [0.6, 1.0, 1.7])
def test_matches_theta_oracle(t, rng):
    lat = Lattice(t)
    z = rng.uniform(0.05, t - 0.05, 20) + 1j * rng.uniform(0.05, 0.95, 20)
    ref = np.array([wp_theta(v, t) for v in z])
    assert_allclose(wp(z, lat), ref, rtol=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_invariant_relations(t):
    res = invariants(Lattice(t)).residuals()
    scale = max(1.0, abs(invariants(Lattice(t)).g2))
    assert max(res.values()) < 1e-12 * scale


def test_square_lattice_symmetry():
    inv = invariants(Lattice(1.0))
    assert abs(inv.g3) < 1e-13 * abs(inv.e1) ** 3
    assert abs(inv.e2) < 1e-13 * abs(inv.e1)


def test_half_values_ordered():
    inv = invariants(Lattice(0.8))
    assert inv.e1 > inv.e2 > inv.e3


@settings(max_examples=40, deadline=None)
@given(st.floats(0.4, 2.5), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_differential_equation(t, a, b):
    lat = Lattice(t)
    inv = invariants(lat)
    z = a * t + 1j * b
    P, dP = wp_jet(np.array([z]), lat, 1)
    rhs = 4 * P ** 3 - inv.g2 * P - inv.g3
    scale = abs(dP[0]) ** 2 + abs(4 * P[0] ** 3) + abs(inv.g2 * P[0]) + abs(inv.g3)
    assert abs(dP[0] ** 2 - rhs[0]) < 1e-11 * scale


@settings(max_examples=30, deadline=None)
@given(st.floats(0.4, 2.5), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_periodic_and_even(t, a, b):
    lat = Lattice(t)
    z = np.array([a * t + 1j * b])
    v = wp(z, lat)
    assert_allclose(wp(z + t, lat), v, rtol=1e-10)
    assert_allclose(wp(z + 1j, lat), v, rtol=1e-10)
    assert_allclose(wp(-z, lat), v, rtol=1e-10)


def test_jet_derivatives_by_finite_differences():
    lat = Lattice(1.3)
    z = np.array([0.31 + 0.27j])
    J = wp_jet(z, lat, 3)
    h = 1e-4
    for k in range(3):
        fd = (wp_jet(z + h, lat, 3)[k] - wp_jet(z - h, lat, 3)[k]) / (2 * h)
        assert_allclose(fd, J[k + 1], rtol=1e-6)


def test_laurent_expansion_near_origin():
    lat = Lattice(1.0)
    inv = invariants(lat)
    c = laurent_coefficients(inv, 4)
    z = np.array([0.02 + 0.01j])
    series = 1 / z ** 2 + sum(ck * z ** (2 * k + 2) for k, ck in enumerate(c))
    assert_allclose(wp(z, lat), series, rtol=1e-12)


def test_extended_precision_agrees():
    lat = Lattice(0.7)
    z = 0.2 + 0.3j
    p, dp = wp_pair_mp(z, lat, 40)
    J = wp_jet(np.array([z]), lat, 1)
    assert_allclose(complex(p), J[0][0], rtol=1e-13)
    assert_allclose(complex(dp), J[1][0], rtol=1e-13)
    g2, g3, *_ = invariants_mp(lat, 40)
    assert_allclose(float(g2), invariants(lat).g2, rtol=1e-13)


def test_pole_at_lattice_point():
    with pytest.raises(Pole):
        wp_jet(np.array([1.0 + 1j]), Lattice(1.0), 1)
