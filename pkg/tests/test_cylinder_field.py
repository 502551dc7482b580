import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemann_kdv.cylinder_field import (argument_count, constant_field, exponential_field, flux, flux_from_periods,
                                        jacobi_sample_linear, product_field, verify_divisor)
from riemann_kdv.riemann_family import gauss_map


def test_flux_from_periods_components():
    F = flux_from_periods(1 + 2j, 3 - 1j)
    assert_allclose(F, [0.5 * (3j).imag, 0.5 * 4, 1.0])


def test_exponential_field_jets():
    f = exponential_field(2.0, 3.0)
    z = np.array([0.1 + 0.2j])
    J = f.jet(z, 2)
    assert_allclose(J[0], 3 * np.exp(2 * z))
    assert_allclose(J[2], 12 * np.exp(2 * z))


def test_product_rule_for_jets():
    f = product_field(exponential_field(1.0), constant_field(2.0))
    J = f.jet(np.array([0.3j]), 2)
    assert_allclose(J, 2 * np.exp(0.3j) * np.ones((3, 1)))


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_divisor_orders(t):
    g = gauss_map(t)
    for d, count in verify_divisor(g):
        assert abs(count - d.order) < 1e-8


def test_argument_principle_on_zero_and_pole():
    g = gauss_map(1.0)
    assert abs(argument_count(g, 0.5 + 0.5j, 0.1) - 2) < 1e-10
    assert abs(argument_count(g, 0.0, 0.1) + 2) < 1e-10


@pytest.mark.parametrize("t", [0.7, 1.4])
def test_flux_is_independent_of_contour(t):
    g = gauss_map(t)
    F1 = flux(g, 0.2 * t).F
    F2 = flux(g, 0.35 * t).F
    assert_allclose(F1, F2, atol=1e-10)


def test_linear_jacobi_fields_are_normal_components():
    g = gauss_map(1.0)
    x = np.linspace(0.1, 0.4, 9)
    y = np.linspace(0.1, 0.4, 9)
    total = sum(jacobi_sample_linear(g, x, y, a).v ** 2 for a in np.eye(3))
    assert_allclose(total, 1.0, atol=1e-12)
