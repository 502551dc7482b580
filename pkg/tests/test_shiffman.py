import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemann_kdv.acceptance import conjugate_defect, jacobi_refinement_ratios, perturbed_shiffman_sup, shiffman_sup
from riemann_kdv.cylinder_field import exponential_field
from riemann_kdv.riemann_family import gauss_map
from riemann_kdv.shiffman import (end_value, jacobi_residual, perturbed_field, sample_function, shiffman_csv,
                                  shiffman_grid, shiffman_value)


def test_catenoid_shiffman_vanishes():
    # the catenoid is foliated by circles, so S = 0
    g = exponential_field(2 * np.pi)
    z = np.array([0.1 + 0.2j, -0.3 + 0.7j])
    assert np.max(np.abs(shiffman_value(g, z))) < 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_riemann_shiffman_vanishes(t):
    assert shiffman_sup(t, 64) < 1e-8


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_ends_are_continuous(t):
    g = gauss_map(t)
    for i in range(len(g.divisor)):
        assert abs(end_value(g, i)) < 1e-8
        w = g.divisor[i].point.z
        near = shiffman_value(g, np.array([w + 1e-3]))
        assert abs(near[0] - end_value(g, i)) < 1e-6


def test_perturbation_detected():
    assert perturbed_shiffman_sup(1.0, 0.01, 32) > 1e-3
    assert perturbed_shiffman_sup(1.0, 0.0, 32) < 1e-8


def test_perturbed_field_keeps_divisor():
    g = perturbed_field(gauss_map(1.0), 0.05, 0.25)
    assert [d.order for d in g.divisor] == [d.order for d in gauss_map(1.0).divisor]


def test_conjugate_function_real_part():
    assert conjugate_defect(1.0, 32) < 1e-10


def test_jacobi_refinement_second_order():
    for pair in jacobi_refinement_ratios(n0=16):
        for r in pair:
            assert abs(r - 4) < 0.5


def test_jacobi_residual_rejects_uneven_grid():
    g = gauss_map(1.0)
    s = sample_function(np.linspace(0.1, 0.4, 9), np.linspace(0.1, 0.2, 9), lambda z: np.real(z))
    with pytest.raises(ValueError):
        jacobi_residual(g, s)


def test_csv_layout():
    x, y = np.array([0.0, 0.5]), np.array([0.25])
    S = shiffman_grid(gauss_map(1.0), x + 0.1, y)
    text = shiffman_csv(x, y, S)
    lines = text.splitlines()
    assert lines[0] == "re_z,im_z,S" and len(lines) == 3
    assert_allclose(float(lines[1].split(",")[2]), S[0, 0], rtol=1e-11, atol=1e-14)
