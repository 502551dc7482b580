from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemann_kdv.diffpoly import (I, QI, REFERENCE_FLOWS, REFERENCE_OPERATORS, DiffPoly, audit_shiffman_flow,
                                  chain_rule_check, check_commutativity, commutator, gdot_shiffman,
                                  hierarchy_conjugate, integrate_exact, kdv_flow_rhs, kdv_operator,
                                  miura_check, miura_substitution_identity, monomials_of_weight,
                                  shiffman_constant, shiffman_flow_rhs, u_of_g)
from riemann_kdv.errors import NotExact, ValidationError

u = DiffPoly.var("u")


def u_(k):
    return DiffPoly.var("u", k)


monomial = st.builds(lambda k, e, c: Fraction(c, 3) * DiffPoly.var("u", k, e),
                     st.integers(0, 3), st.integers(1, 3), st.integers(-5, 5))
poly = st.lists(monomial, min_size=1, max_size=4).map(lambda ms: sum(ms[1:], ms[0]))


@settings(max_examples=50, deadline=None)
@given(poly, poly)
def test_leibniz_rule(p, q):
    assert (p * q).derive() == p.derive() * q + p * q.derive()


@settings(max_examples=50, deadline=None)
@given(poly, poly, poly)
def test_ring_laws(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p - p == DiffPoly()


@settings(max_examples=30, deadline=None)
@given(poly)
def test_total_derivatives_integrate(p):
    assert integrate_exact(p.derive()).derive() == p.derive()
    assert p.derive().euler("u") == DiffPoly()


def test_not_exact():
    with pytest.raises(NotExact):
        integrate_exact(u_(1) ** 2)


def test_gaussian_rationals():
    assert I * I == QI(-1)
    assert QI(1, 2) * QI(1, -2) == QI(5)
    assert complex(QI(Fraction(1, 2), -3)) == 0.5 - 3j


def test_operators_match_reference():
    for n, ref in enumerate(REFERENCE_OPERATORS):
        assert kdv_operator(n) == ref


def test_flows_match_reference():
    for n, ref in enumerate(REFERENCE_FLOWS):
        assert kdv_flow_rhs(n) == ref


def test_recursion_defines_next_operator():
    # D P_{n+1} = (D^3 + 4 u D + 2 u') P_n with zero integration constant
    for n in range(3):
        P, Q = kdv_operator(n), kdv_operator(n + 1)
        assert Q.derive() == P.derive(3) + 4 * u * P.derive() + 2 * u_(1) * P


def test_weight_homogeneity():
    # P_n has weight 2n with u of weight 2 and D of weight 1
    for n in range(4):
        basis = set()
        for m in monomials_of_weight("u", 2 * n):
            basis |= set(m.terms)
        assert set(kdv_operator(n).terms) <= basis | ({()} if n == 0 else set())


def test_commutativity_low_orders():
    assert check_commutativity(2)
    assert commutator(2).is_zero()


def test_miura_constant():
    m = miura_check()
    assert m.proportional
    assert m.kappa == QI(-1)
    assert miura_substitution_identity()


def test_chain_rule_for_gauss_map():
    assert chain_rule_check(1)
    assert chain_rule_check(2)


def test_shiffman_flow_constant():
    assert shiffman_constant() == QI(0, Fraction(-1, 2))
    assert gdot_shiffman() == shiffman_constant() * shiffman_flow_rhs(1)


def test_potential_of_gauss_map():
    g = DiffPoly.var("g")
    ginv = DiffPoly.var("g", 0, -1)
    expected = Fraction(-3, 4) * (DiffPoly.var("g", 1) * ginv) ** 2 + Fraction(1, 2) * DiffPoly.var("g", 2) * ginv
    assert u_of_g() == expected
    assert g * ginv == DiffPoly.const(1)


def test_audit_against_tabulated_forms():
    assert audit_shiffman_flow(0) == []
    # the tabulated first flow disagrees with the chain-rule computation
    assert audit_shiffman_flow(1) != []
    with pytest.raises(ValidationError):
        audit_shiffman_flow(7)


def test_conjugate_potential_relation():
    from riemann_kdv.diffpoly import u_of_y
    y = DiffPoly.var("y")
    for n in (1, 2):
        h = hierarchy_conjugate(n)
        P = kdv_operator(n).subs({"u": u_of_y()})
        assert h.derive() == 4 * (y ** 2).derive() * P


def test_printers():
    assert kdv_operator(2).to_ascii() in ("u'' + 3*u^2", "3*u^2 + u''")
    assert "u^{(4)}" in kdv_operator(3).to_latex()
