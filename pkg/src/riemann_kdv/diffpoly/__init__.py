"""Exact differential-polynomial algebra and the KdV/Shiffman hierarchies."""
from .algebra import I, QI, DiffPoly, integrate_exact, monomials_of_weight
from .hierarchy import (
    HierarchyTable,
    REFERENCE_FLOWS,
    REFERENCE_OPERATORS,
    MiuraResult,
    TermAudit,
    audit_shiffman_flow,
    chain_rule_check,
    check_commutativity,
    commutator,
    gdot_shiffman,
    h_shiffman,
    hierarchy_conjugate,
    kdv_flow_rhs,
    kdv_operator,
    miura_check,
    miura_substitution_identity,
    miura_u,
    mkdv_rhs,
    shiffman_constant,
    shiffman_flow_rhs,
    u_of_g,
    u_of_y,
    y_to_g,
)

__all__ = [
    "I", "QI", "DiffPoly", "integrate_exact", "monomials_of_weight",
    "HierarchyTable", "REFERENCE_FLOWS", "REFERENCE_OPERATORS", "MiuraResult", "TermAudit", "audit_shiffman_flow",
    "chain_rule_check", "check_commutativity", "commutator", "gdot_shiffman",
    "h_shiffman", "hierarchy_conjugate", "kdv_flow_rhs", "kdv_operator",
    "miura_check", "miura_substitution_identity", "miura_u", "mkdv_rhs",
    "shiffman_constant", "shiffman_flow_rhs", "u_of_g", "u_of_y", "y_to_g",
]
