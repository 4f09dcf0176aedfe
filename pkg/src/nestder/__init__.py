"""Exact checks for ternary derivations on finite nest algebras."""
from .engine import (
    ImplementingTriple,
    OpMap,
    TernaryTriple,
    ZReport,
    check_Z,
    decide_Z,
    extract_inner,
    gamma_from,
    inner_ternary,
    left_mult,
    right_mult,
    solve_RST,
    step_identities,
    uniqueness_check,
    verify_ternary,
)
from .errors import ConsistencyError, InputError, MembershipError, TheoremViolation
from .nest import AlgBasis, AlgElement, NestSpec, basis_for, build, sample_zero_product_pairs
from .scalars import GAUSSIAN, RATIONAL, GaussQ

__version__ = "0.1.0"

__all__ = [
    "AlgBasis", "AlgElement", "ConsistencyError", "GAUSSIAN", "GaussQ", "ImplementingTriple",
    "InputError", "MembershipError", "NestSpec", "OpMap", "RATIONAL", "TernaryTriple",
    "TheoremViolation", "ZReport", "basis_for", "build", "check_Z", "decide_Z", "extract_inner",
    "gamma_from", "inner_ternary", "left_mult", "right_mult", "sample_zero_product_pairs",
    "solve_RST", "step_identities", "uniqueness_check", "verify_ternary",
]
