"""Numerical side: remainders, basis functions, PV integrals, Pfaffians and
partition-function evaluators."""
from .basis import (
    FORMS,
    basis_F,
    basis_F_scale,
    correction_term,
    inverse_vandermonde,
    leading_correction_order,
    remainder_RN,
)
from .models import (
    DeBruijnResult,
    Theorem1Result,
    debruijn_pv_check,
    mc_z_estimate,
    sample_hermitian,
    z_direct,
    z_theorem1,
)
from .pfaffian import SkewMatrix, pfaffian, schur_pfaffian_check
from .quad import (
    KernelSpec,
    QuadConfig,
    QuadratureError,
    QuadResult,
    pv_double_integral,
    pv_epsilon_cutoff,
    pv_epsilon_extrapolation,
    pv_matrix,
)

__all__ = [
    "FORMS",
    "basis_F",
    "basis_F_scale",
    "correction_term",
    "inverse_vandermonde",
    "leading_correction_order",
    "remainder_RN",
    "DeBruijnResult",
    "Theorem1Result",
    "debruijn_pv_check",
    "mc_z_estimate",
    "sample_hermitian",
    "z_direct",
    "z_theorem1",
    "SkewMatrix",
    "pfaffian",
    "schur_pfaffian_check",
    "KernelSpec",
    "QuadConfig",
    "QuadratureError",
    "QuadResult",
    "pv_double_integral",
    "pv_epsilon_cutoff",
    "pv_epsilon_extrapolation",
    "pv_matrix",
]
