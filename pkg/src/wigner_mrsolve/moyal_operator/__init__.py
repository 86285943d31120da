"""Right-hand side of the Wigner evolution equation: Galerkin assembly and a finite-difference oracle."""

from .galerkin import (
    AxisCalculus, GalerkinOperator, KronTerm, RhsTerms, assemble_galerkin_operator,
    axis_calculus, moyal_monomial_terms, thread_count, wavelet_transform_matrix,
)
from .oracle import OracleOperator, central_weights, finite_difference_rhs_oracle, periodic_derivative
from .rhs import (
    SCHEMES, decoherence_rhs, full_rhs, liouville_rhs, moyal_bracket, quantum_correction_rhs,
)

__all__ = [
    "AxisCalculus", "GalerkinOperator", "KronTerm", "OracleOperator", "RhsTerms", "SCHEMES",
    "assemble_galerkin_operator", "axis_calculus", "central_weights", "decoherence_rhs",
    "finite_difference_rhs_oracle", "full_rhs", "liouville_rhs", "moyal_bracket",
    "moyal_monomial_terms", "periodic_derivative", "quantum_correction_rhs", "thread_count",
    "wavelet_transform_matrix",
]
