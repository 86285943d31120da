"""Compactly supported wavelet machinery: filters, transforms, packets, connection tables."""

from .connection import ConnectionTable, connection_coefficients, overlap_moments
from .filters import (
    WaveletFilter, cascade_evaluate, daubechies_filter, scaling_moments, two_scale_residual,
)
from .packets import BasisTree, basis_entropy, best_basis, reconstruct, shannon_entropy, standard_basis_leaves
from .transform import CoefficientPyramid, dwt_1d, dwt_2d, idwt_1d, inverse_dwt_2d

__all__ = [
    "BasisTree", "CoefficientPyramid", "ConnectionTable", "WaveletFilter",
    "basis_entropy", "best_basis", "cascade_evaluate", "connection_coefficients",
    "daubechies_filter", "dwt_1d", "dwt_2d", "idwt_1d", "inverse_dwt_2d",
    "overlap_moments", "reconstruct", "scaling_moments", "shannon_entropy",
    "standard_basis_leaves", "two_scale_residual",
]
