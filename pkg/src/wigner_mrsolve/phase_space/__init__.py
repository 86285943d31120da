"""Wigner-field data model, canonical states, diagnostics and regime labels."""

from .classify import ClassifierThresholds, classify_state
from .diagnostics import (
    DiagnosticsRecord, Regime, centroid, diagnose, energy, marginals, negativity_volume,
    purity, sparsity, wavelet_coefficients,
)
from .model import PhaseSpaceGrid, PhysicalParams, PolynomialHamiltonian, WignerField
from .multiscale import MultiscaleDecomposition, decompose_multiscale
from .states import cat_state, gaussian_coherent_state, gaussian_wavefunction, wigner_from_wavefunction

__all__ = [
    "ClassifierThresholds", "DiagnosticsRecord", "MultiscaleDecomposition", "PhaseSpaceGrid",
    "PhysicalParams", "PolynomialHamiltonian", "Regime", "WignerField", "cat_state", "centroid",
    "classify_state", "decompose_multiscale", "diagnose", "energy", "gaussian_coherent_state",
    "gaussian_wavefunction", "marginals", "negativity_volume", "purity", "sparsity",
    "wavelet_coefficients", "wigner_from_wavefunction",
]
