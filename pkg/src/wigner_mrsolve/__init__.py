"""Multiresolution wavelet Galerkin solver for Wigner-function dynamics.

Subpackages: ``wavelet_core`` (filters, transforms, packets, connection
coefficients), ``phase_space`` (fields, states, diagnostics, regimes),
``moyal_operator`` (right-hand side and its assembled matrix), ``solver``
(time stepping and stationary states) and ``scenario_cli``.
"""

__version__ = "0.1.0"
