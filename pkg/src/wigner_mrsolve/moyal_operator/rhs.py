"""Grid-level right-hand-side functions with a selectable derivative scheme."""

import numpy as np

from ..errors import InvalidArgumentError
from ..phase_space.model import PolynomialHamiltonian
from .galerkin import RhsTerms, assemble_galerkin_operator
from .oracle import finite_difference_rhs_oracle

SCHEMES = ("galerkin", "oracle")


def _check_scheme(scheme):
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"derivative scheme must be one of {SCHEMES}, got {scheme!r}")


def _evaluate(H, W, params, terms, scheme, order, t):
    _check_scheme(scheme)
    if scheme == "oracle":
        return finite_difference_rhs_oracle(H, params, terms, W, t)
    op = assemble_galerkin_operator(H, params, terms, W.grid, order)
    return op.apply(W.values, t)


def liouville_rhs(H, W, params, scheme="galerkin", order=6, t=None):
    """Classical Poisson flow ``{H, W}``; for ``p**2/2m + U`` this is ``U' d_p W - (p/m) d_q W``."""
    return _evaluate(H, W, params, RhsTerms.only("liouville"), scheme, order, t)


def quantum_correction_rhs(H, W, params, scheme="galerkin", order=6, t=None):
    """Third- and higher-order Moyal terms. Empty, hence zero, for quadratic H."""
    if H.degree <= 2:
        return np.zeros_like(W.values)
    return _evaluate(H, W, params, RhsTerms.only("quantum"), scheme, order, t)


def moyal_bracket(H, W, params, scheme="galerkin", order=6, t=None):
    """Full sine-series bracket ``(2/hbar) H sin(hbar Lambda / 2) W``."""
    if not isinstance(H, PolynomialHamiltonian):
        raise InvalidArgumentError("moyal_bracket needs a PolynomialHamiltonian")
    return _evaluate(H, W, params, RhsTerms.only("liouville", "quantum"), scheme, order, t)


def decoherence_rhs(W, params, scheme="galerkin", order=6):
    """``2 gamma d_p (p W) + D d_p**2 W``."""
    if params.gamma == 0.0 and params.diffusion == 0.0:
        return np.zeros_like(W.values)
    return _evaluate(None, W, params, RhsTerms.only("friction", "diffusion"), scheme, order, None)


def full_rhs(H, W, params, terms=None, scheme="galerkin", order=6, t=None):
    return _evaluate(H, W, params, terms or RhsTerms.all(), scheme, order, t)
