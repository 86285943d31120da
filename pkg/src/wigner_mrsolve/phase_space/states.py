"""Canonical initial states: coherent Gaussians, wavefunction transforms, cat states."""

import numpy as np

from ..errors import DomainTooSmallError, InvalidArgumentError
from .model import WignerField

WAVEFUNCTION_NORM_TOL = 1e-6
TRANSFORM_NORM_TOL = 1e-4
IMAG_TOL = 1e-10


def _check_margins(grid, q_centres, p0, sigma, params):
    q_margin = 4.0 * sigma
    p_margin = 4.0 * params.hbar / (2.0 * sigma)
    lo_q = min(q_centres) - q_margin
    hi_q = max(q_centres) + q_margin
    lo_p, hi_p = p0 - p_margin, p0 + p_margin
    if lo_q < grid.q_min or hi_q > grid.q_max or lo_p < grid.p_min or hi_p > grid.p_max:
        raise DomainTooSmallError(
            f"state needs q in [{lo_q:g}, {hi_q:g}] and p in [{lo_p:g}, {hi_p:g}]; "
            f"box is q in [{grid.q_min:g}, {grid.q_max:g}], p in [{grid.p_min:g}, {grid.p_max:g}]"
        )


def gaussian_coherent_state(grid, q0, p0, sigma, params):
    """Closed-form Wigner function of a minimum-uncertainty Gaussian."""
    if sigma <= 0:
        raise InvalidArgumentError("sigma must be > 0")
    _check_margins(grid, (q0,), p0, sigma, params)
    hbar = params.hbar
    q, p = grid.mesh()
    w = np.exp(-((q - q0) ** 2) / sigma ** 2 - sigma ** 2 * (p - p0) ** 2 / hbar ** 2) / (np.pi * hbar)
    return WignerField(grid, w, meta={"state": "coherent", "q0": q0, "p0": p0, "sigma": sigma})


def gaussian_wavefunction(grid, q0, sigma, p0=0.0, hbar=1.0):
    q = grid.q
    return (np.pi * sigma ** 2) ** -0.25 * np.exp(-((q - q0) ** 2) / (2 * sigma ** 2) + 1j * p0 * q / hbar)


def wigner_from_wavefunction(psi, grid, params):
    """Wigner transform of a pure state sampled on the q-grid.

    The lag integral runs over the largest symmetric window that fits the
    grid (lags up to n/2 cells) with trapezoid end weights, ``psi`` being
    zero outside the box.
    """
    psi = np.asarray(psi, dtype=complex)
    n = grid.n
    if psi.shape != (n,):
        raise InvalidArgumentError(f"wavefunction must have {n} samples, got {psi.shape}")
    dq = grid.dq
    norm = float(np.sum(np.abs(psi) ** 2) * dq)
    if abs(norm - 1.0) > WAVEFUNCTION_NORM_TOL:
        raise InvalidArgumentError(f"wavefunction not normalized: sum |psi|^2 dq = {norm:.8f}")
    hbar = params.hbar
    half = n // 2
    lags = np.arange(-half, half + 1)
    padded = np.concatenate([np.zeros(half, complex), psi, np.zeros(half, complex)])
    idx = np.arange(n)[:, None] + half
    corr = np.conj(padded[idx + lags]) * padded[idx - lags]
    weights = np.ones(lags.size)
    weights[0] = weights[-1] = 0.5
    phase = np.exp(2j * np.outer(lags * dq, grid.p) / hbar)
    w = (corr * weights) @ phase * dq / (np.pi * hbar)
    scale = np.max(np.abs(w))
    if np.max(np.abs(w.imag)) > IMAG_TOL * max(scale, 1.0):
        raise InvalidArgumentError("Wigner transform has a non-negligible imaginary part")
    w = w.real
    total = float(w.sum() * grid.cell)
    if abs(total - 1.0) > TRANSFORM_NORM_TOL:
        raise InvalidArgumentError(
            f"Wigner transform normalization {total:.6f} off by more than {TRANSFORM_NORM_TOL:g}; "
            "refine the grid or enlarge the momentum box"
        )
    return WignerField(grid, w / total, meta={"state": "wavefunction"})


def cat_state(grid, q0, sigma, params):
    """Even superposition of Gaussians at +q0 and -q0."""
    if sigma <= 0:
        raise InvalidArgumentError("sigma must be > 0")
    _check_margins(grid, (q0, -q0), 0.0, sigma, params)
    psi = gaussian_wavefunction(grid, q0, sigma) + gaussian_wavefunction(grid, -q0, sigma)
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dq)
    field = wigner_from_wavefunction(psi, grid, params)
    return WignerField(grid, field.values, meta={"state": "cat", "q0": q0, "sigma": sigma})


def mixture(fields, weights=None):
    fields = list(fields)
    if weights is None:
        weights = np.full(len(fields), 1.0 / len(fields))
    values = sum(w * f.values for w, f in zip(weights, fields))
    return fields[0].with_values(values)
