"""Slow-part plus dyadic-band decomposition of fields and diagnostic time series."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..wavelet_core.filters import as_filter
from ..wavelet_core.transform import (
    dwt_1d, dwt_2d_packed, dyadic_level, idwt_1d, idwt_2d_packed,
)
from .model import WignerField


@dataclass
class MultiscaleDecomposition:
    """``slow_part + sum(band_parts.values())`` reproduces the input.

    Band ``l`` is the detail space between levels ``l`` and ``l + 1`` (about
    ``2**l`` oscillations across the domain). Energies are coefficient sums of
    squares, so for padded time series they refer to the padded signal.
    """

    cutoff: int
    top_level: int
    slow_part: np.ndarray
    band_parts: dict
    band_energy: dict
    slow_energy: float
    total_energy: float

    def reconstruct(self):
        return self.slow_part + sum(self.band_parts.values())


def reflect_pad(series):
    """Symmetric reflection up to the next power of two."""
    x = np.asarray(series, dtype=float)
    n = x.size
    target = 1 << max(1, (n - 1).bit_length())
    if target == n:
        return x.copy()
    out = x
    while out.size < target:
        out = np.concatenate([out, out[::-1]])
    return out[:target]


def _band_slices_2d(level):
    m = 2 ** level
    return [
        (slice(0, m), slice(m, 2 * m)),
        (slice(m, 2 * m), slice(0, m)),
        (slice(m, 2 * m), slice(m, 2 * m)),
    ]


def decompose_multiscale(data, filt, cutoff):
    """Split a field (or a 1D series) into the ``V_cutoff`` part and detail bands above it."""
    filt = as_filter(filt)
    if isinstance(data, WignerField):
        return _decompose_field(data.values, filt, cutoff)
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2:
        return _decompose_field(arr, filt, cutoff)
    if arr.ndim != 1:
        raise InvalidArgumentError("expected a field or a 1D time series")
    return _decompose_series(arr, filt, cutoff)


def _decompose_field(values, filt, cutoff):
    top = dyadic_level(values.shape[0])
    if top is None or values.shape[0] != values.shape[1]:
        raise InvalidArgumentError(f"field must be square and dyadic, got {values.shape}")
    if not 0 <= cutoff < top:
        raise InvalidArgumentError(f"cutoff must lie in [0, {top - 1}], got {cutoff}")
    levels = top - cutoff
    packed = dwt_2d_packed(values, filt, levels)
    m = 2 ** cutoff
    slow_c = np.zeros_like(packed)
    slow_c[:m, :m] = packed[:m, :m]
    slow = idwt_2d_packed(slow_c, filt, levels)
    parts, energies = {}, {}
    for l in range(cutoff, top):
        band = np.zeros_like(packed)
        e = 0.0
        for rs, cs in _band_slices_2d(l):
            band[rs, cs] = packed[rs, cs]
            e += float(np.sum(packed[rs, cs] ** 2))
        parts[l] = idwt_2d_packed(band, filt, levels)
        energies[l] = e
    return MultiscaleDecomposition(
        cutoff, top, slow, parts, energies,
        float(np.sum(slow_c ** 2)), float(np.sum(values ** 2)),
    )


def _decompose_series(series, filt, cutoff):
    padded = reflect_pad(series)
    n = series.size
    top = dyadic_level(padded.size)
    if not 0 <= cutoff < top:
        raise InvalidArgumentError(f"cutoff must lie in [0, {top - 1}], got {cutoff}")
    levels = top - cutoff
    coeffs = dwt_1d(padded, filt, levels)
    m = 2 ** cutoff
    slow_c = np.zeros_like(coeffs)
    slow_c[:m] = coeffs[:m]
    slow = idwt_1d(slow_c, filt, levels)[:n]
    parts, energies = {}, {}
    for l in range(cutoff, top):
        band = np.zeros_like(coeffs)
        sl = slice(2 ** l, 2 ** (l + 1))
        band[sl] = coeffs[sl]
        parts[l] = idwt_1d(band, filt, levels)[:n]
        energies[l] = float(np.sum(coeffs[sl] ** 2))
    return MultiscaleDecomposition(
        cutoff, top, slow, parts, energies,
        float(np.sum(slow_c ** 2)), float(np.sum(padded ** 2)),
    )
