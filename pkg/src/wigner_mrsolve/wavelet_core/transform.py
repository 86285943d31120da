"""Periodized orthogonal wavelet transforms (1D and 2D Mallat pyramid)."""

import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgumentError
from .filters import as_filter

DIRECTIONS = ("LH", "HL", "HH")

_cache = {}
_lock = threading.Lock()


def dyadic_level(n):
    level = int(n).bit_length() - 1
    if n < 1 or 2 ** level != n:
        return None
    return level


def analysis_matrix(filt, size):
    """Orthogonal ``size x size`` matrix ``[H; G]`` of one periodized analysis step.

    Row ``k`` of ``H`` holds ``h[n]`` at column ``(2k + n) mod size``.
    """
    filt = as_filter(filt)
    if size < 2 or size % 2:
        raise InvalidArgumentError(f"analysis step needs an even length >= 2, got {size}")
    key = (filt.order, size)
    cached = _cache.get(key)
    if cached is not None:
        return cached
    half = size // 2
    rows, cols, vals = [], [], []
    for k in range(half):
        for n, (h, g) in enumerate(zip(filt.low_pass, filt.high_pass)):
            c = (2 * k + n) % size
            rows += [k, half + k]
            cols += [c, c]
            vals += [h, g]
    # duplicates sum on conversion: that is the periodization
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    mat.sum_duplicates()
    with _lock:
        return _cache.setdefault(key, mat)


def dwt_1d(signal, filt, levels):
    """Packed 1D periodic DWT: ``[a_J0, d_J0, d_J0+1, ..., d_J-1]``."""
    filt = as_filter(filt)
    x = np.asarray(signal, dtype=float)
    top = dyadic_level(x.size)
    if top is None:
        raise InvalidArgumentError(f"signal length {x.size} is not a power of two")
    if not 0 <= levels <= top:
        raise InvalidArgumentError(f"levels must lie in [0, {top}], got {levels}")
    out = x.copy()
    size = x.size
    for _ in range(levels):
        out[:size] = analysis_matrix(filt, size) @ out[:size]
        size //= 2
    return out


def idwt_1d(coeffs, filt, levels):
    filt = as_filter(filt)
    out = np.asarray(coeffs, dtype=float).copy()
    size = out.size >> levels
    for _ in range(levels):
        size *= 2
        out[:size] = analysis_matrix(filt, size).T @ out[:size]
    return out


@dataclass
class CoefficientPyramid:
    """Mallat pyramid of a ``2**J x 2**J`` field.

    ``bands`` maps ``(level, band_index, direction)`` to arrays; the coarse
    scaling band is ``(base_level, 0, "LL")`` and details at level ``j`` have
    shape ``(2**j, 2**j)``. Direction letters name the filter applied along
    the row (q) and column (p) axes.
    """

    base_level: int
    top_level: int
    bands: dict
    filter_order: int
    field_shape: tuple = field(init=False)

    def __post_init__(self):
        n = 2 ** self.top_level
        self.field_shape = (n, n)

    @property
    def levels(self):
        return self.top_level - self.base_level

    @property
    def coarse(self):
        return self.bands[(self.base_level, 0, "LL")]

    def detail(self, level, direction):
        return self.bands[(level, 0, direction)]

    def coefficient_count(self):
        return sum(b.size for b in self.bands.values())

    def energy(self):
        return float(sum(np.sum(b * b) for b in self.bands.values()))

    def to_array(self):
        """Pack into the in-place layout (coarse block top-left)."""
        n = 2 ** self.top_level
        out = np.empty((n, n))
        m = 2 ** self.base_level
        out[:m, :m] = self.coarse
        for j in range(self.base_level, self.top_level):
            m = 2 ** j
            out[:m, m:2 * m] = self.bands[(j, 0, "LH")]
            out[m:2 * m, :m] = self.bands[(j, 0, "HL")]
            out[m:2 * m, m:2 * m] = self.bands[(j, 0, "HH")]
        return out

    @classmethod
    def from_array(cls, packed, levels, filt):
        packed = np.asarray(packed, dtype=float)
        top = dyadic_level(packed.shape[0])
        base = top - levels
        m = 2 ** base
        bands = {(base, 0, "LL"): packed[:m, :m].copy()}
        for j in range(base, top):
            m = 2 ** j
            bands[(j, 0, "LH")] = packed[:m, m:2 * m].copy()
            bands[(j, 0, "HL")] = packed[m:2 * m, :m].copy()
            bands[(j, 0, "HH")] = packed[m:2 * m, m:2 * m].copy()
        return cls(base, top, bands, as_filter(filt).order)

    def map_bands(self, fn):
        return CoefficientPyramid(
            self.base_level, self.top_level,
            {k: fn(k, v) for k, v in self.bands.items()}, self.filter_order,
        )


def _check_field(field_values):
    f = np.asarray(field_values, dtype=float)
    if f.ndim != 2 or f.shape[0] != f.shape[1] or dyadic_level(f.shape[0]) is None:
        raise InvalidArgumentError(f"field must be 2**J x 2**J, got shape {f.shape}")
    return f, dyadic_level(f.shape[0])


def dwt_2d_packed(field_values, filt, levels):
    """Forward transform returning the packed in-place array."""
    filt = as_filter(filt)
    f, top = _check_field(field_values)
    if not 1 <= levels <= top:
        raise InvalidArgumentError(f"levels must lie in [1, {top}], got {levels}")
    out = f.copy()
    size = f.shape[0]
    for _ in range(levels):
        s = analysis_matrix(filt, size)
        block = out[:size, :size]
        out[:size, :size] = (s @ (s @ block).T).T
        size //= 2
    return out


def idwt_2d_packed(packed, filt, levels):
    filt = as_filter(filt)
    out = np.array(packed, dtype=float)
    size = out.shape[0] >> levels
    for _ in range(levels):
        size *= 2
        s = analysis_matrix(filt, size)
        block = out[:size, :size]
        out[:size, :size] = (s.T @ (s.T @ block).T).T
    return out


def dwt_2d(field_values, filt, levels):
    """Periodic 2D Mallat decomposition of a square dyadic field."""
    filt = as_filter(filt)
    packed = dwt_2d_packed(field_values, filt, levels)
    return CoefficientPyramid.from_array(packed, levels, filt)


def inverse_dwt_2d(pyramid):
    return idwt_2d_packed(pyramid.to_array(), pyramid.filter_order, pyramid.levels)
