"""Daubechies filters, scaling-function sampling and scaling-function moments."""

import threading
from dataclasses import dataclass
from math import comb

import mpmath
import numpy as np

from ..errors import InvalidArgumentError

MIN_ORDER = 1
MAX_ORDER = 10

_cache = {}
_lock = threading.Lock()


@dataclass(frozen=True, eq=False)
class WaveletFilter:
    """Orthonormal Daubechies quadrature-mirror pair.

    ``low_pass`` is the two-scale sequence of the scaling function,
    ``phi(x) = sqrt(2) * sum_k low_pass[k] * phi(2x - k)``.
    """

    order: int
    low_pass: np.ndarray
    high_pass: np.ndarray

    @property
    def length(self):
        return 2 * self.order

    @property
    def support(self):
        return 2 * self.order - 1

    def __repr__(self):
        return f"WaveletFilter(order={self.order})"


def _minimum_phase_roots(order, dps=60):
    """Zeros of the Daubechies half-band factor lying outside the unit circle.

    Returned in the variable z of ``sum_k h_k z**k``; a front-loaded
    (minimum-phase in z**-1) filter has all its extra zeros outside |z| = 1.
    """
    with mpmath.workdps(dps):
        # P(y) = sum_k C(N-1+k, k) y^k with y = sin^2(w/2)
        coeffs = [mpmath.mpf(comb(order - 1 + k, k)) for k in range(order)]
        y_roots = mpmath.polyroots(coeffs[::-1], maxsteps=400, extraprec=4 * dps)
        roots = []
        for y in y_roots:
            # y = (2 - z - 1/z)/4  ->  z^2 - (2 - 4y) z + 1 = 0
            b = 2 - 4 * y
            disc = mpmath.sqrt(b * b - 4)
            z1, z2 = (b + disc) / 2, (b - disc) / 2
            roots.append(z1 if abs(z1) > 1 else z2)
        return roots


def _build_filter(order):
    with mpmath.workdps(60):
        poly = [mpmath.mpf(1)]
        factors = [mpmath.mpf(-1)] * order + _minimum_phase_roots(order)
        for r in factors:
            # multiply by (z - r), ascending coefficients
            new = [mpmath.mpf(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                new[i + 1] += c
                new[i] -= r * c
            poly = new
        poly = [mpmath.re(c) for c in poly]
        scale = mpmath.sqrt(2) / mpmath.fsum(poly)
        h = np.array([float(c * scale) for c in poly])
    if abs(h[0]) < abs(h[-1]):
        h = h[::-1].copy()
    return h


def daubechies_filter(order):
    """Return the minimum-phase Daubechies filter with ``order`` vanishing moments."""
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise InvalidArgumentError(f"wavelet order must be an integer in [{MIN_ORDER}, {MAX_ORDER}]")
    order = int(order)
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise InvalidArgumentError(
            f"wavelet order {order} unsupported; supported range is [{MIN_ORDER}, {MAX_ORDER}]"
        )
    key = ("filter", order)
    cached = _cache.get(key)
    if cached is not None:
        return cached
    if order == 1:
        h = np.full(2, 1.0 / np.sqrt(2.0))
    else:
        h = _build_filter(order)
    k = np.arange(2 * order)
    g = (-1.0) ** k * h[::-1]
    h.setflags(write=False)
    g.setflags(write=False)
    filt = WaveletFilter(order, h, g)
    with _lock:
        return _cache.setdefault(key, filt)


def as_filter(filt):
    if isinstance(filt, WaveletFilter):
        return filt
    return daubechies_filter(filt)


def _integer_samples(filt):
    """phi at 0, 1, ..., 2N-1 from the eigenvector of the refinement matrix."""
    h = filt.low_pass
    n = filt.length
    if filt.order == 1:
        return np.array([1.0, 0.0])
    # interior nodes 1..2N-2; phi(0) = phi(2N-1) = 0 for N >= 2
    idx = np.arange(1, n - 1)
    m = np.zeros((n - 2, n - 2))
    for a, j in enumerate(idx):
        for b, k in enumerate(idx):
            t = 2 * j - k
            if 0 <= t < n:
                m[a, b] = np.sqrt(2.0) * h[t]
    w, v = np.linalg.eig(m)
    i = np.argmin(np.abs(w - 1.0))
    vec = np.real(v[:, i])
    vec = vec / vec.sum()
    out = np.zeros(n)
    out[1:-1] = vec
    return out


def cascade_evaluate(filt, refinement_level):
    """Sample the scaling function on the dyadic grid ``k / 2**refinement_level``.

    Integer values come from the refinement-matrix eigenvector; each further
    level applies the two-scale relation exactly, so the output is exact up to
    rounding at every representable point.

    Returns ``(x, phi)`` covering ``[0, 2N-1]``.
    """
    filt = as_filter(filt)
    if refinement_level < 1:
        raise InvalidArgumentError("refinement_level must be >= 1")
    h = filt.low_pass
    support = filt.support
    phi = _integer_samples(filt)
    for r in range(1, refinement_level + 1):
        step = 2 ** r
        new = np.zeros(support * step + 1)
        new[::2] = phi
        # odd points: phi(x) = sqrt(2) sum_k h_k phi(2x - k); 2x - k is on the old grid
        odd = np.arange(1, support * step, 2)
        prev_step = step // 2
        acc = np.zeros(odd.size)
        for k, hk in enumerate(h):
            # index of 2x - k on the previous grid: (2*odd/step - k) * prev_step = odd - k*prev_step
            j = odd - k * prev_step
            ok = (j >= 0) & (j < phi.size)
            acc[ok] += hk * phi[j[ok]]
        new[odd] = np.sqrt(2.0) * acc
        phi = new
    x = np.arange(phi.size) / 2.0 ** refinement_level
    return x, phi


def two_scale_residual(filt, x, phi):
    """Max residual of ``phi(x) - sqrt(2) sum h_k phi(2x-k)`` on the sampled grid."""
    filt = as_filter(filt)
    step = round(1.0 / (x[1] - x[0]))
    res = np.zeros(phi.size)
    idx = np.arange(phi.size)
    acc = np.zeros(phi.size)
    for k, hk in enumerate(filt.low_pass):
        j = 2 * idx - k * step
        ok = (j >= 0) & (j < phi.size)
        acc[ok] += hk * phi[j[ok]]
    res = phi - np.sqrt(2.0) * acc
    if filt.order == 1:
        # the Haar indicator is discontinuous at 1; right-continuity breaks the relation there
        res[step] = 0.0
    return float(np.max(np.abs(res)))


def scaling_moments(filt, count):
    """Moments ``int x**j phi(x) dx`` for j < count, by the refinement recursion."""
    filt = as_filter(filt)
    h = filt.low_pass
    k = np.arange(h.size, dtype=float)
    m = np.zeros(count)
    m[0] = 1.0
    for j in range(1, count):
        s = 0.0
        for i in range(j):
            s += comb(j, i) * np.dot(h, k ** (j - i)) * m[i]
        m[j] = s / np.sqrt(2.0) / (2.0 ** j - 1.0)
    return m
