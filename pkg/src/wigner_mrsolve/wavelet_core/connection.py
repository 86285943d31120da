"""Connection coefficients and overlap moment tables for Daubechies scaling functions.

Both are solved exactly from the refinement equation, never by quadrature.
"""

import csv
import threading
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from ..errors import UnsupportedOrderError
from .filters import as_filter, scaling_moments

_cache = {}
_lock = threading.Lock()


@dataclass(frozen=True, eq=False)
class ConnectionTable:
    """``gamma[k + support_radius] = int phi(x) phi^(d)(x + k) dx``.

    With this shift convention ``sum_k k**d * gamma_k = (-1)**d * d!``.
    """

    order: int
    derivative_order: int
    gamma: np.ndarray

    @property
    def support_radius(self):
        return 2 * self.order - 2

    @property
    def shifts(self):
        r = self.support_radius
        return np.arange(-r, r + 1)

    @property
    def coefficients(self):
        return dict(zip(self.shifts.tolist(), self.gamma.tolist()))

    def __getitem__(self, k):
        r = self.support_radius
        if abs(k) > r:
            return 0.0
        return float(self.gamma[k + r])

    def moment(self, power):
        return float(np.dot(self.shifts.astype(float) ** power, self.gamma))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "gamma_k"])
            for k, g in zip(self.shifts, self.gamma):
                w.writerow([int(k), repr(float(g))])


def _autocorrelation(h):
    n = h.size
    r = np.zeros(2 * n - 1)
    for s in range(-(n - 1), n):
        r[s + n - 1] = sum(h[b] * h[b + s] for b in range(n) if 0 <= b + s < n)
    return r


def _refinement_matrix(h):
    """A[k, k'] = r(k' - 2k) on shifts |k| <= 2N-2."""
    n = h.size
    rad = n - 2
    r = _autocorrelation(h)
    size = 2 * rad + 1
    a = np.zeros((size, size))
    for i, k in enumerate(range(-rad, rad + 1)):
        for j, kp in enumerate(range(-rad, rad + 1)):
            s = kp - 2 * k
            if abs(s) <= n - 1:
                a[i, j] = r[s + n - 1]
    return a


def connection_coefficients(filt, derivative_order):
    """Connection table for ``d``-th derivatives of the Daubechies-N scaling function.

    Solves the refinement eigenproblem ``Gamma = 2**d A Gamma`` with the
    normalization ``sum k**d Gamma_k = (-1)**d d!``. Orders ``d >= N`` are
    rejected as beyond the filter's smoothness.
    """
    filt = as_filter(filt)
    d = int(derivative_order)
    if d < 1 or d >= filt.order:
        raise UnsupportedOrderError(
            f"derivative order {d} not representable by Daubechies-{filt.order} "
            f"(need 1 <= d < {filt.order}); use a higher wavelet order or the oracle scheme"
        )
    key = (filt.order, d)
    cached = _cache.get(key)
    if cached is not None:
        return cached
    a = _refinement_matrix(filt.low_pass)
    size = a.shape[0]
    rad = (size - 1) // 2
    k = np.arange(-rad, rad + 1, dtype=float)
    # lower moments vanish exactly (polynomial reproduction); they pin down
    # the solution where 2**-d is a near-degenerate eigenvalue at high d
    moments = np.vstack([k ** j for j in range(d + 1)])
    system = np.vstack([2.0 ** d * a - np.eye(size), moments])
    rhs = np.zeros(size + d + 1)
    rhs[-1] = (-1) ** d * factorial(d)
    gamma, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    residual = np.max(np.abs(system @ gamma - rhs)) / np.max(np.abs(gamma))
    if residual > 1e-9:
        # 2**-d sits next to a non-polynomial eigenvalue: phi^(d) is too rough
        raise UnsupportedOrderError(
            f"derivative order {d} is ill-conditioned for Daubechies-{filt.order} "
            f"(refinement residual {residual:.1e}); use a higher wavelet order or the oracle scheme"
        )
    # enforce exact parity; the eigenproblem only satisfies it to rounding
    gamma = 0.5 * (gamma + (-1) ** d * gamma[::-1])
    gamma.setflags(write=False)
    table = ConnectionTable(filt.order, d, gamma)
    with _lock:
        return _cache.setdefault(key, table)


def overlap_moments(filt, max_power):
    """Rows ``T[i, l + rad] = int (z - M1)**i phi(z) phi(z - l) dz`` for i <= max_power.

    ``M1`` is the scaling-function centroid, so row 1 sums to zero and the
    rows give exact polynomial multiplication operators by Taylor expansion
    about each basis function's centroid.
    """
    filt = as_filter(filt)
    key = ("overlap", filt.order, max_power)
    cached = _cache.get(key)
    if cached is not None:
        return cached
    h = filt.low_pass
    n = h.size
    rad = n - 2
    size = 2 * rad + 1
    shifts = np.arange(-rad, rad + 1)
    a = _refinement_matrix(h)
    raw = np.zeros((max_power + 1, size))
    raw[0, rad] = 1.0
    for i in range(1, max_power + 1):
        rhs = np.zeros(size)
        for li, l in enumerate(shifts):
            s = 0.0
            for ia in range(n):
                for ib in range(n):
                    idx = 2 * l + ib - ia
                    if abs(idx) > rad:
                        continue
                    hh = h[ia] * h[ib]
                    for j in range(i):
                        s += hh * comb(i, j) * float(ia) ** (i - j) * raw[j, idx + rad]
            rhs[li] = s
        raw[i] = np.linalg.solve(np.eye(size) - 2.0 ** -i * a, 2.0 ** -i * rhs)
    m1 = scaling_moments(filt, 2)[1]
    centred = np.zeros_like(raw)
    for i in range(max_power + 1):
        for j in range(i + 1):
            centred[i] += comb(i, j) * (-m1) ** (i - j) * raw[j]
    centred.setflags(write=False)
    with _lock:
        return _cache.setdefault(key, centred)
