"""Finite-difference evaluation of the same right-hand side, kept independent of the wavelet path."""

from functools import lru_cache
from math import comb, factorial

import numpy as np

from ..errors import InvalidArgumentError
from ..phase_space.model import MAX_DEGREE

ACCURACY = 4


@lru_cache(maxsize=None)
def central_weights(derivative, accuracy=ACCURACY):
    """Central stencil weights (offset, weight) via Fornberg's recursion."""
    half = (2 * ((derivative + 1) // 2) - 1 + accuracy) // 2
    x = np.arange(-half, half + 1, dtype=float)
    m = derivative
    n = x.size
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    w = c[:, m]
    return tuple((int(o), float(v)) for o, v in zip(x, w) if v != 0.0)


def periodic_derivative(values, derivative, spacing, axis):
    if derivative == 0:
        return np.array(values, dtype=float)
    out = np.zeros_like(values, dtype=float)
    for offset, w in central_weights(derivative):
        # out[i] += w f[i + offset]
        out += w * np.roll(values, -offset, axis=axis)
    return out / spacing ** derivative


def _poly(coeffs, x):
    return np.polynomial.polynomial.polyval(x, coeffs)


def finite_difference_rhs_oracle(hamiltonian, params, terms, W, t=None):
    """4th-order central-difference evaluation of the chosen right-hand-side terms."""
    g = W.grid
    v = W.values
    q, p = g.q[:, None], g.p[None, :]
    out = np.zeros_like(v)
    if hamiltonian is not None and hamiltonian.degree > MAX_DEGREE:
        raise InvalidArgumentError(f"Hamiltonian degree exceeds {MAX_DEGREE}")
    if hamiltonian is not None and (terms.include_liouville or terms.include_quantum):
        hbar = params.hbar
        monos = []
        if hamiltonian.kinetic:
            monos.append((0.5 / params.mass, 0, 2))
        coeffs = hamiltonian.potential_coefficients(t)
        monos += [(float(a), k, 0) for k, a in enumerate(coeffs) if a != 0.0]
        monos += [m for m in hamiltonian.mixed_terms if m[0] != 0.0]
        cache = {}

        def deriv(a, b):
            if (a, b) not in cache:
                cache[(a, b)] = periodic_derivative(
                    periodic_derivative(v, a, g.dq, 0), b, g.dp, 1)
            return cache[(a, b)]

        for c, i, j in monos:
            for n in range(1, i + j + 1, 2):
                if n == 1 and not terms.include_liouville:
                    continue
                if n > 1 and not terms.include_quantum:
                    continue
                s = (n - 1) // 2
                pref = c * (-1) ** s * (hbar / 2) ** (2 * s) / factorial(n)
                for a in range(n + 1):
                    b = n - a
                    if b > i or a > j:
                        continue
                    # d_q^b d_p^a of q^i p^j
                    hcoef = pref * comb(n, a) * (-1) ** a
                    hcoef *= factorial(i) / factorial(i - b) * factorial(j) / factorial(j - a)
                    out += hcoef * q ** (i - b) * p ** (j - a) * deriv(a, b)
    if terms.include_friction and params.gamma:
        out += 2.0 * params.gamma * periodic_derivative(p * v, 1, g.dp, 1)
    if terms.include_diffusion and params.diffusion:
        out += params.diffusion * periodic_derivative(v, 2, g.dp, 1)
    return out


class OracleOperator:
    """Finite-difference counterpart of ``GalerkinOperator`` for the solver (grid values in, rates out)."""

    def __init__(self, hamiltonian, params, terms, grid):
        self.hamiltonian = hamiltonian
        self.params = params
        self.terms = terms
        self.grid = grid
        self.level = grid.level
        self.n = grid.n

    @property
    def is_zero(self):
        h = self.hamiltonian
        ham = h is not None and (self.terms.include_liouville or self.terms.include_quantum) and (
            bool(h.monomials(self.params)))
        fric = self.terms.include_friction and self.params.gamma != 0.0
        diff = self.terms.include_diffusion and self.params.diffusion != 0.0
        return not (ham or fric or diff)

    def apply(self, coefficients, t=None, basis="scaling", threads=None):
        if basis != "scaling":
            raise InvalidArgumentError("the finite-difference operator acts on grid values only")
        a = np.asarray(coefficients, dtype=float)
        c = a.reshape(self.n, self.n)
        out = finite_difference_rhs_oracle(self.hamiltonian, self.params, self.terms,
                                           _RawField(self.grid, c), t)
        return out.ravel() if a.ndim == 1 else out

    __call__ = apply


class _RawField:
    # lightweight stand-in: skips WignerField validation inside the time loop
    def __init__(self, grid, values):
        self.grid = grid
        self.values = values
