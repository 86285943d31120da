"""Stationary states of the dissipative dynamics by shifted inverse iteration."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from ..errors import PreconditionError
from ..phase_space.model import WignerField

DENSE_LIMIT = 4096
# (2 kl + ku + 1) * N doubles held by the banded factorization
BANDED_MEMORY_LIMIT = 2.5e9


@dataclass
class SteadyStateResult:
    field: WignerField
    residual: float
    iterations: int
    converged: bool
    method: str = ""


def folded_order(n):
    """Position of each periodic index when the ring is read 0, n-1, 1, n-2, ...

    Neighbours at periodic distance ``l`` end up at most ``2 l`` apart, so a
    periodic band matrix becomes an ordinary band matrix.
    """
    i = np.arange(n)
    return np.where(i < (n + 1) // 2, 2 * i, 2 * (n - 1 - i) + 1)


class _BandedSolver:
    def __init__(self, matrix, n, shift):
        pos = folded_order(n)
        perm = (pos[:, None] * n + np.arange(n)[None, :]).ravel()
        coo = matrix.tocoo()
        rows, cols = perm[coo.row], perm[coo.col]
        off = cols - rows
        self.ku, self.kl = int(max(off.max(), 0)), int(max(-off.min(), 0))
        size = matrix.shape[0]
        ab = np.zeros((2 * self.kl + self.ku + 1, size))
        np.add.at(ab, (self.kl + self.ku + rows - cols, cols), coo.data)
        ab[self.kl + self.ku] -= shift
        self.lu, self.piv, info = sl.lapack.dgbtrf(ab, self.kl, self.ku, overwrite_ab=1)
        self.singular = info > 0
        self.perm = perm

    @staticmethod
    def band_memory(matrix, n):
        pos = folded_order(n)
        perm = (pos[:, None] * n + np.arange(n)[None, :]).ravel()
        coo = matrix.tocoo()
        off = perm[coo.col] - perm[coo.row]
        kl, ku = max(-off.min(), 0), max(off.max(), 0)
        return 8.0 * (2 * kl + ku + 1) * matrix.shape[0]

    def solve(self, rhs):
        y = np.empty_like(rhs)
        y[self.perm] = rhs
        x, info = sl.lapack.dgbtrs(self.lu, self.kl, self.ku, y, self.piv)
        return x[self.perm]


class _DenseSolver:
    def __init__(self, matrix, shift):
        a = matrix.toarray() - shift * np.eye(matrix.shape[0])
        self.lu = sl.lu_factor(a, check_finite=False)
        self.singular = False

    def solve(self, rhs):
        return sl.lu_solve(self.lu, rhs, check_finite=False)


class _SparseSolver:
    def __init__(self, matrix, shift):
        a = (matrix - shift * sp.identity(matrix.shape[0])).tocsc()
        self.lu = spl.splu(a, permc_spec="COLAMD")
        self.singular = False

    def solve(self, rhs):
        return self.lu.solve(rhs)


def _check_dissipative(operator):
    params = operator.params
    terms = operator.terms
    if params.gamma <= 0 or params.diffusion <= 0:
        raise PreconditionError(
            "steady_state needs gamma > 0 and D > 0: without both, every function of H "
            "is stationary and the null space is not one-dimensional"
        )
    if not (terms.include_friction and terms.include_diffusion):
        raise PreconditionError("steady_state needs an operator assembled with friction and diffusion")


def steady_state(operator, tolerance=1e-8, max_iterations=20, method="auto", t=None):
    """Normalized null vector of the assembled operator.

    Shifted inverse iteration with a shift just outside the spectrum
    (``-1e-9 * ||L||``). The factorization is a dense LU for at most
    4096 unknowns and otherwise a banded LU in a folded ordering, with a
    general sparse LU when the band would not fit in memory. Starting from a
    constant vector keeps the staggered (odd-even) mass, which the discrete
    operator also conserves, at zero.
    """
    _check_dissipative(operator)
    n = operator.n
    grid = operator.grid
    L = operator.matrix(t).tocsr()
    scale = float(abs(L).sum(axis=1).max()) or 1.0
    shift = -1e-9 * scale
    size = L.shape[0]
    if method == "auto":
        if size <= DENSE_LIMIT:
            method = "dense"
        elif _BandedSolver.band_memory(L, n) <= BANDED_MEMORY_LIMIT:
            method = "banded"
        else:
            method = "sparse"
    if method == "dense":
        solver = _DenseSolver(L, shift)
    elif method == "banded":
        solver = _BandedSolver(L, n, shift)
    elif method == "sparse":
        solver = _SparseSolver(L, shift)
    else:
        raise PreconditionError(f"unknown steady-state method {method!r}")
    x = np.ones(size)
    best, best_res = x / (x.sum() * grid.cell), math.inf
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        x = solver.solve(x)
        total = x.sum() * grid.cell
        if not np.all(np.isfinite(x)) or total == 0.0:
            break
        x = x / total
        res = float(np.linalg.norm(L @ x) / np.linalg.norm(x))
        if res < best_res:
            best, best_res = x.copy(), res
        if res <= tolerance:
            break
        if iterations > 2 and res > 0.5 * prev:
            # stagnated at rounding level
            break
        prev = res
    converged = best_res <= tolerance
    field = WignerField(grid, best.reshape(n, n), 0.0, {"steady_state": True})
    return SteadyStateResult(field, best_res, iterations, converged, method)
