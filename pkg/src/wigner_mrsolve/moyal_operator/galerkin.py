"""Wavelet-Galerkin assembly of the Wigner right-hand side.

Each term of the evolution operator is a Kronecker product ``left (x) right``
of one-dimensional banded operators: ``left`` acts along q (axis 0) and
``right`` along p (axis 1). On a coefficient array ``C`` the term evaluates as
``left @ C @ right.T``. The one-dimensional pieces are

* derivative matrices ``D[m, m + l] = h**-d * Gamma_{-l}`` from connection
  tables, periodic and circulant;
* polynomial multiplication matrices from centred overlap moments, using the
  Taylor expansion of the polynomial about each basis function's node.

Finest-level scaling coefficients are identified with grid samples. Because
the Daubechies scaling function has ``M2 == M1**2`` this identification is
third-order accurate once basis functions are centred on the nodes.
"""

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
import scipy.io
import scipy.sparse as sp
from numpy.polynomial import polynomial as P

from ..errors import InvalidArgumentError
from ..phase_space.model import MAX_DEGREE, PhaseSpaceGrid
from ..wavelet_core import connection_coefficients, daubechies_filter, overlap_moments
from ..wavelet_core.transform import analysis_matrix

THREADS_ENV = "WIGNER_MRSOLVE_THREADS"
TERM_NAMES = ("liouville", "quantum", "friction", "diffusion")


@dataclass(frozen=True)
class RhsTerms:
    """Which pieces of the evolution equation are switched on."""

    include_liouville: bool = True
    include_quantum: bool = True
    include_friction: bool = True
    include_diffusion: bool = True

    def __post_init__(self):
        if not any(self.flags()):
            raise InvalidArgumentError("at least one right-hand-side term must be enabled")

    def flags(self):
        return (self.include_liouville, self.include_quantum,
                self.include_friction, self.include_diffusion)

    @property
    def names(self):
        return tuple(n for n, f in zip(TERM_NAMES, self.flags()) if f)

    @classmethod
    def only(cls, *names):
        unknown = set(names) - set(TERM_NAMES)
        if unknown:
            raise InvalidArgumentError(f"unknown term names {sorted(unknown)}; valid: {TERM_NAMES}")
        return cls(*(n in names for n in TERM_NAMES))

    @classmethod
    def all(cls):
        return cls()


def thread_count():
    """Worker cap from ``WIGNER_MRSOLVE_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InvalidArgumentError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


class AxisCalculus:
    """Banded Galerkin operators on one periodic axis of ``n`` nodes."""

    def __init__(self, order, n, spacing, origin):
        self.filter = daubechies_filter(order)
        self.order = order
        self.n = int(n)
        self.h = float(spacing)
        self.nodes = origin + self.h * np.arange(self.n)
        self.radius = 2 * order - 2
        if self.n < 2 * self.radius + 1:
            raise InvalidArgumentError(
                f"axis with {self.n} nodes is too short for Daubechies-{order} stencils"
            )
        self._cache = {}
        self._lock = threading.Lock()

    def _banded(self, diagonals, wrap=True):
        """Matrix with ``diagonals[l]`` (vector over rows) at offset ``l``, optionally periodic."""
        rows, cols, vals = [], [], []
        idx = np.arange(self.n)
        for l in sorted(diagonals):
            v = np.broadcast_to(diagonals[l], (self.n,))
            keep = slice(None) if wrap else (idx + l >= 0) & (idx + l < self.n)
            rows.append(idx[keep])
            cols.append(((idx + l) % self.n)[keep])
            vals.append(v[keep])
        m = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n, self.n),
        )
        m.sum_duplicates()
        m.eliminate_zeros()
        return m

    def derivative(self, d):
        """Galerkin matrix of ``d/dx`` to the power ``d``."""
        if d == 0:
            return sp.identity(self.n, format="csr")
        key = ("D", d)
        with self._lock:
            if key not in self._cache:
                table = connection_coefficients(self.filter, d)
                scale = self.h ** -d
                diags = {l: scale * table[-l] for l in range(-self.radius, self.radius + 1)}
                self._cache[key] = self._banded(diags)
            return self._cache[key]

    def multiply(self, coefficients):
        """Galerkin matrix of multiplication by the polynomial with ascending ``coefficients``."""
        c = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
        if c.size == 0:
            return sp.csr_matrix((self.n, self.n))
        if c.size == 1:
            return c[0] * sp.identity(self.n, format="csr")
        key = ("M", tuple(c.tolist()))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        degree = c.size - 1
        moments = overlap_moments(self.filter, degree)
        rad = (moments.shape[1] - 1) // 2
        taylor = [P.polyval(self.nodes, P.polyder(c, i)) * self.h ** i / factorial(i)
                  if i else P.polyval(self.nodes, c) for i in range(degree + 1)]
        diags = {}
        for l in range(-rad, rad + 1):
            diags[l] = sum(taylor[i] * moments[i, l + rad] for i in range(degree + 1))
        m = self._banded(diags, wrap=False)
        with self._lock:
            return self._cache.setdefault(key, m)

    def monomial(self, power):
        c = np.zeros(power + 1)
        c[power] = 1.0
        return self.multiply(c)


@dataclass
class KronTerm:
    """``coefficient * left (x) right``, optionally scaled by a potential time factor."""

    name: str
    left: sp.csr_matrix
    right: sp.csr_matrix
    coefficient: float
    potential_index: int = None
    label: str = ""

    def scale(self, factors):
        if self.potential_index is None or factors is None:
            return self.coefficient
        return self.coefficient * float(factors[self.potential_index])


def _dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


@dataclass
class GalerkinOperator:
    """Sparse reduced system ``a' = L a`` for coefficient arrays on a ``2**J`` grid."""

    level: int
    order: int
    depth: int
    grid: PhaseSpaceGrid
    params: object
    hamiltonian: object
    terms: RhsTerms
    kron_terms: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self._dense_cache = {}
        self._lock = threading.Lock()

    @property
    def size(self):
        return 4 ** self.level

    @property
    def n(self):
        return 2 ** self.level

    @property
    def is_zero(self):
        return all(t.coefficient == 0.0 for t in self.kron_terms)

    def _factors(self, t):
        if self.hamiltonian is None or self.hamiltonian.time_table is None:
            return None
        return self.hamiltonian.potential_factors(t)

    def _groups(self, t):
        """Terms sharing a right factor, with their left factors pre-summed."""
        factors = self._factors(t)
        key = None if factors is None else tuple(np.round(factors, 15).tolist())
        with self._lock:
            hit = self._dense_cache.get(key)
        if hit is not None:
            return hit
        by_right = {}
        order = []
        for term in self.kron_terms:
            coef = term.scale(factors)
            if coef == 0.0:
                continue
            rkey = id(term.right)
            if rkey not in by_right:
                by_right[rkey] = [term.right, sp.csr_matrix((self.n, self.n))]
                order.append(rkey)
            by_right[rkey][1] = by_right[rkey][1] + coef * term.left
        groups = [(_dense(by_right[k][1]), np.ascontiguousarray(_dense(by_right[k][0]).T))
                  for k in order]
        with self._lock:
            # time tables produce a new key per step; keep only the static entry
            if factors is None or len(self._dense_cache) < 2:
                self._dense_cache[key] = groups
        return groups

    def apply(self, coefficients, t=None, basis="scaling", threads=None):
        """``L a`` for an ``n x n`` array (or flat vector) of coefficients.

        ``basis="wavelet"`` takes and returns packed wavelet coefficients at
        the operator's transform depth.
        """
        a = np.asarray(coefficients, dtype=float)
        flat = a.ndim == 1
        c = a.reshape(self.n, self.n)
        if basis == "wavelet":
            c = self._synthesis(c)
        elif basis != "scaling":
            raise InvalidArgumentError(f"basis must be 'scaling' or 'wavelet', got {basis!r}")
        groups = self._groups(t)
        workers = thread_count() if threads is None else int(threads)
        if workers <= 1 or self.n < 64:
            out = np.zeros((self.n, self.n))
            for left, right_t in groups:
                out += left @ c @ right_t
        else:
            out = self._apply_parallel(c, groups, workers)
        if basis == "wavelet":
            out = self._analysis(out)
        return out.ravel() if flat else out

    def _apply_parallel(self, c, groups, workers):
        # row blocks of the output are independent; each block repeats the serial arithmetic
        out = np.zeros((self.n, self.n))
        bounds = np.linspace(0, self.n, workers + 1).astype(int)

        def block(i):
            lo, hi = bounds[i], bounds[i + 1]
            acc = np.zeros((hi - lo, self.n))
            for left, right_t in groups:
                acc += left[lo:hi] @ c @ right_t
            out[lo:hi] = acc

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, range(workers)))
        return out

    def _analysis(self, c):
        from ..wavelet_core.transform import dwt_2d_packed
        return dwt_2d_packed(c, self.order, self.depth)

    def _synthesis(self, c):
        from ..wavelet_core.transform import idwt_2d_packed
        return idwt_2d_packed(c, self.order, self.depth)

    def __call__(self, coefficients, t=None):
        return self.apply(coefficients, t)

    def matrix(self, t=None, basis="scaling", names=None):
        """Sparse ``4**J x 4**J`` matrix acting on row-major flattened coefficients."""
        factors = self._factors(t)
        out = sp.csr_matrix((self.size, self.size))
        for term in self.kron_terms:
            if names is not None and term.name not in names:
                continue
            coef = term.scale(factors)
            if coef != 0.0:
                out = out + coef * sp.kron(term.left, term.right, format="csr")
        out.sum_duplicates()
        if basis == "wavelet":
            t2 = wavelet_transform_matrix(self.order, self.level, self.depth)
            out = (t2 @ out @ t2.T).tocsr()
        elif basis != "scaling":
            raise InvalidArgumentError(f"basis must be 'scaling' or 'wavelet', got {basis!r}")
        return out

    def term_breakdown(self, t=None):
        """Per-term sub-matrices keyed by term name."""
        present = sorted({k.name for k in self.kron_terms}, key=TERM_NAMES.index)
        return {name: self.matrix(t, names=(name,)) for name in present}

    def export_matrix_market(self, path, t=None, basis="scaling"):
        scipy.io.mmwrite(str(path), self.matrix(t, basis),
                         comment=f"wigner-mrsolve operator level={self.level} order={self.order}")
        return path


def wavelet_transform_matrix(order, level, depth):
    """Sparse orthogonal matrix of the packed 2D transform on flattened arrays."""
    filt = daubechies_filter(order)
    n = 2 ** level
    total = sp.identity(n * n, format="csr")
    size = n
    for _ in range(depth):
        s = analysis_matrix(filt, size)
        # indices of the active top-left block within the flattened array
        idx = (np.arange(size)[:, None] * n + np.arange(size)[None, :]).ravel()
        sel = sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(n * n, idx.size))
        step = sel @ sp.kron(s, s, format="csr") @ sel.T
        mask = np.ones(n * n)
        mask[idx] = 0.0
        step = (step + sp.diags(mask)).tocsr()
        total = (step @ total).tocsr()
        size //= 2
    return total


_calculus_cache = {}
_calculus_lock = threading.Lock()


def axis_calculus(order, n, spacing, origin):
    key = (order, n, float(spacing), float(origin))
    with _calculus_lock:
        calc = _calculus_cache.get(key)
        if calc is None:
            calc = _calculus_cache[key] = AxisCalculus(order, n, spacing, origin)
        return calc


def moyal_monomial_terms(coefficient, qpow, ppow, hbar, odd_orders=None):
    """Expand ``{{c q**i p**j, W}}`` into ``(n, a, b, weight, q_power, p_power)`` pieces.

    Each piece stands for ``weight * q**q_power p**p_power * d_q**a d_p**b W``
    at bidifferential order ``n = a + b``.
    """
    out = []
    top = qpow + ppow
    for n in range(1, top + 1, 2):
        if odd_orders is not None and n not in odd_orders:
            continue
        s = (n - 1) // 2
        series = (-1) ** s * (hbar / 2.0) ** (2 * s) / factorial(n)
        for a in range(n + 1):
            b = n - a
            # H takes d_q**b d_p**a, W takes d_q**a d_p**b
            if b > qpow or a > ppow:
                continue
            hq = factorial(qpow) // factorial(qpow - b)
            hp = factorial(ppow) // factorial(ppow - a)
            weight = coefficient * series * comb(n, a) * (-1) ** a * hq * hp
            if weight != 0.0:
                out.append((n, a, b, weight, qpow - b, ppow - a))
    return out


def assemble_galerkin_operator(hamiltonian, params, terms, grid, order=6, depth=None):
    """Build the reduced system for the chosen terms.

    Liouville collects the first-order (Poisson) pieces of every Hamiltonian
    monomial and quantum the third and higher orders, so their sum is the full
    Moyal bracket. Friction is in flux form ``2 gamma d_p (p W)``.
    """
    if terms is None:
        terms = RhsTerms.all()
    if grid.level < 1:
        raise InvalidArgumentError("grid level must be positive")
    if hamiltonian is not None and hamiltonian.degree > MAX_DEGREE:
        raise InvalidArgumentError(f"Hamiltonian degree exceeds {MAX_DEGREE}")
    if depth is None:
        from ..phase_space.diagnostics import default_depth
        depth = default_depth(grid.level)
    if not 0 <= depth <= grid.level:
        raise InvalidArgumentError(f"transform depth must lie in [0, {grid.level}], got {depth}")
    qc = axis_calculus(order, grid.n, grid.dq, grid.q_min)
    pc = axis_calculus(order, grid.n, grid.dp, grid.p_min)
    kron = []
    if hamiltonian is not None and (terms.include_liouville or terms.include_quantum):
        wanted = set()
        if terms.include_liouville:
            wanted.add(1)
        if terms.include_quantum:
            wanted.update(range(3, MAX_DEGREE + 1, 2))
        # potential monomials keep their own terms so time tables can rescale them
        pieces = {}
        for coef, i, j, pidx in hamiltonian.monomials(params):
            for n, a, b, w, qp, pp in moyal_monomial_terms(coef, i, j, params.hbar, wanted):
                key = (n, a, b, pp, pidx)
                poly = pieces.setdefault(key, {})
                poly[qp] = poly.get(qp, 0.0) + w
        for (n, a, b, pp, pidx) in sorted(pieces, key=lambda k: (k[0], k[1], k[2], k[3], -1 if k[4] is None else k[4])):
            poly = pieces[(n, a, b, pp, pidx)]
            qcoef = np.zeros(max(poly) + 1)
            for qp, w in poly.items():
                qcoef[qp] = w
            if not np.any(qcoef):
                continue
            left = (qc.multiply(qcoef) @ qc.derivative(a)).tocsr()
            right = _right_factor(pc, pp, b)
            name = "liouville" if n == 1 else "quantum"
            kron.append(KronTerm(name, left, right, 1.0, pidx, f"n={n} dq^{a} dp^{b} p^{pp}"))
    ident = sp.identity(grid.n, format="csr")
    if terms.include_friction and params.gamma != 0.0:
        right = (pc.derivative(1) @ pc.monomial(1)).tocsr()
        kron.append(KronTerm("friction", ident, right, 2.0 * params.gamma, None, "dp (p W)"))
    if terms.include_diffusion and params.diffusion != 0.0:
        kron.append(KronTerm("diffusion", ident, pc.derivative(2), params.diffusion, None, "dp^2 W"))
    meta = {
        "grid": [grid.q_min, grid.q_max, grid.p_min, grid.p_max, grid.level],
        "params": [params.hbar, params.mass, params.gamma, params.diffusion],
        "hamiltonian": None if hamiltonian is None else hamiltonian.digest(),
        "terms": list(terms.names),
    }
    return GalerkinOperator(grid.level, order, depth, grid, params, hamiltonian, terms, kron, meta)


_right_cache = {}


def _right_factor(pc, power, d):
    key = (id(pc), power, d)
    m = _right_cache.get(key)
    if m is None:
        m = (pc.monomial(power) @ pc.derivative(d)).tocsr() if power else pc.derivative(d)
        _right_cache[key] = m
    return m
