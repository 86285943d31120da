"""Grid, physical parameters, Hamiltonian and the Wigner field value type."""

import hashlib
import json
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P

from ..errors import InvalidArgumentError

MAX_DEGREE = 10
NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Periodic ``2**level x 2**level`` grid; axis 0 is q, axis 1 is p.

    Nodes sit at ``q_min + i * dq`` with the upper edge excluded.
    """

    q_min: float = -10.0
    q_max: float = 10.0
    p_min: float = -10.0
    p_max: float = 10.0
    level: int = 7

    def __post_init__(self):
        if not self.q_max > self.q_min:
            raise InvalidArgumentError("q_max must exceed q_min")
        if not self.p_max > self.p_min:
            raise InvalidArgumentError("p_max must exceed p_min")
        if int(self.level) != self.level or self.level < 4:
            raise InvalidArgumentError(f"grid level must be an integer >= 4, got {self.level}")

    @property
    def n(self):
        return 2 ** self.level

    @property
    def dq(self):
        return (self.q_max - self.q_min) / self.n

    @property
    def dp(self):
        return (self.p_max - self.p_min) / self.n

    @property
    def cell(self):
        return self.dq * self.dp

    @property
    def q(self):
        return self.q_min + self.dq * np.arange(self.n)

    @property
    def p(self):
        return self.p_min + self.dp * np.arange(self.n)

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    def spacing(self, axis):
        return self.dq if axis == 0 else self.dp

    def coordinates(self, axis):
        return self.q if axis == 0 else self.p

    def refined(self, level):
        return PhaseSpaceGrid(self.q_min, self.q_max, self.p_min, self.p_max, level)


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    mass: float = 1.0
    gamma: float = 0.0
    diffusion: float = 0.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise InvalidArgumentError("hbar must be > 0")
        if not self.mass > 0:
            raise InvalidArgumentError("mass must be > 0")
        if self.gamma < 0:
            raise InvalidArgumentError("gamma must be >= 0")
        if self.diffusion < 0:
            raise InvalidArgumentError("diffusion must be >= 0")

    @property
    def temperature(self):
        """Detailed-balance temperature D / (2 gamma m) of the dissipative terms."""
        if self.gamma == 0:
            return float("inf")
        return self.diffusion / (2.0 * self.gamma * self.mass)


@dataclass(frozen=True)
class PolynomialHamiltonian:
    """``H = p**2/(2m) + sum_k a_k q**k + sum c q**i p**j``.

    ``time_table`` rows are ``(t, factors)`` where ``factors`` scales the
    potential coefficients (a scalar applies to all); values in between are
    linearly interpolated and held constant outside the table.
    """

    potential: tuple = (0.0,)
    mixed_terms: tuple = ()
    time_table: tuple = None
    kinetic: bool = True

    def __post_init__(self):
        pot = tuple(float(a) for a in self.potential) or (0.0,)
        object.__setattr__(self, "potential", pot)
        mixed = tuple((float(c), int(i), int(j)) for c, i, j in self.mixed_terms)
        object.__setattr__(self, "mixed_terms", mixed)
        if self.potential_degree > MAX_DEGREE:
            raise InvalidArgumentError(f"potential degree {self.potential_degree} exceeds {MAX_DEGREE}")
        for c, i, j in mixed:
            if i < 0 or j < 0:
                raise InvalidArgumentError("mixed-term exponents must be >= 0")
        if self.degree > MAX_DEGREE:
            raise InvalidArgumentError(f"Hamiltonian degree {self.degree} exceeds {MAX_DEGREE}")
        if self.time_table is not None:
            rows = []
            for t, f in self.time_table:
                f = np.broadcast_to(np.asarray(f, dtype=float), (len(pot),))
                rows.append((float(t), tuple(f.tolist())))
            times = [r[0] for r in rows]
            if len(rows) == 0 or any(b <= a for a, b in zip(times, times[1:])):
                raise InvalidArgumentError("time_table stamps must strictly increase")
            object.__setattr__(self, "time_table", tuple(rows))

    @classmethod
    def harmonic(cls, omega=1.0, mass=1.0):
        return cls(potential=(0.0, 0.0, 0.5 * mass * omega ** 2))

    @property
    def potential_degree(self):
        nz = [k for k, a in enumerate(self.potential) if a != 0.0]
        return nz[-1] if nz else 0

    @property
    def degree(self):
        d = max(self.potential_degree, 2 if self.kinetic else 0)
        for c, i, j in self.mixed_terms:
            if c != 0.0:
                d = max(d, i + j)
        return d

    @property
    def is_separable(self):
        return not any(c != 0.0 for c, _, _ in self.mixed_terms)

    @property
    def is_quadratic(self):
        return self.degree <= 2

    def potential_factors(self, t=None):
        n = len(self.potential)
        if self.time_table is None or t is None:
            return np.ones(n)
        times = np.array([r[0] for r in self.time_table])
        vals = np.array([r[1] for r in self.time_table])
        return np.array([np.interp(t, times, vals[:, k]) for k in range(n)])

    def potential_coefficients(self, t=None):
        return np.asarray(self.potential) * self.potential_factors(t)

    def potential_derivative(self, order=1, t=None):
        """Ascending coefficients of ``d^order U / dq^order``."""
        c = self.potential_coefficients(t)
        if order >= c.size:
            return np.zeros(1)
        return P.polyder(c, order)

    def U(self, q, t=None):
        return P.polyval(q, self.potential_coefficients(t))

    def monomials(self, params, t=None):
        """All terms as ``(coefficient, q_power, p_power, potential_index)``."""
        out = []
        if self.kinetic:
            out.append((0.5 / params.mass, 0, 2, None))
        for k, a in enumerate(self.potential_coefficients(t)):
            if a != 0.0:
                out.append((float(a), k, 0, k))
        for c, i, j in self.mixed_terms:
            if c != 0.0:
                out.append((c, i, j, None))
        return out

    def evaluate(self, q, p, params, t=None):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        h = np.zeros(np.broadcast(q, p).shape)
        for c, i, j, _ in self.monomials(params, t):
            h = h + c * q ** i * p ** j
        return h

    def digest(self):
        blob = json.dumps([self.potential, self.mixed_terms, self.time_table, self.kinetic])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def quantum_series_coefficient(n, hbar):
    """``hbar**(2n) (-1)**n / (2**(2n) (2n+1)!)`` multiplying U^(2n+1) d_p^(2n+1) W."""
    return hbar ** (2 * n) * (-1) ** n / (2.0 ** (2 * n) * factorial(2 * n + 1))


@dataclass(frozen=True, eq=False)
class WignerField:
    grid: PhaseSpaceGrid
    values: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n, self.grid.n):
            raise InvalidArgumentError(
                f"field shape {v.shape} does not match grid {(self.grid.n, self.grid.n)}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm(self):
        return float(self.values.sum() * self.grid.cell)

    def normalized(self):
        return self.with_values(self.values / self.norm())

    def with_values(self, values, time=None):
        return WignerField(self.grid, values, self.time if time is None else time, dict(self.meta))

    def check_normalized(self, tol=NORM_TOLERANCE):
        drift = abs(self.norm() - 1.0)
        if drift > tol:
            raise InvalidArgumentError(f"field normalization off by {drift:.2e} (tolerance {tol:.0e})")
        return self

    def boundary_fraction(self):
        """Largest edge magnitude relative to the field maximum."""
        v = np.abs(self.values)
        peak = v.max()
        if peak == 0:
            return 0.0
        edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
        return float(edge / peak)
