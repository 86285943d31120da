"""Physical and wavelet diagnostics of Wigner fields."""

import csv
import enum
import io
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..wavelet_core import dwt_2d, shannon_entropy

SPARSITY_THRESHOLD = 1e-6


class Regime(str, enum.Enum):
    LOCALIZED = "localized"
    ENTANGLED_LIKE = "entangled_like"
    CHAOTIC_LIKE = "chaotic_like"
    WAVELETON = "waveleton"
    UNCLASSIFIED = "unclassified"

    def __str__(self):
        return self.value


def purity(W, params):
    """Tr rho^2 = 2 pi hbar * integral of W^2."""
    return float(2.0 * np.pi * params.hbar * np.sum(W.values ** 2) * W.grid.cell)


def negativity_volume(W):
    """Integral of |W| minus integral of W, i.e. twice the negative mass."""
    v = W.values
    neg = float(-2.0 * np.sum(v[v < 0]) * W.grid.cell)
    return max(neg, 0.0) if neg >= -1e-9 else neg


def marginals(W):
    """(position density over q, momentum density over p)."""
    g = W.grid
    return W.values.sum(axis=1) * g.dp, W.values.sum(axis=0) * g.dq


def energy(W, hamiltonian, params, t=None):
    q, p = W.grid.mesh()
    return float(np.sum(hamiltonian.evaluate(q, p, params, t) * W.values) * W.grid.cell)


def centroid(W):
    g = W.grid
    mass = W.values.sum()
    return float((W.values.sum(axis=1) @ g.q) / mass), float((W.values.sum(axis=0) @ g.p) / mass)


def default_depth(level):
    # coarse block of 16 x 16 scaling coefficients
    return max(1, level - 4)


def wavelet_coefficients(W, order=6, depth=None):
    depth = default_depth(W.grid.level) if depth is None else depth
    return dwt_2d(W.values, order, depth)


def sparsity(coefficients, threshold=SPARSITY_THRESHOLD):
    """Fraction of coefficients above ``threshold * max|c|``."""
    c = np.abs(np.asarray(coefficients, dtype=float).ravel())
    peak = c.max()
    if peak == 0:
        return 0.0
    return float(np.count_nonzero(c > threshold * peak) / c.size)


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    norm: float
    purity: float
    negativity_volume: float
    shannon_entropy: float
    sparsity: float
    energy: float
    regime: Regime = Regime.UNCLASSIFIED
    # relative L2 change per unit time since the previous record; NaN for the first
    change_rate: float = math.nan

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def row(self):
        d = asdict(self)
        d["regime"] = str(self.regime)
        return [d[k] if k == "regime" else repr(float(d[k])) for k in self.header()]

    @classmethod
    def from_row(cls, row):
        names = cls.header()
        vals = dict(zip(names, row))
        kw = {k: float(v) for k, v in vals.items() if k != "regime"}
        return cls(regime=Regime(vals["regime"]), **kw)

    def with_regime(self, regime):
        d = asdict(self)
        d["regime"] = Regime(regime)
        return DiagnosticsRecord(**d)


def diagnose(W, hamiltonian, params, order=6, depth=None, previous=None, t=None,
             threshold=SPARSITY_THRESHOLD):
    """Compute a record; ``previous`` is ``(field, time)`` of the last record for the change rate."""
    coeffs = wavelet_coefficients(W, order, depth).to_array()
    rate = math.nan
    if previous is not None:
        prev_field, prev_time = previous
        dt = W.time - prev_time
        if dt > 0:
            rate = float(np.linalg.norm(W.values - prev_field.values)
                         / (np.linalg.norm(W.values) * dt))
    return DiagnosticsRecord(
        time=float(W.time),
        norm=W.norm(),
        purity=purity(W, params),
        negativity_volume=negativity_volume(W),
        shannon_entropy=shannon_entropy(coeffs),
        sparsity=sparsity(coeffs, threshold),
        energy=energy(W, hamiltonian, params, t if t is not None else W.time),
        change_rate=rate,
    )


def write_records_csv(records, fh):
    w = csv.writer(fh)
    w.writerow(DiagnosticsRecord.header())
    for r in records:
        w.writerow(r.row())


def read_records_csv(fh):
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    reader = csv.reader(fh)
    header = next(reader)
    if header != DiagnosticsRecord.header():
        raise ValueError(f"unexpected diagnostics header {header}")
    return [DiagnosticsRecord.from_row(r) for r in reader if r]
