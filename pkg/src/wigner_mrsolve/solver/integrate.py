"""Explicit RK4 propagation of the reduced system with conservation safeguards."""

import math
import time as _time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConservationViolationError, InvalidArgumentError, NumericalBlowupError
from ..moyal_operator import OracleOperator, RhsTerms, assemble_galerkin_operator
from ..phase_space.classify import ClassifierThresholds, classify_state
from ..phase_space.diagnostics import default_depth, diagnose
from ..phase_space.model import WignerField
from ..wavelet_core.transform import CoefficientPyramid, dwt_2d, inverse_dwt_2d

RK4_STABILITY = 2.7
SAFETY = 0.8
STEP_RENORM_LIMIT = 1e-6
STEP_DRIFT_LIMIT = 1e-4
CUMULATIVE_DRIFT_LIMIT = 1e-5
BOUNDARY_WARNING = 1e-8


class BoundaryWarning(UserWarning):
    """The field reaches the box edge, where the periodic wrap aliases."""


class StabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class StabilityEstimate:
    dt_max: float
    spectral_radius: float
    converged: bool
    iterations: int

    def __float__(self):
        return self.dt_max


def stability_estimate(operator, iterations=500, rtol=1e-4, seed=0, t=None):
    """Conservative RK4 step bound ``0.8 * 2.7 / rho(L)`` from power iteration.

    The radius uses the two-step ratio ``sqrt(|L^2 v| / |v|)`` so a dominant
    complex-conjugate pair (skew Hamiltonian part) does not make it oscillate.
    If the estimate has not settled after ``iterations`` the largest value seen,
    a lower bound on the radius, is returned with ``converged=False``.
    """
    if getattr(operator, "is_zero", False):
        return StabilityEstimate(math.inf, 0.0, True, 0)
    n = operator.n
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, n))
    v /= np.linalg.norm(v)
    rho = 0.0
    history = []
    converged = False
    k = 0
    for k in range(1, iterations + 1):
        w = operator.apply(operator.apply(v, t), t)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return StabilityEstimate(math.inf, 0.0, True, k)
        est = math.sqrt(norm)
        rho = max(rho, est)
        v = w / norm
        history.append(est)
        if k >= 20 and abs(history[-1] - history[-11]) <= rtol * est:
            converged = True
            break
    if not converged:
        warnings.warn(f"power iteration did not settle in {iterations} iterations; "
                      f"spectral radius {rho:.4g} is a lower bound", StabilityWarning, stacklevel=2)
    return StabilityEstimate(SAFETY * RK4_STABILITY / rho, rho, converged, k)


def step_rk4(state, operator, dt, t=None):
    """One classical RK4 step of ``a' = L(t) a``."""
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be > 0, got {dt}")
    t0 = 0.0 if t is None else t
    tt = (lambda s: None) if t is None else (lambda s: t0 + s)
    k1 = operator.apply(state, tt(0.0))
    k2 = operator.apply(state + 0.5 * dt * k1, tt(0.5 * dt))
    k3 = operator.apply(state + 0.5 * dt * k2, tt(0.5 * dt))
    k4 = operator.apply(state + dt * k3, tt(dt))
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError(f"non-finite values after step ending at t={t0 + dt:.6g}", time=t0 + dt)
    return out


@dataclass(frozen=True)
class EvolutionSchedule:
    """``dt=None`` takes the stability bound; ``t_final`` is hit exactly by shrinking dt."""

    t_final: float
    dt: float = None
    record_every: int = 1
    snapshot_every: int = 10
    renormalize: bool = True
    threshold_eps: float = 0.0

    def __post_init__(self):
        if not self.t_final >= 0:
            raise InvalidArgumentError("t_final must be >= 0")
        if self.dt is not None and not self.dt > 0:
            raise InvalidArgumentError("dt must be > 0")
        if int(self.record_every) < 1 or int(self.snapshot_every) < 1:
            raise InvalidArgumentError("record_every and snapshot_every must be >= 1")
        if self.threshold_eps < 0:
            raise InvalidArgumentError("threshold_eps must be >= 0")


@dataclass
class CompressionResult:
    pyramid: CoefficientPyramid
    kept_fraction: float
    error: float


def threshold_compress(pyramid, eps):
    """Zero every coefficient with ``|c| < eps * max|c|``.

    Returns the compressed pyramid with the kept fraction and the relative L2
    error, which is bounded by ``eps * sqrt(count)``.
    """
    if eps < 0:
        raise InvalidArgumentError("eps must be >= 0")
    packed = pyramid.to_array()
    total = float(np.linalg.norm(packed))
    if eps == 0 or total == 0.0:
        return CompressionResult(pyramid, 1.0, 0.0)
    cut = eps * float(np.abs(packed).max())
    mask = np.abs(packed) >= cut
    kept = np.where(mask, packed, 0.0)
    err = float(np.linalg.norm(packed - kept) / total)
    bound = eps * math.sqrt(packed.size)
    if err > bound * (1 + 1e-12):
        raise AssertionError(f"compression error {err:.3e} exceeds bound {bound:.3e}")
    out = CoefficientPyramid.from_array(kept, pyramid.levels, pyramid.filter_order)
    return CompressionResult(out, float(mask.sum() / packed.size), err)


@dataclass
class Trajectory:
    records: list
    snapshots: list
    final: WignerField
    dt: float
    steps: int
    stability: StabilityEstimate
    max_step_drift: float = 0.0
    max_norm_drift: float = 0.0
    renormalization_total: float = 0.0
    warnings: list = field(default_factory=list)
    elapsed: float = 0.0
    scheme: str = "galerkin"

    @property
    def times(self):
        return [r.time for r in self.records]

    def series(self, name):
        return np.array([getattr(r, name) for r in self.records])


def build_operator(hamiltonian, params, terms, grid, scheme="galerkin", order=6, depth=None):
    if scheme == "galerkin":
        return assemble_galerkin_operator(hamiltonian, params, terms, grid, order, depth)
    if scheme == "oracle":
        return OracleOperator(hamiltonian, params, terms, grid)
    raise InvalidArgumentError(f"derivative scheme must be 'galerkin' or 'oracle', got {scheme!r}")


def _time_dependent(hamiltonian):
    return hamiltonian is not None and hamiltonian.time_table is not None


def evolve(initial, hamiltonian, params, terms=None, schedule=None, order=6, depth=None,
           scheme="galerkin", thresholds=ClassifierThresholds(), operator=None, on_record=None, stability=None,
           seed=0):
    """Propagate ``initial`` and collect diagnostics, snapshots and safeguards.

    Every recorded diagnostic carries a regime label computed from the records
    before it. Steps whose mass drift exceeds the renormalization allowance
    abort with a conservation error. ``stability`` skips the power iteration
    when the caller already has an estimate for ``operator``.
    """
    started = _time.perf_counter()
    if schedule is None:
        raise InvalidArgumentError("an EvolutionSchedule is required")
    terms = terms or RhsTerms.all()
    grid = initial.grid
    initial.check_normalized()
    depth = default_depth(grid.level) if depth is None else depth
    op = operator or build_operator(hamiltonian, params, terms, grid, scheme, order, depth)
    tdep = _time_dependent(hamiltonian)
    notes = []

    if stability is not None:
        stab = stability
    elif tdep:
        stamps = [row[0] for row in hamiltonian.time_table]
        estimates = [stability_estimate(op, seed=seed, t=s) for s in stamps]
        stab = min(estimates, key=lambda e: e.dt_max)
    else:
        stab = stability_estimate(op, seed=seed)
    if schedule.t_final == 0:
        steps, dt = 0, 0.0
    else:
        dt_req = schedule.dt if schedule.dt is not None else stab.dt_max
        if not math.isfinite(dt_req):
            dt_req = schedule.t_final
        steps = max(1, math.ceil(schedule.t_final / dt_req - 1e-9))
        dt = schedule.t_final / steps
        if schedule.dt is not None and dt > stab.dt_max:
            msg = f"dt={dt:.4g} exceeds the stability bound {stab.dt_max:.4g}; proceeding"
            warnings.warn(msg, StabilityWarning, stacklevel=2)
            notes.append(msg)

    t0 = float(initial.time)
    a = np.array(initial.values, dtype=float)
    cell = grid.cell
    mass0 = 1.0
    records, snapshots = [], [initial]
    history_fields = None
    max_step = max_total = renorm_total = 0.0
    boundary_warned = False

    def record(values, t, previous):
        W = WignerField(grid, values, t)
        rec = diagnose(W, hamiltonian, params, order, depth, previous=previous,
                       t=t if tdep else None)
        rec = rec.with_regime(classify_state(rec, records, thresholds))
        records.append(rec)
        if on_record is not None:
            on_record(rec)
        return W

    history_fields = (record(a, t0, None), t0)
    for k in range(1, steps + 1):
        t = t0 + (k - 1) * dt
        before = a.sum() * cell
        a = step_rk4(a, op, dt, t if tdep else None)
        after = a.sum() * cell
        drift = abs(after - before) / abs(before)
        max_step = max(max_step, drift)
        if drift > STEP_DRIFT_LIMIT or (schedule.renormalize and drift > STEP_RENORM_LIMIT):
            raise ConservationViolationError(
                f"mass changed by {drift:.2e} in one step at t={t + dt:.6g}", time=t + dt, drift=drift)
        if schedule.renormalize and after != mass0:
            renorm_total += abs(after - mass0)
            a *= mass0 / after
        total = abs(a.sum() * cell - 1.0)
        max_total = max(max_total, total)
        if total > CUMULATIVE_DRIFT_LIMIT:
            raise ConservationViolationError(
                f"normalization drifted by {total:.2e} at t={t + dt:.6g}", time=t + dt, drift=total)
        now = t0 + k * dt
        if not boundary_warned:
            frac = WignerField(grid, a, now).boundary_fraction()
            if frac > BOUNDARY_WARNING:
                boundary_warned = True
                msg = (f"field reaches the box edge at t={now:.4g} "
                       f"(edge/max = {frac:.1e}); periodic wrap may alias")
                warnings.warn(msg, BoundaryWarning, stacklevel=2)
                notes.append(msg)
        if k % schedule.record_every == 0 or k == steps:
            W = record(a, now, history_fields)
            history_fields = (W, now)
        if k % schedule.snapshot_every == 0 or k == steps:
            snap = WignerField(grid, a, now)
            snapshots.append(snap)
            if schedule.threshold_eps > 0:
                pyr = dwt_2d(a, order, depth)
                a = inverse_dwt_2d(threshold_compress(pyr, schedule.threshold_eps).pyramid)
                if schedule.renormalize:
                    m = a.sum() * cell
                    renorm_total += abs(m - mass0)
                    a *= mass0 / m
    final = WignerField(grid, a, t0 + steps * dt)
    return Trajectory(records, snapshots, final, dt, steps, stab, max_step, max_total,
                      renorm_total, notes, _time.perf_counter() - started, scheme)
