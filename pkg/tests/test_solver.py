import math

import numpy as np
import pytest

from wigner_mrsolve.errors import (
    ConservationViolationError, InvalidArgumentError, NumericalBlowupError, PreconditionError,
)
from wigner_mrsolve.moyal_operator import RhsTerms, assemble_galerkin_operator
from wigner_mrsolve.phase_space import (
    PhaseSpaceGrid, PhysicalParams, PolynomialHamiltonian, Regime, WignerField,
    gaussian_coherent_state,
)
from wigner_mrsolve.solver import (
    BoundaryWarning, EvolutionSchedule, StabilityWarning, build_operator, evolve, stability_estimate,
    steady_state, step_rk4, threshold_compress,
)
from wigner_mrsolve.solver.steady import folded_order
from wigner_mrsolve.wavelet_core import dwt_2d


class _Leaky:
    """Wraps an operator and removes mass at a fixed rate."""

    def __init__(self, op, rate):
        self.op, self.rate, self.n = op, rate, op.n
        self.is_zero = False

    def apply(self, a, t=None):
        return self.op.apply(a, t) - self.rate * a


def test_folded_order_is_permutation():
    for n in (5, 8, 64):
        pos = folded_order(n)
        assert sorted(pos) == list(range(n))
        # periodic neighbours (including the wrap pair) stay close
        assert abs(pos[0] - pos[n - 1]) == 1
        assert max(abs(pos[i] - pos[(i + 1) % n]) for i in range(n)) <= 2


def test_stability_zero_operator(grid6):
    op = assemble_galerkin_operator(None, PhysicalParams(), RhsTerms.only("friction"), grid6)
    est = stability_estimate(op)
    assert math.isinf(est.dt_max) and est.spectral_radius == 0.0


def test_stability_scales_with_diffusion(grid6):
    rho = []
    for d in (0.1, 0.2):
        op = build_operator(None, PhysicalParams(diffusion=d), RhsTerms.only("diffusion"), grid6, "oracle")
        est = stability_estimate(op)
        assert est.converged
        rho.append(est.spectral_radius)
    assert rho[1] / rho[0] == pytest.approx(2.0, rel=0.05)
    # 4th-order central second difference has symbol bounded by 16/3 / dp^2
    assert rho[0] == pytest.approx(0.1 * 16 / 3 / grid6.dp ** 2, rel=0.05)


def test_stability_warns_when_unsettled(grid6, harmonic):
    op = assemble_galerkin_operator(harmonic, PhysicalParams(diffusion=0.1), RhsTerms.all(), grid6)
    with pytest.warns(StabilityWarning):
        est = stability_estimate(op, iterations=3)
    assert not est.converged and est.dt_max > 0


def test_rk4_blowup_detected(grid6, harmonic, unit):
    op = assemble_galerkin_operator(harmonic, PhysicalParams(diffusion=0.5), RhsTerms.all(), grid6)
    a = gaussian_coherent_state(grid6, 0, 0, 1, unit).values.copy()
    with pytest.raises(NumericalBlowupError) as info, np.errstate(all="ignore"):
        for k in range(2000):
            a = step_rk4(a, op, 10.0, t=10.0 * k)
    assert info.value.time is not None


def test_rk4_rejects_bad_dt(grid6, harmonic):
    op = assemble_galerkin_operator(harmonic, PhysicalParams(), RhsTerms.all(), grid6)
    with pytest.raises(InvalidArgumentError):
        step_rk4(np.zeros((64, 64)), op, 0.0)


def test_schedule_validation():
    with pytest.raises(InvalidArgumentError):
        EvolutionSchedule(-1.0)
    with pytest.raises(InvalidArgumentError):
        EvolutionSchedule(1.0, dt=0)
    with pytest.raises(InvalidArgumentError):
        EvolutionSchedule(1.0, record_every=0)


def test_evolve_hits_final_time_and_records(grid6, harmonic, unit):
    W = gaussian_coherent_state(grid6, 2, 0, 1, unit)
    traj = evolve(W, harmonic, unit, RhsTerms.all(), EvolutionSchedule(0.5, record_every=3, snapshot_every=4))
    assert traj.final.time == pytest.approx(0.5, abs=1e-12)
    assert traj.dt <= traj.stability.dt_max
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.5)
    assert traj.snapshots[0].time == 0.0 and traj.snapshots[-1].time == pytest.approx(0.5)
    assert all(abs(r.norm - 1) <= 1e-5 for r in traj.records)
    # J = 6 is too coarse for the 10% sparsity bound of the localized label
    assert traj.records[0].regime in (Regime.LOCALIZED, Regime.UNCLASSIFIED)


def test_evolve_user_dt_over_bound_warns(grid6, harmonic, unit):
    W = gaussian_coherent_state(grid6, 0, 0, 1, unit)
    with pytest.warns(StabilityWarning):
        traj = evolve(W, harmonic, unit, RhsTerms.all(), EvolutionSchedule(0.05, dt=0.05))
    assert traj.steps == 1 and traj.warnings


def test_conservation_violation(grid6, harmonic, unit):
    W = gaussian_coherent_state(grid6, 0, 0, 1, unit)
    op = _Leaky(assemble_galerkin_operator(harmonic, unit, RhsTerms.all(), grid6), 1e-2)
    with pytest.raises(ConservationViolationError) as info:
        evolve(W, harmonic, unit, RhsTerms.all(), EvolutionSchedule(1.0), operator=op)
    assert info.value.drift > 1e-6


def test_boundary_warning(unit):
    g = PhaseSpaceGrid(-6, 6, -6, 6, 6)
    W = gaussian_coherent_state(g, 2, 0, 1.0, unit)
    H = PolynomialHamiltonian.harmonic()
    with pytest.warns(BoundaryWarning):
        evolve(W, H, unit, RhsTerms.all(), EvolutionSchedule(0.2))


def test_time_dependent_hamiltonian_runs(grid6, unit):
    H = PolynomialHamiltonian(potential=(0, 0, 0.5), time_table=((0.0, 1.0), (1.0, 4.0)))
    W = gaussian_coherent_state(grid6, 1, 0, 1, unit)
    traj = evolve(W, H, unit, RhsTerms.all(), EvolutionSchedule(1.0, record_every=5))
    # the stiffest stamp limits the step: omega^2 grows fourfold
    static = evolve(W, PolynomialHamiltonian.harmonic(), unit, RhsTerms.all(), EvolutionSchedule(0.1))
    assert traj.stability.dt_max < static.stability.dt_max
    assert traj.max_norm_drift <= 1e-5


def test_oracle_scheme_evolves(grid6, harmonic, unit):
    W = gaussian_coherent_state(grid6, 2, 0, 1, unit)
    traj = evolve(W, harmonic, unit, RhsTerms.all(), EvolutionSchedule(0.3), scheme="oracle")
    assert traj.scheme == "oracle" and traj.max_norm_drift <= 1e-5
    with pytest.raises(InvalidArgumentError):
        build_operator(harmonic, unit, RhsTerms.all(), grid6, "spectral")


def test_threshold_compress_bound(grid7, unit):
    W = gaussian_coherent_state(grid7, 1, 0, 1, unit)
    pyr = dwt_2d(W.values, 6, 3)
    res = threshold_compress(pyr, 1e-4)
    assert res.kept_fraction < 0.05
    assert res.error <= 1e-4 * math.sqrt(128 * 128)
    assert threshold_compress(pyr, 0.0).kept_fraction == 1.0
    with pytest.raises(InvalidArgumentError):
        threshold_compress(pyr, -1)


def test_evolve_with_thresholding(grid6, harmonic, unit):
    W = gaussian_coherent_state(grid6, 2, 0, 1, unit)
    sched = EvolutionSchedule(0.5, snapshot_every=2, threshold_eps=1e-8)
    traj = evolve(W, harmonic, unit, RhsTerms.all(), sched)
    ref = evolve(W, harmonic, unit, RhsTerms.all(), EvolutionSchedule(0.5))
    err = np.linalg.norm(traj.final.values - ref.final.values) / np.linalg.norm(ref.final.values)
    assert err < 1e-5


def test_steady_state_preconditions(grid6, harmonic):
    op = assemble_galerkin_operator(harmonic, PhysicalParams(gamma=0.0, diffusion=0.1), RhsTerms.all(), grid6)
    with pytest.raises(PreconditionError):
        steady_state(op)
    op = assemble_galerkin_operator(harmonic, PhysicalParams(gamma=0.1, diffusion=0.1),
                                    RhsTerms.only("liouville", "diffusion", "quantum"), grid6)
    with pytest.raises(PreconditionError):
        steady_state(op)


def test_steady_state_methods_agree():
    g = PhaseSpaceGrid(-8, 8, -8, 8, 6)
    params = PhysicalParams(gamma=0.1, diffusion=0.2)
    op = assemble_galerkin_operator(PolynomialHamiltonian.harmonic(), params, RhsTerms.all(), g)
    results = {m: steady_state(op, method=m) for m in ("dense", "banded", "sparse")}
    for m, r in results.items():
        assert r.converged, m
        assert r.field.norm() == pytest.approx(1.0, abs=1e-10)
    ref = results["dense"].field.values
    for m in ("banded", "sparse"):
        assert np.allclose(results[m].field.values, ref, atol=1e-8 * ref.max())
    q, p = g.mesh()
    thermal = np.exp(-(q ** 2 + p ** 2) / 2)
    thermal /= thermal.sum() * g.cell
    assert np.linalg.norm(ref - thermal) / np.linalg.norm(thermal) < 2e-2
    with pytest.raises(PreconditionError):
        steady_state(op, method="magic")
