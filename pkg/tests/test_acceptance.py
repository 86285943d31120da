"""Acceptance suite: one test per criterion, at the stated tolerances and runtimes.

Each test prints its measured quantities so ``pytest -s`` doubles as a report.
"""

import itertools
import math
import time
from math import factorial

import numpy as np
import pytest

from conftest import smooth_random_field
from wigner_mrsolve.moyal_operator import (
    RhsTerms, assemble_galerkin_operator, liouville_rhs, moyal_bracket,
    quantum_correction_rhs,
)
from wigner_mrsolve.moyal_operator.galerkin import axis_calculus
from wigner_mrsolve.phase_space import (
    PhaseSpaceGrid, PhysicalParams, PolynomialHamiltonian, Regime, WignerField, centroid,
    gaussian_coherent_state, purity,
)
from wigner_mrsolve.phase_space.classify import ClassifierThresholds
from wigner_mrsolve.scenario_cli import fringe_decay_probe, load_preset, read_manifest, run_scenario
from wigner_mrsolve.scenario_cli.runner import initial_field
from wigner_mrsolve.solver import (
    EvolutionSchedule, build_operator, evolve, stability_estimate, steady_state, step_rk4,
    threshold_compress,
)
from wigner_mrsolve.wavelet_core import (
    basis_entropy, best_basis, connection_coefficients, daubechies_filter, dwt_2d, inverse_dwt_2d,
    standard_basis_leaves,
)

BOX = (-10.0, 10.0, -10.0, 10.0)
UNIT = PhysicalParams()
HARMONIC = PolynomialHamiltonian.harmonic()
DOUBLE_WELL = PolynomialHamiltonian(potential=(0.0, 0.0, -0.5, 0.0, 0.25))
ALL_SUBSETS = [RhsTerms(*f) for f in itertools.product([False, True], repeat=4) if any(f)]

# every accepted evolution in this file; criterion 3 checks them all
_ACCEPTED_RUNS = []


def _grid(level):
    return PhaseSpaceGrid(*BOX, level)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _accept(traj):
    _ACCEPTED_RUNS.append(traj)
    return traj


@pytest.fixture(scope="module")
def rotation():
    """Coherent state (2, 0) in the unit harmonic well at J = 7, dt from the stability estimate."""
    g = _grid(7)
    W0 = gaussian_coherent_state(g, 2.0, 0.0, 1.0, UNIT)
    op = assemble_galerkin_operator(HARMONIC, UNIT, RhsTerms.all(), g)
    stab = stability_estimate(op)
    return g, W0, op, stab


# 1 ---------------------------------------------------------------------------

def test_criterion_1_quadratic_exactness():
    start = time.perf_counter()
    g = _grid(6)
    rng = np.random.default_rng(1)
    op = assemble_galerkin_operator(HARMONIC, UNIT, RhsTerms.all(), g)
    assert not any(k.name == "quantum" for k in op.kron_terms)
    worst = 0.0
    for _ in range(3):
        W = WignerField(g, smooth_random_field(g, rng))
        assert not np.any(quantum_correction_rhs(HARMONIC, W, UNIT))
        for scheme in ("galerkin", "oracle"):
            bracket = moyal_bracket(HARMONIC, W, UNIT, scheme)
            poisson = liouville_rhs(HARMONIC, W, UNIT, scheme)
            worst = max(worst, float(np.max(np.abs(bracket - poisson))))
    elapsed = time.perf_counter() - start
    print(f"max |Moyal - Poisson| = {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-10
    assert elapsed < 1.0


# 2 ---------------------------------------------------------------------------

def test_criterion_2_rotation(rotation):
    start = time.perf_counter()
    g, W0, op, stab = rotation
    quarter = _accept(evolve(W0, HARMONIC, UNIT, RhsTerms.all(), EvolutionSchedule(math.pi / 2),
                             operator=op, stability=stab))
    cq, cp = centroid(quarter.final)
    full = _accept(evolve(W0, HARMONIC, UNIT, RhsTerms.all(), EvolutionSchedule(2 * math.pi),
                          operator=op, stability=stab))
    err = _rel(full.final.values, W0.values)
    purities = full.series("purity")
    drift = float(np.max(np.abs(purities - purity(W0, UNIT))))
    elapsed = time.perf_counter() - start
    print(f"dt={full.dt:.4g} (bound {stab.dt_max:.4g}), centroid(pi/2)=({cq:.2e}, {cp:.5f}), "
          f"L2(2pi)={err:.2e}, purity drift={drift:.1e}, {elapsed:.1f} s")
    assert full.dt <= stab.dt_max
    assert abs(cq - 0.0) <= 0.02 and abs(cp + 2.0) <= 0.02
    assert err <= 2e-2
    assert drift <= 2e-3
    assert elapsed < 30


# 4 ---------------------------------------------------------------------------

def test_criterion_4_decoherence_rate():
    start = time.perf_counter()
    s = load_preset("cat-diffusion")
    assert (s.initial_state.q0, s.initial_state.sigma, s.params.hbar) == (3.0, 1.0, 1.0)
    assert s.params.gamma == 0.0 and s.params.diffusion == 0.1
    assert not s.hamiltonian.kinetic and not any(s.hamiltonian.potential)
    traj = _accept(evolve(initial_field(s), s.hamiltonian, s.params, s.terms, s.schedule))
    res = fringe_decay_probe(traj, 3.0, s.params)
    elapsed = time.perf_counter() - start
    print(f"rate={res.rate:.4f}, reference={res.reference:.4f}, rel err={res.relative_error:.1e}, "
          f"{len(res.times)} snapshots, {elapsed:.1f} s")
    assert res.reference == pytest.approx(3.6)
    assert res.relative_error <= 0.10
    assert elapsed < 60


# 5 ---------------------------------------------------------------------------

def test_criterion_5_steady_state():
    start = time.perf_counter()
    g = _grid(7)
    params = PhysicalParams(gamma=0.1, diffusion=0.2)
    op = assemble_galerkin_operator(HARMONIC, params, RhsTerms.all(), g)
    res = steady_state(op)
    q, p = g.mesh()
    temperature = params.diffusion / (2 * params.gamma * params.mass)
    thermal = np.exp(-(p ** 2 / 2 + q ** 2 / 2) / temperature)
    thermal /= thermal.sum() * g.cell
    match = _rel(res.field.values, thermal)
    stab = stability_estimate(op)
    sched = EvolutionSchedule(100 * stab.dt_max, record_every=10)
    traj = _accept(evolve(res.field, HARMONIC, params, RhsTerms.all(), sched, operator=op,
                          stability=stab))
    change = _rel(traj.final.values, res.field.values)
    label = traj.records[-1].regime
    elapsed = time.perf_counter() - start
    print(f"residual={res.residual:.1e} ({res.method}), L2 vs thermal={match:.2e}, "
          f"100-step change={change:.1e}, label={label}, {elapsed:.1f} s")
    assert res.converged
    assert match <= 5e-2
    assert traj.steps == 100
    assert change <= 1e-4
    assert label == Regime.WAVELETON
    assert elapsed < 120


# 6 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_regime_reproduction(tmp_path):
    start = time.perf_counter()
    labels = {}
    for name in ("harmonic-coherent", "cat-decoherence", "doublewell-waveleton"):
        s = load_preset(name)
        assert s.thresholds == ClassifierThresholds()
        res = run_scenario(s, str(tmp_path / name))
        assert res.exit_code == 0, res.error
        assert read_manifest(str(tmp_path / name))["complete"]
        labels[name] = (res.summary["initial_regime"], res.summary["regime"], res.summary)
    elapsed = time.perf_counter() - start
    print({k: v[:2] for k, v in labels.items()}, f"{elapsed:.1f} s")
    hc = labels["harmonic-coherent"][2]
    assert labels["harmonic-coherent"][1] == "localized"
    assert 0.997 <= hc["final"]["purity"] <= 1.003
    assert labels["cat-decoherence"][0] == "entangled_like"
    assert labels["cat-decoherence"][1] in ("localized", "waveleton")
    dw = labels["doublewell-waveleton"][2]
    assert labels["doublewell-waveleton"][1] == "waveleton"
    assert dw["residual"] <= 1e-6
    for _, _, summ in labels.values():
        if "conservation" in summ:
            assert summ["conservation"]["max_norm_drift"] <= 1e-5


# 3 (runs after 2, 4, 5 so their trajectories are available) --------------------

def test_criterion_3_conservation():
    start = time.perf_counter()
    assert len(_ACCEPTED_RUNS) >= 4, "criteria 2, 4 and 5 must run first"
    worst_run = 0.0
    for traj in _ACCEPTED_RUNS:
        worst_run = max(worst_run, traj.max_norm_drift,
                        max(abs(r.norm - 1.0) for r in traj.records))
    g = _grid(6)
    params = PhysicalParams(hbar=0.5, gamma=0.1, diffusion=0.1)
    rng = np.random.default_rng(2024)
    fields = [smooth_random_field(g, rng) for _ in range(20)]
    worst_rhs = 0.0
    for terms in ALL_SUBSETS:
        for scheme in ("galerkin", "oracle"):
            op = build_operator(DOUBLE_WELL, params, terms, g, scheme)
            for v in fields:
                worst_rhs = max(worst_rhs, abs(float(op.apply(v).sum()) * g.cell))
    elapsed = time.perf_counter() - start
    print(f"{len(_ACCEPTED_RUNS)} runs: max |mass - 1| = {worst_run:.1e}; "
          f"max |integral RHS| over 20 fields x {len(ALL_SUBSETS)} subsets x 2 schemes = "
          f"{worst_rhs:.1e}, {elapsed:.1f} s")
    assert worst_run <= 1e-5
    assert worst_rhs <= 1e-8


# 7 ---------------------------------------------------------------------------

def test_criterion_7_oracle_equivalence():
    start = time.perf_counter()
    params = PhysicalParams(hbar=0.5, gamma=0.1, diffusion=0.1)
    terms = RhsTerms.all()
    levels = (6, 7, 8)
    errors = np.zeros((20, len(levels)))
    for k, level in enumerate(levels):
        g = _grid(level)
        gal = build_operator(DOUBLE_WELL, params, terms, g, "galerkin")
        ora = build_operator(DOUBLE_WELL, params, terms, g, "oracle")
        rng = np.random.default_rng(77)
        for i in range(20):
            v = smooth_random_field(g, rng)
            errors[i, k] = _rel(gal.apply(v), ora.apply(v))
    elapsed = time.perf_counter() - start
    print("max discrepancy per level:", dict(zip(levels, errors.max(axis=0).round(6))), f"{elapsed:.1f} s")
    assert errors[:, 1].max() <= 1e-2
    assert np.all(errors[:, 0] > errors[:, 1]) and np.all(errors[:, 1] > errors[:, 2])


# 8 ---------------------------------------------------------------------------

def test_criterion_8_wavelet_identities():
    worst = {"orth": 0.0, "roundtrip": 0.0, "parseval": 0.0, "moments": 0.0, "normalisation": 0.0}
    for order in range(1, 11):
        h = daubechies_filter(order).low_pass
        for m in range(order):
            target = 1.0 if m == 0 else 0.0
            worst["orth"] = max(worst["orth"], abs(np.dot(h[2 * m:], h[:h.size - 2 * m]) - target))
        for d in range(1, order):
            try:
                table = connection_coefficients(order, d)
            except Exception:
                continue  # ill-conditioned orders are rejected by design
            listed = [abs(table.moment(0))]
            if d <= 2:
                listed.append(abs(table.moment(d) - (-1) ** d * factorial(d)))
            worst["moments"] = max(worst["moments"], *listed)
            # the normalising moment grows like d!, so it is compared relatively
            norm = abs(table.moment(d) / ((-1) ** d * factorial(d)) - 1)
            worst["normalisation"] = max(worst["normalisation"], norm)
    rng = np.random.default_rng(8)
    for order in (2, 4, 6, 8):
        v = rng.standard_normal((64, 64))
        pyr = dwt_2d(v, order, 4)
        worst["roundtrip"] = max(worst["roundtrip"], float(np.max(np.abs(inverse_dwt_2d(pyr) - v))))
        worst["parseval"] = max(worst["parseval"], abs(pyr.energy() / np.sum(v * v) - 1))
    not_worse = 0
    leaves = standard_basis_leaves(3)
    for _ in range(100):
        v = rng.standard_normal((32, 32)) * np.exp(-np.linspace(-2, 2, 32) ** 2)[:, None]
        tree, _ = best_basis(v, 4, 3)
        not_worse += tree.entropy_total <= basis_entropy(v, 4, leaves, 3) + 1e-12
    print({k: f"{x:.1e}" for k, x in worst.items()}, f"best <= standard on {not_worse}/100")
    assert worst["orth"] <= 1e-12
    assert worst["roundtrip"] <= 1e-10 and worst["parseval"] <= 1e-10
    assert worst["moments"] <= 1e-10 and worst["normalisation"] <= 1e-10
    assert not_worse == 100


# 9 ---------------------------------------------------------------------------

def test_criterion_9_compression():
    g = _grid(7)
    coherent = gaussian_coherent_state(g, 2.0, 0.0, 1.0, UNIT)
    params = PhysicalParams(gamma=0.1, diffusion=0.2)
    waveleton = steady_state(assemble_galerkin_operator(HARMONIC, params, RhsTerms.all(), g)).field
    for name, W in (("coherent", coherent), ("waveleton", waveleton)):
        pyr = dwt_2d(W.values, 6, 3)
        res = threshold_compress(pyr, 1e-6)
        recon = inverse_dwt_2d(res.pyramid)
        err = _rel(recon, W.values)
        counts, errs = [], []
        for eps in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
            r = threshold_compress(pyr, eps)
            counts.append(r.kept_fraction * pyr.coefficient_count())
            errs.append(r.error)
        logn, loge = np.log(counts), np.log(errs)
        # local algebraic exponent between neighbouring samples
        exponents = -np.diff(loge) / np.diff(logn)
        # slope of log-error against the raw count
        slopes = np.diff(loge) / np.diff(counts)
        print(f"{name}: kept={res.kept_fraction:.4f}, error={err:.1e}, counts={np.round(counts)}, "
              f"exponents={exponents.round(2)}")
        assert res.kept_fraction <= 0.10
        assert err <= 1e-4
        assert np.all(np.diff(counts) > 0) and np.all(np.diff(errs) < 0)
        # convex log-error vs count, and an exponent that keeps growing: no fixed power fits
        assert np.all(np.diff(slopes) > 0)
        assert np.all(np.diff(exponents) > 0)


# 10 --------------------------------------------------------------------------

def test_criterion_10_orders(rotation):
    g, W0, op, stab = rotation
    t_final = math.pi / 2
    finals = []
    for m in (1, 2, 4):
        steps = m * math.ceil(t_final / stab.dt_max)
        dt = t_final / steps
        a = W0.values.copy()
        for k in range(steps):
            a = step_rk4(a, op, dt)
        finals.append((dt, a))
    d1 = np.linalg.norm(finals[0][1] - finals[1][1])
    d2 = np.linalg.norm(finals[1][1] - finals[2][1])
    rk_order = math.log2(d1 / d2)

    # periodic wave with 8 periods on the box: resolved, yet above roundoff up to J = 8
    errs = []
    k = 2 * math.pi * 8 / 20.0
    for level in (5, 6, 7, 8):
        n = 2 ** level
        h = 20.0 / n
        x = -10.0 + h * np.arange(n)
        calc = axis_calculus(6, n, h, -10.0)
        errs.append(float(np.max(np.abs(calc.derivative(1) @ np.sin(k * x) - k * np.cos(k * x)))) / k)
    d_orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    print(f"RK4 dt={finals[0][0]:.4g}: order {rk_order:.3f}; derivative errors {['%.1e' % e for e in errs]}, "
          f"orders {np.round(d_orders, 2)}")
    assert rk_order >= 3.8
    assert min(d_orders) >= 2.0
