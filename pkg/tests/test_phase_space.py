import math

import numpy as np
import pytest

from wigner_mrsolve.errors import DomainTooSmallError, InvalidArgumentError
from wigner_mrsolve.phase_space import (
    ClassifierThresholds, DiagnosticsRecord, PhaseSpaceGrid, PhysicalParams, PolynomialHamiltonian,
    Regime, WignerField, cat_state, centroid, classify_state, decompose_multiscale, diagnose,
    gaussian_coherent_state, marginals, negativity_volume, purity,
)
from wigner_mrsolve.phase_space.diagnostics import read_records_csv, write_records_csv


def test_grid_geometry(grid7):
    assert grid7.n == 128
    assert grid7.dq == pytest.approx(20 / 128)
    assert grid7.q[0] == -10.0
    with pytest.raises(InvalidArgumentError):
        PhaseSpaceGrid(1, 0, -1, 1, 5)


def test_params_validation():
    with pytest.raises(InvalidArgumentError):
        PhysicalParams(hbar=0)
    with pytest.raises(InvalidArgumentError):
        PhysicalParams(gamma=-1)
    assert PhysicalParams(gamma=0.1, diffusion=0.2).temperature == pytest.approx(1.0)


def test_hamiltonian_degree_limit():
    from wigner_mrsolve.phase_space.model import MAX_DEGREE

    with pytest.raises(InvalidArgumentError):
        PolynomialHamiltonian(potential=(0,) * (MAX_DEGREE + 1) + (1.0,))
    with pytest.raises(InvalidArgumentError):
        PolynomialHamiltonian(mixed_terms=((1.0, MAX_DEGREE, 1),))


def test_cat_state_rejects_aliasing_grid(grid6, unit):
    # momentum box wider than pi / dq folds the fringe pattern back
    with pytest.raises(InvalidArgumentError):
        cat_state(grid6, 3.0, 1.0, unit)


def test_coherent_state_properties(grid7, unit):
    W = gaussian_coherent_state(grid7, 2.0, -1.0, 1.0, unit)
    assert W.norm() == pytest.approx(1.0, abs=1e-12)
    assert purity(W, unit) == pytest.approx(1.0, abs=1e-10)
    assert negativity_volume(W) == 0.0
    assert centroid(W) == pytest.approx((2.0, -1.0), abs=1e-10)
    rq, rp = marginals(W)
    # position density of |psi|^2 with the sigma = 1 Gaussian
    assert rq.max() == pytest.approx(1 / math.sqrt(math.pi), rel=1e-3)


def test_coherent_state_box_check(unit):
    small = PhaseSpaceGrid(-3, 3, -3, 3, 6)
    with pytest.raises(DomainTooSmallError):
        gaussian_coherent_state(small, 2.0, 0.0, 1.0, unit)


def test_cat_state(grid7, unit):
    W = cat_state(grid7, 3.0, 1.0, unit)
    assert W.norm() == pytest.approx(1.0, abs=1e-9)
    assert purity(W, unit) == pytest.approx(1.0, abs=1e-6)
    assert negativity_volume(W) > 0.3
    # fringe at q = 0 oscillates as cos(2 q0 p / hbar)
    i = int(np.argmin(np.abs(grid7.q)))
    row = W.values[i]
    j0 = int(np.argmin(np.abs(grid7.p)))
    jpi = int(np.argmin(np.abs(grid7.p - math.pi / 6)))
    assert row[j0] > 0 > row[jpi]


def test_diagnose_and_classify(grid7, unit, harmonic):
    W = gaussian_coherent_state(grid7, 2.0, 0.0, 1.0, unit)
    rec = diagnose(W, harmonic, unit)
    assert rec.energy == pytest.approx(0.5 * 4 + 0.5, rel=1e-6)
    assert rec.sparsity <= 0.10
    assert math.isnan(rec.change_rate)
    assert classify_state(rec) == Regime.LOCALIZED
    cat = diagnose(cat_state(grid7, 3.0, 1.0, unit), harmonic, unit)
    assert classify_state(cat) == Regime.ENTANGLED_LIKE


def test_waveleton_needs_full_window(grid7, unit, harmonic):
    W = gaussian_coherent_state(grid7, 0.0, 0.0, 1.0, unit)
    base = diagnose(W, harmonic, unit)
    still = DiagnosticsRecord(**{**base.__dict__, "change_rate": 0.0})
    th = ClassifierThresholds()
    history = [still] * 8
    assert classify_state(still, history, th) == Regime.LOCALIZED
    assert classify_state(still, history + [still], th) == Regime.WAVELETON
    moving = DiagnosticsRecord(**{**base.__dict__, "change_rate": 1e-2})
    assert classify_state(moving, history + [still], th) == Regime.LOCALIZED


def test_chaotic_like_label():
    rec = DiagnosticsRecord(0.0, 1.0, 0.5, 0.0, 7.0, 0.5, 1.0)
    assert classify_state(rec) == Regime.CHAOTIC_LIKE
    rec = DiagnosticsRecord(0.0, 1.0, 0.5, 0.0, 3.0, 0.5, 1.0)
    assert classify_state(rec) == Regime.UNCLASSIFIED


def test_records_csv_roundtrip(grid6, unit, harmonic):
    import io

    W = gaussian_coherent_state(grid6, 1.0, 0.0, 1.0, unit)
    recs = [diagnose(W, harmonic, unit), diagnose(W.with_values(W.values, 0.5), harmonic, unit,
                                                  previous=(W, 0.0))]
    buf = io.StringIO()
    write_records_csv(recs, buf)
    back = read_records_csv(buf.getvalue())
    assert back[1] == recs[1]
    assert math.isnan(back[0].change_rate)


def test_multiscale_split_reconstructs(grid7, unit):
    W = cat_state(grid7, 3.0, 1.0, unit)
    dec = decompose_multiscale(W, 4, 2)
    assert np.allclose(dec.reconstruct(), W.values, atol=1e-12)
    series = np.sin(np.linspace(0, 6, 50))
    dec1 = decompose_multiscale(series, 2, 1)
    assert np.allclose(dec1.reconstruct(), series, atol=1e-12)


def test_field_validation(grid6):
    with pytest.raises(InvalidArgumentError):
        WignerField(grid6, np.zeros((3, 3)))
    bad = np.zeros((64, 64))
    bad[0, 0] = np.nan
    with pytest.raises(InvalidArgumentError):
        WignerField(grid6, bad)
