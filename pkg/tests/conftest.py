import numpy as np
import pytest

from wigner_mrsolve.phase_space import PhaseSpaceGrid, PhysicalParams, PolynomialHamiltonian


@pytest.fixture(scope="session")
def grid6():
    return PhaseSpaceGrid(-10, 10, -10, 10, 6)


@pytest.fixture(scope="session")
def grid7():
    return PhaseSpaceGrid(-10, 10, -10, 10, 7)


@pytest.fixture(scope="session")
def unit():
    return PhysicalParams(hbar=1.0, mass=1.0)


@pytest.fixture(scope="session")
def harmonic():
    return PolynomialHamiltonian.harmonic()


@pytest.fixture(scope="session")
def double_well():
    return PolynomialHamiltonian(potential=(0.0, 0.0, -0.5, 0.0, 0.25))


def smooth_random_field(grid, rng, bumps=4, width=(1.0, 2.0), extent=4.0):
    """Sum of random Gaussians well inside the box, normalized to unit mass."""
    q, p = grid.mesh()
    v = np.zeros_like(q)
    for _ in range(bumps):
        q0, p0 = rng.uniform(-extent, extent, 2)
        sq, sp = rng.uniform(*width, 2)
        v += rng.uniform(-0.5, 1.0) * np.exp(-((q - q0) / sq) ** 2 - ((p - p0) / sp) ** 2)
    v += np.exp(-(q ** 2 + p ** 2) / 4.0)
    return v / (v.sum() * grid.cell)
