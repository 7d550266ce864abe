import math

import pytest

from torusspec import Potential, TorusLattice, dual_lattice

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def square_torus():
    return TorusLattice(complex(TWO_PI), TWO_PI * 1j)


@pytest.fixture(scope="session")
def square_dual(square_torus):
    return dual_lattice(square_torus)


@pytest.fixture(scope="session")
def q_const(square_dual):
    return Potential.constant(square_dual, 0.3)


@pytest.fixture(scope="session")
def q_zero(square_dual):
    return Potential(square_dual, {})


@pytest.fixture(scope="session")
def q_perturbed(square_dual):
    return Potential.from_pairs(square_dual, [(0.0, 0.2), (0.5, 0.05)])
