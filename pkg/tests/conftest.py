"""Shared fixtures: one step potential with its scattering data."""
import pytest

from gp2d.potentials import step
from gp2d.scattering import scattering_length, neumann_ground_state


@pytest.fixture(scope="session")
def step_pot():
    return step(2.0, 1.0)


@pytest.fixture(scope="session")
def step_a(step_pot):
    return scattering_length(step_pot).a


@pytest.fixture(scope="session")
def neumann_r50(step_pot, step_a):
    return neumann_ground_state(step_pot, 50.0, a=step_a)
