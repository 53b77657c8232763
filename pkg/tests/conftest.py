"""Shared fixtures: grids and a couple of canned states."""

import numpy as np
import pytest

from blowlab import make_grid, State
from blowlab.experiments import RandomDataSpec, random_state


@pytest.fixture(scope="session")
def g16():
    return make_grid(16)


@pytest.fixture(scope="session")
def g32():
    return make_grid(32)


@pytest.fixture(scope="session")
def random_state_factory():
    def make(g, member=0, seed=0, target=1.0):
        return random_state(
            RandomDataSpec(seed=seed, member=member, target=target), g)
    return make


@pytest.fixture()
def poly_state(g16):
    """Smooth even-regular closed-form state (rho^2, rho^4)."""
    r = g16.nodes
    return State(g16, r ** 2, r ** 4)
