import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from latticeweak.evolution import dynamical_sector, prepare_delta_minus
from latticeweak.hamiltonians import build_full
from latticeweak.layout import QubitLayout, preset

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def params():
    return preset()


@pytest.fixture(scope="session")
def layout():
    return QubitLayout(1, "grouped")


@pytest.fixture(scope="session")
def delta_minus(params, layout):
    return prepare_delta_minus(params, layout)


@pytest.fixture(scope="session")
def sector(layout, delta_minus):
    return dynamical_sector(layout, delta_minus)


@pytest.fixture(scope="session")
def h_valence(params, layout):
    return build_full(params, layout, beta="valence")


def random_sum(rng, n, terms=5):
    """Random Hermitian or complex Pauli sum for dense-oracle checks."""
    from latticeweak.pauli import OperatorSum
    data = {}
    for _ in range(terms):
        key = (int(rng.integers(1 << n)), int(rng.integers(1 << n)))
        data[key] = complex(rng.normal(), rng.normal())
    return OperatorSum(n, data)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
