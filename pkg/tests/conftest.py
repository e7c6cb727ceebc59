"""Pytest configuration and shared fixtures for randprep tests."""

from __future__ import annotations

import math

import pytest

from randprep.amplitudes import AmplitudeVector, Partition, normalize, partition
from randprep.ensemble import Ensemble, build_ensemble
from randprep.generators import SyntheticSpec, TfimSpec, synthetic_state, tfim_ground_state

TOY_VALUES = (math.sqrt(0.98), 0.1, 0.1, 0.0)
TOY_THRESHOLD = 0.2


@pytest.fixture
def toy_state() -> AmplitudeVector:
    """Two-qubit state (sqrt(.98), .1, .1, 0)."""
    return normalize(TOY_VALUES, 2, 'toy')


@pytest.fixture
def toy_partition(toy_state: AmplitudeVector) -> Partition:
    return partition(toy_state, TOY_THRESHOLD)


@pytest.fixture
def toy_ensemble(toy_state: AmplitudeVector, toy_partition: Partition) -> Ensemble:
    return build_ensemble(toy_partition, toy_state)


@pytest.fixture
def geometric_state() -> AmplitudeVector:
    """Geometric decay r = 0.9 over 1024 amplitudes (10 qubits)."""
    return synthetic_state(SyntheticSpec('geometric', 0.9, 1024))


@pytest.fixture
def small_geometric_state() -> AmplitudeVector:
    """Geometric decay r = 0.7 over 64 amplitudes with alternating signs."""
    return synthetic_state(SyntheticSpec('geometric', 0.7, 64, signs='alternate'))


@pytest.fixture(scope='session')
def tfim11_state() -> AmplitudeVector:
    """TFIM ground state, N = 11, J = h = 1 (computed once per session)."""
    return tfim_ground_state(TfimSpec(11, 1.0, 1.0))
