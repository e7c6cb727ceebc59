"""Command parameters and argument value parsers for the CLI and API."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np

from randprep.metrics import Observable, pauli_observable

logger = logging.getLogger(__name__)

_PAULI_SPEC = re.compile(r'^\s*([IXZixz])\s*(\d*)\s*$')


def parse_positive_float(value: str) -> float:
    """Parse a finite float > 0.

    Raises:
        ValueError: If value is not a positive finite number.
    """
    number = float(value)
    if not math.isfinite(number) or number <= 0.0:
        raise ValueError(f'expected a positive number, got {value!r}')
    return number


def parse_unit_interval(value: str) -> float:
    """Parse a float strictly between 0 and 1."""
    number = float(value)
    if not 0.0 < number < 1.0:
        raise ValueError(f'expected a number in (0, 1), got {value!r}')
    return number


def parse_tau_list(value: str) -> list[float]:
    """Parse comma-separated target errors, each in (0, 1)."""
    taus = [parse_unit_interval(tok) for tok in value.split(',') if tok.strip()]
    if not taus:
        raise ValueError('no target errors given')
    return taus


def parse_threshold_grid(value: str) -> list[float]:
    """Parse a threshold grid ``t_min:t_max:count`` (geometric spacing) or one threshold.

    Parameters:
        value: Grid spec; ``count`` >= 1, 0 < t_min <= t_max, and t_min == t_max when
            count is 1.

    Returns:
        Distinct thresholds in decreasing order.

    Raises:
        ValueError: If the spec is malformed.
    """
    parts = value.split(':')
    if len(parts) == 1:
        return [parse_positive_float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f'threshold grid must be t_min:t_max:count, got {value!r}')
    t_min = parse_positive_float(parts[0])
    t_max = parse_positive_float(parts[1])
    try:
        count = int(parts[2])
    except ValueError as e:
        raise ValueError(f'grid count must be an integer, got {parts[2]!r}') from e
    if count < 1:
        raise ValueError(f'grid count must be at least 1, got {count}')
    if t_min > t_max:
        raise ValueError(f'grid needs t_min <= t_max, got {t_min!r} > {t_max!r}')
    if count == 1:
        if t_min != t_max:
            raise ValueError('a one-point grid needs t_min == t_max')
        return [t_max]
    grid = np.geomspace(t_max, t_min, count)
    return sorted({float(t) for t in grid}, reverse=True)


def parse_pauli(value: str) -> Observable:
    """Parse a real Pauli spec such as ``Z0``, ``X3`` or ``I``."""
    match = _PAULI_SPEC.match(value)
    if match is None:
        raise ValueError(f'Pauli spec must look like Z0 or X2, got {value!r}')
    letter, qubit = match.groups()
    return pauli_observable(letter, int(qubit) if qubit else 0)


@dataclass
class AnalyzeParams:
    """Inputs for one threshold analysis."""

    state_path: str
    threshold: float
    n_qubits: int | None = None
    oracle: bool = False
    members: bool = False
    observable: Observable | None = None


@dataclass
class SweepParams:
    """Inputs for a threshold sweep."""

    state_path: str
    thresholds: list[float]
    n_qubits: int | None = None
    output: str | None = None
    reduction_target: float | None = None
    min_reduction: float | None = None
    threads: int | None = None


@dataclass
class SampleParams:
    """Inputs for a sampling run."""

    state_path: str
    threshold: float
    shots: int
    seed: int
    observable: Observable = field(default_factory=lambda: pauli_observable('Z', 0))
    n_qubits: int | None = None
    workers: int = 1


@dataclass
class ResourcesParams:
    """Inputs for resource planning; a state, or a kind/rate/dim model, is required."""

    taus: list[float]
    state_path: str | None = None
    n_qubits: int | None = None
    kind: str | None = None
    rate: float | None = None
    dim: int | None = None
    threshold: float | None = None
