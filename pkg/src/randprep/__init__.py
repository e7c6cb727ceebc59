"""Randomized truncated state preparation.

Instead of dropping the small amplitudes of a target state, each run prepares one member
of an ensemble that keeps the large amplitudes and moves the whole small-amplitude mass
onto a single randomly chosen index. The resulting mixture approximates the target with
an error quadratic in the truncated norm. This package builds such ensembles, computes
their exact trace distances and bounds, samples them, and plans resources.
"""

from __future__ import annotations

try:
    from randprep._version import __version__
except ImportError:  # pragma: no cover
    __version__ = '0.0.0'

from randprep.amplitudes import AmplitudeVector, Partition, normalize, partition
from randprep.bounds import compute_mixing_bounds, fit_decay, resource_plan
from randprep.ensemble import Ensemble, build_ensemble, mixture_density
from randprep.metrics import DensityRepr, Observable, mixed_trace_distance, truncation_error

__all__ = [
    'AmplitudeVector',
    'DensityRepr',
    'Ensemble',
    'Observable',
    'Partition',
    '__version__',
    'build_ensemble',
    'compute_mixing_bounds',
    'fit_decay',
    'mixed_trace_distance',
    'mixture_density',
    'normalize',
    'partition',
    'resource_plan',
    'truncation_error',
]
