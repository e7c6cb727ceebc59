"""Synthetic states with prescribed geometric or power-law magnitude decay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from randprep.amplitudes import AmplitudeVector, normalize, qubits_for_length
from randprep.bounds import DecayKind, DecayModel, model_tail_profile

SignPattern = Literal['positive', 'alternate', 'random']


@dataclass(frozen=True)
class SyntheticSpec:
    """Synthetic decay profile.

    Parameters:
        kind: ``geometric`` (|alpha|_k ~ r^(k-1)) or ``power_law`` (|alpha|_k ~ k^(-r)).
        rate: r; in (0, 1) for geometric, above 1/2 for power law.
        dim: Number of amplitudes (>= 2); the state is padded to the next power of two.
        seed: Seed for ``random`` signs.
        signs: Sign pattern of the amplitudes.
    """

    kind: DecayKind
    rate: float
    dim: int
    seed: int = 0
    signs: SignPattern = 'positive'

    def __post_init__(self) -> None:
        DecayModel(self.kind, self.rate)
        if self.dim < 2:
            raise ValueError(f'dim must be at least 2, got {self.dim}')
        if self.signs not in ('positive', 'alternate', 'random'):
            raise ValueError(f'unknown sign pattern {self.signs!r}')


def synthetic_state(spec: SyntheticSpec) -> AmplitudeVector:
    """Return the normalized state for ``spec``; deterministic given (spec, seed)."""
    mags = model_tail_profile(DecayModel(spec.kind, spec.rate), spec.dim)
    if spec.signs == 'alternate':
        mags = mags * np.where(np.arange(spec.dim) % 2 == 0, 1.0, -1.0)
    elif spec.signs == 'random':
        mags = mags * np.random.default_rng(spec.seed).choice([-1.0, 1.0], size=spec.dim)
    label = f'synthetic:{spec.kind}:{spec.rate:g}'
    return normalize(mags, qubits_for_length(spec.dim), label)
