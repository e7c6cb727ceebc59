"""Input states: TFIM ground states, synthetic decay profiles, and coefficient files."""

from randprep.generators.files import load_state, read_coefficients
from randprep.generators.synthetic import SyntheticSpec, synthetic_state
from randprep.generators.tfim import (
    GroundState,
    TfimSpec,
    solve_tfim,
    tfim_ground_state,
    tfim_hamiltonian,
    tfim_matvec,
)

__all__ = [
    'GroundState',
    'SyntheticSpec',
    'TfimSpec',
    'load_state',
    'read_coefficients',
    'solve_tfim',
    'synthetic_state',
    'tfim_ground_state',
    'tfim_hamiltonian',
    'tfim_matvec',
]
