"""Transverse-field Ising chain ``H = -J sum Z_i Z_{i+1} - h sum X_i`` with periodic bonds.

Qubit i is bit i of the basis index; Z_i has eigenvalue ``1 - 2 * bit_i``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from randprep.amplitudes import AmplitudeVector, FloatArray, normalize
from randprep.constants import (
    DEGENERACY_GAP,
    GROUND_RESIDUAL_TOL,
    LANCZOS_KRYLOV_DIM,
    LANCZOS_TOL,
    TFIM_DENSE_MAX_SITES,
    TFIM_MAX_SITES,
    TFIM_MIN_SITES,
)

logger = logging.getLogger(__name__)

MatVec = Callable[[FloatArray], FloatArray]
SolverMethod = Literal['auto', 'dense', 'lanczos']


@dataclass(frozen=True)
class TfimSpec:
    """TFIM chain parameters.

    Parameters:
        n_sites: Chain length N, 3 <= N <= 14 (N = 2 would count its single bond twice).
        coupling_j: ZZ coupling J.
        field_h: Transverse field h.
        boundary: Only ``periodic`` is supported.
    """

    n_sites: int
    coupling_j: float = 1.0
    field_h: float = 1.0
    boundary: str = 'periodic'

    def __post_init__(self) -> None:
        if not TFIM_MIN_SITES <= self.n_sites <= TFIM_MAX_SITES:
            raise ValueError(
                f'n_sites must be in {TFIM_MIN_SITES}..{TFIM_MAX_SITES}, got {self.n_sites}'
            )
        if self.boundary != 'periodic':
            raise ValueError(f'unsupported boundary {self.boundary!r}; only periodic')
        if not (math.isfinite(self.coupling_j) and math.isfinite(self.field_h)):
            raise ValueError('J and h must be finite')

    @property
    def dim(self) -> int:
        return 1 << self.n_sites


@dataclass(frozen=True, eq=False)
class GroundState:
    """Lowest eigenpair of a TFIM chain and its gap to the next level."""

    energy: float
    state: AmplitudeVector
    residual: float
    method: str
    gap: float


def _zz_diagonal(spec: TfimSpec) -> FloatArray:
    idx = np.arange(spec.dim, dtype=np.int64)
    z = 1 - 2 * ((idx[:, np.newaxis] >> np.arange(spec.n_sites)) & 1)
    bonds = z * np.roll(z, -1, axis=1)
    return -spec.coupling_j * bonds.sum(axis=1).astype(np.float64)


def _flip_targets(spec: TfimSpec) -> list[np.ndarray]:  # type: ignore[type-arg]
    idx = np.arange(spec.dim, dtype=np.int64)
    return [idx ^ (1 << i) for i in range(spec.n_sites)]


def tfim_hamiltonian(spec: TfimSpec) -> sp.csr_array:
    """Return H as a sparse CSR matrix of side 2^N."""
    idx = np.arange(spec.dim, dtype=np.int64)
    flips = _flip_targets(spec)
    rows = np.concatenate([idx] * (spec.n_sites + 1))
    cols = np.concatenate([idx, *flips])
    vals = np.concatenate(
        [_zz_diagonal(spec), np.full(spec.n_sites * spec.dim, -spec.field_h)]
    )
    return sp.coo_array((vals, (rows, cols)), shape=(spec.dim, spec.dim)).tocsr()


def tfim_matvec(spec: TfimSpec) -> MatVec:
    """Return a matrix-free function computing H @ v."""
    diag = _zz_diagonal(spec)
    flips = _flip_targets(spec)
    field_h = spec.field_h

    def apply(vec: FloatArray) -> FloatArray:
        out = diag * vec
        for target in flips:
            out -= field_h * vec[target]
        return out

    return apply


def _fix_sign(vec: FloatArray) -> FloatArray:
    lead = int(np.argmax(np.abs(vec)))
    return -vec if vec[lead] < 0.0 else vec


def _dense_ground(spec: TfimSpec) -> tuple[float, FloatArray, float]:
    dense = tfim_hamiltonian(spec).toarray()
    energies, vecs = sla.eigh(dense, subset_by_index=[0, 1])
    return float(energies[0]), vecs[:, 0], float(energies[1] - energies[0])


def _eigsh_lowest(matvec: MatVec, dim: int, seed: int) -> tuple[float, FloatArray]:
    operator = spla.LinearOperator((dim, dim), matvec=lambda x: matvec(np.ravel(x)), dtype=float)
    start = np.random.default_rng(seed).standard_normal(dim)
    try:
        energies, vecs = spla.eigsh(
            operator,
            k=1,
            which='SA',
            ncv=min(LANCZOS_KRYLOV_DIM, dim - 1),
            tol=LANCZOS_TOL,
            v0=start,
        )
    except spla.ArpackNoConvergence as e:
        raise RuntimeError(f'Lanczos did not converge: {e}') from e
    return float(energies[0]), vecs[:, 0]


def _lanczos_ground(spec: TfimSpec) -> tuple[float, FloatArray, float]:
    matvec = tfim_matvec(spec)
    energy, vec = _eigsh_lowest(matvec, spec.dim, seed=0)
    # A Krylov space sees one copy of a degenerate level; lift the found vector above the
    # spectrum and restart from a fresh vector to read off the next eigenvalue.
    shift = 2.0 * spec.n_sites * (abs(spec.coupling_j) + abs(spec.field_h)) + 1.0

    def deflated(x: FloatArray) -> FloatArray:
        return matvec(x) + shift * vec * float(np.dot(vec, x))

    second, _ = _eigsh_lowest(deflated, spec.dim, seed=1)
    return energy, vec, second - energy


def solve_tfim(spec: TfimSpec, method: SolverMethod = 'auto') -> GroundState:
    """Find the TFIM ground state.

    Parameters:
        spec: Chain parameters.
        method: ``dense`` (full eigendecomposition), ``lanczos`` (ARPACK ``eigsh`` on the
            matrix-free operator), or ``auto`` (dense up to 12 sites).

    Returns:
        GroundState with the largest-magnitude amplitude made positive.

    Raises:
        ValueError: ``degenerate ground state`` when the gap is below 1e-10.
        RuntimeError: If ARPACK does not converge or the eigenvector residual exceeds 1e-8.
    """
    if method == 'auto':
        method = 'dense' if spec.n_sites <= TFIM_DENSE_MAX_SITES else 'lanczos'
    if method == 'dense':
        energy, vec, gap = _dense_ground(spec)
    elif method == 'lanczos':
        energy, vec, gap = _lanczos_ground(spec)
    else:
        raise ValueError(f'unknown solver method {method!r}')
    logger.info('TFIM N=%d (%s): E0=%.15g gap=%.3e', spec.n_sites, method, energy, gap)
    if gap < DEGENERACY_GAP:
        raise ValueError(
            f'degenerate ground state: gap {gap:.3e} below {DEGENERACY_GAP:g} '
            f'(N={spec.n_sites}, J={spec.coupling_j:g}, h={spec.field_h:g})'
        )
    vec = _fix_sign(vec / np.linalg.norm(vec))
    residual = float(np.linalg.norm(tfim_matvec(spec)(vec) - energy * vec))
    if residual > GROUND_RESIDUAL_TOL:
        raise RuntimeError(f'ground-state residual {residual:.3e} exceeds {GROUND_RESIDUAL_TOL:g}')
    label = f'tfim:N={spec.n_sites},J={spec.coupling_j:g},h={spec.field_h:g}'
    return GroundState(energy, normalize(vec, spec.n_sites, label), residual, method, gap)


def tfim_ground_state(spec: TfimSpec, method: SolverMethod = 'auto') -> AmplitudeVector:
    """Return the normalized TFIM ground state (see :func:`solve_tfim`)."""
    return solve_tfim(spec, method).state
