"""Exact trace distances, observables, and observable errors.

Mixed states are kept in low-rank form (:class:`DensityRepr`); the 2^n x 2^n density matrix
is only ever built by :func:`dense_trace_distance_oracle`, which exists to cross-check the
low-rank path on small systems.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.linalg as sla
import scipy.sparse as sp

from randprep.amplitudes import AmplitudeVector, FloatArray, Partition
from randprep.constants import (
    BOUND_TOL,
    DEPENDENCE_TOL,
    EIGEN_CLAMP,
    IDENTITY_TOL,
    MAX_OBSERVABLE_QUBITS,
    ORACLE_MAX_QUBITS,
    SYMMETRY_TOL,
)

logger = logging.getLogger(__name__)

_MATERIALIZE_BLOCK = 256

# Real Pauli matrices; Y is imaginary and has no place in a real-amplitude toolkit.
_PAULI: dict[str, FloatArray] = {
    'I': np.eye(2),
    'X': np.array([[0.0, 1.0], [1.0, 0.0]]),
    'Z': np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def _trace_norm(matrix: FloatArray) -> float:
    eigs = sla.eigvalsh(matrix)
    eigs[np.abs(eigs) < EIGEN_CLAMP] = 0.0
    return float(np.abs(eigs).sum())


def _weighted_gram(coords: Any, weights: FloatArray) -> FloatArray:
    """Return coords^T diag(weights) coords as a dense array."""
    if sp.issparse(coords):
        weighted = sp.diags_array(weights) @ coords
        return np.asarray((coords.T @ weighted).toarray())
    return np.asarray((coords.T * weights) @ coords)


def _row_norms_sq(coords: Any) -> FloatArray:
    if sp.issparse(coords):
        return np.asarray(coords.multiply(coords).sum(axis=1)).ravel()
    return np.einsum('ij,ij->i', coords, coords)


@dataclass(frozen=True, eq=False)
class DensityRepr:
    """Low-rank mixed state ``sum_k w_k |phi_k><phi_k|``.

    The states are stored as rows of ``coords``. When ``basis`` is None those rows are the
    amplitude vectors themselves; otherwise ``basis`` has orthonormal rows spanning the
    states and row k of ``coords`` holds phi_k in that basis. Either array may be a scipy
    sparse array.

    Parameters:
        weights: Nonnegative weights summing to 1 within 1e-12.
        coords: State rows (r x 2^n) or basis coordinates (r x d).
        n_qubits: Qubit count of the represented states.
        basis: Optional orthonormal rows (d x 2^n).
    """

    weights: FloatArray
    coords: Any
    n_qubits: int
    basis: Any = None

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        if weights.ndim != 1 or weights.shape[0] != self.coords.shape[0]:
            raise ValueError(
                f'dimension mismatch: {weights.shape[0]} weights for '
                f'{self.coords.shape[0]} states'
            )
        if np.any(weights < 0.0):
            raise ValueError('weights must be nonnegative')
        if abs(float(weights.sum()) - 1.0) > IDENTITY_TOL:
            raise ValueError(f'weights sum to {float(weights.sum())!r}, not 1')
        width = self.dim if self.basis is None else self.basis.shape[0]
        if self.coords.shape[1] != width:
            raise ValueError(
                f'dimension mismatch: coordinates have {self.coords.shape[1]} columns, '
                f'expected {width}'
            )
        if self.basis is not None and self.basis.shape[1] != self.dim:
            raise ValueError(
                f'dimension mismatch: basis rows have length {self.basis.shape[1]}, '
                f'expected {self.dim}'
            )

    @classmethod
    def from_pure(cls, psi: AmplitudeVector) -> DensityRepr:
        """Return the rank-one representation of ``|psi><psi|``."""
        return cls(np.ones(1), psi.values[np.newaxis, :].copy(), psi.n_qubits)

    @classmethod
    def from_states(
        cls, weights: Sequence[float] | FloatArray, states: Sequence[AmplitudeVector]
    ) -> DensityRepr:
        """Build a mixture from explicit (weight, state) pairs.

        Parameters:
            weights: Mixture weights summing to 1.
            states: Unit-norm states on a common qubit count.
        """
        if not states:
            raise ValueError('a mixture needs at least one state')
        n_qubits = states[0].n_qubits
        if any(s.n_qubits != n_qubits for s in states):
            raise ValueError('dimension mismatch: states have different qubit counts')
        coords = np.vstack([s.values for s in states])
        return cls(np.asarray(weights, dtype=np.float64), coords, n_qubits)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension 2^n."""
        return 1 << self.n_qubits

    @property
    def rank_bound(self) -> int:
        """Number of stored states."""
        return int(self.weights.shape[0])

    def state_vectors(self, rows: slice | npt.NDArray[np.int64] | None = None) -> FloatArray:
        """Return the selected states as dense rows of length 2^n."""
        chosen = self.coords if rows is None else self.coords[rows]
        if self.basis is None:
            out = chosen.toarray() if sp.issparse(chosen) else chosen
            return np.asarray(out, dtype=np.float64)
        product = self.basis.T @ chosen.T
        if sp.issparse(product):
            product = product.toarray()
        return np.asarray(product, dtype=np.float64).T

    def iter_blocks(self) -> Iterator[tuple[FloatArray, FloatArray]]:
        """Yield (weights, dense state rows) in blocks of bounded size."""
        for start in range(0, self.rank_bound, _MATERIALIZE_BLOCK):
            block = slice(start, min(start + _MATERIALIZE_BLOCK, self.rank_bound))
            yield self.weights[block], self.state_vectors(block)

    @property
    def pairs(self) -> list[tuple[float, AmplitudeVector]]:
        """Materialized (weight, state) pairs."""
        out: list[tuple[float, AmplitudeVector]] = []
        for weights, rows in self.iter_blocks():
            for w, row in zip(weights, rows, strict=True):
                out.append((float(w), AmplitudeVector(self.n_qubits, row)))
        return out

    def trace(self) -> float:
        """Return ``sum_k w_k ||phi_k||^2``."""
        return float(np.dot(self.weights, _row_norms_sq(self.coords)))

    def expectation(self, obs: Observable) -> float:
        """Return ``Tr[rho O]``."""
        obs.check_qubits(self.n_qubits)
        total = 0.0
        for weights, rows in self.iter_blocks():
            applied = obs.apply(rows)
            total += float(np.dot(weights, np.einsum('ij,ij->i', rows, applied)))
        return total


@dataclass(frozen=True, eq=False)
class Observable:
    """Real-symmetric observable on the lowest k qubits, extended by identity.

    Qubit i is bit i of the basis index, so the matrix acts on ``index mod 2^k``.

    Parameters:
        matrix: Real symmetric matrix of side 2^k, k <= 10.
        label: Display name.
    """

    matrix: FloatArray
    label: str = ''
    spectral_norm: float = field(init=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f'observable must be a square matrix, got shape {matrix.shape}')
        side = matrix.shape[0]
        if side < 2 or side & (side - 1):
            raise ValueError(f'observable side must be a power of two >= 2, got {side}')
        if side > 1 << MAX_OBSERVABLE_QUBITS:
            raise ValueError(
                f'observable acts on more than {MAX_OBSERVABLE_QUBITS} qubits (side {side})'
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError('observable has non-finite entries')
        asym = float(np.max(np.abs(matrix - matrix.T)))
        if asym > SYMMETRY_TOL:
            raise ValueError(f'observable is not symmetric (max deviation {asym:.3g})')
        matrix = 0.5 * (matrix + matrix.T)
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'spectral_norm', float(np.max(np.abs(sla.eigvalsh(matrix)))))

    @classmethod
    def from_matrix(cls, matrix: npt.ArrayLike, label: str = 'matrix') -> Observable:
        return cls(np.asarray(matrix, dtype=np.float64), label)

    @property
    def k_qubits(self) -> int:
        return int(self.matrix.shape[0]).bit_length() - 1

    def check_qubits(self, n_qubits: int) -> None:
        if self.k_qubits > n_qubits:
            raise ValueError(
                f'dimension mismatch: observable acts on {self.k_qubits} qubits, '
                f'state has {n_qubits}'
            )

    def apply(self, vectors: FloatArray) -> FloatArray:
        """Apply O (tensored with identity on the high qubits) to one vector or to rows."""
        side = self.matrix.shape[0]
        shape = vectors.shape
        blocks = vectors.reshape(*shape[:-1], shape[-1] // side, side)
        return np.asarray(blocks @ self.matrix.T).reshape(shape)


def pauli_observable(kind: str, qubit: int = 0) -> Observable:
    """Return the real Pauli ``kind`` (``I``, ``X`` or ``Z``) on ``qubit``.

    Parameters:
        kind: Pauli letter.
        qubit: Target qubit (bit position in the basis index).

    Returns:
        Observable on the lowest ``qubit + 1`` qubits.
    """
    letter = kind.strip().upper()
    if letter not in _PAULI:
        raise ValueError(f'unsupported Pauli {kind!r}; use I, X or Z')
    if not 0 <= qubit < MAX_OBSERVABLE_QUBITS:
        raise ValueError(f'qubit must be in 0..{MAX_OBSERVABLE_QUBITS - 1}, got {qubit}')
    matrix = np.kron(_PAULI[letter], np.eye(1 << qubit))
    return Observable(matrix, f'{letter}{qubit}')


def read_observable(path: str | Path) -> Observable:
    """Read an observable file ``{"k_qubits": k, "rows": [[...], ...]}``.

    Raises:
        OSError: If the file cannot be read.
        ValueError: On syntax errors, a shape that disagrees with k_qubits, or asymmetry.
    """
    text = Path(path).read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f'{path}: line {e.lineno}: invalid observable file: {e.msg}') from e
    if not isinstance(data, dict) or 'rows' not in data or 'k_qubits' not in data:
        raise ValueError(f'{path}: observable file needs "k_qubits" and "rows" fields')
    k = data['k_qubits']
    try:
        matrix = np.asarray(data['rows'], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ValueError(f'{path}: rows must be an array of numeric arrays') from e
    if not isinstance(k, int) or matrix.shape != (1 << k, 1 << k):
        raise ValueError(f'{path}: k_qubits={k!r} does not match rows of shape {matrix.shape}')
    return Observable(matrix, f'file:{path}')


def expectation(psi: AmplitudeVector, obs: Observable) -> float:
    """Return ``<psi|O|psi>``."""
    obs.check_qubits(psi.n_qubits)
    return float(np.dot(psi.values, obs.apply(psi.values)))


def pure_trace_distance(psi: AmplitudeVector, phi: AmplitudeVector) -> float:
    """Return ``2 sqrt(1 - <psi|phi>^2)`` clamped to [0, 2].

    Evaluated as twice the norm of the component of psi orthogonal to phi, which keeps
    full relative precision for nearly equal states.
    """
    if psi.dim != phi.dim:
        raise ValueError(f'dimension mismatch: {psi.dim} vs {phi.dim}')
    overlap = float(np.dot(psi.values, phi.values))
    perp = psi.values - overlap * phi.values
    return min(2.0, 2.0 * float(np.linalg.norm(perp)))


def truncation_error(p: Partition, psi: AmplitudeVector) -> float:
    """Return the trace distance between psi and its renormalized kept part.

    Equals 2 * eps exactly; the closed form is asserted against the computed distance.

    Raises:
        ValueError: If A is empty.
        RuntimeError: If the closed form and the direct distance disagree beyond 1e-12.
    """
    if p.k_kept == 0:
        raise ValueError('empty kept set')
    if p.tail_size == 0:
        return 0.0
    dist = pure_trace_distance(psi, psi.kept_vector(p.set_a))
    if abs(dist - 2.0 * p.eps) > IDENTITY_TOL:
        raise RuntimeError(
            f'truncation distance {dist!r} disagrees with 2*eps = {2.0 * p.eps!r}'
        )
    return dist


def _gram_trace_distance(rho: DensityRepr, psi: AmplitudeVector) -> float:
    # Canonical orthogonalization: nonzero eigenvalues of sum_k w_k v_k v_k^T equal those of
    # C W C^T with G = V V^T = U diag(lam) U^T and C = diag(sqrt(lam)) U^T.
    vectors = np.vstack([psi.values[np.newaxis, :], rho.state_vectors()])
    signs = np.concatenate([[-1.0], rho.weights])
    lam, vecs = sla.eigh(vectors @ vectors.T)
    keep = lam > (DEPENDENCE_TOL**2) * max(float(lam[-1]), 0.0)
    if not np.any(keep):
        return 0.0
    c = np.sqrt(lam[keep])[:, np.newaxis] * vecs[:, keep].T
    dropped = int(keep.size - keep.sum())
    if dropped:
        logger.debug('Dropped %d dependent spanning vectors', dropped)
    return _trace_norm((c * signs) @ c.T)


def _basis_trace_distance(rho: DensityRepr, psi: AmplitudeVector) -> float:
    d = rho.basis.shape[0]
    c_psi = np.asarray(rho.basis @ psi.values, dtype=np.float64).ravel()
    residual = psi.values - np.asarray(rho.basis.T @ c_psi).ravel()
    r_norm = float(np.linalg.norm(residual))
    extra = 1 if r_norm > DEPENDENCE_TOL else 0
    diff = np.zeros((d + extra, d + extra))
    diff[:d, :d] = _weighted_gram(rho.coords, rho.weights)
    if extra:
        c_psi = np.append(c_psi, r_norm)
    diff -= np.outer(c_psi, c_psi)
    return _trace_norm(diff)


def mixed_trace_distance(rho: DensityRepr, psi: AmplitudeVector) -> float:
    """Return the exact trace norm of ``rho - |psi><psi|``.

    The difference operator lives in the span of psi and the mixture states, so it is
    projected onto an orthonormal basis of that span (at most rank + 1 dimensions) and the
    absolute eigenvalues of the small projected matrix are summed. Dependent spanning
    vectors (relative tolerance 1e-10) are dropped; eigenvalues below 1e-14 count as zero.

    Parameters:
        rho: Low-rank mixture.
        psi: Pure target state.

    Returns:
        Distance in [0, 2].
    """
    if rho.n_qubits != psi.n_qubits:
        raise ValueError(f'dimension mismatch: {rho.n_qubits} vs {psi.n_qubits} qubits')
    if rho.basis is None:
        dist = _gram_trace_distance(rho, psi)
    else:
        dist = _basis_trace_distance(rho, psi)
    return min(2.0, max(0.0, dist))


def dense_trace_distance_oracle(rho: DensityRepr, psi: AmplitudeVector) -> float:
    """Return the trace distance by full eigendecomposition of the 2^n x 2^n difference.

    Raises:
        ValueError: ``oracle size limit`` for more than 10 qubits.
    """
    if psi.n_qubits > ORACLE_MAX_QUBITS:
        raise ValueError(
            f'oracle size limit: {psi.n_qubits} qubits exceeds {ORACLE_MAX_QUBITS}'
        )
    if rho.n_qubits != psi.n_qubits:
        raise ValueError(f'dimension mismatch: {rho.n_qubits} vs {psi.n_qubits} qubits')
    states = rho.state_vectors()
    diff = (states.T * rho.weights) @ states - np.outer(psi.values, psi.values)
    return _trace_norm(diff)


def observable_error(
    rho: DensityRepr,
    psi: AmplitudeVector,
    obs: Observable,
    *,
    trace_distance: float | None = None,
) -> float:
    """Return ``|Tr[(|psi><psi| - rho) O]|`` and assert the Holder bound.

    Parameters:
        rho: Mixture.
        psi: Target state.
        obs: Observable.
        trace_distance: Precomputed ``mixed_trace_distance(rho, psi)``, if available.

    Returns:
        Absolute expectation error.

    Raises:
        ValueError: On a qubit-count mismatch.
        RuntimeError: If the error exceeds ``||O|| * trace distance``.
    """
    if rho.n_qubits != psi.n_qubits:
        raise ValueError(f'dimension mismatch: {rho.n_qubits} vs {psi.n_qubits} qubits')
    err = abs(expectation(psi, obs) - rho.expectation(obs))
    dist = mixed_trace_distance(rho, psi) if trace_distance is None else trace_distance
    limit = obs.spectral_norm * dist
    if err > limit + BOUND_TOL * max(1.0, obs.spectral_norm):
        raise RuntimeError(
            f'observable error {err!r} exceeds ||O|| * distance = {limit!r} ({obs.label})'
        )
    return err
