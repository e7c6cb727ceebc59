"""Randomized truncated state preparation: the ensemble of amplified members.

For a partition (A, B) of a target state, member m (one per tail index in B) keeps every
A amplitude and replaces the whole tail by a single amplified amplitude
``alpha_m / p_m`` at index m. With the canonical probabilities ``p_m = |alpha_m| / S`` the
amplified amplitude is ``sgn(alpha_m) * S`` and all members share the norm
``Gamma = sqrt(1 - eps^2 + S^2)``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from randprep.amplitudes import AmplitudeVector, FloatArray, IndexArray, Partition
from randprep.config import get_max_dense_members
from randprep.constants import IDENTITY_TOL
from randprep.metrics import DensityRepr

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    """One (p_m, normalized member state) pair.

    Parameters:
        index_m: Tail basis index carried by this member.
        probability: Selection probability p_m.
        amplified_coefficient: alpha_m / p_m.
        state: Normalized member state.
        gamma_m: Norm of the unnormalized member state.
    """

    index_m: int
    probability: float
    amplified_coefficient: float
    state: AmplitudeVector
    gamma_m: float


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Ensemble of amplified members built from one partition.

    Member arrays are indexed in increasing tail-index order. In lazy mode member states
    are rebuilt from the partition on demand instead of being stored.

    Parameters:
        partition: Partition the ensemble was built from.
        target: The target state psi.
        indices: Tail indices m (set B).
        probabilities: p_m per member.
        amplified: alpha_m / p_m per member.
        gammas: Member norms Gamma_m.
        gamma: Shared normalization; NaN when the members do not share one.
        canonical: True when p_m = |alpha_m| / S.
        lazy: True when member states are not stored.
    """

    partition: Partition
    target: AmplitudeVector
    indices: IndexArray
    probabilities: FloatArray
    amplified: FloatArray
    gammas: FloatArray
    gamma: float
    canonical: bool
    lazy: bool
    kept_part: FloatArray
    _states: FloatArray | None = None

    @property
    def size(self) -> int:
        """Number of members |B|."""
        return int(self.indices.shape[0])

    def member_vector(self, i: int) -> FloatArray:
        """Return the dense normalized state of member ``i``."""
        if self._states is not None:
            return self._states[i]
        vec = self.kept_part.copy()
        vec[self.indices[i]] = self.amplified[i]
        return vec / self.gammas[i]

    def member_state(self, i: int) -> AmplitudeVector:
        """Return member ``i`` as an AmplitudeVector."""
        return AmplitudeVector(
            self.target.n_qubits, self.member_vector(i), f'{self.target.label}#m{self.indices[i]}'
        )

    def member(self, i: int) -> EnsembleMember:
        return EnsembleMember(
            index_m=int(self.indices[i]),
            probability=float(self.probabilities[i]),
            amplified_coefficient=float(self.amplified[i]),
            state=self.member_state(i),
            gamma_m=float(self.gammas[i]),
        )

    @property
    def members(self) -> list[EnsembleMember]:
        """All members, materialized."""
        return [self.member(i) for i in range(self.size)]

    def state_rows(self, start: int, stop: int) -> FloatArray:
        """Return members ``start..stop-1`` as dense rows."""
        if self._states is not None:
            return self._states[start:stop]
        count = stop - start
        rows = np.tile(self.kept_part, (count, 1))
        rows[np.arange(count), self.indices[start:stop]] = self.amplified[start:stop]
        rows /= self.gammas[start:stop, np.newaxis]
        return rows

    def iter_states(self) -> Iterator[FloatArray]:
        """Yield dense member states in member order."""
        for i in range(self.size):
            yield self.member_vector(i)

    def mean_state(self) -> FloatArray:
        """Return ``sum_m p_m psi~_m`` (equal to psi / Gamma for canonical ensembles)."""
        scale = self.probabilities / self.gammas
        out = self.kept_part * float(scale.sum())
        out[self.indices] += scale * self.amplified
        return out


def _check_probabilities(raw: Sequence[float] | FloatArray, size: int) -> FloatArray:
    probs = np.asarray(raw, dtype=np.float64)
    if probs.shape != (size,):
        raise ValueError(f'dimension mismatch: {probs.shape[0]} probabilities for {size} members')
    if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
        raise ValueError('probabilities must be positive and finite')
    total = float(probs.sum())
    if abs(total - 1.0) > IDENTITY_TOL:
        logger.info('Rescaling custom probabilities summing to %r', total)
    return probs / total


def build_ensemble(
    p: Partition,
    psi: AmplitudeVector,
    *,
    probabilities: Sequence[float] | FloatArray | None = None,
    lazy: bool | None = None,
) -> Ensemble:
    """Build the randomized ensemble for partition ``p`` of ``psi``.

    Parameters:
        p: Partition of ``psi`` with nonempty A and B.
        psi: Target state.
        probabilities: Optional non-canonical selection probabilities over B, in tail-index
            order. No error bound is claimed for such ensembles.
        lazy: Force lazy (True) or stored (False) member states; by default lazy mode is
            used when |B| exceeds ``RANDPREP_MAX_MEMBERS``.

    Returns:
        Ensemble with one member per tail index.

    Raises:
        ValueError: ``nothing to randomize`` if B is empty, ``empty kept set`` if A is empty,
            or on a partition/state mismatch.
    """
    if p.n_qubits != psi.n_qubits:
        raise ValueError(
            f'dimension mismatch: partition for {p.n_qubits} qubits, state has {psi.n_qubits}'
        )
    if p.k_kept == 0:
        raise ValueError('empty kept set')
    if p.tail_size == 0:
        raise ValueError('nothing to randomize: the tail is empty; prepare psi deterministically')
    alpha = psi.values[p.set_b]
    s_tail = p.ell1_tail
    canonical = probabilities is None
    if probabilities is None:
        probs = np.abs(alpha) / s_tail
        amplified = np.sign(alpha) * s_tail
    else:
        probs = _check_probabilities(probabilities, p.tail_size)
        amplified = alpha / probs
    gammas = np.sqrt(p.kept_weight + amplified**2)
    gamma = math.sqrt(p.kept_weight + s_tail**2) if canonical else math.nan

    kept_part = np.zeros(psi.dim)
    kept_part[p.set_a] = psi.values[p.set_a]
    kept_part.setflags(write=False)

    if lazy is None:
        cap = get_max_dense_members()
        lazy = p.tail_size > cap
        if lazy:
            logger.warning(
                'Tail has %d members (cap %d); member states are built on demand',
                p.tail_size,
                cap,
            )
    states: npt.NDArray[np.float64] | None = None
    if not lazy:
        states = np.tile(kept_part, (p.tail_size, 1))
        states[np.arange(p.tail_size), p.set_b] = amplified
        states /= gammas[:, np.newaxis]
        states.setflags(write=False)

    for arr in (probs, amplified, gammas):
        arr.setflags(write=False)
    logger.info(
        'Built %s ensemble: %d members, K=%d, eps=%.3e, S=%.3e, gamma=%.12g',
        'canonical' if canonical else 'custom',
        p.tail_size,
        p.k_kept,
        p.eps,
        s_tail,
        gamma,
    )
    return Ensemble(
        partition=p,
        target=psi,
        indices=p.set_b,
        probabilities=probs,
        amplified=amplified,
        gammas=gammas,
        gamma=gamma,
        canonical=canonical,
        lazy=lazy,
        kept_part=kept_part,
        _states=states,
    )


def reconstruction_residual(e: Ensemble, psi: AmplitudeVector) -> float:
    """Return ``|| sum_m p_m psi_m - psi ||`` over the unnormalized members.

    The identity is exact in exact arithmetic, so the result is round-off sized.
    """
    if psi.dim != e.target.dim:
        raise ValueError(f'dimension mismatch: {psi.dim} vs {e.target.dim}')
    mean = e.kept_part * float(e.probabilities.sum())
    mean[e.indices] += e.probabilities * e.amplified
    return float(np.linalg.norm(mean - psi.values))


def identity_deviations(e: Ensemble, psi: AmplitudeVector) -> dict[str, float]:
    """Return the deviations of the exact algebraic identities of a canonical ensemble.

    Keys: ``sum_p`` (|sum p_m - 1|), ``gamma_spread`` (max |Gamma_m - Gamma|),
    ``gamma_formula`` (|Gamma - sqrt(1 - eps^2 + S^2)|), ``reconstruction``
    (:func:`reconstruction_residual`) and ``mean_state`` (||sum p_m psi~_m - psi/Gamma||).
    """
    p = e.partition
    gamma_formula = math.sqrt(max(0.0, 1.0 - p.eps**2 + p.ell1_tail**2))
    return {
        'sum_p': abs(float(e.probabilities.sum()) - 1.0),
        'gamma_spread': float(np.max(np.abs(e.gammas - e.gamma))),
        'gamma_formula': abs(e.gamma - gamma_formula),
        'reconstruction': reconstruction_residual(e, psi),
        'mean_state': float(np.linalg.norm(e.mean_state() - psi.values / e.gamma)),
    }


def verify_identities(e: Ensemble, psi: AmplitudeVector, tol: float = IDENTITY_TOL) -> None:
    """Raise RuntimeError if any identity of a canonical ensemble deviates beyond ``tol``."""
    if not e.canonical:
        raise ValueError('identities hold only for canonical probabilities')
    failed = {k: v for k, v in identity_deviations(e, psi).items() if not v <= tol}
    if failed:
        raise RuntimeError(f'ensemble identities violated beyond {tol:g}: {failed}')


def mixture_density(e: Ensemble) -> DensityRepr:
    """Return ``rho_approx = sum_m p_m |psi~_m><psi~_m|`` in low-rank form.

    The representation uses the orthonormal basis ``{psi_A / ||psi_A||} + {e_m : m in B}``;
    each member has two nonzero coordinates in it.
    """
    size = e.size
    kept_norm = math.sqrt(e.partition.kept_weight)
    set_a = e.partition.set_a
    basis_rows = np.concatenate([np.zeros(set_a.size, dtype=np.int64), np.arange(1, size + 1)])
    basis_cols = np.concatenate([set_a, e.indices])
    basis_vals = np.concatenate([e.kept_part[set_a] / kept_norm, np.ones(size)])
    basis = sp.csr_array((basis_vals, (basis_rows, basis_cols)), shape=(size + 1, e.target.dim))

    member_rows = np.repeat(np.arange(size), 2)
    member_cols = np.column_stack([np.zeros(size, dtype=np.int64), np.arange(1, size + 1)]).ravel()
    member_vals = np.column_stack([kept_norm / e.gammas, e.amplified / e.gammas]).ravel()
    coords = sp.csr_array((member_vals, (member_rows, member_cols)), shape=(size, size + 1))
    return DensityRepr(e.probabilities, coords, e.target.n_qubits, basis)
