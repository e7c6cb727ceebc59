"""Monte Carlo execution of the randomized protocol.

Members are drawn i.i.d. from the selection probabilities by inverse CDF over members in
increasing tail-index order, using numpy's PCG64 generator seeded with the run seed.
Observables are simulated at expectation level: each draw contributes the member's exact
expectation value, so the only randomness is the classical choice of member.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from randprep.amplitudes import FloatArray
from randprep.config import get_thread_count
from randprep.constants import SAMPLER_MIN_CHECKED_SHOTS, SAMPLER_TV_SIGMAS
from randprep.ensemble import Ensemble
from randprep.metrics import Observable

logger = logging.getLogger(__name__)

_ROW_BLOCK = 256


@dataclass(frozen=True)
class SampleRun:
    """Result of one seeded sampling run.

    Parameters:
        seed: Run seed.
        shots: Number of draws M.
        draw_counts: Tail index m -> number of draws (members never drawn are omitted).
        estimate: Mean of the per-draw values.
        std_error: Sample standard deviation / sqrt(M); 0 for M = 1.
        exact_value: Exact mixture value of the estimated quantity, when known.
        workers: Number of seed streams the draws were split across.
    """

    seed: int
    shots: int
    draw_counts: dict[int, int] = field(default_factory=dict)
    estimate: float = 1.0
    std_error: float = 0.0
    exact_value: float | None = None
    workers: int = 1


def _inverse_cdf(
    probabilities: FloatArray, shots: int, rng: np.random.Generator
) -> npt.NDArray[np.int64]:
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0
    positions = np.searchsorted(cdf, rng.random(shots), side='right')
    return np.minimum(positions, probabilities.shape[0] - 1).astype(np.int64)


def _draw_positions(e: Ensemble, shots: int, seed: int, workers: int) -> npt.NDArray[np.int64]:
    if workers == 1:
        return _inverse_cdf(e.probabilities, shots, np.random.default_rng(seed))
    chunks = [int(c) for c in np.diff(np.linspace(0, shots, workers + 1).round())]

    def run(worker_id: int) -> npt.NDArray[np.int64]:
        rng = np.random.default_rng([seed, worker_id])
        return _inverse_cdf(e.probabilities, chunks[worker_id], rng)

    with ThreadPoolExecutor(max_workers=min(workers, get_thread_count())) as pool:
        parts = list(pool.map(run, range(workers)))
    return np.concatenate(parts)


def _counts(e: Ensemble, positions: npt.NDArray[np.int64]) -> dict[int, int]:
    counts = np.bincount(positions, minlength=e.size)
    return {int(e.indices[i]): int(c) for i, c in enumerate(counts) if c}


def _check_run_args(shots: int, workers: int) -> None:
    if shots < 1:
        raise ValueError(f'shots must be at least 1, got {shots}')
    if not 1 <= workers <= shots:
        raise ValueError(f'workers must be in 1..shots, got {workers}')


def sample_members(e: Ensemble, shots: int, seed: int, *, workers: int = 1) -> SampleRun:
    """Draw ``shots`` member indices.

    Identical (ensemble, shots, seed, workers) give identical counts. With ``workers > 1``
    the draws are split into that many streams seeded by ``(seed, worker_id)``.

    Returns:
        SampleRun whose estimate is the sampled trace (always 1).
    """
    _check_run_args(shots, workers)
    positions = _draw_positions(e, shots, seed, workers)
    return SampleRun(
        seed=seed,
        shots=shots,
        draw_counts=_counts(e, positions),
        estimate=1.0,
        std_error=0.0,
        exact_value=1.0,
        workers=workers,
    )


def member_expectations(e: Ensemble, obs: Observable) -> FloatArray:
    """Return ``<psi~_m|O|psi~_m>`` for every member.

    Each value is divided by the computed ``<psi~_m|psi~_m>``, so O = I gives exactly 1.
    """
    obs.check_qubits(e.target.n_qubits)
    values = np.empty(e.size)
    for start in range(0, e.size, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, e.size)
        rows = np.ascontiguousarray(e.state_rows(start, stop))
        applied = obs.apply(rows)
        norms_sq = np.einsum('ij,ij->i', rows, rows)
        values[start:stop] = np.einsum('ij,ij->i', rows, applied) / norms_sq
    return values


def estimate_observable(
    e: Ensemble, obs: Observable, shots: int, seed: int, *, workers: int = 1
) -> SampleRun:
    """Estimate ``Tr[rho_approx O]`` from ``shots`` seeded member draws.

    Raises:
        ValueError: If the observable acts on more qubits than the state has.
    """
    _check_run_args(shots, workers)
    values = member_expectations(e, obs)
    positions = _draw_positions(e, shots, seed, workers)
    samples = values[positions]
    estimate = float(samples.mean())
    std_error = float(samples.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    exact = float(np.average(values, weights=e.probabilities))
    logger.info(
        'Sampled %s: estimate %.10g +/- %.3g (exact %.10g, M=%d, seed=%d)',
        obs.label,
        estimate,
        std_error,
        exact,
        shots,
        seed,
    )
    return SampleRun(
        seed=seed,
        shots=shots,
        draw_counts=_counts(e, positions),
        estimate=estimate,
        std_error=std_error,
        exact_value=exact,
        workers=workers,
    )


def total_variation(run: SampleRun, e: Ensemble) -> float:
    """Return the total-variation distance between draw frequencies and p_m."""
    freq = np.array([run.draw_counts.get(int(m), 0) for m in e.indices], dtype=np.float64)
    return 0.5 * float(np.abs(freq / run.shots - e.probabilities).sum())


def frequency_check(run: SampleRun, e: Ensemble) -> bool | None:
    """Check ``TV <= 5 sqrt(|B| / M)``; returns None (flagged) below 10^4 shots."""
    if run.shots < SAMPLER_MIN_CHECKED_SHOTS:
        logger.warning(
            'Frequency check skipped: %d shots is below %d', run.shots, SAMPLER_MIN_CHECKED_SHOTS
        )
        return None
    limit = SAMPLER_TV_SIGMAS * math.sqrt(e.size / run.shots)
    tv = total_variation(run, e)
    if tv > limit:
        logger.warning('Draw frequencies off: TV %.4g exceeds %.4g', tv, limit)
    return tv <= limit
