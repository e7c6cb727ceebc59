"""Mixing-lemma quantities, decay-model constants, fits, and resource plans.

``a`` is the worst member deviation ``max_m ||psi~_m - psi||`` and ``b`` the bias
``||sum_m p_m psi~_m - psi||``; the mixing lemma bounds the exact trace distance of the
mixture by ``a^2 + 2b``. Both are computed from the member vectors directly; closed forms
only serve as cross-checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from randprep.amplitudes import AmplitudeVector, FloatArray, Partition
from randprep.config import get_t_gates_per_bit
from randprep.constants import (
    BOUND_TOL,
    DEGENERATE_RATE_MARGIN,
    FIT_MIN_NONZERO,
    FIT_SKIP_FRACTION,
    IDENTITY_TOL,
    SLACK_A_COEFF,
    SLACK_MAX_C,
    SLACK_MAX_EPS,
    ZETA_TOL,
)
from randprep.ensemble import Ensemble
from randprep.metrics import DensityRepr

logger = logging.getLogger(__name__)

DecayKind = Literal['geometric', 'power_law']
Scheme = Literal['deterministic', 'randomized', 'exact']

_ROW_BLOCK = 256


@dataclass(frozen=True)
class MixingBounds:
    """Mixing-lemma inputs and every derived bound for one ensemble.

    Parameters:
        a_max: max_m ||psi~_m - psi||.
        b_bias: ||sum_m p_m psi~_m - psi||.
        lemma_bound: a_max^2 + 2 b_bias.
        theory_curve: ((c+2)^2 + c/2) eps^2.
        appendix_a_bound: (c+2) eps.
        gamma: Shared normalization (NaN for custom probabilities).
        eps: Tail l2 norm.
        ell1_tail: Tail l1 norm S.
        c_ratio: S / eps.
        b_closed_form: |1/Gamma - 1| (NaN for custom probabilities).
        main_text_a_bound: (c+1) eps.
        lemma_curve: ((c+2)^2 + c^2) eps^2, the mixing lemma evaluated at the a-bound.
    """

    a_max: float
    b_bias: float
    lemma_bound: float
    theory_curve: float
    appendix_a_bound: float
    gamma: float
    eps: float
    ell1_tail: float
    c_ratio: float
    b_closed_form: float
    main_text_a_bound: float
    lemma_curve: float


@dataclass(frozen=True)
class DecayModel:
    """Fitted or prescribed decay of sorted amplitude magnitudes.

    ``geometric``: |alpha|_(k) ~ C r^(k-1), 0 < r < 1. ``power_law``: |alpha|_(k) ~ C k^(-r),
    r > 1/2.

    Parameters:
        kind: Decay family.
        rate: r for the family.
        prefactor: C > 0.
        fit_residual: RMS residual of the log-magnitude fit (0 for prescribed models, inf
            for a degenerate fit).
        dim: Number of basis states the model spans, if known.
    """

    kind: DecayKind
    rate: float
    prefactor: float = 1.0
    fit_residual: float = 0.0
    dim: int | None = None

    def __post_init__(self) -> None:
        if self.kind == 'geometric':
            if not 0.0 < self.rate < 1.0:
                raise ValueError(f'geometric rate must be in (0, 1), got {self.rate!r}')
        elif self.kind == 'power_law':
            if not self.rate > 0.5:
                raise ValueError(f'power-law rate must exceed 1/2, got {self.rate!r}')
        else:
            raise ValueError(f'unknown decay kind {self.kind!r}')
        if not self.prefactor > 0.0:
            raise ValueError(f'prefactor must be positive, got {self.prefactor!r}')


@dataclass(frozen=True)
class ResourcePlan:
    """Kept-amplitude counts needed to reach a target error.

    Parameters:
        tau: Target trace-distance scale.
        k_det: Smallest K with eps(K) <= tau.
        k_rand: Smallest K with eps(K)^2 <= tau.
        ratio: k_det / k_rand.
        t_count_det: Model T count for deterministic truncation at k_det.
        t_count_rand: Model T count for one randomized member at k_rand.
    """

    tau: float
    k_det: int
    k_rand: int
    ratio: float
    t_count_det: float
    t_count_rand: float


@dataclass(frozen=True)
class L1Verdict:
    """Whether a partition satisfies the l1-smallness condition S <= c eps.

    Parameters:
        c_ratio: Observed S / eps.
        cauchy_schwarz_ceiling: sqrt(|B|), the largest possible c for this tail size.
        model_constant: Decay-model constant c(r) (inf when the model's l1 sum diverges,
            None without a model).
        c_max: Accepted constant.
        satisfied: c_ratio <= c_max.
    """

    c_ratio: float
    cauchy_schwarz_ceiling: float
    model_constant: float | None
    c_max: float
    satisfied: bool


def _max_member_deviation(e: Ensemble, psi: AmplitudeVector) -> float:
    worst = 0.0
    for start in range(0, e.size, _ROW_BLOCK):
        rows = e.state_rows(start, min(start + _ROW_BLOCK, e.size))
        worst = max(worst, float(np.max(np.linalg.norm(rows - psi.values, axis=1))))
    return worst


def compute_mixing_bounds(e: Ensemble, psi: AmplitudeVector) -> MixingBounds:
    """Compute a, b, the mixing-lemma bound, and the reference curves for an ensemble.

    Parameters:
        e: Ensemble built from ``psi``.
        psi: Target state.

    Returns:
        MixingBounds.
    """
    if psi.dim != e.target.dim:
        raise ValueError(f'dimension mismatch: {psi.dim} vs {e.target.dim}')
    p = e.partition
    a_max = _max_member_deviation(e, psi)
    b_bias = float(np.linalg.norm(e.mean_state() - psi.values))
    if e.canonical:
        b_closed = abs(1.0 / e.gamma - 1.0)
        if abs(b_bias - b_closed) > IDENTITY_TOL:
            logger.warning(
                'Bias %r differs from |1/gamma - 1| = %r by more than %g',
                b_bias,
                b_closed,
                IDENTITY_TOL,
            )
    else:
        b_closed = math.nan
        logger.warning('Custom probabilities: closed-form checks and bound guarantees skipped')
    eps, c = p.eps, p.c_ratio
    bounds = MixingBounds(
        a_max=a_max,
        b_bias=b_bias,
        lemma_bound=a_max**2 + 2.0 * b_bias,
        theory_curve=((c + 2.0) ** 2 + c / 2.0) * eps**2,
        appendix_a_bound=(c + 2.0) * eps,
        gamma=e.gamma,
        eps=eps,
        ell1_tail=p.ell1_tail,
        c_ratio=c,
        b_closed_form=b_closed,
        main_text_a_bound=(c + 1.0) * eps,
        lemma_curve=((c + 2.0) ** 2 + c**2) * eps**2,
    )
    logger.debug('Mixing bounds: %s', bounds)
    return bounds


def mixture_lemma_inputs(rho: DensityRepr, psi: AmplitudeVector) -> tuple[float, float]:
    """Return the mixing-lemma ``(a, b)`` for any low-rank mixture of unit vectors.

    ``a`` is the largest ``||phi_k - psi||`` over stored states with positive weight and
    ``b`` is ``||sum_k w_k phi_k - psi||``; ``a^2 + 2b`` then bounds the trace distance.
    """
    if rho.n_qubits != psi.n_qubits:
        raise ValueError(f'dimension mismatch: {rho.n_qubits} vs {psi.n_qubits} qubits')
    worst = 0.0
    mean = np.zeros(psi.dim)
    for weights, rows in rho.iter_blocks():
        dev = np.linalg.norm(rows - psi.values, axis=1)
        if np.any(weights > 0.0):
            worst = max(worst, float(np.max(dev[weights > 0.0])))
        mean += weights @ rows
    return worst, float(np.linalg.norm(mean - psi.values))


def curve_verdict(bounds: MixingBounds, dist_rand: float) -> dict[str, bool]:
    """Report which bounds and curves an exact mixture distance respects."""
    return {
        'lemma_bound': dist_rand <= bounds.lemma_bound + BOUND_TOL,
        'theory_curve': dist_rand <= bounds.theory_curve + BOUND_TOL,
        'lemma_curve': dist_rand <= bounds.lemma_curve + BOUND_TOL,
    }


def in_slack_regime(c_ratio: float, eps: float) -> bool:
    """True when c <= 4 and eps <= 0.2, where second-order slack is checked."""
    return c_ratio <= SLACK_MAX_C and eps <= SLACK_MAX_EPS


def a_bound_slack_ok(bounds: MixingBounds) -> bool | None:
    """Check ``a_max <= (c+2) eps + 5 eps^2`` inside the slack regime.

    Returns:
        None outside the regime, otherwise whether the check holds. Violations are logged.
    """
    if not in_slack_regime(bounds.c_ratio, bounds.eps):
        return None
    limit = bounds.appendix_a_bound + SLACK_A_COEFF * bounds.eps**2
    ok = bounds.a_max <= limit + BOUND_TOL
    if not ok:
        logger.warning(
            'a_max %.6g exceeds (c+2)eps + 5eps^2 = %.6g (c=%.4g, eps=%.4g)',
            bounds.a_max,
            limit,
            bounds.c_ratio,
            bounds.eps,
        )
    return ok


def geometric_constant(r: float) -> float:
    """Return ``c(r) = sqrt((1 + r) / (1 - r))``, the l1/l2 tail ratio bound for decay r^k.

    Raises:
        ValueError: If r is outside (0, 1).
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f'geometric rate must be in (0, 1), got {r!r}')
    return math.sqrt((1.0 + r) / (1.0 - r))


def geometric_tail_ratio(r: float, k: int) -> float:
    """Return S / eps for a geometric tail of exactly k terms (at most ``c(r)``)."""
    if not 0.0 < r < 1.0:
        raise ValueError(f'geometric rate must be in (0, 1), got {r!r}')
    if k < 1:
        raise ValueError(f'tail length must be positive, got {k}')
    return (1.0 - r**k) / (1.0 - r) * math.sqrt((1.0 - r * r) / (1.0 - r ** (2 * k)))


def zeta(s: float) -> float:
    """Riemann zeta for real s > 1 by partial sum plus Euler-Maclaurin tail.

    The cutoff N doubles from 64 until the first omitted correction term,
    ``s(s+1)(s+2) / 720 * N^(-s-3)``, is below 1e-12.
    """
    if not s > 1.0:
        raise ValueError(f'zeta needs s > 1, got {s!r}')
    n = 64
    while s * (s + 1.0) * (s + 2.0) / 720.0 * n ** (-s - 3.0) >= ZETA_TOL:
        n *= 2
    ks = np.arange(n - 1, 0, -1, dtype=np.float64)
    partial = float(np.sum(ks**-s))
    tail = n ** (1.0 - s) / (s - 1.0) + 0.5 * n**-s + s * n ** (-s - 1.0) / 12.0
    return partial + tail


def power_law_constant(r: float) -> float:
    """Return ``zeta(r) / sqrt(zeta(2r))``, the l1/l2 ratio bound for decay k^(-r).

    Raises:
        ValueError: ``l1 condition diverges`` for r <= 1 (the l1 tail sum is unbounded).
    """
    if not r > 1.0:
        raise ValueError(
            f'l1 condition diverges for power-law rate {r!r} <= 1: S/eps grows with |B|'
        )
    return zeta(r) / math.sqrt(zeta(2.0 * r))


def l1_smallness(
    p: Partition, model: DecayModel | None = None, c_max: float = SLACK_MAX_C
) -> L1Verdict:
    """Evaluate the l1-smallness condition for a partition."""
    constant: float | None = None
    if model is not None:
        if model.kind == 'geometric':
            constant = geometric_constant(model.rate)
        else:
            constant = power_law_constant(model.rate) if model.rate > 1.0 else math.inf
    return L1Verdict(
        c_ratio=p.c_ratio,
        cauchy_schwarz_ceiling=math.sqrt(p.tail_size),
        model_constant=constant,
        c_max=c_max,
        satisfied=p.c_ratio <= c_max,
    )


def _loglinear_fit(x: FloatArray, y: FloatArray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))


def fit_decay(psi: AmplitudeVector, skip_fraction: float = FIT_SKIP_FRACTION) -> DecayModel:
    """Fit geometric and power-law decay to the sorted magnitudes and keep the better one.

    Least squares on log magnitudes, skipping the leading ``skip_fraction`` of ranks. A fit
    whose rate falls outside its family's domain is discarded; if both are, the result is a
    geometric model with rate just below 1 and infinite residual.

    Raises:
        ValueError: ``insufficient data`` with fewer than 8 nonzero amplitudes.
    """
    mags = psi.sorted_magnitudes()
    if mags.shape[0] < FIT_MIN_NONZERO:
        raise ValueError(
            f'insufficient data: {mags.shape[0]} nonzero amplitudes, need {FIT_MIN_NONZERO}'
        )
    skip = int(math.floor(skip_fraction * mags.shape[0]))
    ranks = np.arange(skip + 1, mags.shape[0] + 1, dtype=np.float64)
    logs = np.log(mags[skip:])

    candidates: list[DecayModel] = []
    g_slope, g_int, g_res = _loglinear_fit(ranks - 1.0, logs)
    if math.exp(g_slope) < 1.0:
        candidates.append(
            DecayModel('geometric', math.exp(g_slope), math.exp(g_int), g_res, psi.dim)
        )
    p_slope, p_int, p_res = _loglinear_fit(np.log(ranks), logs)
    if -p_slope > 0.5:
        candidates.append(DecayModel('power_law', -p_slope, math.exp(p_int), p_res, psi.dim))
    if not candidates:
        logger.warning(
            'Degenerate decay fit (geometric slope %.3g, power slope %.3g); '
            'reporting a flat geometric model',
            g_slope,
            p_slope,
        )
        return DecayModel(
            'geometric', 1.0 - DEGENERATE_RATE_MARGIN, math.exp(g_int), math.inf, psi.dim
        )
    best = min(candidates, key=lambda m: m.fit_residual)
    logger.info(
        'Decay fit: %s rate %.6g (residual %.3g)', best.kind, best.rate, best.fit_residual
    )
    return best


def model_tail_profile(model: DecayModel, dim: int) -> FloatArray:
    """Return the model's unit-norm magnitude profile over ``dim`` ranks."""
    if dim < 2:
        raise ValueError(f'dim must be at least 2, got {dim}')
    k = np.arange(1, dim + 1, dtype=np.float64)
    if model.kind == 'geometric':
        mags = np.power(model.rate, k - 1.0)
    else:
        mags = np.power(k, -model.rate)
    return mags / np.linalg.norm(mags)


def _rotation_price(delta: FloatArray | float, t_per_bit: float) -> FloatArray:
    return np.maximum(0.0, t_per_bit * np.log2(1.0 / np.asarray(delta, dtype=np.float64)))


def resource_plan(
    model: DecayModel,
    tau: float,
    dim: int | None = None,
    *,
    t_per_bit: float | None = None,
) -> ResourcePlan:
    """Find the kept counts reaching target ``tau`` under a decay model.

    eps(K) is summed exactly from the normalized model profile. The deterministic scheme
    needs eps(K) <= tau, the randomized scheme eps(K)^2 <= tau.

    Parameters:
        model: Decay model.
        tau: Target error, 0 < tau < 1.
        dim: Number of ranks in the model (defaults to ``model.dim``).
        t_per_bit: T gates per bit of rotation precision (default from config).

    Returns:
        ResourcePlan.

    Raises:
        ValueError: ``target too strict`` if no K < dim reaches tau.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f'tau must be in (0, 1), got {tau!r}')
    size = dim if dim is not None else model.dim
    if size is None:
        raise ValueError('resource_plan needs a dimension for the model')
    per_bit = get_t_gates_per_bit() if t_per_bit is None else t_per_bit
    mags = model_tail_profile(model, size)
    # tail_sq[K-1] = eps(K)^2 for K = 1..dim-1; the reverse cumsum adds small terms first.
    tail_sq = np.cumsum((mags**2)[::-1])[::-1][1:]
    det_ok = np.flatnonzero(tail_sq <= tau * tau)
    rand_ok = np.flatnonzero(tail_sq <= tau)
    if det_ok.size == 0 or rand_ok.size == 0:
        raise ValueError(
            f'target too strict: tau={tau!r} is not reached with fewer than {size} amplitudes'
        )
    k_det = int(det_ok[0]) + 1
    k_rand = int(rand_ok[0]) + 1
    t_det = float(np.sum(_rotation_price(mags[:k_det], per_bit)))
    s_rand = float(np.sum(mags[k_rand:]))
    t_rand = float(np.sum(_rotation_price(mags[:k_rand], per_bit)))
    if s_rand > 0.0:
        t_rand += float(_rotation_price(s_rand, per_bit))
    plan = ResourcePlan(
        tau=tau,
        k_det=k_det,
        k_rand=k_rand,
        ratio=k_det / k_rand,
        t_count_det=t_det,
        t_count_rand=t_rand,
    )
    logger.info('Resource plan at tau=%g: K_det=%d K_rand=%d', tau, k_det, k_rand)
    return plan


def t_count_estimate(
    p: Partition,
    psi: AmplitudeVector,
    scheme: Scheme,
    *,
    t_per_bit: float | None = None,
) -> float:
    """Toy T-count model: one rotation per encoded amplitude at precision |amplitude|.

    Each rotation costs ``max(0, t_per_bit * log2(1/delta))``. ``deterministic`` encodes A,
    ``randomized`` encodes A plus one amplified amplitude at delta = S, and ``exact``
    encodes A and B. Only ratios between schemes carry meaning.
    """
    per_bit = get_t_gates_per_bit() if t_per_bit is None else t_per_bit
    kept = float(np.sum(_rotation_price(np.abs(psi.values[p.set_a]), per_bit)))
    if scheme == 'deterministic':
        return kept
    if scheme == 'randomized':
        if p.tail_size == 0:
            return kept
        return kept + float(_rotation_price(p.ell1_tail, per_bit))
    if scheme == 'exact':
        return kept + float(np.sum(_rotation_price(np.abs(psi.values[p.set_b]), per_bit)))
    raise ValueError(f'unknown scheme {scheme!r}')
