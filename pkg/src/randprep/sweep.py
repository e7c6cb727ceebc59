"""Threshold sweeps: per-threshold errors and bounds, CSV output, and re-verification."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import TextIO

import numpy as np
import numpy.typing as npt

from randprep.amplitudes import AmplitudeVector, partition, threshold_for_kept
from randprep.bounds import compute_mixing_bounds, in_slack_regime
from randprep.config import get_thread_count
from randprep.constants import BOUND_TOL
from randprep.ensemble import build_ensemble, mixture_density
from randprep.metrics import mixed_trace_distance, truncation_error
from randprep.record import Record

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    """One threshold of a sweep; NaN marks a quantity that does not apply."""

    threshold: float
    k_kept: int
    eps: float
    ell1_tail: float
    c_ratio: float
    a_max: float
    b_bias: float
    lemma_bound: float
    theory_curve: float
    dist_det: float
    dist_rand: float
    note: str = ''


SWEEP_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class ReductionResult:
    """Kept-amplitude counts reaching a target trace distance.

    Parameters:
        target: Target trace distance.
        k_det: Smallest K whose deterministic truncation reaches the target.
        k_rand: Smallest K whose randomized mixture reaches the target.
        reduction: 1 - k_rand / k_det.
    """

    target: float
    k_det: int
    k_rand: int
    reduction: float


def evaluate_threshold(psi: AmplitudeVector, t: float) -> SweepRow:
    """Compute one sweep row; rows with an empty A or B carry a note."""
    nan = math.nan
    try:
        p = partition(psi, t)
    except ValueError as e:
        if 'empty kept set' not in str(e):
            raise
        return SweepRow(t, 0, nan, nan, nan, nan, nan, nan, nan, nan, nan, 'empty kept set')
    if p.tail_size == 0:
        return SweepRow(t, p.k_kept, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 'empty tail')
    e = build_ensemble(p, psi)
    bounds = compute_mixing_bounds(e, psi)
    return SweepRow(
        threshold=t,
        k_kept=p.k_kept,
        eps=p.eps,
        ell1_tail=p.ell1_tail,
        c_ratio=p.c_ratio,
        a_max=bounds.a_max,
        b_bias=bounds.b_bias,
        lemma_bound=bounds.lemma_bound,
        theory_curve=bounds.theory_curve,
        dist_det=truncation_error(p, psi),
        dist_rand=mixed_trace_distance(mixture_density(e), psi),
    )


def run_sweep(
    psi: AmplitudeVector, thresholds: list[float], *, threads: int | None = None
) -> list[SweepRow]:
    """Evaluate every threshold in parallel; rows are returned by decreasing threshold."""
    workers = max(1, min(threads or get_thread_count(), len(thresholds)))
    ordered = sorted(set(thresholds), reverse=True)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda t: evaluate_threshold(psi, t), ordered))
    for row in rows:
        if row.note:
            logger.info('Threshold %g: %s', row.threshold, row.note)
        elif in_slack_regime(row.c_ratio, row.eps) and row.dist_rand > row.theory_curve:
            logger.warning(
                'Threshold %g: dist_rand %.6g above theory curve %.6g',
                row.threshold,
                row.dist_rand,
                row.theory_curve,
            )
    return rows


def write_sweep_csv(rows: list[SweepRow], stream: TextIO) -> None:
    """Write rows as CSV with a header and 17-significant-digit decimals."""
    record = Record()
    for name in SWEEP_COLUMNS:
        record.append(name)
    record.write(stream)
    for row in rows:
        for value in astuple(row):
            if isinstance(value, str):
                record.append(value)
            elif isinstance(value, int):
                record.append_int(value)
            else:
                record.append_float(value)
        record.write(stream)


def sweep_csv_text(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    write_sweep_csv(rows, buf)
    return buf.getvalue()


def verify_sweep_csv(source: str | Path | TextIO) -> int:
    """Re-parse a sweep CSV and re-check every complete row.

    Checks the column set, ``dist_rand <= lemma_bound`` and ``dist_det == 2 eps`` (1e-10).

    Parameters:
        source: CSV path or open text stream.

    Returns:
        Number of rows verified (rows with a note are skipped).

    Raises:
        RuntimeError: If a check fails.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline='', encoding='utf-8') as f:
            return verify_sweep_csv(f)
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
        raise RuntimeError(f'sweep CSV columns {reader.fieldnames} != {list(SWEEP_COLUMNS)}')
    checked = 0
    for lineno, raw in enumerate(reader, start=2):
        if raw['note']:
            continue
        try:
            vals = {k: float(v) for k, v in raw.items() if k != 'note'}
        except (TypeError, ValueError) as e:
            raise RuntimeError(f'sweep CSV line {lineno}: incomplete row') from e
        if vals['dist_rand'] > vals['lemma_bound'] + BOUND_TOL:
            raise RuntimeError(
                f'sweep CSV line {lineno}: dist_rand {vals["dist_rand"]!r} exceeds '
                f'lemma bound {vals["lemma_bound"]!r}'
            )
        if abs(vals['dist_det'] - 2.0 * vals['eps']) > BOUND_TOL:
            raise RuntimeError(
                f'sweep CSV line {lineno}: dist_det {vals["dist_det"]!r} != 2*eps'
            )
        checked += 1
    return checked


def loglog_slope(x: npt.ArrayLike, y: npt.ArrayLike) -> float:
    """Least-squares slope of log(y) against log(x) over points where both are positive."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    mask = (xa > 0.0) & (ya > 0.0) & np.isfinite(xa) & np.isfinite(ya)
    if int(mask.sum()) < 2:
        raise ValueError('insufficient data: need two positive points for a slope')
    slope, _ = np.polyfit(np.log(xa[mask]), np.log(ya[mask]), 1)
    return float(slope)


def sweep_slopes(rows: list[SweepRow]) -> tuple[float, float]:
    """Return the log-log slopes of (dist_det, dist_rand) against eps."""
    usable = [r for r in rows if not r.note]
    eps = [r.eps for r in usable]
    det = loglog_slope(eps, [r.dist_det for r in usable])
    rand = loglog_slope(eps, [r.dist_rand for r in usable])
    logger.info('Sweep slopes vs eps: deterministic %.4f, randomized %.4f', det, rand)
    return det, rand


def _smallest_k(reaches: list[bool]) -> int:
    for k, ok in enumerate(reaches, start=1):
        if ok:
            return k
    return len(reaches)


def _rand_distance_at(psi: AmplitudeVector, k: int) -> float:
    p = partition(psi, threshold_for_kept(psi, k))
    if p.tail_size == 0:
        return 0.0
    return mixed_trace_distance(mixture_density(build_ensemble(p, psi)), psi)


def coefficient_reduction(psi: AmplitudeVector, target: float) -> ReductionResult:
    """Compare kept counts needed to reach a target trace distance.

    The deterministic count comes from the exact tail sums; the randomized count is found
    by bisection on the exact mixture distance, which decreases with K in practice.
    """
    if not target > 0.0:
        raise ValueError(f'target must be positive, got {target!r}')
    mags = psi.sorted_magnitudes()
    nonzero = mags.shape[0]
    tail_sq = np.append(np.cumsum((mags**2)[::-1])[::-1][1:], 0.0)
    k_det = _smallest_k([2.0 * math.sqrt(v) <= target for v in tail_sq])
    lo, hi = 1, k_det
    while lo < hi:
        mid = (lo + hi) // 2
        if _rand_distance_at(psi, mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    result = ReductionResult(target, k_det, lo, 1.0 - lo / k_det)
    logger.info(
        'Coefficient reduction at target %g: K_det=%d K_rand=%d (%.1f%%, %d nonzero)',
        target,
        k_det,
        lo,
        100.0 * result.reduction,
        nonzero,
    )
    return result
