"""JSON report dictionaries for analysis, ensembles, sampling runs, and resource plans."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict
from typing import Any, TextIO

from randprep.amplitudes import AmplitudeVector, Partition, cauchy_schwarz_check, partition
from randprep.bounds import (
    DecayModel,
    MixingBounds,
    ResourcePlan,
    a_bound_slack_ok,
    compute_mixing_bounds,
    curve_verdict,
    l1_smallness,
    t_count_estimate,
)
from randprep.constants import BOUND_TOL
from randprep.ensemble import Ensemble, build_ensemble, identity_deviations, mixture_density
from randprep.metrics import (
    Observable,
    dense_trace_distance_oracle,
    mixed_trace_distance,
    observable_error,
    truncation_error,
)
from randprep.sampler import SampleRun

logger = logging.getLogger(__name__)


def _clean(value: Any) -> Any:
    """Recursively replace non-finite floats by None so the output is strict JSON."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def write_report(report: dict[str, Any], stream: TextIO) -> None:
    """Write a report as indented JSON."""
    json.dump(_clean(report), stream, indent=2, allow_nan=False)
    stream.write('\n')


def state_summary(psi: AmplitudeVector) -> dict[str, Any]:
    return {'label': psi.label, 'n_qubits': psi.n_qubits, 'nonzero': psi.nonzero_count}


def partition_report(p: Partition) -> dict[str, Any]:
    return {
        'threshold': p.threshold,
        'k_kept': p.k_kept,
        'tail_size': p.tail_size,
        'eps': p.eps,
        'S': p.ell1_tail,
        'c': p.c_ratio,
    }


def bounds_report(b: MixingBounds) -> dict[str, Any]:
    """Bounds report with the documented key names."""
    return {
        'eps': b.eps,
        'S': b.ell1_tail,
        'c': b.c_ratio,
        'gamma': b.gamma,
        'a': b.a_max,
        'b': b.b_bias,
        'lemma_bound': b.lemma_bound,
        'theory_curve': b.theory_curve,
        'appendix_a_bound': b.appendix_a_bound,
        'main_text_a_bound': b.main_text_a_bound,
        'lemma_curve': b.lemma_curve,
        'b_closed_form': b.b_closed_form,
    }


def ensemble_summary(e: Ensemble) -> dict[str, Any]:
    """Gamma and the (m, p_m, amplified coefficient) list; states are not included."""
    return {
        'gamma': e.gamma,
        'canonical': e.canonical,
        'members': [
            {'m': int(m), 'p_m': float(p), 'amplified_coefficient': float(a)}
            for m, p, a in zip(e.indices, e.probabilities, e.amplified, strict=True)
        ],
    }


def sample_report(run: SampleRun) -> dict[str, Any]:
    return {
        'seed': run.seed,
        'shots': run.shots,
        'workers': run.workers,
        'estimate': run.estimate,
        'std_error': run.std_error,
        'exact_value': run.exact_value,
        'draw_counts': {str(m): c for m, c in sorted(run.draw_counts.items())},
    }


def plan_report(plan: ResourcePlan) -> dict[str, Any]:
    return asdict(plan)


def model_report(model: DecayModel) -> dict[str, Any]:
    return asdict(model)


def analyze_state(
    psi: AmplitudeVector,
    threshold: float,
    *,
    oracle: bool = False,
    members: bool = False,
    observable: Observable | None = None,
) -> dict[str, Any]:
    """Partition, build the ensemble, and report exact errors against every bound.

    Raises:
        ValueError: For an empty kept set or an oracle request above 10 qubits.
        RuntimeError: If the exact mixture distance exceeds the mixing-lemma bound.
    """
    p = partition(psi, threshold)
    report: dict[str, Any] = {
        'state': state_summary(psi),
        'partition': partition_report(p),
        'dist_det': truncation_error(p, psi),
        't_count': {
            scheme: t_count_estimate(p, psi, scheme)
            for scheme in ('deterministic', 'randomized', 'exact')
        },
    }
    if p.tail_size == 0:
        report['dist_rand'] = 0.0
        report['note'] = 'empty tail: nothing to randomize, deterministic preparation is exact'
        return report

    e = build_ensemble(p, psi)
    bounds = compute_mixing_bounds(e, psi)
    rho = mixture_density(e)
    dist_rand = mixed_trace_distance(rho, psi)
    report['dist_rand'] = dist_rand
    report['bounds'] = bounds_report(bounds)
    report['curves'] = curve_verdict(bounds, dist_rand)
    report['a_bound_slack_ok'] = a_bound_slack_ok(bounds)
    report['cauchy_schwarz_gap'] = cauchy_schwarz_check(p)
    report['l1'] = asdict(l1_smallness(p))
    report['identities'] = identity_deviations(e, psi)
    if oracle:
        report['dist_rand_oracle'] = dense_trace_distance_oracle(rho, psi)
    if members:
        report['ensemble'] = ensemble_summary(e)
    if observable is not None:
        report['observable'] = {
            'label': observable.label,
            'spectral_norm': observable.spectral_norm,
            'error': observable_error(rho, psi, observable, trace_distance=dist_rand),
        }
    if dist_rand > bounds.lemma_bound + BOUND_TOL:
        raise RuntimeError(
            f'mixture distance {dist_rand!r} exceeds the mixing-lemma bound '
            f'{bounds.lemma_bound!r}'
        )
    logger.info(
        'Threshold %g: dist_det=%.6g dist_rand=%.6g', threshold, report['dist_det'], dist_rand
    )
    return report
