"""Tests for mixing-lemma quantities, decay constants, fits, and resource plans."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest
from scipy import special

from randprep.amplitudes import AmplitudeVector, normalize, partition, threshold_for_kept
from randprep.bounds import (
    DecayModel,
    a_bound_slack_ok,
    compute_mixing_bounds,
    curve_verdict,
    fit_decay,
    geometric_constant,
    geometric_tail_ratio,
    in_slack_regime,
    l1_smallness,
    mixture_lemma_inputs,
    model_tail_profile,
    power_law_constant,
    resource_plan,
    t_count_estimate,
    zeta,
)
from randprep.ensemble import Ensemble, build_ensemble, mixture_density
from randprep.generators import SyntheticSpec, synthetic_state
from randprep.generators.synthetic import SignPattern
from randprep.metrics import DensityRepr, dense_trace_distance_oracle, mixed_trace_distance

_SIGN_PATTERNS: tuple[SignPattern, ...] = ('positive', 'alternate')


def test_toy_mixing_bounds(toy_state: AmplitudeVector, toy_ensemble: Ensemble) -> None:
    """Toy state: b = 1 - 1/sqrt(1.02), a = ||psi~_m - psi||, a^2 + 2b ~ 0.0394."""
    bounds = compute_mixing_bounds(toy_ensemble, toy_state)
    gamma = math.sqrt(1.02)
    assert bounds.b_bias == pytest.approx(1.0 - 1.0 / gamma, abs=1e-12)
    assert bounds.b_bias == pytest.approx(0.0098525, abs=1e-7)
    assert bounds.b_closed_form == pytest.approx(bounds.b_bias, abs=1e-12)
    member = np.array([math.sqrt(0.98), 0.2, 0.0, 0.0]) / gamma
    deviation = float(np.linalg.norm(member - toy_state.values))
    assert bounds.a_max == pytest.approx(deviation, abs=1e-14)
    assert bounds.a_max == pytest.approx(0.140374, abs=1e-6)
    assert bounds.lemma_bound == pytest.approx(4.0 * (1.0 - 1.0 / gamma), rel=1e-10)
    assert bounds.lemma_bound == pytest.approx(0.0394098, abs=1e-7)
    assert bounds.gamma == pytest.approx(gamma)
    c = math.sqrt(2.0)
    assert bounds.theory_curve == pytest.approx(((c + 2.0) ** 2 + c / 2.0) * 0.02, rel=1e-12)
    assert bounds.appendix_a_bound == pytest.approx((c + 2.0) * math.sqrt(0.02), rel=1e-12)
    assert bounds.main_text_a_bound == pytest.approx((c + 1.0) * math.sqrt(0.02), rel=1e-12)
    assert bounds.lemma_curve == pytest.approx(((c + 2.0) ** 2 + c**2) * 0.02, rel=1e-12)


def test_a_bound_and_curves_toy(toy_state: AmplitudeVector, toy_ensemble: Ensemble) -> None:
    bounds = compute_mixing_bounds(toy_ensemble, toy_state)
    assert bounds.a_max <= bounds.appendix_a_bound
    assert a_bound_slack_ok(bounds) is True
    dist = mixed_trace_distance(mixture_density(toy_ensemble), toy_state)
    assert curve_verdict(bounds, dist) == {
        'lemma_bound': True,
        'theory_curve': True,
        'lemma_curve': True,
    }


def test_lemma_holds_on_random_mixtures() -> None:
    """200 random mixtures near a random target: oracle distance <= a^2 + 2b."""
    rng = np.random.default_rng(11)
    for _ in range(200):
        n_qubits = int(rng.integers(1, 9))
        dim = 1 << n_qubits
        psi = normalize(rng.standard_normal(dim), n_qubits)
        spread = rng.uniform(0.01, 0.5)
        count = int(rng.integers(1, 6))
        states = [
            normalize(psi.values + spread * rng.standard_normal(dim) / math.sqrt(dim), n_qubits)
            for _ in range(count)
        ]
        weights = rng.random(count) + 0.05
        rho = DensityRepr.from_states(weights / weights.sum(), states)
        a, b = mixture_lemma_inputs(rho, psi)
        assert dense_trace_distance_oracle(rho, psi) <= a * a + 2.0 * b + 1e-10


def test_custom_probabilities_warn(
    caplog: pytest.LogCaptureFixture, toy_state: AmplitudeVector
) -> None:
    e = build_ensemble(partition(toy_state, 0.2), toy_state, probabilities=[0.3, 0.7])
    with caplog.at_level(logging.WARNING, logger='randprep.bounds'):
        bounds = compute_mixing_bounds(e, toy_state)
    assert math.isnan(bounds.b_closed_form)
    assert 'Custom probabilities' in caplog.text
    dist = mixed_trace_distance(mixture_density(e), toy_state)
    assert dist <= bounds.lemma_bound + 1e-10


def test_slack_regime() -> None:
    assert in_slack_regime(4.0, 0.2)
    assert not in_slack_regime(4.1, 0.1)
    assert not in_slack_regime(2.0, 0.3)


def test_a_bound_outside_regime_is_none(geometric_state: AmplitudeVector) -> None:
    """r = 0.9 tails have c near sqrt(19) > 4."""
    p = partition(geometric_state, threshold_for_kept(geometric_state, 30))
    bounds = compute_mixing_bounds(build_ensemble(p, geometric_state), geometric_state)
    assert bounds.c_ratio > 4.0
    assert a_bound_slack_ok(bounds) is None


def test_a_bound_slack_over_geometric_instances() -> None:
    """a_max <= (c+2) eps + 5 eps^2 wherever c <= 4 and eps <= 0.2."""
    checked = 0
    for rate in (0.3, 0.4, 0.5, 0.6, 0.7):
        for signs in _SIGN_PATTERNS:
            psi = synthetic_state(SyntheticSpec('geometric', rate, 64, signs=signs))
            for k in range(1, 60):
                p = partition(psi, threshold_for_kept(psi, k))
                bounds = compute_mixing_bounds(build_ensemble(p, psi), psi)
                verdict = a_bound_slack_ok(bounds)
                if verdict is None:
                    continue
                assert verdict is True, (rate, signs, k)
                checked += 1
    assert checked >= 400


def test_geometric_constant() -> None:
    assert geometric_constant(0.5) == pytest.approx(math.sqrt(3.0))
    assert geometric_constant(0.9) == pytest.approx(math.sqrt(19.0))
    with pytest.raises(ValueError):
        geometric_constant(1.0)


def test_geometric_tail_ratio_approaches_constant() -> None:
    assert geometric_tail_ratio(0.5, 1) == pytest.approx(1.0)
    ratios = [geometric_tail_ratio(0.9, k) for k in (1, 10, 100, 1000)]
    assert ratios == sorted(ratios)
    assert ratios[-1] <= geometric_constant(0.9)
    assert ratios[-1] == pytest.approx(geometric_constant(0.9), rel=1e-10)


def test_geometric_tail_ratio_matches_partition(geometric_state: AmplitudeVector) -> None:
    p = partition(geometric_state, threshold_for_kept(geometric_state, 10))
    assert p.c_ratio == pytest.approx(geometric_tail_ratio(0.9, p.tail_size), rel=1e-9)


@pytest.mark.parametrize('s', [1.1, 1.5, 2.0, 3.0, 4.0, 8.0])
def test_zeta_matches_scipy(s: float) -> None:
    assert zeta(s) == pytest.approx(float(special.zeta(s)), rel=1e-12)


def test_zeta_domain() -> None:
    with pytest.raises(ValueError):
        zeta(1.0)


def test_power_law_constant() -> None:
    """r = 2: zeta(2) / sqrt(zeta(4)) = sqrt(10) / 2."""
    assert power_law_constant(2.0) == pytest.approx(math.sqrt(10.0) / 2.0, rel=1e-12)
    with pytest.raises(ValueError, match='l1 condition diverges'):
        power_law_constant(0.8)


def test_decay_constants_direction() -> None:
    """c(r) grows with the geometric rate; zeta(r)/sqrt(zeta(2r)) falls toward 1."""
    geometric = [geometric_constant(r) for r in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)]
    assert np.all(np.diff(geometric) > 0.0)
    power = [power_law_constant(r) for r in (1.2, 1.5, 2.0, 3.0, 5.0, 10.0)]
    assert np.all(np.diff(power) < 0.0)
    assert power[1:4] == pytest.approx([2.383, 1.581, 1.192], abs=1e-3)
    assert all(value > 1.0 for value in power)
    assert power_law_constant(40.0) == pytest.approx(1.0, abs=1e-9)


def test_l1_smallness(toy_state: AmplitudeVector) -> None:
    p = partition(toy_state, 0.2)
    verdict = l1_smallness(p, DecayModel('geometric', 0.5))
    assert verdict.c_ratio == pytest.approx(math.sqrt(2.0))
    assert verdict.cauchy_schwarz_ceiling == pytest.approx(math.sqrt(2.0))
    assert verdict.model_constant == pytest.approx(math.sqrt(3.0))
    assert verdict.satisfied
    assert l1_smallness(p).model_constant is None
    assert l1_smallness(p, DecayModel('power_law', 0.8)).model_constant == math.inf
    assert not l1_smallness(p, c_max=1.0).satisfied


def test_decay_model_validation() -> None:
    with pytest.raises(ValueError, match='geometric rate'):
        DecayModel('geometric', 1.2)
    with pytest.raises(ValueError, match='power-law rate'):
        DecayModel('power_law', 0.5)
    with pytest.raises(ValueError, match='unknown decay kind'):
        DecayModel('linear', 0.5)  # type: ignore[arg-type]


def test_fit_recovers_geometric_rate(geometric_state: AmplitudeVector) -> None:
    model = fit_decay(geometric_state)
    assert model.kind == 'geometric'
    assert model.rate == pytest.approx(0.9, rel=1e-9)
    assert model.fit_residual == pytest.approx(0.0, abs=1e-8)
    assert model.dim == 1024


def test_fit_recovers_power_law_rate() -> None:
    psi = synthetic_state(SyntheticSpec('power_law', 1.5, 4096, signs='random', seed=3))
    model = fit_decay(psi)
    assert model.kind == 'power_law'
    assert model.rate == pytest.approx(1.5, rel=1e-9)


def test_fit_insufficient_data(toy_state: AmplitudeVector) -> None:
    with pytest.raises(ValueError, match='insufficient data'):
        fit_decay(toy_state)


def test_fit_degenerate_flat_state(caplog: pytest.LogCaptureFixture) -> None:
    psi = normalize(np.ones(16), 4)
    with caplog.at_level(logging.WARNING, logger='randprep.bounds'):
        model = fit_decay(psi)
    assert model.kind == 'geometric'
    assert model.rate < 1.0
    assert model.rate == pytest.approx(1.0, abs=1e-8)
    assert math.isinf(model.fit_residual)
    assert 'Degenerate decay fit' in caplog.text


def test_model_tail_profile_is_unit_norm() -> None:
    mags = model_tail_profile(DecayModel('power_law', 2.0), 100)
    assert float(np.linalg.norm(mags)) == pytest.approx(1.0)
    assert np.all(np.diff(mags) < 0.0)


def test_resource_plan_geometric_halving() -> None:
    """Geometric r = 0.9, tau = 1e-6: K_det / K_rand close to 2."""
    plan = resource_plan(DecayModel('geometric', 0.9), 1e-6, 1024)
    assert plan.k_det == 132
    assert plan.k_rand == 66
    assert 1.8 <= plan.ratio <= 2.2
    assert plan.t_count_rand < plan.t_count_det


def test_resource_plan_power_law_polynomial_gain() -> None:
    """Power law r = 2: the ratio grows by about (10^3)^(1/3) = 10 from tau = 1e-3 to 1e-6."""
    model = DecayModel('power_law', 2.0, dim=1 << 20)
    coarse = resource_plan(model, 1e-3)
    fine = resource_plan(model, 1e-6)
    growth = fine.ratio / coarse.ratio
    assert 5.0 <= growth <= 20.0


def test_resource_plan_ratio_tends_to_two() -> None:
    """Geometric K_det / K_rand stays within 1/K_rand of 2 and closes in on it as tau falls."""
    model = DecayModel('geometric', 0.9)
    plans = [resource_plan(model, float(tau), 4096) for tau in np.geomspace(1e-2, 1e-12, 11)]
    for plan in plans:
        assert 2 * plan.k_rand - 1 <= plan.k_det <= 2 * plan.k_rand
        assert abs(plan.ratio - 2.0) <= 1.0 / plan.k_rand
    assert [p.k_rand for p in plans] == sorted(p.k_rand for p in plans)
    assert plans[-1].ratio == pytest.approx(2.0, abs=0.01)


def test_resource_plan_errors() -> None:
    model = DecayModel('geometric', 0.9)
    with pytest.raises(ValueError, match='dimension'):
        resource_plan(model, 1e-3)
    with pytest.raises(ValueError, match='target too strict'):
        resource_plan(model, 1e-6, 16)
    with pytest.raises(ValueError, match='tau'):
        resource_plan(model, 1.5, 16)


def test_t_count_schemes(toy_state: AmplitudeVector) -> None:
    """Three T per bit: A costs 3 log2(1/sqrt .98), one amplified rotation 3 log2(1/0.2)."""
    p = partition(toy_state, 0.2)
    det = t_count_estimate(p, toy_state, 'deterministic', t_per_bit=3.0)
    rand = t_count_estimate(p, toy_state, 'randomized', t_per_bit=3.0)
    exact = t_count_estimate(p, toy_state, 'exact', t_per_bit=3.0)
    assert det == pytest.approx(3.0 * math.log2(1.0 / math.sqrt(0.98)))
    assert rand == pytest.approx(det + 3.0 * math.log2(5.0))
    assert exact == pytest.approx(det + 2.0 * 3.0 * math.log2(10.0))
    assert rand < exact


def test_t_count_uses_config(monkeypatch: pytest.MonkeyPatch, toy_state: AmplitudeVector) -> None:
    p = partition(toy_state, 0.2)
    monkeypatch.setenv('RANDPREP_T_PER_BIT', '6')
    doubled = t_count_estimate(p, toy_state, 'exact')
    assert doubled == pytest.approx(2.0 * t_count_estimate(p, toy_state, 'exact', t_per_bit=3.0))
