"""Tests for the randomized ensemble and its exact identities."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from randprep.amplitudes import AmplitudeVector, normalize, partition, threshold_for_kept
from randprep.config import MAX_MEMBERS_ENV
from randprep.ensemble import (
    Ensemble,
    build_ensemble,
    identity_deviations,
    mixture_density,
    reconstruction_residual,
    verify_identities,
)


def test_toy_ensemble_members(toy_ensemble: Ensemble) -> None:
    """p = (1/2, 1/2), amplified coefficient S = 0.2, Gamma = sqrt(1.02)."""
    assert toy_ensemble.size == 2
    assert toy_ensemble.canonical
    assert toy_ensemble.indices.tolist() == [1, 2]
    assert toy_ensemble.probabilities.tolist() == pytest.approx([0.5, 0.5], abs=1e-15)
    assert toy_ensemble.amplified.tolist() == pytest.approx([0.2, 0.2], abs=1e-15)
    assert toy_ensemble.gamma == pytest.approx(math.sqrt(1.02), rel=1e-14)
    member = toy_ensemble.member(0)
    assert member.index_m == 1
    gamma = math.sqrt(1.02)
    assert member.state.values.tolist() == pytest.approx(
        [math.sqrt(0.98) / gamma, 0.2 / gamma, 0.0, 0.0], abs=1e-15
    )
    assert member.gamma_m == pytest.approx(gamma, rel=1e-14)


def test_members_carry_tail_signs(small_geometric_state: AmplitudeVector) -> None:
    """Amplified coefficient is sgn(alpha_m) * S."""
    p = partition(small_geometric_state, 0.05)
    e = build_ensemble(p, small_geometric_state)
    signs = np.sign(small_geometric_state.values[e.indices])
    assert np.allclose(e.amplified, signs * p.ell1_tail, rtol=0.0, atol=1e-15)
    assert np.any(signs < 0.0)


def test_nothing_to_randomize() -> None:
    psi = AmplitudeVector(1, np.array([0.6, 0.8]))
    with pytest.raises(ValueError, match='nothing to randomize'):
        build_ensemble(partition(psi, 0.5), psi)


def test_partition_state_mismatch(toy_state: AmplitudeVector) -> None:
    other = normalize(np.ones(8), 3)
    with pytest.raises(ValueError, match='dimension mismatch'):
        build_ensemble(partition(other, 0.1), toy_state)


@pytest.mark.parametrize('k', [1, 3, 10, 40])
def test_identities_on_geometric_ensembles(geometric_state: AmplitudeVector, k: int) -> None:
    """sum p = 1, shared Gamma, reconstruction, and mean state hold to 1e-12."""
    p = partition(geometric_state, threshold_for_kept(geometric_state, k))
    e = build_ensemble(p, geometric_state)
    verify_identities(e, geometric_state)
    deviations = identity_deviations(e, geometric_state)
    assert set(deviations) == {
        'sum_p',
        'gamma_spread',
        'gamma_formula',
        'reconstruction',
        'mean_state',
    }
    assert max(deviations.values()) <= 1e-12


def test_identities_on_tfim_ensemble(tfim11_state: AmplitudeVector) -> None:
    t = float(np.median(np.abs(tfim11_state.values)))
    e = build_ensemble(partition(tfim11_state, t), tfim11_state)
    verify_identities(e, tfim11_state)


def test_identities_toy(toy_state: AmplitudeVector, toy_ensemble: Ensemble) -> None:
    verify_identities(toy_ensemble, toy_state)
    assert reconstruction_residual(toy_ensemble, toy_state) <= 1e-15


def test_mean_state_is_scaled_target(toy_state: AmplitudeVector, toy_ensemble: Ensemble) -> None:
    assert np.allclose(toy_ensemble.mean_state(), toy_state.values / math.sqrt(1.02), atol=1e-15)


def test_custom_probabilities(toy_state: AmplitudeVector) -> None:
    """Non-canonical weights: per-member norms, unbiased reconstruction, no shared Gamma."""
    p = partition(toy_state, 0.2)
    e = build_ensemble(p, toy_state, probabilities=[0.25, 0.75])
    assert not e.canonical
    assert math.isnan(e.gamma)
    assert e.amplified.tolist() == pytest.approx([0.4, 0.1 / 0.75])
    assert e.gammas[0] != pytest.approx(e.gammas[1])
    assert reconstruction_residual(e, toy_state) <= 1e-15
    with pytest.raises(ValueError, match='canonical'):
        verify_identities(e, toy_state)


def test_custom_probabilities_rescaled_and_validated(toy_state: AmplitudeVector) -> None:
    p = partition(toy_state, 0.2)
    e = build_ensemble(p, toy_state, probabilities=[1.0, 3.0])
    assert e.probabilities.tolist() == pytest.approx([0.25, 0.75])
    with pytest.raises(ValueError, match='dimension mismatch'):
        build_ensemble(p, toy_state, probabilities=[1.0])
    with pytest.raises(ValueError, match='positive'):
        build_ensemble(p, toy_state, probabilities=[1.0, 0.0])


def test_lazy_matches_stored(small_geometric_state: AmplitudeVector) -> None:
    p = partition(small_geometric_state, 0.05)
    stored = build_ensemble(p, small_geometric_state, lazy=False)
    lazy = build_ensemble(p, small_geometric_state, lazy=True)
    assert lazy.lazy
    assert not stored.lazy
    assert np.array_equal(lazy.state_rows(0, lazy.size), stored.state_rows(0, stored.size))
    assert np.array_equal(lazy.member_vector(3), stored.member_vector(3))
    assert len(list(lazy.iter_states())) == lazy.size


def test_lazy_mode_switches_on_above_cap(
    monkeypatch: pytest.MonkeyPatch,
    caplog: pytest.LogCaptureFixture,
    small_geometric_state: AmplitudeVector,
) -> None:
    monkeypatch.setenv(MAX_MEMBERS_ENV, '4')
    p = partition(small_geometric_state, 0.05)
    with caplog.at_level(logging.WARNING, logger='randprep.ensemble'):
        e = build_ensemble(p, small_geometric_state)
    assert e.lazy
    assert 'built on demand' in caplog.text


def test_mixture_density_matches_members(
    small_geometric_state: AmplitudeVector,
) -> None:
    p = partition(small_geometric_state, 0.05)
    e = build_ensemble(p, small_geometric_state)
    rho = mixture_density(e)
    assert rho.rank_bound == e.size
    assert rho.trace() == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(rho.state_vectors(), e.state_rows(0, e.size), atol=1e-15)
