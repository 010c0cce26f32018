import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiramsey import (
    BoundReport,
    InvalidArgument,
    ProbeState,
    ZeroAmplitude,
    indirect_bound,
    indirect_phi_bound,
    make_parametrization,
    neighbor_from_reference_jacobian,
    optimal_probe_phi,
    optimal_probe_theta,
    optimize_probe_numeric,
    qcrb_individual,
    qcrb_phi_opt,
    qcrb_theta_opt,
    qcrb_total_variance,
    qfim_pure,
    variance_bound_theta,
)

SQRT2 = math.sqrt(2)


def test_variance_bound_examples():
    assert variance_bound_theta(ProbeState.from_populations([0.5, 0.5])) == pytest.approx(1, rel=1e-15)
    assert variance_bound_theta(optimal_probe_theta(2)) == pytest.approx(2.914214, abs=1e-6)
    assert variance_bound_theta(np.full(3, 1 / 3)) == pytest.approx(3.0, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.floats(0.1, 1e6))
def test_variance_bound_matches_qfim(D, seed, N):
    w = np.random.default_rng(seed).dirichlet(np.ones(D + 1)) * 0.9 + 0.1 / (D + 1)
    probe = ProbeState.from_populations(w)
    via_qfim = qcrb_total_variance(qfim_pure(probe, make_parametrization("theta_ref", D), N))
    assert variance_bound_theta(probe, N) == pytest.approx(via_qfim, rel=1e-10)


def test_variance_bound_zero_amplitude():
    with pytest.raises(ZeroAmplitude) as info:
        variance_bound_theta([0.5, 0.5, 0.0])
    assert info.value.index == 2


def test_optimal_probe_theta_examples():
    np.testing.assert_allclose(optimal_probe_theta(2).populations, [0.414214, 0.292893, 0.292893], atol=1e-6)
    np.testing.assert_allclose(optimal_probe_theta(1).populations, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(optimal_probe_theta(4).populations, [1 / 3] + [1 / 6] * 4, atol=1e-15)


@pytest.mark.parametrize("D", range(1, 65))
def test_reference_weighting(D):
    w = optimal_probe_theta(D).populations
    assert w[0] / w[1] == pytest.approx(math.sqrt(D), rel=1e-14)
    assert np.all(np.real(optimal_probe_theta(D).amplitudes) >= 0)


@pytest.mark.parametrize(
    "D, N, expected",
    [(1, 1, 1.0), (2, 1, 2.914214), (2, 1e4, 2.914214e-4)],
)
def test_qcrb_theta_opt(D, N, expected):
    assert qcrb_theta_opt(D, N) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("D, N, expected", [(1, 1, 1.0), (2, 1, 4.0), (5, 10, 2.5)])
def test_qcrb_individual(D, N, expected):
    assert qcrb_individual(D, N) == expected


def test_optimal_probe_phi_examples():
    np.testing.assert_allclose(optimal_probe_phi(2).populations, [0.292893, 0.414214, 0.292893], atol=1e-6)
    np.testing.assert_allclose(optimal_probe_phi(1).populations, [0.5, 0.5])
    for D in range(1, 11):
        assert optimal_probe_phi(D).populations.sum() == pytest.approx(1, abs=1e-14)


def test_qcrb_phi_opt_examples():
    assert qcrb_phi_opt(2) == pytest.approx((SQRT2 + 2) ** 2 / 4, rel=1e-15)
    assert qcrb_phi_opt(1) == 1.0
    assert qcrb_phi_opt(3) == pytest.approx(5.828427, abs=1e-6)
    pmap = make_parametrization("phi_neighbor", 3)
    assert qcrb_total_variance(qfim_pure(optimal_probe_phi(3), pmap)) == pytest.approx(qcrb_phi_opt(3), rel=1e-12)


def test_indirect_phi_bound_examples():
    assert indirect_phi_bound(2) == pytest.approx(3.164214, abs=1e-6)
    assert indirect_phi_bound(1) == pytest.approx(1.0, rel=1e-15)
    for D in range(2, 11):
        assert indirect_phi_bound(D) > qcrb_phi_opt(D)


@pytest.mark.parametrize("D", range(1, 11))
def test_indirect_bound_general_form(D):
    """Tr[J F^-1 J^T] with the theta-optimal QFIM equals the closed form."""
    F = qfim_pure(optimal_probe_theta(D), make_parametrization("theta_ref", D))
    J = neighbor_from_reference_jacobian(D)
    assert indirect_bound(F, J) == pytest.approx(indirect_phi_bound(D), rel=1e-12)


@pytest.mark.parametrize("D", range(2, 65))
def test_dominance(D):
    assert qcrb_theta_opt(D) < qcrb_individual(D)


def test_dominance_equality_D1():
    assert qcrb_theta_opt(1) == qcrb_individual(1)


@pytest.mark.parametrize("D", range(1, 11))
def test_consistency_loop(D):
    assert variance_bound_theta(optimal_probe_theta(D), 3.0) == pytest.approx(qcrb_theta_opt(D, 3.0), rel=1e-12)


@pytest.mark.parametrize("D", [2, 3, 5, 8])
def test_stationarity(D):
    """Moving ±1e-3 of population between two modes never helps."""
    w0 = optimal_probe_theta(D).populations
    best = variance_bound_theta(w0)
    for i in range(D + 1):
        for j in range(D + 1):
            if i == j:
                continue
            for d in (1e-3, -1e-3):
                w = w0.copy()
                w[i] += d
                w[j] -= d
                assert variance_bound_theta(w) >= best


@pytest.mark.parametrize("D", range(1, 11))
def test_numeric_optimizer_matches_closed_forms(D):
    w = optimize_probe_numeric("theta_ref", D).populations
    assert np.abs(w - optimal_probe_theta(D).populations).max() <= 1e-6
    w = optimize_probe_numeric(make_parametrization("phi_neighbor", D)).populations
    assert np.abs(w - optimal_probe_phi(D).populations).max() <= 1e-6


def test_numeric_optimizer_deterministic():
    a = optimize_probe_numeric("phi_neighbor", 5, seed=3).amplitudes
    b = optimize_probe_numeric("phi_neighbor", 5, seed=3).amplitudes
    assert np.array_equal(a, b)


def test_numeric_optimizer_custom_map():
    J = np.array([[0, 0], [1, 0], [1, 2.0]])
    pmap = make_parametrization("custom", 2, custom_jacobian=J)
    w = optimize_probe_numeric(pmap).populations
    v = qcrb_total_variance(qfim_pure(ProbeState.from_populations(w), pmap))
    rng = np.random.default_rng(0)
    for _ in range(200):
        other = ProbeState.from_populations(rng.dirichlet(np.ones(3)))
        assert qcrb_total_variance(qfim_pure(other, pmap)) >= v * (1 - 1e-9)


def test_bound_report_validation():
    BoundReport("individual", 2, 1.0, 4.0)
    with pytest.raises(InvalidArgument):
        BoundReport("bogus", 2, 1.0, 4.0)
    with pytest.raises(InvalidArgument):
        BoundReport("individual", 2, 1.0, 0.0)


def test_bad_D():
    with pytest.raises(InvalidArgument):
        optimal_probe_theta(0)
    with pytest.raises(InvalidArgument):
        qcrb_theta_opt(2, N=0)
