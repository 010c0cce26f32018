import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiramsey import (
    InvalidArgument,
    InvalidParametrization,
    NotOrthogonal,
    ProbeState,
    make_parametrization,
    phases_from_params,
    qfim_pure,
    random_orthogonal,
    validate_orthogonal,
)


def test_theta_ref_D2_jacobian():
    J = make_parametrization("theta_ref", 2).jacobian
    np.testing.assert_array_equal(J, [[0, 0], [1, 0], [0, 1]])


def test_phi_neighbor_D2_jacobian():
    J = make_parametrization("phi_neighbor", 2).jacobian
    np.testing.assert_array_equal(J, [[0, 0], [1, 0], [1, 1]])


def test_theta_ref_D1():
    np.testing.assert_array_equal(make_parametrization("theta_ref", 1).jacobian, [[0], [1]])


def test_rank_deficient_custom_map_rejected():
    with pytest.raises(InvalidParametrization):
        make_parametrization("custom", 2, custom_jacobian=[[0, 0], [1, 1], [2, 2]])


def test_custom_map_wrong_shape():
    with pytest.raises(InvalidParametrization):
        make_parametrization("custom", 2, custom_jacobian=np.eye(2))


def test_unknown_kind():
    with pytest.raises(InvalidArgument):
        make_parametrization("nope", 2)


def test_reference_mode_moves_zero_row():
    J = make_parametrization("theta_ref", 2, reference_mode=1).jacobian
    np.testing.assert_array_equal(J, [[1, 0], [0, 0], [0, 1]])


@pytest.mark.parametrize(
    "kind, expected", [("theta_ref", [0, 0.1, 0.2]), ("phi_neighbor", [0, 0.1, 0.3])]
)
def test_phases_from_params(kind, expected):
    phi = phases_from_params(make_parametrization(kind, 2), [0.1, 0.2])
    np.testing.assert_allclose(np.asarray(phi), expected, atol=1e-15)


def test_zero_theta_gives_offsets():
    c = np.array([0.5, -0.2, 1.0])
    pmap = make_parametrization("phi_neighbor", 2, offsets=c)
    np.testing.assert_array_equal(np.asarray(phases_from_params(pmap, [0, 0])), c)


def test_phases_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        phases_from_params(make_parametrization("theta_ref", 2), [0.1])


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 8),
    st.sampled_from(["theta_ref", "phi_neighbor"]),
    st.integers(0, 2**32 - 1),
)
def test_phases_linear(D, kind, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=D + 1)
    pmap = make_parametrization(kind, D, offsets=c)
    a, b = rng.normal(size=D), rng.normal(size=D)
    lhs = np.asarray(phases_from_params(pmap, a + b)) - c
    rhs = (np.asarray(phases_from_params(pmap, a)) - c) + (np.asarray(phases_from_params(pmap, b)) - c)
    # linear up to rounding of the sums
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_validate_orthogonal_examples():
    validate_orthogonal(np.eye(3))
    c, s = math.cos(0.3), math.sin(0.3)
    validate_orthogonal([[c, -s], [s, c]])
    with pytest.raises(NotOrthogonal) as info:
        validate_orthogonal(np.diag([1, 1j]))
    assert info.value.check == "imaginary"


def test_validate_orthogonal_reports_deviation():
    M = np.eye(2)
    M[0, 1] = 1e-6
    with pytest.raises(NotOrthogonal) as info:
        validate_orthogonal(M)
    assert info.value.check == "orthogonality"
    assert info.value.deviation == pytest.approx(1e-6, rel=1e-3)


def test_probe_normalization_enforced():
    with pytest.raises(InvalidArgument):
        ProbeState([1.0, 1.0])


def test_probe_is_immutable():
    p = ProbeState.from_populations([0.5, 0.5])
    with pytest.raises(ValueError):
        p.amplitudes[0] = 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.integers(0, 10))
def test_gauge_invariance(D, seed, gauge):
    """Pinning a different mode's phase leaves the QFIM unchanged."""
    gauge = gauge % (D + 1)
    w = np.random.default_rng(seed).dirichlet(np.ones(D + 1))
    probe = ProbeState.from_populations(w)
    for kind in ("theta_ref", "phi_neighbor"):
        F0 = qfim_pure(probe, make_parametrization(kind, D)).entries
        F1 = qfim_pure(probe, make_parametrization(kind, D, gauge_mode=gauge)).entries
        assert np.abs(F0 - F1).max() <= 1e-12


def test_alternative_gauge_D1():
    """f_1 = phi_1 and f_0 = phi_1 - theta_1 is the same experiment."""
    pmap = make_parametrization("theta_ref", 1, gauge_mode=1)
    np.testing.assert_array_equal(pmap.jacobian, [[-1], [0]])
    probe = ProbeState.from_populations([0.3, 0.7])
    F0 = qfim_pure(probe, make_parametrization("theta_ref", 1)).entries
    assert np.abs(qfim_pure(probe, pmap).entries - F0).max() <= 1e-12


@pytest.mark.parametrize("dim", [2, 5, 9])
def test_random_orthogonal_validates(dim):
    validate_orthogonal(random_orthogonal(dim, seed=dim), tol=1e-12)
