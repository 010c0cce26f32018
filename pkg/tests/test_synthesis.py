import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiramsey import (
    CascadeAngles,
    InvalidArgument,
    ProbeState,
    SpinRotationSpec,
    ZeroResidual,
    bs_cascade_angles,
    bs_cascade_unitary,
    optimal_probe_theta,
    random_orthogonal,
    spin_levels,
    spin_rotation,
    validate_orthogonal,
    wigner_d_matrix,
    wigner_small_d,
)
from multiramsey.synthesis import spin_rotation_batch

CHI_STAR = 0.2774 * math.pi


def spin1_explicit(chi):
    c, s, r = math.cos(chi), math.sin(chi), math.sqrt(2)
    return np.array(
        [
            [(1 + c) / 2, -s / r, (1 - c) / 2],
            [s / r, c, -s / r],
            [(1 - c) / 2, s / r, (1 + c) / 2],
        ]
    )


# beam-splitter cascade


def test_cascade_balanced():
    a = bs_cascade_angles(ProbeState.from_populations([0.5, 0.5]))
    assert a.etas[0] == pytest.approx(math.pi / 4, abs=1e-15)


def test_cascade_uniform_D2():
    a = bs_cascade_angles(ProbeState.from_populations(np.full(3, 1 / 3)))
    np.testing.assert_allclose(np.cos(a.etas) ** 2, [1 / 3, 1 / 2], atol=1e-15)


def test_cascade_optimal_D2():
    a = bs_cascade_angles(optimal_probe_theta(2))
    np.testing.assert_allclose(np.cos(a.etas) ** 2, [0.414214, 0.5], atol=1e-6)


def test_cascade_identity():
    np.testing.assert_array_equal(bs_cascade_unitary(CascadeAngles(np.zeros(4))).entries, np.eye(5))


def test_cascade_2x2():
    c = math.sqrt(2) / 2
    U = bs_cascade_unitary(CascadeAngles([math.pi / 4])).entries
    np.testing.assert_allclose(U, [[c, -c], [c, c]], atol=1e-15)


def test_cascade_angle_range():
    with pytest.raises(InvalidArgument):
        CascadeAngles([2.0])


def test_cascade_trailing_zeros():
    a = bs_cascade_angles(ProbeState.from_populations([0.5, 0.5, 0, 0]))
    np.testing.assert_allclose(a.etas, [math.pi / 4, 0, 0], atol=1e-15)
    U = bs_cascade_unitary(a).entries
    np.testing.assert_allclose(U[:, 0] ** 2, [0.5, 0.5, 0, 0], atol=1e-15)


def test_cascade_zero_residual():
    # an exhausted residual with mass left over cannot be met
    with pytest.raises(ZeroResidual):
        bs_cascade_angles(np.array([1.0, 0.0, 1e-3]))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_cascade_round_trip(D, seed):
    w = np.random.default_rng(seed).dirichlet(np.ones(D + 1))
    w = np.maximum(w, 1e-12)
    w /= w.sum()
    U = bs_cascade_unitary(bs_cascade_angles(ProbeState.from_populations(w)))
    assert np.abs(U.entries[:, 0] ** 2 - w).max() <= 1e-12
    validate_orthogonal(U, tol=1e-12)


# Wigner d and spin rotations


@pytest.mark.parametrize("F", [0.5, 1, 1.5, 2, 3.5, 5])
def test_d_identity_at_zero(F):
    np.testing.assert_allclose(wigner_d_matrix(F, 0.0), np.eye(int(2 * F + 1)), atol=1e-15)
    np.testing.assert_allclose(spin_rotation(SpinRotationSpec(F, 0.0)).entries, np.eye(int(2 * F + 1)), atol=1e-14)


def test_d_spin_half():
    for chi in (0.3, 1.7, 3.0):
        c, s = math.cos(chi / 2), math.sin(chi / 2)
        np.testing.assert_allclose(wigner_d_matrix(0.5, chi), [[c, -s], [s, c]], atol=1e-15)


CHI_EXACT = math.acos(math.sqrt(math.sqrt(2) - 1))  # d_00 = cos(chi), cos(chi)^2 = sqrt(2) - 1


def test_d_spin1_optimal_angle():
    # 0.2774pi is the four-digit rounding of CHI_EXACT; that costs ~1.3e-4
    assert wigner_small_d(1, 0, 0, CHI_STAR) ** 2 == pytest.approx(0.414214, abs=5e-4)
    assert wigner_small_d(1, 0, 0, CHI_EXACT) ** 2 == pytest.approx(math.sqrt(2) - 1, abs=1e-14)


def test_d_invalid_indices():
    with pytest.raises(InvalidArgument):
        wigner_small_d(1, 2, 0, 0.1)
    with pytest.raises(InvalidArgument):
        wigner_small_d(1, 0.5, 0, 0.1)


def test_spin1_explicit_matrix():
    for chi in np.linspace(0, 2 * math.pi, 50):
        U = spin_rotation(SpinRotationSpec(1, chi)).entries
        assert np.abs(U - spin1_explicit(chi)).max() <= 1e-14


def test_spin1_populations_at_optimum():
    U = spin_rotation(SpinRotationSpec(1, CHI_STAR)).entries
    np.testing.assert_allclose(U[:, 1] ** 2, [0.292893, 0.414214, 0.292893], atol=5e-4)
    U = spin_rotation(SpinRotationSpec(1, CHI_EXACT)).entries
    np.testing.assert_allclose(U[:, 1] ** 2, optimal_probe_theta(2).populations[[1, 0, 2]], atol=1e-14)


def test_spin_levels_order():
    np.testing.assert_array_equal(spin_levels(1), [1, 0, -1])
    np.testing.assert_array_equal(spin_levels(1.5), [1.5, 0.5, -0.5, -1.5])


@pytest.mark.parametrize("F", [0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5])
@pytest.mark.parametrize("chi", [0.1, CHI_STAR, 1.0, math.pi - 0.1])
def test_two_oracle_agreement(F, chi):
    d = wigner_d_matrix(F, chi)
    U = spin_rotation(SpinRotationSpec(F, chi)).entries
    assert np.abs(d - U).max() <= 1e-10


@pytest.mark.parametrize("F", [x / 2 for x in range(1, 12)])
def test_d_unitarity(F):
    for chi in (0.1, CHI_STAR, 2.5):
        d = wigner_d_matrix(F, chi)
        np.testing.assert_allclose((d**2).sum(axis=1), 1.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([0.5, 1, 1.5, 2, 3, 4.5]),
    st.floats(-math.pi, math.pi),
    st.floats(-math.pi, math.pi),
)
def test_rotation_group(F, a, b):
    Ua = spin_rotation(SpinRotationSpec(F, a)).entries
    Ub = spin_rotation(SpinRotationSpec(F, b)).entries
    Uab = spin_rotation(SpinRotationSpec(F, a + b)).entries
    assert np.abs(Ua @ Ub - Uab).max() <= 1e-10


def test_batch_matches_single():
    chis = np.linspace(0.05, 3.0, 7)
    batch = spin_rotation_batch(2, chis)
    for chi, U in zip(chis, batch):
        np.testing.assert_allclose(U, spin_rotation(SpinRotationSpec(2, chi)).entries, atol=1e-13)


def test_spin_spec_validation():
    assert SpinRotationSpec(1.5, 0.1).initial_m == 0.5
    with pytest.raises(InvalidArgument):
        SpinRotationSpec(1, 0.1, initial_m=2)
    with pytest.raises(InvalidArgument):
        SpinRotationSpec(1.5, 0.1, initial_m=0)
    with pytest.raises(InvalidArgument):
        SpinRotationSpec(0.7, 0.1)


@pytest.mark.parametrize("F", [0.5, 1, 2.5, 5])
def test_spin_rotation_passes_validation(F):
    validate_orthogonal(spin_rotation(SpinRotationSpec(F, 1.234)), tol=1e-12)


def test_random_orthogonal():
    assert abs(random_orthogonal(1, 5).entries[0, 0]) == 1.0
    assert np.array_equal(random_orthogonal(4, 9).entries, random_orthogonal(4, 9).entries)
    for seed in range(10):
        validate_orthogonal(random_orthogonal(5, seed), tol=1e-12)
