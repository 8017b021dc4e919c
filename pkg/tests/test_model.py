import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from kerrqed import hilbert, model
from kerrqed.errors import InvalidInputError, SingularParametersError, TruncationOverflowError
from kerrqed.model import RawParams

from conftest import random_state


def test_balanced_lambda_example():
    raw = RawParams(omega1=0.2, omega2=0.1, lambda1=1.0, lambda2=0.1)
    assert model.balanced_lambda(raw) == pytest.approx(1.0 / 99.0, rel=1e-14)


def test_balanced_lambda_degenerate_modes():
    assert model.balanced_lambda(RawParams(omega1=0.3, omega2=0.3, lambda2=0.4)) == 0.0


def test_balanced_lambda_singular():
    with pytest.raises(SingularParametersError):
        model.balanced_lambda(RawParams(lambda1=1.0, lambda2=1.0))


def test_raw_params_invariants():
    with pytest.raises(InvalidInputError):
        RawParams(lambda1=0.0)
    with pytest.raises(InvalidInputError):
        RawParams(lambda2=-0.1)


def test_mixing_angle_examples():
    assert model.mixing_angle(RawParams(lam=0.0, omega1=0.1, omega2=0.5)) == 0.0
    assert model.mixing_angle(RawParams(lam=0.2, omega1=0.1, omega2=0.5)) == pytest.approx(math.pi / 8)
    assert model.mixing_angle(RawParams(lam=0.2, omega1=0.3, omega2=0.3)) == pytest.approx(math.pi / 4)


def test_mixing_angle_decouple_branch_example():
    raw = RawParams(omega1=0.2, omega2=0.1, lambda2=0.1).with_balanced_lambda()
    theta = model.mixing_angle(raw, model.DECOUPLE_MODE1)
    assert theta == pytest.approx(math.atan(10.0), abs=1e-12)
    # independent checks: mu1 vanishes and the angle solves tan 2 theta = 2 lam / (w2 - w1)
    assert abs(math.cos(theta) - 0.1 * math.sin(theta)) < 1e-14
    assert math.tan(2 * theta) == pytest.approx(2 * raw.lam / (raw.omega2 - raw.omega1), rel=1e-10)


def test_mixing_angle_principal_does_not_decouple():
    raw = RawParams(omega1=0.2, omega2=0.1, lambda2=0.1).with_balanced_lambda()
    p = model.transform_params(raw, model.mixing_angle(raw))
    assert abs(p.mu1) > 0.5


def test_mixing_angle_unknown_branch():
    with pytest.raises(InvalidInputError):
        model.mixing_angle(RawParams(), "sideways")


def test_transform_identity_rotation():
    raw = RawParams(omega1=0.3, omega2=0.7, omega0=0.5, lambda2=0.2)
    p = model.transform_params(raw, 0.0)
    assert (p.Omega1, p.Omega2, p.mu1, p.mu2) == pytest.approx((0.3, 0.7, 1.0, 0.2))
    assert p.Delta == pytest.approx(0.2)


def test_transform_quarter_turn_swaps_modes():
    raw = RawParams(lambda2=0.2)
    p = model.transform_params(raw, math.pi / 2)
    assert p.mu1 == pytest.approx(-0.2, abs=1e-15)
    assert p.mu2 == pytest.approx(1.0, abs=1e-15)


def test_transform_decoupled_example():
    raw = RawParams(omega1=0.2, omega2=0.1, lambda2=0.1).with_balanced_lambda()
    p = model.transform_params(raw, math.atan(10.0))
    assert abs(p.mu1) < 1e-12
    assert p.mu2 == pytest.approx(math.sqrt(1.01), abs=1e-12)
    assert p.mu_bar == pytest.approx(1.0049876, abs=1e-7)


def test_transform_delta_override():
    raw = RawParams(omega1=0.2, omega2=0.1, omega0=5.0, lambda2=0.1).with_balanced_lambda()
    p = model.transform_params(raw, 0.3, delta=0.25)
    assert p.Delta == 0.25
    assert p.Omega2 - p.omega0 == pytest.approx(0.25)


def test_transform_sqrt_form():
    raw = RawParams(omega1=0.25, omega2=0.16)
    assert model.transform_params(raw, 0.0, sqrt_form=True).Omega1 == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        model.transform_params(RawParams(omega1=-1.0), 0.0, sqrt_form=True)


def test_transform_requires_codirectional_kerr():
    with pytest.raises(InvalidInputError):
        model.transform_params(RawParams(chi1=0.1, chi2=0.1, chi_bar=0.1), 0.0)
    p = model.transform_params(RawParams.codirectional(chi=0.1), 0.0)
    assert p.chi == 0.1


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.0, 5.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0),
       st.floats(-6.0, 6.0))
def test_rotation_preserves_coupling_norm(l1, l2, w1, w2, theta):
    p = model.transform_params(RawParams(omega1=w1, omega2=w2, lambda1=l1, lambda2=l2), theta)
    assert p.mu1 ** 2 + p.mu2 ** 2 == pytest.approx(l1 ** 2 + l2 ** 2, abs=1e-12 * max(1, l1 ** 2 + l2 ** 2))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_decouple_branch_property(l1, l2, w1, w2):
    assume(abs(l1 - l2) > 1e-3)
    raw = RawParams(omega1=w1, omega2=w2, lambda1=l1, lambda2=l2).with_balanced_lambda()
    p = model.transform_params(raw, model.mixing_angle(raw, model.DECOUPLE_MODE1))
    assert abs(p.mu1) <= 1e-12
    assert abs(p.mu2 - p.mu_bar) <= 1e-12


def test_coherent_frame_change_examples():
    assert model.coherent_frame_change(1 + 2j, 3.0, 0.0) == (1 + 2j, 3.0)
    b1, b2 = model.coherent_frame_change(2.0, 0.0, math.pi / 2)
    assert b1 == pytest.approx(0.0, abs=1e-15) and b2 == pytest.approx(2.0)
    b1, b2 = model.coherent_frame_change(1 + 1j, 2 - 0.5j, 0.83)
    assert abs(b1) ** 2 + abs(b2) ** 2 == pytest.approx(2 + 4.25)


def test_fock_frame_change_identity(rng):
    s = random_state(rng, 4, 4, max_total=3)
    out = model.fock_frame_change(s, 0.0)
    np.testing.assert_allclose(out.amps, s.amps, atol=1e-15)


def test_fock_frame_change_one_photon():
    theta = 0.37
    out = model.fock_frame_change(hilbert.fock_state("g", 1, 0, (2, 2, 2)), theta)
    t = out.tensor[1]
    assert t[1, 0] == pytest.approx(math.cos(theta))
    assert t[0, 1] == pytest.approx(math.sin(theta))


def _rotation_generator(n):
    """K = a2^dag a1 - a1^dag a2 on an n x n two-mode truncation."""
    a = np.diag(np.sqrt(np.arange(1, n)), 1)
    eye = np.eye(n)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    return a2.T @ a1 - a1.T @ a2


@pytest.mark.parametrize("theta", [0.4, -1.1, 2.5])
def test_fock_frame_change_matches_matrix_exponential(rng, theta):
    n = 7
    s = random_state(rng, n, n, max_total=n - 1)
    expected = np.stack([expm(theta * _rotation_generator(n)) @ s.tensor[k].ravel() for k in range(2)])
    out = model.fock_frame_change(s, theta)
    np.testing.assert_allclose(out.tensor.reshape(2, -1), expected, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-7.0, 7.0), st.integers(0, 2 ** 32 - 1))
def test_fock_frame_change_roundtrip_norm_photons(theta, seed):
    s = random_state(np.random.default_rng(seed), 6, 6, max_total=5)
    out = model.fock_frame_change(s, theta)
    assert out.norm() == pytest.approx(1.0, abs=1e-10)
    m = np.add.outer(np.arange(6), np.arange(6))
    n_in = np.sum(np.abs(s.tensor) ** 2 * m)
    n_out = np.sum(np.abs(out.tensor) ** 2 * m)
    assert n_out == pytest.approx(n_in, abs=1e-10)
    back = model.fock_frame_change(out, theta, model.B_TO_A)
    np.testing.assert_allclose(back.amps, s.amps, atol=1e-10)


def test_fock_frame_change_high_photon_numbers_stable():
    s = hilbert.fock_state("e", 20, 20, (2, 41, 41))
    out = model.fock_frame_change(s, 0.9)
    back = model.fock_frame_change(out, 0.9, model.B_TO_A)
    np.testing.assert_allclose(back.amps, s.amps, atol=1e-10)


def test_fock_frame_change_overflow():
    s = hilbert.fock_state("e", 3, 3, (2, 4, 4))
    with pytest.raises(TruncationOverflowError):
        model.fock_frame_change(s, 0.5)
    with pytest.raises(TruncationOverflowError):
        model.fock_frame_change(s, 0.5, out_dims=(2, 3, 3))
    out = model.fock_frame_change(s, 0.5, out_dims=(2, 7, 7))
    assert out.dims == (2, 7, 7)


@pytest.mark.parametrize("alphas,theta", [((1.2, 0.8j), 0.6), ((2.0, 1.0), math.atan(10.0))])
def test_fock_and_coherent_frame_changes_agree(alphas, theta):
    a1, a2 = alphas
    n_in, n_out = 31, 61
    s = hilbert.tensor_state(hilbert.atom_vector("e"), hilbert.coherent_amplitudes(a1, n_in - 1).amplitudes,
                             hilbert.coherent_amplitudes(a2, n_in - 1).amplitudes)
    out = model.fock_frame_change(s, theta, out_dims=(2, n_out, n_out))
    b1, b2 = model.coherent_frame_change(a1, a2, theta)
    ref = hilbert.tensor_state(hilbert.atom_vector("e"), hilbert.coherent_amplitudes(b1, n_out - 1).amplitudes,
                               hilbert.coherent_amplitudes(b2, n_out - 1).amplitudes)
    dist = hilbert.trace_distance(out.to_density(), ref.to_density()) if out.dim < 600 else \
        math.sqrt(max(0.0, 1 - abs(np.vdot(out.amps, ref.amps)) ** 2))
    assert dist < 1e-8


def test_leading_order_angle():
    assert model.leading_order_angle(RawParams(lambda2=0.3)) == pytest.approx(math.pi / 2)
