import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zigzagspec.charfn import (
    gaussian_closed_form_dpsi,
    gaussian_closed_form_psi,
    make_handle,
    psi,
    psi_derivative,
    z_log_derivative,
    z_value,
    z_value_batch,
)
from zigzagspec.errors import DomainError, NearZeroError
from zigzagspec.potential import beta_family, gaussian

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Gaussian psi+ oracle, mpmath: 1 - sqrt(2 pi) g exp(2 g^2) erfc(sqrt 2 g)
PSI_ORACLE = [
    (0.25 + 0.0j, 0.5618177717731538 + 0.0j),
    (-0.5 + 1.0j, -1.2657170815413656 + 0.1614988283362801j),
    (-3.0 + 5.0j, -0.003363813992853657 + 0.0066216859907707246j),
    (1.0 - 2.0j, -0.02575642496701365 + 0.047206208723456614j),
]
DPSI_ORACLE = [
    (0.25 + 0.0j, -1.1909111411342308 + 0.0j),
    (-0.5 + 1.0j, 2.9209247450231812 - 3.6378918489394425j),
]


@pytest.mark.parametrize("g,expected", PSI_ORACLE)
def test_closed_form_psi_against_mpmath(g, expected):
    assert abs(gaussian_closed_form_psi(g) - expected) <= 1e-13 * max(1.0, abs(expected))


@pytest.mark.parametrize("g,expected", DPSI_ORACLE)
def test_closed_form_dpsi_against_mpmath(g, expected):
    assert abs(gaussian_closed_form_dpsi(g) - expected) <= 1e-12 * abs(expected)


def test_psi_at_zero_is_one():
    pot = gaussian(1.0)
    assert gaussian_closed_form_psi(0.0) == 1.0
    assert abs(psi(pot, +1, 0.0) - 1.0) < 1e-12
    assert abs(psi(pot, -1, 0.0) - 1.0) < 1e-12


def test_quadrature_psi_matches_closed_form_moderate_gammas():
    # at moderate |Re gamma| both routes are accurate; the deep-left cross
    # check lives in the acceptance suite where its limits are documented
    pot = gaussian(1.0)
    for g in (0.3 + 0.0j, -0.5 + 1.0j, -0.9 - 1.3j, 0.05 + 2.0j):
        q = psi(pot, +1, g)
        c = gaussian_closed_form_psi(g)
        assert abs(q - c) < 5e-12, f"gamma={g}"


def test_psi_minus_equals_psi_plus_for_even_potential():
    pot = gaussian(1.0)
    for g in (0.2 + 0.4j, -0.6 + 1.1j):
        assert abs(psi(pot, +1, g) - psi(pot, -1, g)) < 5e-12


def test_psi_verify_mode_cross_checks_defining_integral():
    pot = gaussian(1.0)
    v = psi(pot, +1, -0.4 + 0.9j, verify=True)
    assert abs(v - gaussian_closed_form_psi(-0.4 + 0.9j)) < 5e-11


def test_psi_sign_validation():
    with pytest.raises(DomainError):
        psi(gaussian(1.0), 0, 0.1)


def test_psi_derivative_matches_finite_difference():
    pot = beta_family(2.5)
    g = -0.35 + 0.8j
    h = 1e-6
    fd = (psi(pot, +1, g + h) - psi(pot, +1, g - h)) / (2 * h)
    assert abs(psi_derivative(pot, +1, g) - fd) < 1e-7


def test_sigma_rescaling_identity():
    # psi_sigma(gamma) = psi_1(sigma gamma) for the gaussian family
    wide = gaussian(2.0)
    for g in (0.1 + 0.3j, -0.4 + 0.7j):
        assert abs(psi(wide, +1, g) - gaussian_closed_form_psi(2.0 * g)) < 5e-12


def test_handle_z_value_and_roots():
    pot = gaussian(1.0)
    handle = make_handle(pot)
    # Z(0) = 0 exactly; its logarithmic derivative is guarded there
    assert abs(z_value(handle, 0.0)) < 1e-14
    with pytest.raises(NearZeroError):
        z_log_derivative(handle, 0.0)
    # away from the spectrum Z is regular
    z = z_value(handle, -0.2 + 0.5j)
    assert np.isfinite(z.real) and np.isfinite(z.imag)


def test_z_log_derivative_at_regular_point():
    pot = gaussian(1.0)
    handle = make_handle(pot)
    g = -0.3 + 0.4j
    h = 1e-6
    fd = (
        np.log(z_value(handle, g + h)) - np.log(z_value(handle, g - h))
    ) / (2 * h)
    assert abs(z_log_derivative(handle, g) - fd) < 1e-6


def test_branch_handles_satisfy_factorization():
    # Z = Z+ Z- for even potentials: 1 - psi^2 = (1 - psi)(1 + psi)
    pot = gaussian(1.0)
    full = make_handle(pot, branch="full")
    plus = make_handle(pot, branch="plus")
    minus = make_handle(pot, branch="minus")
    for g in (-0.3 + 0.6j, -0.8 + 1.2j):
        zf = z_value(full, g)
        zp = z_value(plus, g)
        zm = z_value(minus, g)
        assert abs(zf - zp * zm) < 1e-12


def test_batch_matches_scalar():
    pot = gaussian(1.0)
    handle = make_handle(pot)
    gs = np.array([-0.3 + 0.6j, -0.8 + 1.2j, 0.05 - 0.4j])
    batch = z_value_batch(handle, gs)
    for g, v in zip(gs, batch):
        assert abs(z_value(handle, complex(g)) - v) < 1e-14


def test_quadrature_backend_agrees_with_closed_form_handle():
    pot = gaussian(1.0)
    fast = make_handle(pot, backend="gaussian-closed-form")
    slow = make_handle(pot, backend="quadrature")
    for g in (-0.4 + 0.8j, -0.7 + 1.4j):
        assert abs(z_value(fast, g) - z_value(slow, g)) < 5e-12


def test_z_prime_at_zero_equals_twice_mass():
    # dZ/dgamma at 0 is 2 int e^{-U} = 2 sqrt(2 pi) for the standard gaussian
    pot = gaussian(1.0)
    handle = make_handle(pot)
    pp, dp, pm, dm = handle.psi_at(0.0)
    dz = -(pm * dp + pp * dm)
    assert abs(dz - 2.0 * SQRT_2PI) < 1e-12


@given(
    re=st.floats(-1.5, 0.5),
    im=st.floats(0.05, 2.0),
)
@settings(max_examples=40, deadline=None)
def test_conjugate_symmetry_property(re, im):
    g = complex(re, im)
    a = gaussian_closed_form_psi(np.conj(g))
    b = np.conj(gaussian_closed_form_psi(g))
    assert abs(a - b) <= 1e-13 * max(1.0, abs(b))
