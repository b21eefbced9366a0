import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stefan_control import (
    ZINC, ControllerGains, direct_transform, error_inverse, error_transform, gain_phi, gain_psi, h1_norm,
    inverse_kernel_Q1, inverse_transform, linear_initial_profile, observer_gain_p1, observer_gain_p2,
    observer_kernel_P1,
)
from stefan_control.errors import ParameterDomainError

AL, BE = ZINC.alpha, ZINC.beta
LAM, C, S_R = 0.001, 0.001, 0.35
L = LAM / AL


def mp_P1(x, y):
    z = mpmath.sqrt(mpmath.mpf(L) * (mpmath.mpf(y) ** 2 - mpmath.mpf(x) ** 2))
    ratio = mpmath.besseli(1, z) / z if z != 0 else mpmath.mpf(1) / 2
    return float(L * y * ratio)


def mp_Q1(x, y):
    z = mpmath.sqrt(mpmath.mpf(L) * (mpmath.mpf(y) ** 2 - mpmath.mpf(x) ** 2))
    ratio = mpmath.besselj(1, z) / z if z != 0 else mpmath.mpf(1) / 2
    return float(L * y * ratio)


def test_gains_invariants():
    with pytest.raises(ParameterDomainError):
        ControllerGains(0.0)
    with pytest.raises(ParameterDomainError):
        ControllerGains(0.001, 0.0)
    assert ControllerGains(0.001).lam is None


def test_phi_values():
    assert gain_phi(0.0, C, 1.577e-7) == 0.0
    assert gain_phi(0.35, C, 1.577e-7) == pytest.approx(2219.4, abs=0.1)
    x = np.linspace(-1, 1, 11)
    assert np.array_equal(gain_phi(-x, C, BE), -gain_phi(x, C, BE))


def test_psi_boundary_values_and_ode():
    assert gain_psi(0.0, C, AL, BE) == 0.0
    h = 1e-6
    slope = (gain_psi(h, C, AL, BE) - gain_psi(-h, C, AL, BE)) / (2 * h)
    assert slope == pytest.approx(C / BE, rel=1e-9)
    x = np.linspace(-S_R, 0.0, 11)
    hh = 1e-3
    d2 = (gain_psi(x + hh, C, AL, BE) - 2 * gain_psi(x, C, AL, BE) + gain_psi(x - hh, C, AL, BE)) / hh ** 2
    assert np.max(np.abs(d2 + C / AL * gain_psi(x, C, AL, BE))) < 1e-5 * C / BE


def test_P1_reference_point():
    assert L * S_R == pytest.approx(7.7225, abs=1e-4)
    # sqrt(L) * y = 1.64405 (the often-quoted 1.6443 is a rounding slip)
    assert math.sqrt(L) * S_R == pytest.approx(1.64405, abs=1e-5)
    assert observer_kernel_P1(0.0, S_R, LAM, AL) == pytest.approx(mp_P1(0.0, S_R), rel=1e-14)


@pytest.mark.parametrize("y", [0.01, 0.1, 0.35, 2.0])
def test_kernels_on_diagonal(y):
    assert observer_kernel_P1(y, y, LAM, AL) == pytest.approx(L * y / 2, rel=1e-15)
    assert inverse_kernel_Q1(y, y, LAM, AL) == pytest.approx(L * y / 2, rel=1e-15)


def test_kernels_vs_mpmath_grid():
    for y in np.linspace(0.05, 2.0, 9):
        for x in np.linspace(0.0, y, 7):
            assert observer_kernel_P1(x, y, LAM, AL) == pytest.approx(mp_P1(x, y), rel=1e-13)
            assert inverse_kernel_Q1(x, y, LAM, AL) == pytest.approx(mp_Q1(x, y), rel=1e-12, abs=1e-12)


def test_kernels_reject_x_above_y():
    with pytest.raises(ParameterDomainError):
        observer_kernel_P1(0.3, 0.2, LAM, AL)
    with pytest.raises(ParameterDomainError):
        inverse_kernel_Q1(0.3, 0.2, LAM, AL)
    with pytest.raises(ParameterDomainError):
        observer_gain_p1(0.5, 0.35, LAM, AL)


def test_Q1_sign_change_at_first_bessel_zero():
    j0 = float(mpmath.besseljzero(1, 1))
    y = 1.5 * j0 / math.sqrt(L)      # z(0, y) well past the first zero
    xs = np.linspace(0.0, y, 4001)
    z = np.sqrt(L * (y * y - xs * xs))
    q = inverse_kernel_Q1(xs, y, LAM, AL)
    changes = np.nonzero(np.diff(np.sign(q)))[0]
    assert changes.size == 1
    assert z[changes[0]] == pytest.approx(j0, abs=2 * (z[changes[0]] - z[changes[0] + 1]))


def test_Q1_small_lambda_limit():
    lam = 1e-9
    assert inverse_kernel_Q1(0.0, S_R, lam, AL) == pytest.approx(lam * S_R / (2 * AL), rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(y=st.floats(1e-3, 1.0), frac=st.floats(0.0, 1.0))
def test_P1_nonnegative(y, frac):
    assert observer_kernel_P1(frac * y, y, LAM, AL) >= 0.0


def test_observer_gains():
    assert observer_gain_p1(S_R, S_R, LAM, AL) == pytest.approx(-1.75e-4, rel=1e-12)
    assert observer_gain_p2(0.0, S_R, LAM, AL) == 0.0
    rng = np.random.default_rng(7)
    s = rng.uniform(0.01, 1.0, 100)
    x = s * rng.uniform(0.0, 1.0, 100)
    p1 = observer_gain_p1(x, s, LAM, AL)
    assert np.allclose(p1, -AL * observer_kernel_P1(x, s, LAM, AL), rtol=1e-14, atol=0)
    assert np.allclose(observer_gain_p2(x, s, LAM, AL), p1 * x / s, rtol=1e-14, atol=0)


# ---------------------------------------------------------------------------
# transforms

def test_zero_maps_to_zero():
    z = np.zeros(101)
    assert np.all(direct_transform(z, 0.2, 0.0, C, AL, BE) == 0)
    assert np.all(inverse_transform(z, 0.2, 0.0, C, AL, BE) == 0)
    assert np.all(error_transform(z, 0.2, LAM, AL) == 0)
    assert np.all(error_inverse(z, 0.2, LAM, AL) == 0)


def test_direct_transform_vanishes_at_interface():
    st0 = linear_initial_profile(1e4, 0.01, ZINC.tm, 100)
    w = direct_transform(st0.superheat(ZINC.tm), 0.01, 0.01 - S_R, C, AL, BE)
    assert w[-1] == 0.0


def test_round_trip_initial_profile():
    st0 = linear_initial_profile(1e4, 0.01, ZINC.tm, 200)
    u, s = st0.superheat(ZINC.tm), st0.s
    back = inverse_transform(direct_transform(u, s, s - S_R, C, AL, BE), s, s - S_R, C, AL, BE)
    assert h1_norm(back - u, s) / h1_norm(u, s) < 1e-6
    back = error_inverse(error_transform(u, s, LAM, AL), s, LAM, AL)
    assert h1_norm(back - u, s) / h1_norm(u, s) < 1e-6


def test_round_trip_error_quarters_on_refinement():
    def err(n):
        sig = np.linspace(0, 1, n + 1)
        u = 80.0 * (1 - sig) * (1 + 0.5 * np.sin(3 * sig))
        s = 0.3
        a = h1_norm(inverse_transform(direct_transform(u, s, -0.05, C, AL, BE), s, -0.05, C, AL, BE) - u, s)
        b = h1_norm(error_inverse(error_transform(u, s, LAM, AL), s, LAM, AL) - u, s)
        return np.array([a, b])
    ratio = err(100) / err(200)
    assert np.all((ratio > 3.5) & (ratio < 4.5))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1.0, 0.0), min_size=41, max_size=41))
def test_nonpositive_target_error_gives_nonpositive_error(values):
    w = np.array(values)
    w[-1] = 0.0
    u = error_inverse(w, 0.3, LAM, AL)
    assert np.all(u <= 1e-12)
