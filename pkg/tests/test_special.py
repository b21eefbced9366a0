import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stefan_control.errors import ParameterDomainError
from stefan_control.special import (
    I1_SWITCH, SeriesTolerance, bessel_i1, bessel_j1, erf, i1_asymptotic_sum, i1_ratio, i1_ratio_array,
    i1_series, j1_ratio, j1_ratio_array,
)

mpmath.mp.prec = 256


def mp_i1(z):
    return float(mpmath.besseli(1, z))


def mp_j1(z):
    return float(mpmath.besselj(1, z))


def test_zero_values():
    assert bessel_i1(0.0) == 0.0
    assert bessel_j1(0.0) == 0.0
    assert erf(0.0) == 0.0
    assert i1_ratio(0.0) == 0.5
    assert j1_ratio(0.0) == 0.5


@pytest.mark.parametrize("z", [1.0, 2.0])
def test_i1_reference_points(z):
    assert bessel_i1(z) == pytest.approx(mp_i1(z), rel=1e-13)


def test_i1_printed_digits():
    assert bessel_i1(1.0) == pytest.approx(0.5651591, abs=5e-8)
    assert bessel_i1(2.0) == pytest.approx(1.5906369, abs=5e-8)
    assert i1_ratio(1.0) == pytest.approx(0.5651591, abs=5e-8)


def test_j1_reference_points():
    assert bessel_j1(1.0) == pytest.approx(mp_j1(1.0), abs=1e-14)
    assert bessel_j1(1.0) == pytest.approx(0.4400506, abs=5e-8)


def test_j1_first_zero():
    z0 = float(mpmath.besseljzero(1, 1))
    assert abs(bessel_j1(z0)) < 1e-13
    assert abs(bessel_j1(3.8317060)) < 1e-7
    assert bessel_j1(z0 - 1e-3) > 0 > bessel_j1(z0 + 1e-3)


def test_erf_reference():
    assert erf(1.0) == pytest.approx(0.8427008, abs=5e-8)
    assert erf(1.0) == pytest.approx(float(mpmath.erf(1)), abs=1e-15)


GRID = np.linspace(0.0, 30.0, 1000)


def test_i1_grid_vs_mpmath():
    worst = max(abs(bessel_i1(z) - mp_i1(z)) / max(1.0, mp_i1(z)) for z in GRID)
    assert worst < 1e-12


def test_j1_grid_vs_mpmath():
    worst = max(abs(bessel_j1(z) - mp_j1(z)) for z in GRID)
    assert worst < 1e-12


def test_erf_grid_vs_mpmath():
    xs = np.linspace(-30.0, 30.0, 2001)
    worst = max(abs(erf(x) - float(mpmath.erf(x))) for x in xs)
    assert worst < 1e-12


@pytest.mark.parametrize("x", [2.999999, 3.0, 3.000001])
def test_erf_seam(x):
    assert erf(x) == pytest.approx(float(mpmath.erf(x)), abs=1e-15)


def test_i1_branches_agree_at_switch():
    z = I1_SWITCH
    series = i1_series(z, 1e-16, 400)
    asym = math.exp(z) / math.sqrt(2 * math.pi * z) * i1_asymptotic_sum(z)
    assert abs(series - asym) / series < 1e-9
    assert abs(series - mp_i1(z)) / mp_i1(z) < 1e-13


def test_ratios_continuous_at_zero():
    assert abs(i1_ratio(1e-4) - i1_ratio(0.0)) < 1e-8
    assert abs(j1_ratio(1e-4) - j1_ratio(0.0)) < 1e-8


def test_ratio_arrays_match_scalars():
    z = np.linspace(0.0, 40.0, 257)
    assert np.allclose(i1_ratio_array(z), [i1_ratio(v) for v in z], rtol=1e-14, atol=0)
    assert np.allclose(j1_ratio_array(z), [j1_ratio(v) for v in z], rtol=0, atol=1e-15)


def test_i1_ratio_array_vs_mpmath():
    z = np.linspace(1e-3, 60.0, 301)
    ref = np.array([float(mpmath.besseli(1, v) / v) for v in z])
    assert np.max(np.abs(i1_ratio_array(z) / ref - 1.0)) < 1e-13


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 50.0))
def test_erf_odd(x):
    assert erf(-x) == -erf(x)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 30.0))
def test_odd_bessels(z):
    assert bessel_i1(-z) == -bessel_i1(z)
    assert bessel_j1(-z) == -bessel_j1(z)


def test_nan_rejected():
    for fn in (bessel_i1, bessel_j1, erf, i1_ratio, j1_ratio):
        with pytest.raises(ParameterDomainError):
            fn(float("nan"))


@pytest.mark.parametrize("kw", [dict(rel_tol=0.0), dict(rel_tol=1.0), dict(max_terms=9)])
def test_series_tolerance_invariants(kw):
    with pytest.raises(ParameterDomainError):
        SeriesTolerance(**kw)


def test_looser_tolerance_still_close():
    loose = SeriesTolerance(rel_tol=1e-8, max_terms=50)
    assert bessel_i1(5.0, loose) == pytest.approx(mp_i1(5.0), rel=1e-7)
