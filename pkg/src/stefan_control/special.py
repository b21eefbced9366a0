"""
Bessel functions of order one and the error function, evaluated in-repo.

Branches
--------
``I1``   power series for ``z <= 30``, large-argument expansion above.
``J1``   alternating power series with compensated summation for ``z <= 5``;
         above that the series loses too many digits to cancellation and
         Miller's backward recurrence (normalized by ``J0 + 2 sum J_2k = 1``)
         is used instead.
``erf``  positive (Kummer) series for ``|x| < 3``, continued fraction for
         ``erfc`` at ``|x| >= 3``.

The ``_``-prefixed scalar kernels are numba-compiled when available and are
called from the stepping loop; the public wrappers validate input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import ParameterDomainError

I1_SWITCH = 30.0
J1_SWITCH = 5.0
ERF_SWITCH = 3.0
RATIO_SMALL = 1e-4


@dataclass(frozen=True)
class SeriesTolerance:
    rel_tol: float = 1e-14
    max_terms: int = 200

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ParameterDomainError(f"rel_tol must be in (0, 1), got {self.rel_tol!r}")
        if self.max_terms < 10:
            raise ParameterDomainError(f"max_terms must be >= 10, got {self.max_terms!r}")


DEFAULT_TOL = SeriesTolerance()


@njit
def _i1_series(z, rel_tol, max_terms):
    q = 0.25 * z * z
    term = 0.5 * z
    total = term
    for m in range(1, max_terms):
        term *= q / (m * (m + 1.0))
        total += term
        if term <= rel_tol * total:
            break
    return total


@njit
def _i1_asymptotic_sum(z):
    # sum_k (-1)^k prod_j (4 - (2j-1)^2) / (k! (8z)^k), truncated at the smallest term
    total = 1.0
    term = 1.0
    for k in range(1, 80):
        odd = 2.0 * k - 1.0
        new = -term * (4.0 - odd * odd) / (8.0 * k * z)
        if abs(new) >= abs(term):
            break
        term = new
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


@njit
def _i1(z, rel_tol, max_terms):
    if z <= I1_SWITCH:
        return _i1_series(z, rel_tol, max_terms)
    return math.exp(z) / math.sqrt(2.0 * math.pi * z) * _i1_asymptotic_sum(z)


@njit
def _i1_ratio(z):
    if z < RATIO_SMALL:
        z2 = z * z
        return 0.5 + z2 / 16.0 + z2 * z2 / 384.0
    if z <= I1_SWITCH:
        return _i1_series(z, 1e-16, 400) / z
    # exp(z) / (z sqrt(2 pi z)) split to delay overflow
    return math.exp(z - 1.5 * math.log(z)) / math.sqrt(2.0 * math.pi) * _i1_asymptotic_sum(z)


@njit
def _j1_series(z, rel_tol, max_terms):
    q = 0.25 * z * z
    term = 0.5 * z
    total = term
    comp = 0.0
    for m in range(1, max_terms):
        term *= -q / (m * (m + 1.0))
        # Kahan summation
        y = term - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
        if abs(term) <= rel_tol * abs(total) and m > q:
            break
    return total


@njit
def _j1_miller(z):
    start = 2 * ((int(z + 12.0 * z ** (1.0 / 3.0)) + 40) // 2)
    jp1 = 0.0
    j = 1e-30
    norm = 0.0
    j1 = 0.0
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / z) * j - jp1
        jp1 = j
        j = jm1
        # j now holds J_{k-1} (unnormalized)
        if (k - 1) == 1:
            j1 = j
        elif (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j
        if abs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            norm *= 1e-250
            j1 *= 1e-250
    norm += j  # J_0
    return j1 / norm


@njit
def _j1(z, rel_tol, max_terms):
    if z <= J1_SWITCH:
        return _j1_series(z, rel_tol, max_terms)
    return _j1_miller(z)


@njit
def _j1_ratio(z):
    if z < RATIO_SMALL:
        z2 = z * z
        return 0.5 - z2 / 16.0 + z2 * z2 / 384.0
    return _j1(z, 1e-16, 400) / z


@njit
def _erf(x):
    ax = abs(x)
    if ax < ERF_SWITCH:
        # erf(x) = 2/sqrt(pi) exp(-x^2) sum (2x^2)^n x / (1*3*...*(2n+1))
        q = 2.0 * ax * ax
        term = ax
        total = ax
        for n in range(1, 300):
            term *= q / (2.0 * n + 1.0)
            total += term
            if term < 1e-17 * total:
                break
        val = 2.0 / math.sqrt(math.pi) * math.exp(-ax * ax) * total
    else:
        # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz
        tiny = 1e-300
        f = ax
        c = ax
        d = 0.0
        for n in range(1, 500):
            a = 0.5 * n
            d = ax + a * d
            if d == 0.0:
                d = tiny
            c = ax + a / c
            if c == 0.0:
                c = tiny
            d = 1.0 / d
            delta = c * d
            f *= delta
            if abs(delta - 1.0) < 1e-16:
                break
        val = 1.0 - math.exp(-ax * ax) / math.sqrt(math.pi) / f
    return val if x >= 0 else -val


@njit
def i1_ratio_vec(z):
    """Elementwise ``I1(z)/z`` for a 1-D array of nonnegative arguments.

    All terms are positive, so the term count needed at the largest argument
    suffices everywhere; the series is then summed by Horner's rule in place.
    """
    q = 0.25 * z * z
    qmax = min(np.max(q), 0.25 * I1_SWITCH * I1_SWITCH) if z.size else 0.0
    term = 0.5
    total = 0.5
    m_max = 0
    for m in range(1, 400):
        term *= qmax / (m * (m + 1.0))
        total += term
        m_max = m
        if term <= 1e-17 * total:
            break
    # coefficient of q^m is 1 / (2 m! (m+1)!) = prod_{j<=m} 1 / (j (j+1)) / 2
    out = np.full(z.size, 0.0)
    coef = np.empty(m_max + 1)
    coef[0] = 0.5
    for m in range(1, m_max + 1):
        coef[m] = coef[m - 1] / (m * (m + 1.0))
    out += coef[m_max]
    for m in range(m_max - 1, -1, -1):
        out *= q
        out += coef[m]
    total = out
    for i in np.nonzero(z > I1_SWITCH)[0]:
        total[i] = _i1_ratio(z[i])
    return total


@njit
def j1_ratio_vec(z):
    """Elementwise ``J1(z)/z``; compensated series up to the switch, recurrence above."""
    q = 0.25 * z * z
    term = np.full(z.size, 0.5)
    total = term.copy()
    comp = np.zeros(z.size)
    qmax = 0.25 * J1_SWITCH * J1_SWITCH
    for m in range(1, 400):
        term = -term * q / (m * (m + 1.0))
        y = term - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
        if m > qmax and np.all(np.abs(term) <= 1e-16 * np.abs(total)):
            break
    for i in np.nonzero(z > J1_SWITCH)[0]:
        total[i] = _j1_ratio(z[i])
    return total


def i1_ratio_array(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return i1_ratio_vec(np.ascontiguousarray(z).ravel()).reshape(z.shape)


def j1_ratio_array(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return j1_ratio_vec(np.ascontiguousarray(z).ravel()).reshape(z.shape)


def _arg(z, name="z") -> float:
    z = float(z)
    if math.isnan(z):
        raise ParameterDomainError(f"{name} is NaN")
    return z


def bessel_i1(z: float, tol: SeriesTolerance = DEFAULT_TOL) -> float:
    """Modified Bessel function of the first kind, order one."""
    z = _arg(z)
    if z < 0:
        return -bessel_i1(-z, tol)
    return float(_i1(z, tol.rel_tol, tol.max_terms))


def bessel_j1(z: float, tol: SeriesTolerance = DEFAULT_TOL) -> float:
    """Bessel function of the first kind, order one."""
    z = _arg(z)
    if z < 0:
        return -bessel_j1(-z, tol)
    return float(_j1(z, tol.rel_tol, tol.max_terms))


def i1_ratio(z: float) -> float:
    """``I1(z)/z`` with the removable singularity at 0 filled in (value 1/2)."""
    return float(_i1_ratio(abs(_arg(z))))


def j1_ratio(z: float) -> float:
    """``J1(z)/z`` with the removable singularity at 0 filled in (value 1/2)."""
    return float(_j1_ratio(abs(_arg(z))))


def erf(x: float) -> float:
    return float(_erf(_arg(x, "x")))


# Exposed for tests that probe the branch seams directly.
i1_series = _i1_series
i1_asymptotic_sum = _i1_asymptotic_sum
j1_series = _j1_series
j1_miller = _j1_miller
