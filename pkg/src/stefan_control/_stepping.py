"""
Hot loop: explicit integration of the front-fixed plant and observer.

With ``sigma = x / s(t)`` the liquid-phase heat equation becomes

    u_t = (a / s^2) u_ss + sigma (sdot / s) u_s,     sigma in (0, 1)

with ``u = T - T_m``, ``a = alpha (1 + eps1)``, ``u(1) = 0`` and
``sdot = -b u_s(1) / s``, ``b = beta (1 + eps2)``.  Everything here works on
superheat arrays; callers convert to absolute temperature.

Every kernel is written in the numpy subset numba compiles, so the same source
runs with or without JIT (see ``_accel``).
"""
import math

import numpy as np

from ._accel import njit
from .special import I1_SWITCH, i1_ratio_vec

NEUMANN = 0
DIRICHLET = 1

LAW_CONSTANT = 0
LAW_PULSE = 1
LAW_FEEDBACK = 2

EULER = 0
RK2 = 1

STATUS_OK = 0
STATUS_BAD_STATE = 1
STATUS_CFL = 2
STATUS_MAX_STEPS = 3


@njit
def trapz(f, h):
    return h * (np.sum(f) - 0.5 * (f[0] + f[-1]))


@njit
def interface_slope(u, s):
    """``du/dx`` at the interface, second-order one-sided."""
    n = u.size - 1
    return (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) * n / (2.0 * s)


@njit
def cfl_dt(s, n, a_diff, sdot):
    h = s / n
    dt = 0.5 * h * h / a_diff
    if sdot != 0.0:
        dt = min(dt, h / abs(sdot))
    return dt


@njit
def feedback_value(act, u, s, c, s_r, k, alpha, beta):
    """Backstepping law evaluated on superheat ``u`` (plant or estimate)."""
    n = u.size - 1
    h = s / n
    if act == NEUMANN:
        return -c * k * (trapz(u, h) / alpha + (s - s_r) / beta)
    x = np.linspace(0.0, s, n + 1)
    return -c * (trapz(x * u, h) / alpha + s * (s - s_r) / beta)


@njit
def control_value(law, act, u_ctrl, s, t, c, s_r, k, alpha, beta, value, t_off):
    if law == LAW_CONSTANT:
        return value
    if law == LAW_PULSE:
        # held over [t, t + dt): the step starting at t_off already sees zero
        return value if t < t_off else 0.0
    return feedback_value(act, u_ctrl, s, c, s_r, k, alpha, beta)


@njit
def transport_rhs(u, s, sdot, sig, act, bc, a_diff, k, du):
    """Front-fixed diffusion plus frame advection with boundary conditions applied."""
    n = u.size - 1
    ds = 1.0 / n
    diff = a_diff / (s * s * ds * ds)
    adv = sdot / (2.0 * s * ds)
    du[1:n] = diff * (u[2:] - 2.0 * u[1:n] + u[: n - 1]) + sig[1:n] * adv * (u[2:] - u[: n - 1])
    if act == NEUMANN:
        # ghost node from u_sigma(0) = -s q / k
        du[0] = diff * (2.0 * u[1] - 2.0 * u[0] + 2.0 * ds * s * bc / k)
    else:
        du[0] = 0.0
    du[n] = 0.0


@njit
def plant_rhs(u, s, sig, act, bc, a_diff, b_stefan, k, du):
    """Fill ``du`` with the semi-discrete time derivative; return ``sdot``."""
    sdot = -b_stefan * interface_slope(u, s)
    transport_rhs(u, s, sdot, sig, act, bc, a_diff, k, du)
    return sdot


@njit
def observer_gain_nodes(sig, s, lam, alpha, act):
    """``p1`` (Neumann) or ``p2`` (Dirichlet) at the grid nodes."""
    x = sig * s
    z = np.sqrt(np.maximum((lam / alpha) * (s * s - x * x), 0.0))
    if act == NEUMANN:
        return -lam * s * i1_ratio_vec(z)
    return -lam * x * i1_ratio_vec(z)


@njit
def observer_gain_fast(sig, w2, s, lam, alpha, act, out):
    """Same as :func:`observer_gain_nodes`, written into ``out``.

    With ``z^2 / 4 = Q w2``, ``Q = lam s^2 / (4 alpha)``, ``w2 = 1 - sigma^2``,
    the series of ``I1(z)/z`` is a polynomial in ``w2`` with scalar
    coefficients, summed in place by Horner's rule.
    """
    Q = 0.25 * lam * s * s / alpha
    if Q > 0.25 * I1_SWITCH * I1_SWITCH:
        out[:] = observer_gain_nodes(sig, s, lam, alpha, act)
        return
    d = 0.5
    total = 0.5
    m_max = 0
    coef = np.empty(400)
    coef[0] = 0.5
    for m in range(1, 400):
        d *= Q / (m * (m + 1.0))
        coef[m] = d
        total += d
        m_max = m
        if d <= 1e-17 * total:
            break
    out[:] = coef[m_max]
    for m in range(m_max - 1, -1, -1):
        out *= w2
        out += coef[m]
    out *= -lam * s
    if act == DIRICHLET:
        out *= sig


@njit
def observer_rhs(uh, s, sdot_meas, sig, act, bc, alpha, beta, k, gain, duh):
    """Observer copy driven by the measured ``sdot`` plus output injection."""
    transport_rhs(uh, s, sdot_meas, sig, act, bc, alpha, k, duh)
    innov = sdot_meas / beta + interface_slope(uh, s)
    n = uh.size - 1
    if act == NEUMANN:
        duh[:n] -= gain[:n] * innov
    else:
        duh[1:n] -= gain[1:n] * innov


@njit
def advance(u, uh, state, t_stop, max_steps,
            act, law, use_obs, output_fb, integrator,
            alpha, beta, k, eps1, eps2, c, s_r, value, t_off, lam, theta, dt_fixed):
    """Integrate in place until ``t_stop``.

    ``state`` is a float array ``[s, t, input_integral, last_input, sdot]``
    updated in place.  Returns ``(steps, status)``.
    """
    n = u.size - 1
    sig = np.linspace(0.0, 1.0, n + 1)
    du = np.zeros(n + 1)
    du2 = np.zeros(n + 1)
    duh = np.zeros(n + 1)
    duh2 = np.zeros(n + 1)
    u1 = np.zeros(n + 1)
    uh1 = np.zeros(n + 1)
    gain = np.zeros(n + 1)
    w2 = 1.0 - sig * sig
    a_diff = alpha * (1.0 + eps1)
    b_stefan = beta * (1.0 + eps2)
    a_max = max(a_diff, alpha) if use_obs else a_diff
    s = state[0]
    t = state[1]
    integral = state[2]
    v = state[3]
    steps = 0
    status = STATUS_OK
    while t < t_stop:
        if steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        sdot = -b_stefan * interface_slope(u, s)
        dt_max = cfl_dt(s, n, a_max, sdot)
        if dt_fixed > 0.0:
            if dt_fixed > dt_max:
                status = STATUS_CFL
                break
            dt = dt_fixed
        else:
            dt = theta * dt_max
        if law == LAW_PULSE and t < t_off:
            dt = min(dt, t_off - t)
        last = dt >= t_stop - t
        if last:
            dt = t_stop - t

        if output_fb:
            v = control_value(law, act, uh, s, t, c, s_r, k, alpha, beta, value, t_off)
        else:
            v = control_value(law, act, u, s, t, c, s_r, k, alpha, beta, value, t_off)
        if act == DIRICHLET:
            u[0] = v
            uh[0] = v

        sdot = plant_rhs(u, s, sig, act, v, a_diff, b_stefan, k, du)
        if use_obs:
            observer_gain_fast(sig, w2, s, lam, alpha, act, gain)
            observer_rhs(uh, s, sdot, sig, act, v, alpha, beta, k, gain, duh)
        if integrator == RK2:
            u1[:] = u + dt * du
            s1 = s + dt * sdot
            if s1 <= 0.0:
                status = STATUS_BAD_STATE
                break
            sdot2 = plant_rhs(u1, s1, sig, act, v, a_diff, b_stefan, k, du2)
            u += 0.5 * dt * (du + du2)
            if use_obs:
                uh1[:] = uh + dt * duh
                observer_gain_fast(sig, w2, s1, lam, alpha, act, gain)
                observer_rhs(uh1, s1, sdot2, sig, act, v, alpha, beta, k, gain, duh2)
                uh += 0.5 * dt * (duh + duh2)
            s += 0.5 * dt * (sdot + sdot2)
        else:
            u += dt * du
            if use_obs:
                uh += dt * duh
            s += dt * sdot
        u[n] = 0.0
        uh[n] = 0.0
        t = t_stop if last else t + dt
        integral += v * dt
        steps += 1
        if not (s > 0.0 and math.isfinite(s)):
            status = STATUS_BAD_STATE
            break
    state[0] = s
    state[1] = t
    state[2] = integral
    state[3] = v
    state[4] = -b_stefan * interface_slope(u, s)
    return steps, status
