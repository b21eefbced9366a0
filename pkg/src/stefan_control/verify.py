"""
Property suites behind ``stefan verify``.

Each suite returns :class:`Result` rows (measured value, tolerance, pass
flag).  The special-function suite compares against mpmath at 256-bit
precision; the others are self-consistency checks of the implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import lyapunov_V
from .domain import ZINC, PlantState, TemperatureProfile, h1_norm, linear_initial_profile
from .kernels import (
    ControllerGains, direct_transform, error_inverse, error_transform, gain_phi, gain_psi,
    inverse_kernel_Q1, inverse_transform, observer_kernel_P1,
)
from .simulator import run_scenario, similarity_scenario
from .special import bessel_i1, bessel_j1, erf

# central-difference weights, eighth order
_D2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
_D1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
_OFFSETS = np.arange(-4, 5)

# reference setting used throughout: zinc, c = 0.001, lambda = 0.001, s_r = 0.35
C_REF = 0.001
LAM_REF = 0.001
S_R = 0.35


@dataclass(frozen=True)
class Result:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.suite:<18} {self.name:<52} {self.value:11.3e}  (tol {self.tol:.1e}) {self.note}"


def _below(suite, name, value, tol, note=""):
    return Result(suite, name, float(value), tol, bool(value < tol), note)


def _d2(f, x, h):
    return sum(w * f(x + k * h) for w, k in zip(_D2, _OFFSETS)) / (h * h)


def _d1(f, x, h):
    return sum(w * f(x + k * h) for w, k in zip(_D1, _OFFSETS)) / h


# ---------------------------------------------------------------------------

def kernel_suite(params=ZINC, c=C_REF, lam=LAM_REF, s_r=S_R) -> list[Result]:
    S = "kernels"
    al, be = params.alpha, params.beta
    out = []

    # k(x, y) = (beta/alpha) phi(x - y) on a 50x50 grid: k_xx - k_yy = 0, d/dx k(x, x) = 0
    n = 50
    h = s_r / (n - 1)
    g = np.linspace(0.0, s_r, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    k = (be / al) * gain_phi(X - Y, c, be)
    kxx = (k[2:, 1:-1] - 2 * k[1:-1, 1:-1] + k[:-2, 1:-1]) / h ** 2
    kyy = (k[1:-1, 2:] - 2 * k[1:-1, 1:-1] + k[1:-1, :-2]) / h ** 2
    upper = (Y > X)[1:-1, 1:-1]
    scale = np.max(np.abs(k)) / h ** 2
    out.append(_below(S, "phi kernel: k_xx - k_yy (relative)", np.max(np.abs(kxx - kyy)[upper]) / scale, 1e-10))
    diag = np.diag(k)
    out.append(_below(S, "phi kernel: d/dx k(x, x)", np.max(np.abs(np.diff(diag))) / h, 1e-10))

    # psi'' + (c/alpha) psi = 0 on [-s_r, 0], psi(0) = 0, psi'(0) = c/beta
    xs = np.linspace(-s_r, 0.0, 36)
    hp = 5e-3
    psi = lambda x: gain_psi(x, c, al, be)  # noqa: E731
    res = _d2(psi, xs, hp) + (c / al) * psi(xs)
    out.append(_below(S, "psi ODE residual (relative)", np.max(np.abs(res)) / np.max(np.abs((c / al) * psi(xs))), 1e-10))
    out.append(_below(S, "psi(0)", abs(psi(0.0)), 1e-12))
    out.append(_below(S, "psi'(0) = c/beta (relative)", abs(_d1(psi, 0.0, hp) / (c / be) - 1.0), 1e-10))

    # P1_xx - P1_yy = -(lam/alpha) P1 and Q1_xx - Q1_yy = +(lam/alpha) Q1 for 0 < x < y
    L = lam / al
    hk = 2e-3
    pts = [(x, y) for y in np.linspace(0.05, s_r, 7) for x in np.linspace(4 * hk, y - 8 * hk, 6)]
    for name, K, sign in (("P1", observer_kernel_P1, -1.0), ("Q1", inverse_kernel_Q1, 1.0)):
        worst = 0.0
        for x, y in pts:
            kxx = _d2(lambda a: K(a, y, lam, al), x, hk)
            kyy = _d2(lambda b: K(x, b, lam, al), y, hk)
            ref = K(x, y, lam, al)
            worst = max(worst, abs(kxx - kyy - sign * L * ref) / abs(L * ref))
        out.append(_below(S, f"{name} kernel PDE residual (relative)", worst, 1e-10))
        ys = np.linspace(0.05, s_r, 8)
        dd = _d1(lambda a: K(a, a, lam, al), ys, hk)
        out.append(_below(S, f"{name} diagonal slope = lam/(2 alpha) (relative)", np.max(np.abs(dd / (0.5 * L) - 1.0)), 1e-10))
        # one-sided second-order slope at x = 0, scaled by L y |K|
        edge = np.array([abs(-3 * K(0.0, y, lam, al) + 4 * K(hk, y, lam, al) - K(2 * hk, y, lam, al))
                         / (2 * hk * L * y * abs(K(0.0, y, lam, al))) for y in ys])
        out.append(_below(S, f"{name} zero x-slope at x = 0 (relative)", np.max(edge), 1e-4))
    return out


def _consistency_error(n, params, c, s):
    # psi'(x - s) = (c/beta) (1 + int_x^s l(x, y) dy), l = (beta/alpha) psi(x - y)
    al, be = params.alpha, params.beta
    x = np.linspace(0.0, s, n + 1)
    h = s / n
    integral = np.empty(n + 1)
    for i in range(n + 1):
        f = (be / al) * gain_psi(x[i] - x[i:], c, al, be)
        integral[i] = h * (f.sum() - 0.5 * (f[0] + f[-1])) if f.size > 1 else 0.0
    lhs = (c / be) * np.cos(math.sqrt(c / al) * (x - s))
    return np.max(np.abs(lhs - (c / be) * (1.0 + integral))) / (c / be)


def _mid_run_profile(n, s):
    sigma = np.linspace(0.0, 1.0, n + 1)
    return 120.0 * (1.0 - sigma) * (1.0 + 0.5 * np.sin(3.0 * sigma))


def transform_suite(params=ZINC, c=C_REF, lam=LAM_REF, s_r=S_R) -> list[Result]:
    S = "transforms"
    al, be = params.alpha, params.beta
    out = []
    state = linear_initial_profile(1e4, 0.01, params.tm, 200)
    u = state.superheat(params.tm)
    s, X = state.s, state.s - s_r
    back = inverse_transform(direct_transform(u, s, X, c, al, be), s, X, c, al, be)
    out.append(_below(S, "state pair round trip, initial profile, N=200", h1_norm(back - u, s) / h1_norm(u, s), 1e-6))
    back = error_inverse(error_transform(-u, s, lam, al), s, lam, al)
    out.append(_below(S, "observer pair round trip, initial profile, N=200", h1_norm(back + u, s) / h1_norm(u, s), 1e-6))

    errs = {}
    for n in (100, 200):
        v = _mid_run_profile(n, 0.3)
        w = direct_transform(v, 0.3, -0.05, c, al, be)
        e1 = h1_norm(inverse_transform(w, 0.3, -0.05, c, al, be) - v, 0.3) / h1_norm(v, 0.3)
        e2 = h1_norm(error_inverse(error_transform(v, 0.3, lam, al), 0.3, lam, al) - v, 0.3) / h1_norm(v, 0.3)
        errs[n] = (e1, e2)
    for j, label in enumerate(("state", "observer")):
        ratio = errs[100][j] / errs[200][j]
        out.append(Result(S, f"{label} pair round-trip refinement ratio N=100/200", ratio, 4.0,
                          3.0 < ratio < 5.0, "expect about 4"))

    gains = ControllerGains(c)
    v0 = lyapunov_V(state, s_r, gains, params)
    rt = PlantState(s, TemperatureProfile(
        inverse_transform(direct_transform(u, s, X, c, al, be), s, X, c, al, be) + params.tm))
    out.append(_below(S, "V invariant under round trip (relative)", abs(lyapunov_V(rt, s_r, gains, params) - v0) / v0, 1e-5))

    e100, e200 = (_consistency_error(n, params, c, s_r) for n in (100, 200))
    out.append(_below(S, "psi consistency condition, N=200 (relative)", e200, 1e-5))
    out.append(Result(S, "psi consistency refinement ratio N=100/200", e100 / e200, 4.0,
                      3.0 < e100 / e200 < 5.0, "expect about 4"))
    return out


def special_function_suite(points: int = 601) -> list[Result]:
    import mpmath

    S = "special-functions"
    z = np.linspace(0.0, 30.0, points)
    with mpmath.workprec(256):
        i1 = [abs(bessel_i1(v) - float(mpmath.besseli(1, v))) / max(1.0, float(mpmath.besseli(1, v))) for v in z]
        j1 = [abs(bessel_j1(v) - float(mpmath.besselj(1, v))) for v in z]
        ef = [abs(erf(v) - float(mpmath.erf(v))) for v in np.concatenate([-z[::-1], z])]
    return [
        _below(S, "I1 vs mpmath on [0, 30] (relative)", max(i1), 1e-12),
        _below(S, "J1 vs mpmath on [0, 30] (absolute)", max(j1), 1e-12),
        _below(S, "erf vs mpmath on [-30, 30] (absolute)", max(ef), 1e-12),
    ]


def oracle_suite(params=ZINC, superheat: float = 100.0, s0: float = 0.01, t_end: float = 340.0,
                 grids=(50, 100, 200)) -> list[Result]:
    S = "oracle"
    out = []
    errs = []
    for n in grids:
        sc, sol, t0 = similarity_scenario(params, superheat, s0, t_end, n=n, sample_every=t_end / 100)
        traj = run_scenario(sc)
        exact = sol.s(traj.t + t0)
        late = traj.t >= 0.05 * t_end
        err = float(np.max(np.abs(traj.s[late] - exact[late]) / exact[late]))
        errs.append(err)
        out.append(_below(S, f"interface error vs similarity solution, N={n}", err, 1e-2))
    for (n1, e1), (n2, e2) in zip(zip(grids, errs), zip(grids[1:], errs[1:])):
        order = math.log(e1 / e2) / math.log(n2 / n1)
        out.append(Result(S, f"observed order N={n1}->{n2}", order, 2.0, 1.8 < order < 2.2, "expect about 2"))
    return out


SUITES = {
    "kernels": kernel_suite,
    "special-functions": special_function_suite,
    "transforms": transform_suite,
    "oracle": oracle_suite,
}


def run_suite(name: str) -> list[Result]:
    return SUITES[name]()

