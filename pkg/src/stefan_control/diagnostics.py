"""
Certificates computed on simulation output: energy residuals, Lyapunov
functionals of the backstepping target variables, exponential-decay fits and
the physical-constraint monitor.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .domain import NOMINAL, ObserverState, PhysicalParams, PlantState, Perturbation, h1_norm, l2_norm
from .errors import FitError, ParameterDomainError
from .kernels import ControllerGains, direct_transform, error_transform

FLAG_NAMES = ("q_pos", "temp_valid", "s_monotone", "s_below_sr", "err_nonpos")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sample of a trajectory; the field order is the CSV column order."""

    t: float
    s: float
    input: float
    sdot: float
    l2_u: float
    h1_u: float
    h1_err: float
    V: float
    W: float
    energy_residual: float
    q_pos: bool
    temp_valid: bool
    s_monotone: bool
    s_below_sr: bool
    err_nonpos: bool

    @property
    def flags(self) -> dict[str, bool]:
        return {name: getattr(self, name) for name in FLAG_NAMES}

    @property
    def all_ok(self) -> bool:
        return all(self.flags.values())

    def as_dict(self) -> dict:
        return asdict(self)


CSV_COLUMNS = tuple(f.name for f in fields(DiagnosticsRecord))


@dataclass(frozen=True)
class LyapunovConstants:
    """Weight ``p`` of the interface term and the rates ``a`` (in ``W = V e^{-a s}``) and ``b``."""

    p: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.p > 0 and self.a > 0 and self.b > 0):
            raise ParameterDomainError("Lyapunov constants must be positive")

    @classmethod
    def state_feedback(cls, c: float, s_r: float, params: PhysicalParams) -> "LyapunovConstants":
        al, be = params.alpha, params.beta
        return cls(p=c * al / (4.0 * be * be * s_r),
                   a=max(s_r * s_r, 8.0 * s_r * c / al),
                   b=min(al / (4.0 * s_r * s_r), c))

    @classmethod
    def output_feedback(cls, c: float, s_r: float, lam: float, params: PhysicalParams) -> "LyapunovConstants":
        al, be = params.alpha, params.beta
        return cls(p=c * al / (4.0 * be * be * s_r),
                   a=max(s_r * s_r, 16.0 * c * s_r / al),
                   b=min(al / (8.0 * s_r * s_r), c, 2.0 * lam))


# ---------------------------------------------------------------------------
# energy

def stored_energy(heat, moment, s, params: PhysicalParams, actuation_kind: str,
                  perturbation: Perturbation = NOMINAL):
    """Conserved quantity of the (possibly perturbed) plant.

    ``heat = int u dx`` and ``moment = int x u dx``.  Neumann:
    ``heat/a + s/b``; Dirichlet: ``moment/a + s^2/(2b)``.
    """
    a = params.alpha * (1.0 + perturbation.eps1)
    b = params.beta * (1.0 + perturbation.eps2)
    s = np.asarray(s, dtype=float)
    if actuation_kind == "neumann":
        return np.asarray(heat) / a + s / b
    return np.asarray(moment) / a + s * s / (2.0 * b)


def energy_residual(trajectory, params: PhysicalParams, actuation_kind: str | None = None) -> np.ndarray:
    """``[E(t) - E(0) - int input] / max(|E(t) - E(0)|, 1e-12 E(0))`` at every sample.

    The input integral is accumulated exactly during the run (the input is
    piecewise constant), so no time quadrature error enters.
    """
    kind = actuation_kind or trajectory.actuation
    E = stored_energy(trajectory.heat, trajectory.moment, trajectory.s, params, kind,
                      trajectory.perturbation)
    supplied = trajectory.input_integral / (params.k if kind == "neumann" else 1.0)
    change = E - E[0]
    floor = 1e-12 * abs(E[0])
    return (change - supplied) / np.maximum(np.abs(change), floor)


# ---------------------------------------------------------------------------
# Lyapunov functionals

def _target(state: PlantState, s_r: float, c: float, params: PhysicalParams):
    u = state.superheat(params.tm)
    X = state.s - s_r
    return direct_transform(u, state.s, X, c, params.alpha, params.beta), X


def lyapunov_V(state: PlantState, s_r: float, gains: ControllerGains, params: PhysicalParams,
               constants: LyapunovConstants | None = None) -> float:
    """``1/2 ||w||_H1^2 + p/2 X^2`` with ``w`` the backstepping target variable."""
    k = constants or LyapunovConstants.state_feedback(gains.c, s_r, params)
    w, X = _target(state, s_r, gains.c, params)
    return 0.5 * h1_norm(w, state.s) ** 2 + 0.5 * k.p * X * X


def lyapunov_W(state: PlantState, s_r: float, gains: ControllerGains, params: PhysicalParams,
               constants: LyapunovConstants | None = None) -> float:
    k = constants or LyapunovConstants.state_feedback(gains.c, s_r, params)
    return lyapunov_V(state, s_r, gains, params, k) * math.exp(-k.a * state.s)


def lyapunov_V_eps(state: PlantState, s_r: float, gains: ControllerGains, params: PhysicalParams,
                   perturbation: Perturbation) -> float:
    """Functional for the perturbed plant: ``d/2 ||w||^2 + 1/2 ||w_x||^2 + p/2 X^2``."""
    e1, e2 = perturbation.eps1, perturbation.eps2
    al, be, c = params.alpha, params.beta, gains.c
    p = c * al * (1.0 + e1) / (8.0 * s_r * (1.0 + e2) * be * be)
    d = 160.0 * s_r ** 2 * c ** 2 * (e1 - e2) ** 2 / (al ** 2 * (1.0 + e1) ** 2)
    w, X = _target(state, s_r, c, params)
    l2 = l2_norm(w, state.s)
    dx = math.sqrt(max(h1_norm(w, state.s) ** 2 - l2 * l2, 0.0))
    return 0.5 * d * l2 * l2 + 0.5 * dx * dx + 0.5 * p * X * X


def lyapunov_V_output(state: PlantState, obs: ObserverState, s_r: float, gains: ControllerGains,
                      params: PhysicalParams, constants: LyapunovConstants | None = None) -> float:
    """Output-feedback functional: estimate part (transform of ``T_hat``) plus the observer-error part.

    Both parts carry unit weight.
    """
    if gains.lam is None:
        raise ParameterDomainError("output-feedback functional needs the observer gain")
    k = constants or LyapunovConstants.output_feedback(gains.c, s_r, gains.lam, params)
    uh = obs.profile_hat.superheat(params.tm)
    X = state.s - s_r
    w_hat = direct_transform(uh, state.s, X, gains.c, params.alpha, params.beta)
    w_err = error_transform(state.superheat(params.tm) - uh, state.s, gains.lam, params.alpha)
    return (0.5 * h1_norm(w_hat, state.s) ** 2 + 0.5 * k.p * X * X
            + 0.5 * h1_norm(w_err, state.s) ** 2)


# ---------------------------------------------------------------------------
# constraints and fits

def constraint_monitor(*, input_value: float, u: np.ndarray, s: float, s_prev: float | None = None,
                       s_r: float | None = None, tol_T: float = 0.0,
                       u_err: np.ndarray | None = None) -> dict[str, bool]:
    """Evaluate each physical constraint at one sample.

    ``u`` is plant superheat, ``u_err`` the estimation error ``T - T_hat``.
    Missing context (no setpoint, no observer, first sample) counts as satisfied.
    """
    return {
        "q_pos": bool(input_value > 0.0),
        "temp_valid": bool(np.min(u) >= -tol_T),
        "s_monotone": s_prev is None or s >= s_prev * (1.0 - 1e-12),
        "s_below_sr": s_r is None or s < s_r,
        "err_nonpos": u_err is None or bool(np.max(u_err) <= tol_T),
    }


@dataclass(frozen=True)
class ExpFit:
    rate: float
    r2: float
    amplitude: float


def fit_exponential(t, y) -> ExpFit:
    """Least-squares fit of ``log y = log A - rate t``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.size < 2:
        raise FitError("need at least two (t, y) samples of equal length")
    if not np.all(y > 0) or not np.all(np.isfinite(y)):
        raise FitError("exponential fit requires positive finite samples")
    ly = np.log(y)
    slope, intercept = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return ExpFit(rate=-float(slope), r2=r2, amplitude=float(np.exp(intercept)))


def nonincreasing(y, rel_tol: float = 1e-6) -> bool:
    y = np.asarray(y, dtype=float)
    return bool(np.all(y[1:] <= y[:-1] * (1.0 + rel_tol)))
