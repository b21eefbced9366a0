"""
Control laws (open-loop pulse, state feedback, output feedback) for heat-flux
(Neumann) and boundary-temperature (Dirichlet) actuation, and the feasibility
checks each design imposes on setpoint, gains and observer initialization.

Dirichlet inputs are superheat above the melting point: the boundary is held
at ``T(0, t) = T_m + T_c(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import _stepping as _k
from .domain import ObserverState, PhysicalParams, PlantState, trapezoid
from .errors import InfeasibleSetpointError, ParameterDomainError, TheoremPreconditionError

NEUMANN = "neumann"
DIRICHLET = "dirichlet"
ACTUATIONS = (NEUMANN, DIRICHLET)
LAW_KINDS = ("pulse", "state-feedback", "output-feedback", "constant")


@dataclass(frozen=True)
class Actuation:
    """Boundary input: heat flux in W/m^2 (Neumann) or superheat in K (Dirichlet)."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ACTUATIONS:
            raise ParameterDomainError(f"unknown actuation {self.kind!r}")
        if not math.isfinite(self.value):
            raise ParameterDomainError("actuation value must be finite")


@dataclass(frozen=True)
class ControlLaw:
    """Which law drives the plant, and its parameters.

    ``level``/``duration`` describe a pulse (either may be given; the other
    follows from the energy deficit).  ``level`` is also the value of a
    ``constant`` law.
    """

    kind: str
    actuation: str = NEUMANN
    c: float | None = None
    s_r: float | None = None
    level: float | None = None
    duration: float | None = None

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ParameterDomainError(f"unknown control law {self.kind!r}")
        if self.actuation not in ACTUATIONS:
            raise ParameterDomainError(f"unknown actuation {self.actuation!r}")
        if self.kind in ("state-feedback", "output-feedback"):
            if self.c is None or not self.c > 0:
                raise ParameterDomainError("feedback laws need a gain c > 0")
            if self.s_r is None or not self.s_r > 0:
                raise ParameterDomainError("feedback laws need a setpoint s_r > 0")
        if self.kind == "pulse":
            if self.s_r is None or not self.s_r > 0:
                raise ParameterDomainError("pulse law needs a setpoint s_r > 0")
            if (self.level is None) == (self.duration is None):
                raise ParameterDomainError("pulse law needs exactly one of level, duration")
            given = self.level if self.level is not None else self.duration
            if not given > 0:
                raise ParameterDomainError("pulse level/duration must be > 0")
        if self.kind == "constant" and (self.level is None or not math.isfinite(self.level)):
            raise ParameterDomainError("constant law needs a finite level")

    @property
    def uses_observer(self) -> bool:
        return self.kind == "output-feedback"


@dataclass(frozen=True)
class ObserverInit:
    """Initial estimate ``T_m + h_hat (s0 - x)`` and the bracket ``[h_l, h_u]`` claimed for it."""

    h_hat: float
    h_l: float | None = None
    h_u: float | None = None

    def bracket(self) -> tuple[float, float]:
        return (self.h_hat if self.h_l is None else self.h_l,
                self.h_hat if self.h_u is None else self.h_u)


@dataclass(frozen=True)
class Check:
    """Outcome of one inequality: ``ok`` iff ``margin > 0`` (or ``>= 0`` for non-strict ones)."""

    name: str
    ok: bool
    margin: float
    bound: float = float("nan")
    detail: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        state = "ok" if self.ok else "VIOLATED"
        return f"{self.name}: {state} (margin {self.margin:.6g}){' - ' + self.detail if self.detail else ''}"


# ---------------------------------------------------------------------------
# energy bookkeeping

def _u_and_h(state: PlantState, params: PhysicalParams):
    u = state.superheat(params.tm)
    return u, state.s / state.n


def stored_heat(state: PlantState, params: PhysicalParams) -> float:
    """``int_0^s (T - T_m) dx``."""
    u, h = _u_and_h(state, params)
    return trapezoid(u, h)


def stored_moment(state: PlantState, params: PhysicalParams) -> float:
    """``int_0^s x (T - T_m) dx``."""
    u, h = _u_and_h(state, params)
    return trapezoid(state.x() * u, h)


def delta_e_neumann(state0: PlantState, s_r: float, params: PhysicalParams) -> float:
    """Energy deficit (in K s/m) a heat-flux input must supply to settle at ``s_r``."""
    return (s_r - state0.s) / params.beta - stored_heat(state0, params) / params.alpha


def delta_e_dirichlet(state0: PlantState, s_r: float, params: PhysicalParams) -> float:
    """Integral of boundary superheat (K s) needed to settle at ``s_r``."""
    return ((s_r * s_r - state0.s * state0.s) / (2.0 * params.beta)
            - stored_moment(state0, params) / params.alpha)


def pulse_neumann(t: float, delta_e: float, q_bar: float, k: float) -> Actuation:
    """Rectangular heat-flux pulse ``q_bar`` on ``[0, k dE / q_bar]``, zero afterwards."""
    if not delta_e > 0:
        raise InfeasibleSetpointError(f"energy deficit must be > 0, got {delta_e!r}")
    if not q_bar > 0:
        raise ParameterDomainError(f"q_bar must be > 0, got {q_bar!r}")
    return Actuation(NEUMANN, q_bar if t <= k * delta_e / q_bar else 0.0)


def pulse_dirichlet(t: float, delta_e: float, T_bar: float) -> Actuation:
    """Boundary-superheat pulse ``T_bar`` on ``[0, dE / T_bar]``."""
    if not delta_e > 0:
        raise InfeasibleSetpointError(f"energy deficit must be > 0, got {delta_e!r}")
    if not T_bar > 0:
        raise ParameterDomainError(f"T_bar must be > 0, got {T_bar!r}")
    return Actuation(DIRICHLET, T_bar if t <= delta_e / T_bar else 0.0)


def pulse_schedule(law: ControlLaw, state0: PlantState, params: PhysicalParams) -> tuple[float, float]:
    """``(level, switch-off time)`` of a pulse law for the given initial state."""
    if law.actuation == NEUMANN:
        de = delta_e_neumann(state0, law.s_r, params)
        scale = params.k
    else:
        de = delta_e_dirichlet(state0, law.s_r, params)
        scale = 1.0
    if not de > 0:
        raise InfeasibleSetpointError(f"setpoint {law.s_r} needs a negative energy input ({de:.6g})")
    if law.level is not None:
        return law.level, scale * de / law.level
    return scale * de / law.duration, law.duration


# ---------------------------------------------------------------------------
# feedback laws

def state_feedback_neumann(state: PlantState, s_r: float, c: float, params: PhysicalParams) -> Actuation:
    u = state.superheat(params.tm)
    return Actuation(NEUMANN, float(_k.feedback_value(
        _k.NEUMANN, u, state.s, c, s_r, params.k, params.alpha, params.beta)))


def state_feedback_dirichlet(state: PlantState, s_r: float, c: float, params: PhysicalParams) -> Actuation:
    u = state.superheat(params.tm)
    return Actuation(DIRICHLET, float(_k.feedback_value(
        _k.DIRICHLET, u, state.s, c, s_r, params.k, params.alpha, params.beta)))


def output_feedback_neumann(obs: ObserverState, Y: float, s_r: float, c: float,
                            params: PhysicalParams) -> Actuation:
    """State-feedback formula evaluated on the estimate over the measured domain ``[0, Y]``."""
    uh = obs.profile_hat.superheat(params.tm)
    return Actuation(NEUMANN, float(_k.feedback_value(
        _k.NEUMANN, uh, Y, c, s_r, params.k, params.alpha, params.beta)))


def output_feedback_dirichlet(obs: ObserverState, Y: float, s_r: float, c: float,
                              params: PhysicalParams) -> Actuation:
    uh = obs.profile_hat.superheat(params.tm)
    return Actuation(DIRICHLET, float(_k.feedback_value(
        _k.DIRICHLET, uh, Y, c, s_r, params.k, params.alpha, params.beta)))


# ---------------------------------------------------------------------------
# validators

def validate_setpoint_neumann(state0: PlantState, s_r: float, params: PhysicalParams) -> Check:
    rhs = state0.s + params.beta / params.alpha * stored_heat(state0, params)
    margin = s_r - rhs
    return Check("setpoint (heat-flux energy balance)", margin > 0, margin, rhs,
                 f"s_r must exceed {rhs:.6g} m")


@dataclass(frozen=True)
class DirichletSetpointCheck:
    compatibility: Check
    restriction: Check

    @property
    def ok(self) -> bool:
        return self.compatibility.ok and self.restriction.ok

    @property
    def binding_rhs(self) -> float:
        return max(self.compatibility.bound, self.restriction.bound)

    def __bool__(self):
        return self.ok

    def checks(self) -> list[Check]:
        return [self.compatibility, self.restriction]


def validate_setpoint_dirichlet(state0: PlantState, s_r: float, params: PhysicalParams) -> DirichletSetpointCheck:
    s0 = state0.s
    ratio = params.beta / params.alpha
    rhs1 = math.sqrt(s0 * s0 + 2.0 * ratio * stored_moment(state0, params))
    rhs2 = s0 + ratio * stored_moment(state0, params) / s0
    return DirichletSetpointCheck(
        Check("setpoint (temperature energy balance)", s_r > rhs1, s_r - rhs1, rhs1,
              f"s_r must exceed {rhs1:.6g} m"),
        Check("setpoint (temperature positivity)", s_r > rhs2, s_r - rhs2, rhs2,
              f"s_r must exceed {rhs2:.6g} m"),
    )


def dirichlet_gain_bound(s_r: float, params: PhysicalParams) -> float:
    return params.alpha / (2.0 * math.sqrt(2.0) * s_r)


def validate_gain_dirichlet(c: float, s_r: float, params: PhysicalParams) -> Check:
    bound = dirichlet_gain_bound(s_r, params)
    return Check("temperature-control gain", c <= bound, bound - c, bound,
                 f"c must be <= {bound:.6g} 1/s")


def robustness_margin_G(c: float, s_r: float, params: PhysicalParams) -> float:
    return (3.0 / 10.0) ** 0.25 * params.alpha / (8.0 * s_r * s_r * c)


@dataclass(frozen=True)
class RegionCheck:
    inside: bool
    G: float
    lower: float
    upper: float

    def __bool__(self):
        return self.inside


def robustness_region_check(eps1: float, eps2: float, c: float, s_r: float,
                            params: PhysicalParams) -> RegionCheck:
    """Membership of ``(eps1, eps2)`` in ``{(1 - G) eps1 - G <= eps2 <= eps1}``."""
    G = robustness_margin_G(c, s_r, params)
    lower = (1.0 - G) * eps1 - G
    return RegionCheck(lower <= eps2 <= eps1, G, lower, eps1)


def dirichlet_robust_coefficients(eps1: float, eps2: float, s_r: float,
                                  params: PhysicalParams) -> tuple[float, float]:
    a = params.alpha
    A = (2.0 ** 9 * math.sqrt(2.0) * s_r ** 6 * (1.0 + s_r) * (eps1 - eps2) ** 2
         / (3.0 * a ** 3 * (1.0 + eps1) ** 2 * (1.0 + eps2)))
    B = 16.0 * math.sqrt(2.0) * s_r * s_r / (a * (1.0 + eps2))
    return A, B


def dirichlet_robust_gain_bound(eps1: float, eps2: float, s_r: float, params: PhysicalParams) -> float:
    """Positive root ``c*`` of ``A c^3 + B c = 1``; gains below it keep the perturbed loop stable."""
    if eps1 < eps2:
        raise TheoremPreconditionError(f"requires eps1 >= eps2, got ({eps1}, {eps2})")
    A, B = dirichlet_robust_coefficients(eps1, eps2, s_r, params)
    if A == 0.0:
        return 1.0 / B
    f = lambda c: A * c ** 3 + B * c - 1.0  # noqa: E731
    lo, hi = 0.0, 2.0 / B
    while f(hi) < 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def validate_observer_setup(h_hat_init: ObserverInit, H: float, lam: float, s0: float, s_r: float,
                            params: PhysicalParams, actuation_kind: str = NEUMANN) -> list[Check]:
    """All observer/output-feedback restrictions; returns every check (filter on ``not ok``)."""
    h_l, h_u = h_hat_init.bracket()
    a, b = params.alpha, params.beta
    checks = [
        Check("observer gain positive", lam > 0, lam),
        Check("estimate bracket ordered (h_u >= h_l)", h_u >= h_l, h_u - h_l),
        Check("estimate lower slope exceeds plant bound (h_l > H)", h_l > H, h_l - H),
        Check("initial estimate inside bracket",
              h_l <= h_hat_init.h_hat <= h_u,
              min(h_hat_init.h_hat - h_l, h_u - h_hat_init.h_hat)),
    ]
    lam_bound = 4.0 * a / (s0 * s0) * (h_l - H) / h_u if h_u > 0 else float("nan")
    checks.append(Check("observer gain bound", lam < lam_bound, lam_bound - lam, lam_bound,
                        f"lambda must be < {lam_bound:.6g} 1/s"))
    factor = 2.0 if actuation_kind == NEUMANN else 6.0
    rhs = s0 + b * s0 * s0 / (factor * a) * h_u
    checks.append(Check("output-feedback setpoint", s_r > rhs, s_r - rhs, rhs,
                        f"s_r must exceed {rhs:.6g} m"))
    return checks


def violations(checks) -> list[Check]:
    return [c for c in checks if not c.ok]


def validate_law(law: ControlLaw, state0: PlantState, params: PhysicalParams,
                 observer: ObserverInit | None = None, lam: float | None = None,
                 H: float | None = None) -> list[Check]:
    """Every check relevant to ``law`` at start-up."""
    checks: list[Check] = []
    if law.s_r is None:
        return checks
    if law.actuation == NEUMANN:
        checks.append(validate_setpoint_neumann(state0, law.s_r, params))
    else:
        checks.extend(validate_setpoint_dirichlet(state0, law.s_r, params).checks())
        if law.c is not None and law.kind != "pulse":
            checks.append(validate_gain_dirichlet(law.c, law.s_r, params))
    if law.uses_observer and observer is not None:
        checks.extend(validate_observer_setup(observer, H if H is not None else 0.0,
                                              lam if lam is not None else 0.0,
                                              state0.s, law.s_r, params, law.actuation))
    return checks

