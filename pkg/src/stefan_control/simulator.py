"""
Time integration of the plant and observer on the immobilized grid.

:func:`run_scenario` drives the compiled loop in :mod:`._stepping` between
sample instants and turns each sample into a :class:`DiagnosticsRecord`.
The single-step functions (:func:`step_plant`, :func:`step_observer`) share
the same right-hand sides and are meant for tests and external drivers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _stepping as _k
from .controllers import (
    DIRICHLET, NEUMANN, Actuation, Check, ControlLaw, ObserverInit, pulse_schedule, stored_heat,
    stored_moment, validate_law, violations,
)
from .diagnostics import (
    DiagnosticsRecord, LyapunovConstants, constraint_monitor, energy_residual, lyapunov_V,
    lyapunov_V_eps, lyapunov_V_output,
)
from .domain import (
    NOMINAL, ObserverState, Perturbation, PhysicalParams, PlantState, TemperatureProfile,
    h1_norm, linear_initial_profile, norm_components,
)
from .errors import CFLError, OracleError, ParameterDomainError, StateError, ValidationError
from .kernels import ControllerGains
from .special import erf

INTEGRATORS = {"euler": _k.EULER, "rk2": _k.RK2}
_ACT_CODE = {NEUMANN: _k.NEUMANN, DIRICHLET: _k.DIRICHLET}
_LAW_CODE = {"constant": _k.LAW_CONSTANT, "pulse": _k.LAW_PULSE,
             "state-feedback": _k.LAW_FEEDBACK, "output-feedback": _k.LAW_FEEDBACK}


@dataclass(frozen=True)
class SimConfig:
    """Grid size, time-step policy and sampling.

    Exactly one of ``cfl_fraction`` (adaptive step, a fraction of the stability
    limit) and ``dt`` (fixed step) is active; a given ``dt`` wins.
    """

    t_end: float
    n: int = 200
    cfl_fraction: float = 0.4
    dt: float | None = None
    sample_every: float = 10.0
    integrator: str = "euler"
    convergence_tol: float | None = None
    max_steps: int = 2_000_000_000

    def __post_init__(self):
        if self.n < 8:
            raise ParameterDomainError(f"n must be >= 8, got {self.n}")
        if not 0 < self.cfl_fraction <= 1:
            raise ParameterDomainError(f"cfl_fraction must be in (0, 1], got {self.cfl_fraction}")
        if self.dt is not None and not self.dt > 0:
            raise ParameterDomainError(f"dt must be > 0, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ParameterDomainError(f"t_end must be a positive finite time, got {self.t_end}")
        if not self.sample_every > 0:
            raise ParameterDomainError(f"sample_every must be > 0, got {self.sample_every}")
        if self.integrator not in INTEGRATORS:
            raise ParameterDomainError(f"integrator must be one of {sorted(INTEGRATORS)}")
        if self.convergence_tol is not None and not self.convergence_tol > 0:
            raise ParameterDomainError("convergence_tol must be > 0")


@dataclass(frozen=True)
class ObserverConfig:
    lam: float
    init: ObserverInit

    def __post_init__(self):
        if not self.lam >= 0:
            raise ParameterDomainError(f"observer gain must be >= 0, got {self.lam}")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed for one deterministic run.

    ``H`` is the slope bound of the initial superheat; it feeds the observer
    validator and the temperature tolerance.
    """

    params: PhysicalParams
    initial: PlantState
    law: ControlLaw
    sim: SimConfig
    perturbation: Perturbation = NOMINAL
    observer: ObserverConfig | None = None
    H: float | None = None
    name: str = "scenario"
    strict: bool = False

    def __post_init__(self):
        if self.law.uses_observer and self.observer is None:
            raise ParameterDomainError("output feedback needs an observer section")
        if self.initial.n != self.sim.n:
            raise ParameterDomainError(f"initial profile has {self.initial.n} intervals, sim.n is {self.sim.n}")

    @property
    def actuation(self) -> str:
        return self.law.actuation

    def checks(self) -> list[Check]:
        obs = self.observer
        return validate_law(self.law, self.initial, self.params,
                            obs.init if obs else None, obs.lam if obs else None, self.H)

    def tol_T(self) -> float:
        """Undershoot allowance: 1e-6 of the largest initial superheat."""
        return 1e-6 * float(np.max(self.initial.superheat(self.params.tm)))


def linear_scenario(params: PhysicalParams, law: ControlLaw, sim: SimConfig, *, s0: float, H: float,
                    perturbation: Perturbation = NOMINAL, observer: ObserverConfig | None = None,
                    name: str = "scenario", strict: bool = False) -> Scenario:
    """Scenario starting from the linear superheat ``H (s0 - x)``."""
    return Scenario(params, linear_initial_profile(H, s0, params.tm, sim.n), law, sim,
                    perturbation, observer, H, name, strict)


@dataclass(eq=False)
class Trajectory:
    """Sampled output of :func:`run_scenario`.

    Besides the diagnostics records it keeps the raw series needed to
    recompute the energy residual and the probes plotted per run:
    ``T_s0`` (temperature at the initial interface position) and ``err_probe``
    (estimation error at ``x = 0, s/4, s/2``).
    """

    scenario: Scenario
    t: np.ndarray
    s: np.ndarray
    input: np.ndarray
    sdot: np.ndarray
    heat: np.ndarray
    moment: np.ndarray
    input_integral: np.ndarray
    l2_u: np.ndarray
    h1_u: np.ndarray
    h1_err: np.ndarray
    V: np.ndarray
    W: np.ndarray
    V_eps: np.ndarray
    T_s0: np.ndarray
    err_probe: np.ndarray
    flags: dict[str, np.ndarray]
    final_state: PlantState
    final_observer: ObserverState | None
    steps: int
    warnings: list[Check] = field(default_factory=list)
    energy_res: np.ndarray = field(default=None)
    records: list[DiagnosticsRecord] = field(default_factory=list)

    @property
    def actuation(self) -> str:
        return self.scenario.actuation

    @property
    def perturbation(self) -> Perturbation:
        return self.scenario.perturbation

    def violation_counts(self) -> dict[str, int]:
        return {k: int(np.count_nonzero(~v)) for k, v in self.flags.items()}

    def relative_error(self) -> float:
        """``|s - s_r| / s_r`` at the last sample."""
        s_r = self.scenario.law.s_r
        return abs(self.s[-1] - s_r) / s_r

    def time_to_fraction(self, fraction: float) -> float:
        """First sample time with ``s >= fraction * s_r`` (``inf`` if never)."""
        hit = np.nonzero(self.s >= fraction * self.scenario.law.s_r)[0]
        return float(self.t[hit[0]]) if hit.size else math.inf


# ---------------------------------------------------------------------------
# single steps

def interface_velocity(state: PlantState, params: PhysicalParams, perturbation: Perturbation = NOMINAL) -> float:
    """``sdot = -beta (1 + eps2) dT/dx`` at the interface (second-order one-sided)."""
    u = state.superheat(params.tm)
    return float(-params.beta * (1.0 + perturbation.eps2) * _k.interface_slope(u, state.s))


def cfl_max_dt(state: PlantState, params: PhysicalParams, perturbation: Perturbation = NOMINAL,
               n: int | None = None) -> float:
    """Largest stable explicit step: diffusion limit with safety 1/2, advection limit if tighter."""
    n = state.n if n is None else n
    sdot = interface_velocity(state, params, perturbation)
    return float(_k.cfl_dt(state.s, n, params.alpha * (1.0 + perturbation.eps1), sdot))


def _check_dt(dt: float, dt_max: float):
    if not dt > 0:
        raise ParameterDomainError(f"dt must be > 0, got {dt}")
    if dt > dt_max * (1.0 + 1e-12):
        raise CFLError(f"dt = {dt:.6g} exceeds the explicit stability limit {dt_max:.6g}")


def step_plant(state: PlantState, actuation: Actuation, params: PhysicalParams,
               perturbation: Perturbation = NOMINAL, dt: float | None = None,
               integrator: str = "euler") -> PlantState:
    """Advance the plant by one explicit step (``dt`` defaults to the CFL limit)."""
    dt_max = cfl_max_dt(state, params, perturbation)
    dt = dt_max if dt is None else dt
    _check_dt(dt, dt_max)
    act = _ACT_CODE[actuation.kind]
    a = params.alpha * (1.0 + perturbation.eps1)
    b = params.beta * (1.0 + perturbation.eps2)
    u = state.superheat(params.tm).copy()
    if act == _k.DIRICHLET:
        u[0] = actuation.value
    n = u.size - 1
    sig = np.linspace(0.0, 1.0, n + 1)
    du = np.empty_like(u)
    sdot = _k.plant_rhs(u, state.s, sig, act, actuation.value, a, b, params.k, du)
    if integrator == "rk2":
        u1 = u + dt * du
        s1 = state.s + dt * sdot
        if not s1 > 0:
            raise StateError("interface position became nonpositive")
        du2 = np.empty_like(u)
        sdot2 = _k.plant_rhs(u1, s1, sig, act, actuation.value, a, b, params.k, du2)
        u = u + 0.5 * dt * (du + du2)
        s = state.s + 0.5 * dt * (sdot + sdot2)
    else:
        u = u + dt * du
        s = state.s + dt * sdot
    u[n] = 0.0
    if not (s > 0 and math.isfinite(s)) or not np.all(np.isfinite(u)):
        raise StateError(f"step produced an invalid state (s = {s!r})")
    return PlantState(s=float(s), profile=TemperatureProfile(u + params.tm), t=state.t + dt)


@dataclass(frozen=True)
class Measurement:
    """What the observer sees: interface position ``Y``, its rate and the applied input."""

    Y: float
    sdot: float
    actuation: Actuation

    @classmethod
    def from_positions(cls, Y_prev: float, Y: float, dt: float, actuation: Actuation) -> "Measurement":
        """Backward-difference rate for externally supplied position samples."""
        if not dt > 0:
            raise ParameterDomainError("dt must be > 0")
        return cls(Y=Y, sdot=(Y - Y_prev) / dt, actuation=actuation)


def step_observer(obs: ObserverState, meas: Measurement, params: PhysicalParams,
                  gains: ControllerGains | float, dt: float) -> ObserverState:
    """One explicit Euler step of the observer on the grid of the measured domain ``[0, Y]``."""
    lam = gains.lam if isinstance(gains, ControllerGains) else float(gains)
    if lam is None:
        raise ParameterDomainError("observer step needs the observer gain lambda")
    kind = _ACT_CODE[meas.actuation.kind]
    uh = obs.profile_hat.superheat(params.tm).copy()
    n = uh.size - 1
    h = meas.Y / n
    dt_max = 0.5 * h * h / params.alpha
    if meas.sdot != 0.0:
        dt_max = min(dt_max, h / abs(meas.sdot))
    _check_dt(dt, dt_max)
    if kind == _k.DIRICHLET:
        uh[0] = meas.actuation.value
    sig = np.linspace(0.0, 1.0, n + 1)
    gain = _k.observer_gain_nodes(sig, meas.Y, lam, params.alpha, kind)
    duh = np.empty_like(uh)
    _k.observer_rhs(uh, meas.Y, meas.sdot, sig, kind, meas.actuation.value,
                    params.alpha, params.beta, params.k, gain, duh)
    uh += dt * duh
    uh[n] = 0.0
    if not np.all(np.isfinite(uh)):
        raise StateError("observer state became non-finite")
    return ObserverState(TemperatureProfile(uh + params.tm), t=obs.t + dt)


# ---------------------------------------------------------------------------
# full runs

def observer_initial(obs: ObserverConfig, s0: float, tm: float, n: int) -> np.ndarray:
    """Estimate superheat ``h_hat (s0 - x)`` on the grid."""
    return linear_initial_profile(obs.init.h_hat, s0, tm, n).superheat(tm)


def _probe(u: np.ndarray, sigma: float) -> float:
    n = u.size - 1
    return float(np.interp(sigma, np.linspace(0.0, 1.0, n + 1), u))


def _refuse_degenerate(sc: Scenario):
    s_ref = max(sc.law.s_r or 0.0, sc.initial.s)
    cell = s_ref / sc.sim.n
    if sc.initial.s <= 2.0 * cell:
        raise ParameterDomainError(
            f"s0 = {sc.initial.s:.6g} m spans at most two cells of the final grid ({cell:.6g} m each)")


def run_scenario(scenario: Scenario) -> Trajectory:
    """Co-simulate plant, observer and controller, sampling every ``sim.sample_every`` seconds.

    Validator violations become warnings (errors in strict mode).  Constraint
    violations during the run are recorded, never raised.
    """
    sc = scenario
    law, p, sim, pert = sc.law, sc.params, sc.sim, sc.perturbation
    _refuse_degenerate(sc)
    warnings = violations(sc.checks())
    if warnings and sc.strict:
        raise ValidationError(warnings)

    value, t_off = 0.0, 0.0
    if law.kind == "pulse":
        value, t_off = pulse_schedule(law, sc.initial, p)
    elif law.kind == "constant":
        value = law.level
    c = law.c or 0.0
    s_r = law.s_r or 0.0
    act = _ACT_CODE[law.actuation]
    code = _LAW_CODE[law.kind]
    use_obs = sc.observer is not None
    output_fb = law.kind == "output-feedback"
    lam = sc.observer.lam if use_obs else 0.0
    gains = ControllerGains(law.c, lam if use_obs and lam > 0 else None) if law.c else None
    constants = None
    if gains is not None and law.kind != "pulse":
        constants = (LyapunovConstants.output_feedback(law.c, s_r, lam, p) if output_fb
                     else LyapunovConstants.state_feedback(law.c, s_r, p))
    tol_T = sc.tol_T()
    n = sim.n

    u = sc.initial.superheat(p.tm).copy()
    uh = observer_initial(sc.observer, sc.initial.s, p.tm, n) if use_obs else u.copy()
    state = np.zeros(5)
    state[0] = sc.initial.s
    b_plant = p.beta * (1.0 + pert.eps2)

    cols: dict[str, list] = {k: [] for k in (
        "t", "s", "input", "sdot", "heat", "moment", "input_integral", "l2_u", "h1_u", "h1_err",
        "V", "W", "V_eps", "T_s0", "err_probe")}
    flags: dict[str, list] = {}
    s_prev = None

    def sample():
        nonlocal s_prev
        s, t = float(state[0]), float(state[1])
        v = float(_k.control_value(code, act, uh if output_fb else u, s, t, c, s_r, p.k,
                                   p.alpha, p.beta, value, t_off))
        plant = PlantState(s, TemperatureProfile(u + p.tm), t)
        l2, dx = norm_components(u, s)
        err = u - uh if use_obs else None
        obs = ObserverState(TemperatureProfile(uh + p.tm), t) if use_obs else None
        V = W = V_eps = math.nan
        if constants is not None:
            V = (lyapunov_V_output(plant, obs, s_r, gains, p, constants) if output_fb
                 else lyapunov_V(plant, s_r, gains, p, constants))
            W = V * math.exp(-constants.a * s)
            if pert != NOMINAL:
                V_eps = lyapunov_V_eps(plant, s_r, gains, p, pert)
        row = dict(
            t=t, s=s, input=v, sdot=float(-b_plant * _k.interface_slope(u, s)),
            heat=stored_heat(plant, p), moment=stored_moment(plant, p), input_integral=float(state[2]),
            l2_u=l2, h1_u=math.hypot(l2, dx), h1_err=h1_norm(err, s) if use_obs else math.nan,
            V=V, W=W, V_eps=V_eps,
            T_s0=p.tm + _probe(u, min(sc.initial.s / s, 1.0)),
            err_probe=[_probe(err, f) if use_obs else math.nan for f in (0.0, 0.25, 0.5)],
        )
        for k, val in row.items():
            cols[k].append(val)
        fl = constraint_monitor(input_value=v, u=u, s=s, s_prev=s_prev,
                                s_r=law.s_r, tol_T=tol_T, u_err=err)
        for k, val in fl.items():
            flags.setdefault(k, []).append(val)
        s_prev = s

    sample()
    steps = 0
    k = 0
    while state[1] < sim.t_end:
        k += 1
        t_next = min(k * sim.sample_every, sim.t_end)
        done, status = _k.advance(
            u, uh, state, t_next, sim.max_steps - steps, act, code, use_obs, output_fb,
            INTEGRATORS[sim.integrator], p.alpha, p.beta, p.k, pert.eps1, pert.eps2, c, s_r,
            value, t_off, lam, sim.cfl_fraction, sim.dt or 0.0)
        steps += done
        if status == _k.STATUS_CFL:
            raise CFLError(f"fixed dt {sim.dt} exceeds the stability limit at t = {state[1]:.6g} s")
        if status == _k.STATUS_BAD_STATE:
            raise StateError(f"state became invalid at t = {state[1]:.6g} s (s = {state[0]!r})")
        if status == _k.STATUS_MAX_STEPS:
            raise StateError(f"step budget of {sim.max_steps} exhausted at t = {state[1]:.6g} s")
        sample()
        if (sim.convergence_tol is not None and law.s_r
                and abs(state[0] - law.s_r) < sim.convergence_tol * law.s_r):
            break

    arrays = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    traj = Trajectory(
        scenario=sc, **arrays,
        flags={k: np.asarray(v, dtype=bool) for k, v in flags.items()},
        final_state=PlantState(float(state[0]), TemperatureProfile(u + p.tm), float(state[1])),
        final_observer=ObserverState(TemperatureProfile(uh + p.tm), float(state[1])) if use_obs else None,
        steps=steps, warnings=warnings,
    )
    traj.energy_res = energy_residual(traj, p)
    traj.records = [
        DiagnosticsRecord(
            t=traj.t[i], s=traj.s[i], input=traj.input[i], sdot=traj.sdot[i], l2_u=traj.l2_u[i],
            h1_u=traj.h1_u[i], h1_err=traj.h1_err[i], V=traj.V[i], W=traj.W[i],
            energy_residual=traj.energy_res[i],
            **{name: bool(traj.flags[name][i]) for name in traj.flags})
        for i in range(traj.t.size)
    ]
    return traj


# ---------------------------------------------------------------------------
# similarity solution

def similarity_lambda(stefan_number: float) -> float:
    """Root of ``lam exp(lam^2) erf(lam) = St / sqrt(pi)`` on ``(0, 10)`` by bisection."""
    if not stefan_number > 0:
        raise OracleError(f"Stefan number must be > 0, got {stefan_number!r}")
    target = stefan_number / math.sqrt(math.pi)
    f = lambda lam: lam * math.exp(lam * lam) * erf(lam) - target  # noqa: E731
    lo, hi = 0.0, 10.0
    if f(hi) < 0:
        raise OracleError(f"no similarity root in (0, 10) for St = {stefan_number!r}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SimilaritySolution:
    params: PhysicalParams
    tc: float
    lam: float

    @property
    def stefan_number(self) -> float:
        return self.params.cp * (self.tc - self.params.tm) / self.params.dh

    def s(self, t):
        return 2.0 * self.lam * np.sqrt(self.params.alpha * np.asarray(t, dtype=float))

    def time_at(self, s: float) -> float:
        return (s / (2.0 * self.lam)) ** 2 / self.params.alpha

    def temperature(self, x, t: float):
        x = np.asarray(x, dtype=float)
        scale = 2.0 * math.sqrt(self.params.alpha * t)
        e = np.array([erf(v) for v in np.atleast_1d(x / scale)]).reshape(x.shape)
        return self.tc - (self.tc - self.params.tm) * e / erf(self.lam)


def similarity_solution(params: PhysicalParams, tc: float) -> SimilaritySolution:
    if not tc > params.tm:
        raise OracleError(f"boundary temperature {tc} must exceed the melting point {params.tm}")
    st = params.cp * (tc - params.tm) / params.dh
    return SimilaritySolution(params, float(tc), similarity_lambda(st))


def run_similarity_oracle(params: PhysicalParams, tc: float, t: float, n: int = 200):
    """Exact ``(s, profile)`` at time ``t`` for the boundary held at absolute temperature ``tc``."""
    if not t > 0:
        raise OracleError("oracle time must be > 0")
    sol = similarity_solution(params, tc)
    s = float(sol.s(t))
    values = sol.temperature(s * np.linspace(0.0, 1.0, n + 1), t)
    values[-1] = params.tm
    return s, TemperatureProfile(values)


def similarity_scenario(params: PhysicalParams, superheat: float, s0: float, t_end: float,
                        n: int = 200, sample_every: float | None = None,
                        cfl_fraction: float = 0.4) -> tuple[Scenario, SimilaritySolution, float]:
    """Constant-temperature run started from the exact profile at the time ``t0`` when ``s = s0``.

    Returns the scenario, the exact solution and ``t0``; simulation time ``t``
    corresponds to physical time ``t + t0``.
    """
    sol = similarity_solution(params, params.tm + superheat)
    t0 = sol.time_at(s0)
    _, profile = run_similarity_oracle(params, params.tm + superheat, t0, n)
    sim = SimConfig(t_end=t_end, n=n, cfl_fraction=cfl_fraction,
                    sample_every=sample_every or t_end / 100.0)
    law = ControlLaw("constant", DIRICHLET, level=superheat)
    sc = Scenario(params, PlantState(s0, profile), law, sim, name="similarity")
    return sc, sol, t0
