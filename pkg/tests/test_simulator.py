import math

import numpy as np
import pytest

from stefan_control import (
    ZINC, Actuation, ControlLaw, ControllerGains, Measurement, ObserverState, Perturbation, PlantState,
    SimConfig, TemperatureProfile, cfl_max_dt, interface_velocity, linear_initial_profile, linear_scenario,
    run_scenario, run_similarity_oracle, similarity_scenario, step_observer, step_plant,
)
from stefan_control.controllers import delta_e_neumann
from stefan_control.errors import CFLError, OracleError, ParameterDomainError, ValidationError
from stefan_control.simulator import similarity_lambda, similarity_solution

AL, BE, TM = ZINC.alpha, ZINC.beta, ZINC.tm
S0, H = 0.01, 1e4


def initial(n=200, s0=S0, h=H):
    return linear_initial_profile(h, s0, TM, n)


def test_interface_velocity_of_linear_profile():
    st = initial()
    assert interface_velocity(st, ZINC) == pytest.approx(BE * H, rel=1e-12)
    assert BE * H == pytest.approx(1.577e-3, rel=1e-4)
    assert interface_velocity(st, ZINC, Perturbation(0.0, -0.2)) == pytest.approx(0.8 * BE * H, rel=1e-12)


def test_cfl_limit():
    dt = cfl_max_dt(initial(n=100), ZINC)
    h = S0 / 100
    assert dt == pytest.approx(0.5 * h * h / AL, rel=1e-12)
    assert dt == pytest.approx(1.10e-4, rel=0.005)
    assert cfl_max_dt(initial(n=100, s0=2 * S0), ZINC) == pytest.approx(4 * dt, rel=1e-12)
    assert cfl_max_dt(initial(n=100), ZINC, Perturbation(0.3, 0.0)) == pytest.approx(dt / 1.3, rel=1e-12)


def test_step_plant_fixed_point():
    rest = initial(h=0.0)
    nxt = step_plant(rest, Actuation("neumann", 0.0), ZINC)
    assert nxt.s == rest.s
    assert np.array_equal(nxt.profile.values, rest.profile.values)
    assert nxt.t == pytest.approx(cfl_max_dt(rest, ZINC))


def test_small_step_moves_interface_by_velocity():
    st = initial()
    sdot = interface_velocity(st, ZINC)
    for dt in (1e-6, 1e-7):
        nxt = step_plant(st, Actuation("neumann", 100.0), ZINC, dt=dt)
        assert (nxt.s - st.s) == pytest.approx(dt * sdot, rel=1e-9)


def test_step_plant_rejects_large_dt():
    st = initial()
    with pytest.raises(CFLError):
        step_plant(st, Actuation("neumann", 0.0), ZINC, dt=2 * cfl_max_dt(st, ZINC))


@pytest.mark.parametrize("integrator", ["euler", "rk2"])
def test_step_plant_advances_interface(integrator):
    st = initial()
    nxt = step_plant(st, Actuation("neumann", 100.0), ZINC, integrator=integrator)
    assert nxt.s > st.s
    assert nxt.profile.values[-1] == TM


def test_step_observer_zero_gain_copies_open_loop_plant():
    st = initial(n=100)
    obs = ObserverState(st.profile)
    act = Actuation("neumann", 500.0)
    dt = 0.5 * cfl_max_dt(st, ZINC)
    nxt = step_plant(st, act, ZINC, dt=dt)
    meas = Measurement(st.s, interface_velocity(st, ZINC), act)
    est = step_observer(obs, meas, ZINC, 0.0, dt)
    # the observer uses the measured s and sdot of the previous step, exactly as the plant does
    assert np.allclose(est.profile_hat.values, nxt.profile.values, rtol=0, atol=1e-9)


def test_step_observer_requires_lambda():
    st = initial(n=50)
    meas = Measurement(st.s, 0.0, Actuation("neumann", 0.0))
    with pytest.raises(ParameterDomainError):
        step_observer(ObserverState(st.profile), meas, ZINC, ControllerGains(0.001), 1e-4)


def test_measurement_from_positions():
    m = Measurement.from_positions(0.1, 0.1002, 0.01, Actuation("neumann", 1.0))
    assert m.sdot == pytest.approx(0.02)


def test_perfect_observer_initialisation_keeps_error_small():
    from _runs import LAM, S_R, C
    from stefan_control import ObserverConfig
    from stefan_control.controllers import ObserverInit

    law = ControlLaw("output-feedback", "neumann", c=C, s_r=S_R)
    sim = SimConfig(t_end=200.0, n=100, sample_every=20.0)
    sc = linear_scenario(ZINC, law, sim, s0=0.05, H=H / 5, observer=ObserverConfig(LAM, ObserverInit(H / 5)))
    traj = run_scenario(sc)
    assert np.nanmax(traj.h1_err) < 1e-9 * traj.h1_u[0]


# ---------------------------------------------------------------------------
# full runs

def test_zero_input_melts_stored_heat():
    # no input: the stored superheat melts s0 + (beta/alpha) int u dx of solid
    law = ControlLaw("constant", "neumann", level=0.0)
    sim = SimConfig(t_end=300.0, n=100, sample_every=30.0)
    traj = run_scenario(linear_scenario(ZINC, law, sim, s0=S0, H=H))
    expected = S0 + BE / AL * H * S0 ** 2 / 2
    assert expected == pytest.approx(0.01174, abs=5e-6)
    assert traj.s[-1] == pytest.approx(expected, rel=1e-4)
    assert np.all(np.diff(traj.s) >= 0)


def test_pulse_delivers_energy_deficit():
    from _runs import S_R, pulse

    traj = pulse()
    de = delta_e_neumann(traj.scenario.initial, S_R, ZINC)
    assert traj.input_integral[-1] / ZINC.k == pytest.approx(de, rel=1e-4)
    assert traj.s[-1] == pytest.approx(S_R, rel=1e-3)


def test_degenerate_s0_refused():
    law = ControlLaw("state-feedback", "neumann", c=0.001, s_r=0.35)
    sim = SimConfig(t_end=10.0, n=100)
    with pytest.raises(ParameterDomainError):
        run_scenario(linear_scenario(ZINC, law, sim, s0=0.005, H=H))


def test_strict_mode_raises_on_validator_warning():
    # setpoint below s0: infeasible for a melting-only input
    law = ControlLaw("state-feedback", "neumann", c=0.001, s_r=0.01)
    sim = SimConfig(t_end=10.0, n=50)
    sc = linear_scenario(ZINC, law, sim, s0=0.05, H=H, strict=True)
    with pytest.raises(ValidationError):
        run_scenario(sc)
    loose = run_scenario(linear_scenario(ZINC, law, sim, s0=0.05, H=H))
    assert loose.warnings


def test_fixed_dt_above_limit_raises():
    law = ControlLaw("constant", "neumann", level=0.0)
    sim = SimConfig(t_end=10.0, n=100, dt=0.01)
    with pytest.raises(CFLError):
        run_scenario(linear_scenario(ZINC, law, sim, s0=S0, H=H))


def test_runs_are_deterministic():
    law = ControlLaw("state-feedback", "neumann", c=0.001, s_r=0.35)
    sim = SimConfig(t_end=50.0, n=60, sample_every=5.0)
    a = run_scenario(linear_scenario(ZINC, law, sim, s0=0.03, H=H))
    b = run_scenario(linear_scenario(ZINC, law, sim, s0=0.03, H=H))
    assert np.array_equal(a.s, b.s) and np.array_equal(a.input, b.input) and a.steps == b.steps


def test_convergence_tolerance_stops_early():
    from _runs import sf_scenario
    from dataclasses import replace

    sc = sf_scenario(n=100, t_end=15000.0)
    sc = replace(sc, sim=replace(sc.sim, convergence_tol=0.05))
    traj = run_scenario(sc)
    assert traj.t[-1] < 15000.0
    assert abs(traj.s[-1] - 0.35) < 0.05 * 0.35


def test_records_match_series():
    from _runs import dirichlet_sf

    traj = dirichlet_sf(100)
    assert len(traj.records) == traj.t.size
    rec = traj.records[-1]
    assert rec.s == traj.s[-1] and rec.V == traj.V[-1]


# ---------------------------------------------------------------------------
# similarity solution

def test_similarity_scaling():
    sol = similarity_solution(ZINC, TM + 100.0)
    assert sol.s(4000.0) / sol.s(1000.0) == pytest.approx(2.0, rel=1e-14)
    assert sol.time_at(float(sol.s(1234.0))) == pytest.approx(1234.0, rel=1e-13)


def test_similarity_root_small_stefan_number():
    # lam ~ sqrt(St / 2) as St -> 0
    st = 1e-6
    assert similarity_lambda(st) == pytest.approx(math.sqrt(st / 2), rel=1e-6)


def test_similarity_temperature_boundaries():
    tc = TM + 100.0
    s, prof = run_similarity_oracle(ZINC, tc, 500.0, n=50)
    assert prof.values[0] == pytest.approx(tc, abs=1e-12)
    assert prof.values[-1] == TM
    sol = similarity_solution(ZINC, tc)
    assert sol.temperature(np.array([s]), 500.0)[0] == pytest.approx(TM, abs=1e-9)


@pytest.mark.parametrize("tc", [TM, TM - 1.0])
def test_similarity_rejects_no_superheat(tc):
    with pytest.raises(OracleError):
        similarity_solution(ZINC, tc)


def test_similarity_oracle_rejects_bad_time():
    with pytest.raises(OracleError):
        run_similarity_oracle(ZINC, TM + 10.0, 0.0)
    with pytest.raises(OracleError):
        similarity_lambda(0.0)


def test_simulator_tracks_similarity_solution():
    sc, sol, t0 = similarity_scenario(ZINC, 100.0, 0.01, 200.0, n=100)
    traj = run_scenario(sc)
    exact = sol.s(traj.t + t0)
    assert np.max(np.abs(traj.s - exact) / exact) < 1e-4


def test_profile_object_round_trip():
    v = np.full(9, TM)
    st = PlantState(0.1, TemperatureProfile(v))
    assert st.n == 8
