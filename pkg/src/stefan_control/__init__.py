"""Boundary control and estimation of a one-phase melting (Stefan) problem.

The liquid layer ``0 <= x <= s(t)`` is heated at ``x = 0`` either by a heat
flux (Neumann actuation) or by prescribing the boundary temperature
(Dirichlet actuation).  The package provides the closed-form backstepping
controllers and observer, a front-fixing finite-difference simulator and the
diagnostics used to check the closed loop.
"""
from ._accel import backend
from .controllers import (
    Actuation, Check, ControlLaw, ObserverInit, delta_e_dirichlet, delta_e_neumann,
    dirichlet_robust_gain_bound, output_feedback_dirichlet, output_feedback_neumann,
    pulse_dirichlet, pulse_neumann, robustness_region_check, state_feedback_dirichlet,
    state_feedback_neumann, validate_gain_dirichlet, validate_observer_setup,
    validate_setpoint_dirichlet, validate_setpoint_neumann,
)
from .diagnostics import (
    DiagnosticsRecord, LyapunovConstants, constraint_monitor, energy_residual, fit_exponential,
    lyapunov_V, lyapunov_V_eps, lyapunov_W,
)
from .domain import (
    NOMINAL, PRESETS, ZINC, ObserverState, Perturbation, PhysicalParams, PlantState, Setpoint,
    TemperatureProfile, derive_params, h1_norm, l2_norm, linear_initial_profile,
)
from .errors import StefanError
from .kernels import (
    ControllerGains, direct_transform, error_inverse, error_transform, gain_phi, gain_psi,
    inverse_kernel_Q1, inverse_transform, observer_gain_p1, observer_gain_p2, observer_kernel_P1,
)
from .simulator import (
    Measurement, ObserverConfig, Scenario, SimConfig, Trajectory, cfl_max_dt, interface_velocity,
    linear_scenario, run_scenario, run_similarity_oracle, similarity_scenario, step_observer,
    step_plant,
)
from .special import bessel_i1, bessel_j1, erf, i1_ratio, j1_ratio

__version__ = "0.1.0"
