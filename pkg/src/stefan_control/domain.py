"""
Domain types shared by every module: material constants, plant and observer
states on the immobilized grid, and norms on the moving domain.

Profiles live on the uniform grid ``sigma_i = i / n`` (``i = 0..n``) of the
unit interval; the physical coordinate is ``x = s * sigma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError, StateError


@dataclass(frozen=True)
class PhysicalParams:
    """Material constants and the derived diffusivities.

    ``alpha = k / (rho cp)`` is the thermal diffusivity and
    ``beta = k / (rho dh)`` the interface (Stefan) coefficient.
    """

    rho: float
    cp: float
    k: float
    dh: float
    tm: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class Perturbation:
    """Relative mismatch of the plant's diffusivity (eps1) and Stefan coefficient (eps2)."""

    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > -1.0):
                raise ParameterDomainError(f"{name} must be > -1, got {v!r}")


NOMINAL = Perturbation()


@dataclass(frozen=True)
class Setpoint:
    s_r: float

    def __post_init__(self):
        if not self.s_r > 0:
            raise ParameterDomainError(f"setpoint s_r must be > 0, got {self.s_r!r}")


@dataclass(frozen=True, eq=False)
class TemperatureProfile:
    """Absolute temperatures (K) on the uniform unit grid."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ParameterDomainError("profile needs at least 3 grid nodes")
        if not np.all(np.isfinite(v)):
            raise ParameterDomainError("profile values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def sigma(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    def superheat(self, tm: float) -> np.ndarray:
        return self.values - tm

    def is_valid(self, tm: float, tol: float = 0.0) -> bool:
        """Interface pinned at ``tm`` and no node below ``tm - tol``."""
        u = self.values - tm
        return abs(u[-1]) <= tol and bool(np.all(u >= -tol))


@dataclass(frozen=True, eq=False)
class PlantState:
    s: float
    profile: TemperatureProfile
    t: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise StateError(f"interface position must be > 0, got {self.s!r}")

    @property
    def n(self) -> int:
        return self.profile.n

    def x(self) -> np.ndarray:
        return self.s * self.profile.sigma

    def superheat(self, tm: float) -> np.ndarray:
        return self.profile.superheat(tm)

    def error(self, s_r: float) -> float:
        return self.s - s_r


@dataclass(frozen=True, eq=False)
class ObserverState:
    profile_hat: TemperatureProfile
    t: float = 0.0


def _check_positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
            raise ParameterDomainError(f"{name} must be a positive number, got {v!r}")


def derive_params(rho: float, cp: float, k: float, dh: float, tm: float) -> PhysicalParams:
    """Build :class:`PhysicalParams` from raw material constants."""
    _check_positive(rho=rho, cp=cp, k=k, dh=dh, tm=tm)
    return PhysicalParams(
        rho=float(rho), cp=float(cp), k=float(k), dh=float(dh), tm=float(tm),
        alpha=k / (rho * cp), beta=k / (rho * dh),
    )


# Zinc; tm is the standard melting point, 419.53 C.
ZINC_CONSTANTS = dict(rho=6570.0, cp=389.5687, k=116.0, dh=111961.0, tm=692.68)
ZINC = derive_params(**ZINC_CONSTANTS)

PRESETS = {"zinc": ZINC}


def linear_initial_profile(H: float, s0: float, tm: float, n: int) -> PlantState:
    """Initial state with superheat ``H (s0 - x)``, decreasing linearly to zero at the interface."""
    if not H >= 0:
        raise ParameterDomainError(f"H must be >= 0, got {H!r}")
    _check_positive(s0=s0)
    if n < 2:
        raise ParameterDomainError(f"n must be >= 2, got {n!r}")
    sigma = np.linspace(0.0, 1.0, n + 1)
    values = tm + H * s0 * (1.0 - sigma)
    values[-1] = tm
    return PlantState(s=float(s0), profile=TemperatureProfile(values), t=0.0)


def _values(profile, tm: float) -> np.ndarray:
    if isinstance(profile, TemperatureProfile):
        return profile.values - tm
    return np.asarray(profile, dtype=float) - tm


def trapezoid(f: np.ndarray, h: float) -> float:
    """Composite trapezoid rule on a uniform grid with spacing ``h``."""
    f = np.asarray(f, dtype=float)
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def spatial_derivative(u: np.ndarray, s: float) -> np.ndarray:
    """``du/dx`` at the nodes: central inside, second-order one-sided at both ends."""
    u = np.asarray(u, dtype=float)
    return np.gradient(u, 1.0 / (u.size - 1), edge_order=2) / s


def norm_components(profile, s: float, tm: float = 0.0) -> tuple[float, float]:
    """``(||u||_L2, ||u_x||_L2)`` for ``u = profile - tm`` on ``[0, s]``."""
    u = _values(profile, tm)
    h = s / (u.size - 1)
    l2 = math.sqrt(trapezoid(u * u, h))
    ux = spatial_derivative(u, s)
    return l2, math.sqrt(trapezoid(ux * ux, h))


def l2_norm(profile, s: float, tm: float = 0.0) -> float:
    """L2 norm of ``profile - tm`` over ``[0, s]`` (trapezoid, ``dx = s dsigma``).

    ``profile`` may be a :class:`TemperatureProfile` or a plain array; pass
    ``tm=0`` when the array already holds superheat or an error profile.
    """
    u = _values(profile, tm)
    return math.sqrt(trapezoid(u * u, s / (u.size - 1)))


def h1_norm(profile, s: float, tm: float = 0.0) -> float:
    l2, d = norm_components(profile, s, tm)
    return math.sqrt(l2 * l2 + d * d)
