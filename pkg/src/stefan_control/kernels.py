"""
Backstepping gain kernels and the Volterra transformations on ``[0, s]``.

All transforms act on nodal arrays of the uniform immobilized grid and only
integrate over ``[x_i, s]`` with ``x_i`` a grid node, so the tail integrals are
plain composite-trapezoid sums on the same nodes.

State feedback pair (``u`` superheat, ``X = s - s_r``)::

    w = u - (beta/alpha) int_x^s phi(x - y) u(y) dy - phi(x - s) X
    u = w + (beta/alpha) int_x^s psi(x - y) w(y) dy + psi(x - s) X

Observer-error pair::

    u_err = w_err + int_x^s P1(x, y) w_err(y) dy
    w_err = u_err - int_x^s Q1(x, y) u_err(y) dy
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterDomainError
from .special import i1_ratio_array, j1_ratio_array


@dataclass(frozen=True)
class ControllerGains:
    """Controller gain ``c`` and, when an observer is used, its gain ``lam``."""

    c: float
    lam: float | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterDomainError(f"controller gain c must be > 0, got {self.c!r}")
        if self.lam is not None and not self.lam > 0:
            raise ParameterDomainError(f"observer gain lambda must be > 0, got {self.lam!r}")


def gain_phi(x, c: float, beta: float):
    return (c / beta) * np.asarray(x, dtype=float) if np.ndim(x) else (c / beta) * float(x)


def gain_psi(x, c: float, alpha: float, beta: float):
    if not (c > 0 and alpha > 0 and beta > 0):
        raise ParameterDomainError("c, alpha and beta must be positive")
    w = math.sqrt(c / alpha)
    amp = (c / beta) * math.sqrt(alpha / c)
    return amp * np.sin(w * np.asarray(x, dtype=float)) if np.ndim(x) else amp * math.sin(w * float(x))


def _pair_args(x, y, lam, alpha):
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.any(xa < 0) or np.any(xa > ya * (1.0 + 1e-12) + 1e-300):
        raise ParameterDomainError("kernel requires 0 <= x <= y")
    z = np.sqrt(np.maximum((lam / alpha) * (ya * ya - xa * xa), 0.0))
    return xa, ya, z


def _scalar_or_array(out, *inputs):
    return float(out) if all(np.ndim(a) == 0 for a in inputs) else out


def observer_kernel_P1(x, y, lam: float, alpha: float):
    """``P1(x, y) = (lam/alpha) y I1(z)/z`` with ``z = sqrt((lam/alpha)(y^2 - x^2))``."""
    _, ya, z = _pair_args(x, y, lam, alpha)
    out = (lam / alpha) * ya * i1_ratio_array(np.atleast_1d(z)).reshape(np.shape(z))
    return _scalar_or_array(out, x, y)


def inverse_kernel_Q1(x, y, lam: float, alpha: float):
    """``Q1(x, y) = (lam/alpha) y J1(z)/z``; same argument as :func:`observer_kernel_P1`."""
    _, ya, z = _pair_args(x, y, lam, alpha)
    out = (lam / alpha) * ya * j1_ratio_array(np.atleast_1d(z)).reshape(np.shape(z))
    return _scalar_or_array(out, x, y)


def observer_gain_p1(x, s: float, lam: float, alpha: float):
    """Neumann observer gain ``p1(x, s) = -alpha P1(x, s)``."""
    return -alpha * observer_kernel_P1(x, s, lam, alpha)


def observer_gain_p2(x, s: float, lam: float, alpha: float):
    """Dirichlet observer gain: as ``p1`` with the leading factor ``s`` replaced by ``x``."""
    xa, _, z = _pair_args(x, s, lam, alpha)
    out = -lam * xa * i1_ratio_array(np.atleast_1d(z)).reshape(np.shape(z))
    return _scalar_or_array(out, x)


@lru_cache(maxsize=16)
def _tail_weights(n: int) -> np.ndarray:
    """Trapezoid weights (unit spacing) of ``int_{sigma_i}^1`` applied to node ``j``."""
    w = np.triu(np.ones((n + 1, n + 1)))
    w[np.diag_indices(n + 1)] = 0.5
    w[:, n] = 0.5
    w[n, n] = 0.0
    w /= n
    w.setflags(write=False)
    return w


def volterra_tail(kernel: np.ndarray, f: np.ndarray, s: float) -> np.ndarray:
    """``int_{x_i}^s K(x_i, y) f(y) dy`` at every node; ``kernel[i, j] = K(x_i, x_j)``."""
    n = f.size - 1
    return s * ((kernel * _tail_weights(n)) @ f)


def _grid(n: int, s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = s * np.linspace(0.0, 1.0, n + 1)
    return x, x[:, None], x[None, :]


def direct_transform(u, s: float, X: float, c: float, alpha: float, beta: float) -> np.ndarray:
    """Map superheat ``u`` and interface error ``X`` to the target variable ``w``."""
    u = np.asarray(u, dtype=float)
    x, xi, yj = _grid(u.size - 1, s)
    K = (beta / alpha) * gain_phi(xi - yj, c, beta)
    return u - volterra_tail(K, u, s) - gain_phi(x - s, c, beta) * X


def inverse_transform(w, s: float, X: float, c: float, alpha: float, beta: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    x, xi, yj = _grid(w.size - 1, s)
    L = (beta / alpha) * gain_psi(xi - yj, c, alpha, beta)
    return w + volterra_tail(L, w, s) + gain_psi(x - s, c, alpha, beta) * X


def _upper(x_i, y_j):
    # y >= x on the upper triangle; clip the rest so the kernel stays finite (weights zero it)
    return np.minimum(x_i, y_j), np.maximum(x_i, y_j)


def error_transform(u_err, s: float, lam: float, alpha: float) -> np.ndarray:
    """Observer error ``u_err`` to target error ``w_err`` (kernel ``Q1``)."""
    u_err = np.asarray(u_err, dtype=float)
    _, xi, yj = _grid(u_err.size - 1, s)
    Q = inverse_kernel_Q1(*_upper(xi, yj), lam, alpha)
    return u_err - volterra_tail(Q, u_err, s)


def error_inverse(w_err, s: float, lam: float, alpha: float) -> np.ndarray:
    """Target error ``w_err`` back to observer error ``u_err`` (kernel ``P1``)."""
    w_err = np.asarray(w_err, dtype=float)
    _, xi, yj = _grid(w_err.size - 1, s)
    P = observer_kernel_P1(*_upper(xi, yj), lam, alpha)
    return w_err + volterra_tail(P, w_err, s)
