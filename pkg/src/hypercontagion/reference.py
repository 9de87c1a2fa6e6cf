"""
Homogeneous-mixing SIR/SIS equations and parameter conversions.

    dS/dt = -beta S I + mu I
    dI/dt =  beta S I - mu I - alpha I
    dR/dt =  alpha I
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contagion import DiseaseParams


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OdeParams:
    beta: float
    mu: float
    alpha: float
    N: int

    def __post_init__(self):
        if min(self.beta, self.mu, self.alpha) < 0:
            raise ValueError("ODE rates must be non-negative")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")


@dataclass
class OdeSeries:
    t: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray


def ode_rhs(state, params: OdeParams) -> np.ndarray:
    S, I, _ = state
    infection = params.beta * S * I
    return np.array([-infection + params.mu * I,
                     infection - (params.mu + params.alpha) * I,
                     params.alpha * I])


def integrate(params: OdeParams, init, t_end: float, dt: float) -> OdeSeries:
    """
    Classical fixed-step RK4 from ``t = 0`` to ``t_end``.

    Output points are every ``dt``; the last step is shortened to land
    exactly on ``t_end``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    y = np.array(init, dtype=float)
    out = np.empty((n_steps + 1, 3))
    ts = np.empty(n_steps + 1)
    out[0], ts[0] = y, 0.0
    tol = 1e-9 * params.N
    t = 0.0
    for n in range(1, n_steps + 1):
        h = min(dt, t_end - t)
        k1 = ode_rhs(y, params)
        k2 = ode_rhs(y + 0.5 * h * k1, params)
        k3 = ode_rhs(y + 0.5 * h * k2, params)
        k4 = ode_rhs(y + h * k3, params)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = n * dt if n < n_steps else t_end
        if y.min() < -tol:
            raise IntegrationError(f"negative population {y.min():.3g} at t={t:g}")
        out[n], ts[n] = y, t
    return OdeSeries(ts, out[:, 0], out[:, 1], out[:, 2])


def abm_params_from_ode(params: OdeParams, m: int, k_gamma: float = 0.0) -> DiseaseParams:
    """
    Per-iteration probabilities for the complete graph at resolution ``m``.

    The default ``k_gamma = 0`` makes a selected S-I pair infect with
    exactly ``beta_abm``, which is what the conversion assumes.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    dt = 1.0 / m
    N = params.N
    beta = N * (N - 1) / 2 * params.beta * dt
    mu = params.mu * dt
    alpha = params.alpha * dt
    if max(beta, mu + alpha) > 1.0:
        raise ValueError(
            f"resolution m={m} too coarse: probabilities (beta={beta:.4g}, "
            f"mu+alpha={mu + alpha:.4g}) exceed 1; increase m")
    return DiseaseParams(beta, mu, alpha, k_gamma, m)


def kgamma_from_scm(beta: float, beta_delta: float) -> float:
    """Amplification cap equivalent to a simplicial contagion model with rates (beta, beta_delta)."""
    if beta == 0:
        raise ZeroDivisionError("pairwise rate beta must be non-zero")
    return (beta + beta_delta) / (2.0 * beta)
