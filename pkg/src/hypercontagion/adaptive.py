"""
Paired simulations of a pairwise system and a higher-order system.

Both systems start from the same infected set and advance in lockstep.
After every time step the ratio of their exact activities is recorded;
in adaptive mode the pairwise infection probability is multiplied by the
ratio whenever its trailing mean drifts at least ``rho`` away from 1.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .activity import exact_activity_value, normalize_beta1
from .contagion import (TRUE_SCALING, DiseaseParams, ScalingSpec, Simulation,
                        Trajectory, TrajectoryRecorder)
from .hypergraph import Hypergraph

# lower clamp for beta_1 when the higher-order system has no activity left
BETA1_FLOOR = 1e-12


def rng_stream(seed, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under a master ``seed``."""
    entropy = seed.entropy if isinstance(seed, np.random.SeedSequence) else seed
    base = tuple(seed.spawn_key) if isinstance(seed, np.random.SeedSequence) else ()
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=base + key))


@dataclass(frozen=True)
class AdaptiveConfig:
    tau: int = 5
    rho: float = 0.5
    spec_for_xi: ScalingSpec = TRUE_SCALING

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")


@dataclass
class PairedRunResult:
    trajectory_1: Trajectory
    trajectory_K: Trajectory
    beta1_initial: float
    adjustment_times: List[int] = field(default_factory=list)
    events: List[dict] = field(default_factory=list)


def xi(gK: Hypergraph, g1: Hypergraph, beta_K: float, beta_1_t: float,
       states_K, states_1, k_gamma: float,
       config: Optional[AdaptiveConfig] = None) -> float:
    """
    Ratio of the higher-order system's exact activity to the pairwise one's.

    Returns NaN when the pairwise activity is zero (ratio undefined).
    """
    spec = config.spec_for_xi if config is not None else TRUE_SCALING
    den = exact_activity_value(g1, beta_1_t, np.asarray(states_1, np.int8), k_gamma, spec)
    if den <= 0.0:
        return math.nan
    num = exact_activity_value(gK, beta_K, np.asarray(states_K, np.int8), k_gamma, spec)
    return num / den


def update_beta1(beta_1_prev: float, xi_t: float, xi_bar_t: float,
                 rho: float) -> Tuple[float, bool]:
    """Threshold rule: rescale by ``xi_t`` only when ``|xi_bar_t - 1| >= rho``."""
    if math.isnan(xi_t) or math.isnan(xi_bar_t) or abs(xi_bar_t - 1.0) < rho:
        return beta_1_prev, False
    return min(max(xi_t * beta_1_prev, BETA1_FLOOR), 1.0), True


def paired_run(gK: Hypergraph, g1: Hypergraph, params_K: DiseaseParams,
               adaptive: Optional[AdaptiveConfig], init, T: int, seed_pair,
               beta1: Optional[float] = None, switch_at: Optional[int] = None,
               stop_when_extinct: bool = False) -> PairedRunResult:
    """
    Co-simulate the pairwise system on ``g1`` and the higher-order system on ``gK``.

    Parameters
    ----------
    gK, g1 : Hypergraph
        Full hypergraph and its order-1 restriction.
    params_K : DiseaseParams
        Disease parameters of the higher-order system; the pairwise system
        shares them except for its infection probability.
    adaptive : AdaptiveConfig or None
        None keeps beta_1 fixed (static mode).
    init : array-like
        Shared initial states.
    T : int
        Number of time steps.
    seed_pair : int or SeedSequence
        Master seed; the two systems draw from independent child streams.
    beta1 : float, optional
        Initial pairwise infection probability. Defaults to the static
        normalisation of ``params_K.beta`` (computed with the scaling
        function used for the activity ratio).
    switch_at : int, optional
        Static mode only: at this step the pairwise system is moved onto
        ``gK``. ``0`` switches before the first step.
    stop_when_extinct : bool
        Stop early once both systems have no infected nodes.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if switch_at is not None and adaptive is not None:
        raise ValueError("switch_at is only meaningful in static mode")
    if g1.n_nodes != gK.n_nodes:
        raise ValueError("paired hypergraphs must share the node set")
    config = adaptive if adaptive is not None else AdaptiveConfig(rho=math.inf)
    spec = config.spec_for_xi
    kg = params_K.k_gamma
    if beta1 is None:
        beta1 = normalize_beta1(gK, g1, params_K.beta, kg, gK.max_order, spec)
    beta1_initial = beta1

    sim_K = Simulation(gK, params_K, init, rng_stream(seed_pair, 0))
    sim_1 = Simulation(g1, params_K.with_beta(beta1), init, rng_stream(seed_pair, 1))
    if switch_at == 0:
        sim_1.set_hypergraph(gK)

    def ratio():
        return xi(gK, sim_1.g, params_K.beta, beta1, sim_K.states, sim_1.states, kg, config)

    rec_K = TrajectoryRecorder(gK.n_nodes)
    rec_1 = TrajectoryRecorder(g1.n_nodes, controller=True)
    rec_K.record(0, sim_K.counts())
    rec_1.record(0, sim_1.counts(), beta1, ratio(), math.nan, False)

    window: deque = deque(maxlen=config.tau)
    adjustment_times, events = [], []
    for t in range(1, T + 1):
        sim_K.step()
        sim_1.step()
        x = ratio()
        if not math.isnan(x):
            window.append(x)
        x_bar = sum(window) / len(window) if window else math.nan
        new_beta1, adjusted = update_beta1(beta1, x, x_bar, config.rho)
        # a rescale that the clamp turns into a no-op is not an adjustment
        adjusted = adjusted and new_beta1 != beta1
        if adjusted:
            events.append(dict(t=t, beta1_before=beta1, beta1_after=new_beta1,
                               xi=x, xi_bar=x_bar))
            adjustment_times.append(t)
            beta1 = new_beta1
            sim_1.set_beta(beta1)
            window.clear()
        if switch_at is not None and t == switch_at:
            sim_1.set_hypergraph(gK)
        c_K, c_1 = sim_K.counts(), sim_1.counts()
        rec_K.record(t, c_K)
        rec_1.record(t, c_1, beta1, x, x_bar, adjusted)
        if stop_when_extinct and c_K[1] == 0 and c_1[1] == 0:
            break

    return PairedRunResult(rec_1.build(system="pairwise"), rec_K.build(system="higher"),
                           beta1_initial, adjustment_times, events)
