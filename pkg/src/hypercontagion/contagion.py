"""
Edge-based stochastic SIS/SIR dynamics on hypergraphs.

Each time step consists of ``m`` iterations. In an iteration one hyperedge
is drawn uniformly from all orders; every susceptible member is infected
independently with the hyperedge infection probability, and afterwards
every node that was already infected leaves I with probability
``mu + alpha`` (to S with ``mu``, to R with ``alpha``).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as kern
from .hypergraph import Hypergraph


class Compartment(enum.IntEnum):
    SUSCEPTIBLE = kern.SUSCEPTIBLE
    INFECTED = kern.INFECTED
    REMOVED = kern.REMOVED


S, I, R = Compartment.SUSCEPTIBLE, Compartment.INFECTED, Compartment.REMOVED


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScalingSpec:
    """
    Choice of amplification function.

    ``kind`` is ``"true"`` (the model's own function), ``"scale"`` (upper
    branch scaled by ``param`` = eta) or ``"form"`` (both branches raised
    to a power ``param`` = n).
    """

    kind: str = "true"
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("true", "scale", "form"):
            raise ValueError(f"unknown scaling kind {self.kind!r}")
        if self.kind == "scale" and not self.param > 0:
            raise ValueError(f"scale misspecification needs eta > 0, got {self.param}")
        if self.kind == "form" and (self.param < 1 or self.param != int(self.param)):
            raise ValueError(f"form misspecification needs integer n >= 1, got {self.param}")

    @classmethod
    def true(cls) -> "ScalingSpec":
        return cls("true", 1.0)

    @classmethod
    def scale(cls, eta: float) -> "ScalingSpec":
        return cls("scale", float(eta))

    @classmethod
    def form(cls, n: int) -> "ScalingSpec":
        return cls("form", float(n))

    @property
    def code(self) -> int:
        return {"true": kern.F_TRUE, "scale": kern.F_SCALE, "form": kern.F_FORM}[self.kind]

    def __str__(self):
        if self.kind == "true":
            return "true"
        return f"{self.kind}({self.param:g})"


TRUE_SCALING = ScalingSpec.true()


@dataclass(frozen=True)
class DiseaseParams:
    """Per-iteration probabilities, amplification cap and iterations per step."""

    beta: float
    mu: float
    alpha: float = 0.0
    k_gamma: float = 3.0
    m: int = 50

    def __post_init__(self):
        for name in ("beta", "mu", "alpha"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.mu + self.alpha > 1.0:
            raise ValueError(f"mu + alpha must not exceed 1, got {self.mu + self.alpha}")
        if self.k_gamma < 0:
            raise ValueError(f"k_gamma must be non-negative, got {self.k_gamma}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    def with_beta(self, beta: float) -> "DiseaseParams":
        return DiseaseParams(beta, self.mu, self.alpha, self.k_gamma, self.m)


def scaling_f(p: float, k_gamma: float, spec: ScalingSpec = TRUE_SCALING) -> float:
    """Amplification factor for an infected fraction ``p`` among the other members."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"infected fraction must lie in [0, 1], got {p}")
    return kern.scale(float(p), float(k_gamma), spec.code, float(spec.param))


def edge_infection_prob(edge: Sequence[int], states, beta: float, k_gamma: float,
                        spec: ScalingSpec = TRUE_SCALING) -> float:
    """
    Probability that a susceptible member of ``edge`` is infected when the
    edge is selected: ``min(f(n_I / (|e| - 1)) * n_I * beta, 1)``.
    """
    states = np.asarray(states)
    n_inf = int(np.count_nonzero(states[list(edge)] == kern.INFECTED))
    return kern.edge_prob(n_inf, len(edge), float(beta), float(k_gamma),
                          spec.code, float(spec.param))


# -- literal per-iteration update ------------------------------------------

def _as_states(states, n_nodes: int) -> np.ndarray:
    arr = np.asarray(states, dtype=np.int8)
    if arr.shape != (n_nodes,):
        raise SimulationError(f"state vector has shape {arr.shape}, expected ({n_nodes},)")
    return arr


def iterate_once(states, g: Hypergraph, params: DiseaseParams, rng: np.random.Generator,
                 spec: ScalingSpec = TRUE_SCALING) -> np.ndarray:
    """
    One iteration, returning a new state vector.

    Draw order: the hyperedge, then susceptible members of that edge in
    ascending id, then every previously infected node in ascending id.
    Only the true scaling function drives the dynamics; ``spec`` must be
    the true variant.
    """
    if spec.kind != "true":
        raise ValueError("dynamics always use the true scaling function")
    members, sizes = g.packed()
    if len(members) == 0:
        raise SimulationError("hypergraph has no hyperedges")
    out = _as_states(states, g.n_nodes).copy()
    kern.iterate_literal(members, sizes, out, params.beta, params.mu, params.alpha,
                         params.k_gamma, rng)
    return out


def step(states, g: Hypergraph, params: DiseaseParams, rng: np.random.Generator,
         spec: ScalingSpec = TRUE_SCALING) -> np.ndarray:
    """Apply :func:`iterate_once` ``params.m`` times."""
    out = _as_states(states, g.n_nodes).copy()
    for _ in range(params.m):
        out = iterate_once(out, g, params, rng, spec)
    return out


# -- fast engine -----------------------------------------------------------

class Simulation:
    """
    A single stochastic run, advanced one time step at a time.

    Exits from I are drawn as geometric waiting times when a node is
    infected instead of one Bernoulli trial per iteration; the two are
    equal in distribution.

    Parameters
    ----------
    g : Hypergraph
    params : DiseaseParams
    states : array-like of int
        Initial compartments; copied.
    rng : numpy.random.Generator
    """

    def __init__(self, g: Hypergraph, params: DiseaseParams, states,
                 rng: np.random.Generator):
        self.states = _as_states(states, g.n_nodes).copy()
        self.rng = rng
        self.iteration = 0
        self.t = 0
        self._clock = np.empty(g.n_nodes, dtype=np.int64)
        self.set_hypergraph(g)
        self.params = params
        self._next_exit = kern.schedule_exits(self.states, self._clock, 0,
                                              params.mu, params.alpha, rng)

    def set_hypergraph(self, g: Hypergraph) -> None:
        if g.n_nodes != len(self.states):
            raise SimulationError("replacement hypergraph has a different node count")
        members, sizes = g.packed()
        if len(members) == 0:
            raise SimulationError("hypergraph has no hyperedges")
        self.g = g
        self._members, self._sizes = members, sizes

    def set_beta(self, beta: float) -> None:
        self.params = self.params.with_beta(beta)

    def step(self) -> None:
        p = self.params
        self.iteration, self._next_exit = kern.advance(
            self._members, self._sizes, self.states, self._clock,
            self.iteration, self._next_exit, p.m,
            p.beta, p.mu, p.alpha, p.k_gamma, self.rng)
        self.t += 1

    def counts(self) -> np.ndarray:
        return np.bincount(self.states, minlength=3)[:3]


# -- trajectories ----------------------------------------------------------

TRAJECTORY_COLUMNS = ("t", "S", "I", "R", "beta1", "xi", "xi_bar", "adjusted")


@dataclass
class Trajectory:
    """
    Per-step compartment counts plus optional controller records.

    ``beta1``, ``xi`` and ``xi_bar`` hold NaN where not applicable;
    ``adjusted`` is None for runs without a controller.
    """

    n_nodes: int
    t: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    beta1: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None
    xi_bar: Optional[np.ndarray] = None
    adjusted: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def infected_fraction(self) -> np.ndarray:
        return self.I / self.n_nodes

    def to_csv(self, path) -> None:
        n = len(self)

        def col(a):
            return a if a is not None else [None] * n

        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, (bool, np.bool_)):
                return "1" if v else "0"
            if isinstance(v, (float, np.floating)):
                return "" if np.isnan(v) else repr(float(v))
            return str(int(v))

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRAJECTORY_COLUMNS)
            for row in zip(self.t, self.S, self.I, self.R, col(self.beta1),
                           col(self.xi), col(self.xi_bar), col(self.adjusted)):
                w.writerow([fmt(v) for v in row])

    @classmethod
    def from_csv(cls, path, n_nodes: Optional[int] = None) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))

        def ints(key):
            return np.array([int(r[key]) for r in rows], dtype=np.int64)

        def floats(key):
            vals = [r[key] for r in rows]
            if all(v == "" for v in vals):
                return None
            return np.array([float(v) if v != "" else np.nan for v in vals])

        S_, I_, R_ = ints("S"), ints("I"), ints("R")
        adj = [r["adjusted"] for r in rows]
        adjusted = None if all(a == "" for a in adj) else np.array([a == "1" for a in adj])
        n = n_nodes if n_nodes is not None else int(S_[0] + I_[0] + R_[0])
        return cls(n, ints("t"), S_, I_, R_, floats("beta1"), floats("xi"),
                   floats("xi_bar"), adjusted)


class TrajectoryRecorder:
    """Accumulates per-step rows; trims to a :class:`Trajectory`."""

    def __init__(self, n_nodes: int, controller: bool = False):
        self.n_nodes = n_nodes
        self.rows = []
        self.controller = controller

    def record(self, t, counts, beta1=np.nan, xi=np.nan, xi_bar=np.nan, adjusted=False):
        self.rows.append((t, counts[0], counts[1], counts[2], beta1, xi, xi_bar, adjusted))

    def build(self, **meta) -> Trajectory:
        cols = list(zip(*self.rows))
        traj = Trajectory(
            self.n_nodes,
            np.array(cols[0], dtype=np.int64),
            np.array(cols[1], dtype=np.int64),
            np.array(cols[2], dtype=np.int64),
            np.array(cols[3], dtype=np.int64),
            meta=meta,
        )
        if self.controller:
            traj.beta1 = np.array(cols[4], dtype=float)
            traj.xi = np.array(cols[5], dtype=float)
            traj.xi_bar = np.array(cols[6], dtype=float)
            traj.adjusted = np.array(cols[7], dtype=bool)
        return traj


def initial_states(n_nodes: int, n_infected: int, seed) -> np.ndarray:
    """All susceptible except ``n_infected`` nodes chosen uniformly without replacement."""
    if not 0 <= n_infected <= n_nodes:
        raise ValueError(f"cannot infect {n_infected} of {n_nodes} nodes")
    rng = np.random.default_rng(seed)
    states = np.zeros(n_nodes, dtype=np.int8)
    states[rng.choice(n_nodes, size=n_infected, replace=False)] = kern.INFECTED
    return states


def run(g: Hypergraph, params: DiseaseParams, init, T: int, seed,
        spec: ScalingSpec = TRUE_SCALING, stop_when_extinct: bool = False) -> Trajectory:
    """
    Simulate ``T`` time steps from ``init``.

    Returns a trajectory of ``T + 1`` records (initial state included),
    or fewer when ``stop_when_extinct`` and I reaches zero.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if spec.kind != "true":
        raise ValueError("dynamics always use the true scaling function")
    sim = Simulation(g, params, init, np.random.default_rng(seed))
    rec = TrajectoryRecorder(g.n_nodes)
    rec.record(0, sim.counts())
    for _ in range(T):
        sim.step()
        counts = sim.counts()
        rec.record(sim.t, counts)
        if stop_when_extinct and counts[1] == 0:
            break
    return rec.build()
