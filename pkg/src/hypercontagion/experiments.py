"""
Replicated paired experiments and their summary statistics.

Every experiment draws its network once from the master seed and then
runs independent replicates on it; replicate ``r`` of cell ``c`` is
seeded by ``(seed, c, r)`` so results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .adaptive import AdaptiveConfig, PairedRunResult, paired_run
from .contagion import (TRUE_SCALING, DiseaseParams, ScalingSpec, Trajectory,
                        initial_states, run)
from .hypergraph import (Hypergraph, clique_complex, generate_complete, generate_er,
                         generate_triangular_lattice, load)
from .reference import OdeParams, abm_params_from_ode, integrate

log = logging.getLogger(__name__)

SIS_PARAMS = DiseaseParams(beta=0.05, mu=0.0001, alpha=0.0, k_gamma=1.0, m=50)
SIS_HORIZON = 700
ENDEMIC_WINDOW = 100


@dataclass(frozen=True)
class NetworkSpec:
    """Recipe for the pairwise graph and the order-K clique complex built from it."""

    kind: str = "er"
    n: int = 500
    p: float = 0.1
    rows: int = 20
    cols: int = 25
    periodic: bool = True
    K: int = 4
    seed: Optional[int] = None
    path: Optional[str] = None

    def build(self, seed=None) -> Tuple[Hypergraph, Hypergraph]:
        """Return ``(gK, g1)``."""
        if self.kind == "er":
            g1 = generate_er(self.n, self.p, self.seed if self.seed is not None else seed)
        elif self.kind == "lattice":
            g1 = generate_triangular_lattice(self.rows, self.cols, self.periodic)
        elif self.kind == "complete":
            g1 = generate_complete(self.n)
        elif self.kind == "file":
            loaded = load(self.path)
            return loaded, loaded.restrict(1)
        else:
            raise ValueError(f"unknown network kind {self.kind!r}")
        return clique_complex(g1, self.K), g1


LATTICE = NetworkSpec(kind="lattice", K=2)
ER = NetworkSpec(kind="er", n=500, p=0.1, K=4)
DEFAULT_REPLICATES = {"lattice": 50, "er": 10}


def _network(network: Union[str, NetworkSpec]) -> NetworkSpec:
    if isinstance(network, NetworkSpec):
        return network
    try:
        return {"lattice": LATTICE, "er": ER}[network]
    except KeyError:
        raise ValueError(f"unknown network {network!r}; expected 'lattice' or 'er'") from None


def _seq(seed, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=key)


# -- statistics --------------------------------------------------------------

@dataclass(frozen=True)
class SummaryStats:
    peak_time: int
    peak_proportion: float
    final_proportion: float


def summarize(traj: Trajectory, mode: Optional[str] = None) -> SummaryStats:
    """
    Peak time, peak infected proportion and final proportion.

    ``final_proportion`` is the terminal R/N for SIR runs and the mean I/N
    over the last 100 steps for SIS runs. ``mode`` defaults to SIR when
    any node is ever removed.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if mode is None:
        mode = "sir" if traj.R.max() > traj.R[0] else "sis"
    i = int(np.argmax(traj.I))
    frac = traj.I / traj.n_nodes
    if mode == "sir":
        final = traj.R[-1] / traj.n_nodes
    else:
        final = float(frac[-ENDEMIC_WINDOW:].mean())
    return SummaryStats(int(traj.t[i]), float(frac[i]), float(final))


def stack(trajs: Sequence[Trajectory], length: Optional[int] = None) -> np.ndarray:
    """Infected fractions as a (replicates, steps) array, padding short runs with their last value."""
    length = length or max(len(t) for t in trajs)
    out = np.empty((len(trajs), length))
    for row, tr in zip(out, trajs):
        x = tr.infected_fraction
        row[:len(x)] = x[:length]
        row[len(x):] = x[-1]
    return out


@dataclass
class Band:
    mean: np.ndarray
    q05: np.ndarray
    q95: np.ndarray


def ensemble_band(curves: np.ndarray) -> Band:
    q05, q95 = np.quantile(curves, [0.05, 0.95], axis=0)
    mean = curves.mean(axis=0)
    # the interpolated quantiles can miss the mean by rounding on flat stretches
    return Band(mean, np.minimum(q05, mean), np.maximum(q95, mean))


def endemic_level(curve: np.ndarray, window: int = ENDEMIC_WINDOW) -> float:
    return float(np.mean(curve[-window:]))


def half_endemic_time(curve: np.ndarray, window: int = ENDEMIC_WINDOW) -> int:
    """First step at which ``curve`` reaches half its endemic level."""
    half = endemic_level(curve, window) / 2
    hits = np.flatnonzero(curve >= half)
    return int(hits[0]) if len(hits) else len(curve)


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


# -- running -----------------------------------------------------------------

def _pmap(fn, tasks: list, threads: int = 1) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _replicate(gK, g1, params, adaptive, n_infected, T, seed, cell, r,
               beta1=None, switch_at=None, stop_when_extinct=False):
    init = initial_states(g1.n_nodes, n_infected, _seq(seed, cell, r, 2))
    return paired_run(gK, g1, params, adaptive, init, T, _seq(seed, cell, r),
                      beta1=beta1, switch_at=switch_at, stop_when_extinct=stop_when_extinct)


@dataclass
class ExperimentResult:
    """Replicate set of paired runs plus the resolved configuration."""

    name: str
    runs: List[PairedRunResult]
    config: dict = field(default_factory=dict)

    def curves(self, system: str) -> np.ndarray:
        attr = "trajectory_1" if system == "pairwise" else "trajectory_K"
        return stack([getattr(r, attr) for r in self.runs])

    def band(self, system: str) -> Band:
        return ensemble_band(self.curves(system))

    def metrics(self) -> dict:
        m1, mK = self.band("pairwise").mean, self.band("higher").mean
        counts = [len(r.adjustment_times) for r in self.runs]
        times = [t for r in self.runs for t in r.adjustment_times]
        return {
            "rmse": rmse(m1, mK),
            "endemic_pairwise": endemic_level(m1),
            "endemic_higher": endemic_level(mK),
            "half_time_pairwise": half_endemic_time(m1),
            "half_time_higher": half_endemic_time(mK),
            "adjustment_counts": counts,
            "median_adjustments": float(np.median(counts)) if counts else 0.0,
            "adjustment_times": times,
        }

    def write(self, outdir) -> List[str]:
        """Write per-run, ensemble and event CSVs plus metrics; returns the paths written."""
        os.makedirs(os.path.join(outdir, "runs"), exist_ok=True)
        written = []
        index_path = os.path.join(outdir, "runs.csv")
        with open(index_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate", "system", "file", "beta1_initial"])
            for r, res in enumerate(self.runs):
                for system, tr in (("pairwise", res.trajectory_1), ("higher", res.trajectory_K)):
                    rel = os.path.join("runs", f"rep{r:03d}_{system}.csv")
                    tr.to_csv(os.path.join(outdir, rel))
                    written.append(os.path.join(outdir, rel))
                    w.writerow([r, system, rel, repr(res.beta1_initial)])
        written.append(index_path)
        for system in ("pairwise", "higher"):
            b = self.band(system)
            path = os.path.join(outdir, f"ensemble_{system}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t", "mean", "q05", "q95"])
                for t, row in enumerate(zip(b.mean, b.q05, b.q95)):
                    w.writerow([t] + [repr(float(v)) for v in row])
            written.append(path)
        path = os.path.join(outdir, "events.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate", "t", "beta1_before", "beta1_after", "xi", "xi_bar"])
            for r, res in enumerate(self.runs):
                for ev in res.events:
                    w.writerow([r, ev["t"]] + [repr(float(ev[k])) for k in
                                               ("beta1_before", "beta1_after", "xi", "xi_bar")])
        written.append(path)
        path = os.path.join(outdir, "metrics.json")
        with open(path, "w") as fh:
            json.dump(self.metrics(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
        return written


def _resolve(network, replicates):
    net = _network(network)
    if replicates is None:
        replicates = DEFAULT_REPLICATES.get(net.kind, 10)
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    return net, replicates


def _config(name, net, replicates, seed, T, params, n_infected, **extra) -> dict:
    cfg = dict(experiment=name, network=asdict(net), replicates=replicates, seed=seed,
               T=T, params=asdict(params), initial_infected=n_infected)
    cfg.update(extra)
    return cfg


def experiment_static_normalization(network="lattice", replicates: Optional[int] = None,
                                    seed: int = 0, T: int = SIS_HORIZON,
                                    params: DiseaseParams = SIS_PARAMS,
                                    n_infected: int = 5, threads: int = 1) -> ExperimentResult:
    """Paired SIS runs with the pairwise infection probability fixed by combinatorial activities."""
    net, replicates = _resolve(network, replicates)
    gK, g1 = net.build(seed)
    tasks = [(gK, g1, params, None, n_infected, T, seed, 0, r) for r in range(replicates)]
    runs = _pmap(_replicate, tasks, threads)
    return ExperimentResult("static", runs,
                            _config("static", net, replicates, seed, T, params, n_infected))


def experiment_control_switch(network="lattice", t_switch: Optional[int] = None,
                              replicates: Optional[int] = None, seed: int = 0,
                              T: int = SIS_HORIZON, params: DiseaseParams = SIS_PARAMS,
                              n_infected: int = 5, threads: int = 1) -> ExperimentResult:
    """
    Unnormalised control: the pairwise system uses the same infection
    probability and is moved onto the full hypergraph at ``t_switch``.
    """
    net, replicates = _resolve(network, replicates)
    if t_switch is None:
        t_switch = T // 2
    if not 0 <= t_switch <= T:
        raise ValueError(f"t_switch must lie in [0, {T}], got {t_switch}")
    gK, g1 = net.build(seed)
    switch = t_switch if t_switch < T else None
    tasks = [(gK, g1, params, None, n_infected, T, seed, 0, r, params.beta, switch)
             for r in range(replicates)]
    runs = _pmap(_replicate, tasks, threads)
    return ExperimentResult("switch", runs, _config("switch", net, replicates, seed, T, params,
                                                    n_infected, t_switch=t_switch))


def experiment_adaptive(network="er", misspec: ScalingSpec = TRUE_SCALING,
                        replicates: Optional[int] = None, seed: int = 0,
                        T: int = SIS_HORIZON, params: DiseaseParams = SIS_PARAMS,
                        tau: int = 5, rho: float = 0.5, n_infected: int = 5,
                        threads: int = 1) -> ExperimentResult:
    """
    Paired SIS runs with the adaptive pairwise infection probability.

    ``misspec`` only enters the activity ratio; both systems always evolve
    under the true scaling function.
    """
    net, replicates = _resolve(network, replicates)
    gK, g1 = net.build(seed)
    cfg = AdaptiveConfig(tau=tau, rho=rho, spec_for_xi=misspec)
    tasks = [(gK, g1, params, cfg, n_infected, T, seed, 0, r) for r in range(replicates)]
    runs = _pmap(_replicate, tasks, threads)
    return ExperimentResult("adaptive", runs, _config(
        "adaptive", net, replicates, seed, T, params, n_infected,
        adaptive=dict(tau=tau, rho=rho, misspec=str(misspec))))


@dataclass
class OdeComparison:
    """Complete-graph replicates against the homogeneous-mixing solution."""

    t: np.ndarray
    ode_fraction: np.ndarray
    runs: List[Trajectory]
    band: Band

    @property
    def sup_distance(self) -> float:
        return float(np.max(np.abs(self.band.mean - self.ode_fraction)))

    @property
    def coverage(self) -> float:
        inside = (self.ode_fraction >= self.band.q05) & (self.ode_fraction <= self.band.q95)
        return float(np.mean(inside))


def _complete_run(g, params, n_infected, T, seed, r):
    init = initial_states(g.n_nodes, n_infected, _seq(seed, 0, r, 2))
    return run(g, params, init, T, _seq(seed, 0, r))


def experiment_ode_validation(ode: Optional[OdeParams] = None, replicates: int = 20,
                              seed: int = 0, T: int = 400, m: int = 50,
                              n_infected: int = 5, threads: int = 1) -> OdeComparison:
    """ABM replicates on the complete graph with converted ODE rates, next to the RK4 solution."""
    N = 500
    ode = ode or OdeParams(0.0003, 0.5 * N * 0.0003, 0.04 * N * 0.0003, N)
    params = abm_params_from_ode(ode, m)
    g = generate_complete(ode.N)
    runs = _pmap(_complete_run, [(g, params, n_infected, T, seed, r)
                                 for r in range(replicates)], threads)
    series = integrate(ode, (ode.N - n_infected, n_infected, 0.0), T, 1.0 / m)
    t = np.arange(T + 1)
    ode_frac = np.interp(t, series.t, series.I) / ode.N
    return OdeComparison(t, ode_frac, runs, ensemble_band(stack(runs, T + 1)))


# -- SIR phase sweep ---------------------------------------------------------

SWEEP_STATS = ("peak_time", "peak_proportion", "final_proportion")


@dataclass(frozen=True)
class SweepGrid:
    """
    Axes of the SIR sweep.

    ``channel`` says how each ``mu`` value is used: ``"removal"`` runs it
    as the I -> R probability with no recovery, ``"recovery"`` as I -> S.
    """

    beta_values: Tuple[float, ...]
    mu_values: Tuple[float, ...]
    replicates: int = 5
    K: int = 4
    k_gamma: float = 3.0
    m: int = 50
    T: int = SIS_HORIZON
    channel: str = "removal"
    n_infected: int = 5
    tau: int = 5
    rho: float = 0.5

    def __post_init__(self):
        if not self.beta_values or not self.mu_values:
            raise ValueError("sweep axes must be non-empty")
        for v in tuple(self.beta_values) + tuple(self.mu_values):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"sweep value {v} outside [0, 1]")
        if self.channel not in ("removal", "recovery"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    @classmethod
    def logspaced(cls, n_beta: int = 10, n_mu: int = 10, beta_range=(0.004, 0.08),
                  mu_range=(0.000025, 0.0005), **kw) -> "SweepGrid":
        return cls(tuple(float(x) for x in np.geomspace(*beta_range, n_beta)),
                   tuple(float(x) for x in np.geomspace(*mu_range, n_mu)), **kw)

    def params(self, beta: float, mu: float) -> DiseaseParams:
        if self.channel == "removal":
            return DiseaseParams(beta, 0.0, mu, self.k_gamma, self.m)
        return DiseaseParams(beta, mu, 0.0, self.k_gamma, self.m)


@dataclass
class SweepResult:
    grid: SweepGrid
    # tables[stat][system] has shape (len(beta_values), len(mu_values))
    tables: Dict[str, Dict[str, np.ndarray]]
    adjustment_counts: np.ndarray

    def supercritical(self, system: str, threshold: float = 0.05) -> np.ndarray:
        return self.tables["final_proportion"][system] > threshold

    def write(self, outdir) -> List[str]:
        os.makedirs(outdir, exist_ok=True)
        written = []
        for stat in SWEEP_STATS:
            path = os.path.join(outdir, f"phase_{stat}.csv")
            t1, tK = self.tables[stat]["pairwise"], self.tables[stat]["higher"]
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["beta", "mu", "stat_K1", "stat_KK"])
                for i, b in enumerate(self.grid.beta_values):
                    for j, mu in enumerate(self.grid.mu_values):
                        w.writerow([repr(b), repr(mu), repr(float(t1[i, j])), repr(float(tK[i, j]))])
            written.append(path)
        return written


def _sweep_cell(gK, g1, grid: SweepGrid, seed, cell, i, j):
    params = grid.params(grid.beta_values[i], grid.mu_values[j])
    cfg = AdaptiveConfig(tau=grid.tau, rho=grid.rho)
    mode = "sir" if grid.channel == "removal" else "sis"
    stats = {"pairwise": [], "higher": []}
    n_adj = 0
    for r in range(grid.replicates):
        res = _replicate(gK, g1, params, cfg, grid.n_infected, grid.T, seed, cell, r,
                         stop_when_extinct=(mode == "sir"))
        stats["pairwise"].append(summarize(res.trajectory_1, mode))
        stats["higher"].append(summarize(res.trajectory_K, mode))
        n_adj += len(res.adjustment_times)
    return {system: {s: float(np.mean([getattr(x, s) for x in v])) for s in SWEEP_STATS}
            for system, v in stats.items()}, n_adj / grid.replicates


def experiment_sir_sweep(grid: SweepGrid, seed: int = 0,
                         network: Optional[NetworkSpec] = None,
                         threads: int = 1) -> SweepResult:
    """Adaptive paired runs over a (beta, mu) grid; cell values average the replicates."""
    net = network or NetworkSpec(kind="er", n=500, p=0.1, K=grid.K)
    gK, g1 = net.build(seed)
    nb, nm = len(grid.beta_values), len(grid.mu_values)
    tasks = [(gK, g1, grid, seed, i * nm + j, i, j) for i in range(nb) for j in range(nm)]
    results = _pmap(_sweep_cell, tasks, threads)
    tables = {s: {sys_: np.empty((nb, nm)) for sys_ in ("pairwise", "higher")}
              for s in SWEEP_STATS}
    adj = np.empty((nb, nm))
    for (_, _, _, _, _, i, j), (cell, n_adj) in zip(tasks, results):
        for system, vals in cell.items():
            for s in SWEEP_STATS:
                tables[s][system][i, j] = vals[s]
        adj[i, j] = n_adj
    return SweepResult(grid, tables, adj)


def boundary_mismatch(a: np.ndarray, b: np.ndarray) -> int:
    """
    Largest distance, in grid cells along the beta axis, between the
    supercritical boundaries of two boolean phase maps (per mu column).
    """
    worst = 0
    for j in range(a.shape[1]):
        def first(col):
            hits = np.flatnonzero(col)
            return int(hits[0]) if len(hits) else len(col)
        worst = max(worst, abs(first(a[:, j]) - first(b[:, j])))
    return worst
