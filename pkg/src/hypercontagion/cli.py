"""Command-line entry point."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import shutil
import sys
import tempfile
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import hypergraph as hg
from .activity import combinatorial_activity
from .adaptive import AdaptiveConfig, paired_run
from .config import ConfigError, RunConfig, parse_config
from .contagion import DiseaseParams, ScalingSpec, initial_states, run
from .experiments import (NetworkSpec, SweepGrid, experiment_adaptive,
                          experiment_control_switch, experiment_ode_validation,
                          experiment_sir_sweep,
                          experiment_static_normalization)
from .reference import OdeParams, integrate

log = logging.getLogger("hypercontagion")

SUBCOMMANDS = ("generate", "simulate", "paired", "experiment", "ode", "activity")


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _network(cfg: RunConfig) -> NetworkSpec:
    n = cfg.section("network")
    return NetworkSpec(kind=n["kind"], n=n["n"], p=n["p"], rows=n["rows"], cols=n["cols"],
                       periodic=n["periodic"], K=n["K"],
                       seed=None if n["seed"] < 0 else n["seed"],
                       path=n["path"] or None)


def _disease(cfg: RunConfig) -> DiseaseParams:
    d = cfg.section("disease")
    return DiseaseParams(d["beta"], d["mu"], d["alpha"], d["k_gamma"], d["m"])


def _scaling(cfg: RunConfig) -> ScalingSpec:
    kind = cfg["adaptive.scaling"]
    return ScalingSpec(kind, cfg["adaptive.scaling_param"] if kind != "true" else 1.0)


def _threads(cfg: RunConfig) -> int:
    return cfg["threads"] or os.cpu_count() or 1


def _replicates(cfg: RunConfig):
    return cfg["run.replicates"] or None


# -- subcommands -----------------------------------------------------------
# each writes into ``out`` (a staging directory) and returns an optional
# machine-readable string for stdout

def cmd_generate(cfg, out):
    gK, _ = _network(cfg).build(cfg["seed"])
    hg.save(gK, os.path.join(out, "hypergraph.txt"))
    log.info("generated %r", gK)


def cmd_simulate(cfg, out):
    gK, _ = _network(cfg).build(cfg["seed"])
    seq = np.random.SeedSequence(cfg["seed"])
    init = initial_states(gK.n_nodes, cfg["run.initial_infected"],
                          np.random.SeedSequence(cfg["seed"], spawn_key=(0, 0, 2)))
    traj = run(gK, _disease(cfg), init, cfg["run.T"], seq)
    traj.to_csv(os.path.join(out, "trajectory.csv"))


def cmd_paired(cfg, out):
    gK, g1 = _network(cfg).build(cfg["seed"])
    adaptive = None
    if cfg["run.mode"] == "adaptive":
        adaptive = AdaptiveConfig(cfg["adaptive.tau"], cfg["adaptive.rho"], _scaling(cfg))
    init = initial_states(gK.n_nodes, cfg["run.initial_infected"],
                          np.random.SeedSequence(cfg["seed"], spawn_key=(0, 0, 2)))
    res = paired_run(gK, g1, _disease(cfg), adaptive, init, cfg["run.T"],
                     np.random.SeedSequence(cfg["seed"], spawn_key=(0, 0)),
                     stop_when_extinct=_disease(cfg).alpha > 0)
    res.trajectory_1.to_csv(os.path.join(out, "pairwise.csv"))
    res.trajectory_K.to_csv(os.path.join(out, "higher.csv"))
    with open(os.path.join(out, "events.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "t", "beta1_before", "beta1_after", "xi", "xi_bar"])
        for ev in res.events:
            w.writerow([0, ev["t"]] + [repr(float(ev[k])) for k in
                                       ("beta1_before", "beta1_after", "xi", "xi_bar")])


def cmd_experiment(cfg, out):
    name = cfg["experiment"]
    seed, threads = cfg["seed"], _threads(cfg)
    net = _network(cfg)
    common = dict(seed=seed, threads=threads, T=cfg["run.T"], params=_disease(cfg),
                  n_infected=cfg["run.initial_infected"])
    if name == "fig2":
        res = experiment_static_normalization(net, _replicates(cfg), **common)
        res.write(out)
    elif name == "switch":
        t_switch = cfg["run.t_switch"] if cfg["run.t_switch"] >= 0 else None
        res = experiment_control_switch(net, t_switch, _replicates(cfg), **common)
        res.write(out)
    elif name == "adaptive":
        res = experiment_adaptive(net, _scaling(cfg), _replicates(cfg),
                                  tau=cfg["adaptive.tau"], rho=cfg["adaptive.rho"], **common)
        res.write(out)
    elif name == "misspec":
        specs = ([ScalingSpec.scale(e) for e in cfg["misspec.eta"]]
                 + [ScalingSpec.form(int(n)) for n in cfg["misspec.n"]])
        summary = {}
        for spec in specs:
            log.info("misspecification %s", spec)
            res = experiment_adaptive(net, spec, _replicates(cfg), tau=cfg["adaptive.tau"],
                                      rho=cfg["adaptive.rho"], **common)
            tag = f"{spec.kind}_{spec.param:g}"
            res.write(os.path.join(out, tag))
            summary[tag] = res.metrics()["rmse"]
        with open(os.path.join(out, "misspec_rmse.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif name == "fig1":
        o = cfg.section("ode")
        ode = OdeParams(o["beta"], o["mu"], o["alpha"], o["N"])
        cmp = experiment_ode_validation(ode, _replicates(cfg) or 20, seed, cfg["run.T"],
                                        cfg["disease.m"], cfg["run.initial_infected"], threads)
        with open(os.path.join(out, "ode_comparison.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "ode", "mean", "q05", "q95"])
            for row in zip(cmp.t, cmp.ode_fraction, cmp.band.mean, cmp.band.q05, cmp.band.q95):
                w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])
        with open(os.path.join(out, "metrics.json"), "w") as fh:
            json.dump({"sup_distance": cmp.sup_distance, "coverage": cmp.coverage}, fh,
                      indent=2, sort_keys=True)
            fh.write("\n")
    elif name == "sweep":
        s = cfg.section("sweep")
        grid = SweepGrid.logspaced(
            s["n_beta"], s["n_mu"], (s["beta_min"], s["beta_max"]), (s["mu_min"], s["mu_max"]),
            replicates=s["replicates"], K=net.K, k_gamma=s["k_gamma"], m=cfg["disease.m"],
            T=s["T"], channel=s["channel"], n_infected=cfg["run.initial_infected"],
            tau=cfg["adaptive.tau"], rho=cfg["adaptive.rho"])
        res = experiment_sir_sweep(grid, seed, net, threads)
        res.write(out)


def cmd_ode(cfg, out):
    o = cfg.section("ode")
    params = OdeParams(o["beta"], o["mu"], o["alpha"], o["N"])
    series = integrate(params, (o["N"] - o["I0"], o["I0"], 0.0), o["t_end"], o["dt"])
    with open(os.path.join(out, "ode.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "S", "I", "R"])
        for row in zip(series.t, series.S, series.I, series.R):
            w.writerow([repr(float(v)) for v in row])


def cmd_activity(cfg, out):
    gK, _ = _network(cfg).build(cfg["seed"])
    d = _disease(cfg)
    report = combinatorial_activity(gK, d.beta, d.k_gamma, gK.max_order).to_dict()
    text = json.dumps(report, sort_keys=True)
    with open(os.path.join(out, "activity.json"), "w") as fh:
        fh.write(text + "\n")
    return text


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "paired": cmd_paired,
    "experiment": cmd_experiment,
    "ode": cmd_ode,
    "activity": cmd_activity,
}


def dispatch(subcommand: str, cfg: RunConfig) -> int:
    """Run ``subcommand``; outputs appear in ``cfg['out']`` only if it succeeds."""
    out = cfg["out"]
    parent = os.path.dirname(os.path.abspath(out))
    os.makedirs(parent, exist_ok=True)
    staging = tempfile.mkdtemp(prefix=".staging-", dir=parent)
    try:
        stdout_text = COMMANDS[subcommand](cfg, staging)
        with open(os.path.join(staging, "manifest.json"), "w") as fh:
            json.dump({"subcommand": subcommand, "version": _version(), "seed": cfg["seed"],
                       "config": cfg.to_json()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.makedirs(out, exist_ok=True)
        for name in sorted(os.listdir(staging)):
            dest = os.path.join(out, name)
            if os.path.isdir(dest):
                shutil.rmtree(dest)
            os.replace(os.path.join(staging, name), dest)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    if stdout_text:
        print(stdout_text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypercontagion",
        description="Edge-based SIS/SIR contagion on hypergraphs.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a configuration key (repeatable)")
    parser.add_argument("--seed", type=int, help="master seed (falls back to HYPERCONTAGION_SEED)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker processes for replicates")
    parser.add_argument("--experiment", help="experiment family for the 'experiment' subcommand")
    parser.add_argument("--hypergraph", help="read the network from a hypergraph file")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    overrides = list(args.overrides)
    for key, val in (("seed", args.seed), ("out", args.out), ("threads", args.threads),
                     ("experiment", args.experiment)):
        if val is not None:
            overrides.append(f"{key}={val}")
    if args.hypergraph:
        overrides += ["network.kind=file", f"network.path={args.hypergraph}"]
    try:
        cfg = parse_config(args.config, overrides)
        return dispatch(args.subcommand, cfg)
    except (ConfigError, hg.HypergraphError, ValueError) as exc:
        print(f"hypercontagion: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hypercontagion: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
