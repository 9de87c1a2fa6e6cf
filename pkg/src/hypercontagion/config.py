"""
Run configuration: flat ``key = value`` text with dotted section prefixes.

Example::

    experiment = adaptive
    network.kind = er
    disease.k_gamma = 1

A ``[section]`` header prefixes the keys below it, so ``[disease]``
followed by ``beta = 0.05`` is the same as ``disease.beta = 0.05``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, Optional, Tuple


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> Tuple[float, ...]:
    vals = tuple(float(x) for x in s.replace(",", " ").split())
    if not vals:
        raise ValueError("empty list")
    return vals


@dataclass(frozen=True)
class Key:
    default: Any
    parse: Callable[[str], Any]
    check: Optional[Callable[[Any], bool]] = None
    hint: str = ""


def _choice(*opts):
    return Key(opts[0], str, lambda v: v in opts, "one of " + "|".join(opts))


def _prob(default):
    return Key(default, float, lambda v: 0.0 <= v <= 1.0, "a probability in [0, 1]")


def _int(default, lo=None):
    return Key(default, int, (lambda v: v >= lo) if lo is not None else None,
               f"an integer >= {lo}" if lo is not None else "an integer")


def _pos(default):
    return Key(default, float, lambda v: v > 0, "a positive number")


def _nonneg(default):
    return Key(default, float, lambda v: v >= 0, "a non-negative number")


SCHEMA: Dict[str, Key] = {
    "experiment": _choice("fig2", "switch", "adaptive", "misspec", "sweep", "fig1"),
    "seed": _int(0, 0),
    "threads": Key(0, int, lambda v: v >= 0, "an integer >= 0 (0 = all available CPUs)"),
    "out": Key("out", str),
    "network.kind": _choice("er", "lattice", "complete", "file"),
    "network.n": _int(500, 2),
    "network.p": _prob(0.1),
    "network.rows": _int(20, 3),
    "network.cols": _int(25, 3),
    "network.periodic": Key(True, _bool),
    "network.K": _int(4, 1),
    "network.path": Key("", str),
    "network.seed": Key(-1, int, lambda v: v >= -1, "an integer >= 0 (or -1 for the master seed)"),
    "disease.beta": _prob(0.05),
    "disease.mu": _prob(0.0001),
    "disease.alpha": _prob(0.0),
    "disease.k_gamma": _nonneg(1.0),
    "disease.m": _int(50, 1),
    "run.T": _int(700, 1),
    "run.replicates": Key(0, int, lambda v: v >= 0, "an integer >= 0 (0 = family default)"),
    "run.initial_infected": _int(5, 0),
    "run.mode": _choice("static", "adaptive"),
    "run.t_switch": Key(-1, int, lambda v: v >= -1, "an integer >= 0 (or -1 for T/2)"),
    "adaptive.tau": _int(5, 1),
    "adaptive.rho": _pos(0.5),
    "adaptive.scaling": _choice("true", "scale", "form"),
    "adaptive.scaling_param": _pos(1.0),
    "misspec.eta": Key((0.5, 0.8, 1.2, 1.5, 2.0), _floats, lambda v: all(x > 0 for x in v),
                       "positive numbers"),
    "misspec.n": Key((2.0, 3.0, 4.0, 5.0), _floats,
                     lambda v: all(x >= 1 and x == int(x) for x in v), "integers >= 1"),
    "sweep.n_beta": _int(10, 1),
    "sweep.n_mu": _int(10, 1),
    "sweep.beta_min": _prob(0.004),
    "sweep.beta_max": _prob(0.08),
    "sweep.mu_min": _prob(0.000025),
    "sweep.mu_max": _prob(0.0005),
    "sweep.replicates": _int(5, 1),
    "sweep.channel": _choice("removal", "recovery"),
    "sweep.k_gamma": _nonneg(3.0),
    "sweep.T": _int(700, 1),
    "ode.beta": _nonneg(0.0003),
    "ode.mu": _nonneg(0.075),
    "ode.alpha": _nonneg(0.006),
    "ode.N": _int(500, 1),
    "ode.I0": _nonneg(5.0),
    "ode.t_end": _nonneg(400.0),
    "ode.dt": _pos(0.02),
}


class RunConfig(dict):
    """Fully resolved configuration: every schema key present."""

    def section(self, name: str) -> Dict[str, Any]:
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in self.items() if k.startswith(prefix)}

    def to_json(self) -> Dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(self.items())}


def _convert(key: str, raw: str, where: str = "") -> Any:
    if key not in SCHEMA:
        raise ConfigError(f"{where}unknown key {key!r}")
    spec = SCHEMA[key]
    try:
        value = spec.parse(raw)
    except ValueError:
        raise ConfigError(f"{where}invalid value {raw!r} for {key!r}: expected {spec.hint or spec.parse.__name__}") from None
    if spec.check is not None and not spec.check(value):
        raise ConfigError(f"{where}value {raw!r} for {key!r} out of range: expected {spec.hint}")
    return value


def parse_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}: "
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            prefix = name + "." if name else ""
            continue
        if "=" not in line:
            raise ConfigError(f"{where}expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = prefix + key
        if key in values:
            raise ConfigError(f"{where}duplicate key {key!r}")
        values[key] = _convert(key, val, where)
    return values


def parse_config(path: Optional[str] = None, overrides: Iterable[str] = (),
                 env: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    Resolve a configuration from an optional file and ``key=value`` overrides.

    Overrides win over the file. ``HYPERCONTAGION_SEED`` supplies the seed
    when neither sets it.
    """
    env = os.environ if env is None else env
    values: Dict[str, Any] = {}
    if path is not None:
        with open(path) as fh:
            values.update(parse_text(fh.read(), path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, val = (s.strip() for s in item.split("=", 1))
        values[key] = _convert(key, val, "override: ")
    if "seed" not in values and env.get("HYPERCONTAGION_SEED"):
        values["seed"] = _convert("seed", env["HYPERCONTAGION_SEED"], "HYPERCONTAGION_SEED: ")
    cfg = RunConfig({k: s.default for k, s in SCHEMA.items()})
    cfg.update(values)
    return cfg
