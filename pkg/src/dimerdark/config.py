"""Run configuration: YAML in, validated and fully resolved dataclass out.

Canonical layout (all keys optional except ``command`` and ``dimer`` where the
command needs one)::

    command: evolve
    master_seed: 0
    threads: 1
    output: out/
    bath: {temperature: 300, cutoff_energy: 10, refractive_index: 1, coupling_constant: null}
    lambda_override: null
    include_self_dipole: false
    dimer:
      monomer1: {energy: 2.65, mu: [10, 0, 0], ground: [0, 0, 0], excited: [30, 0, 0]}
      monomer2: {energy: 2.65, mu: [10, 0, 0], ground: [0, 0, 0], excited: [-30, 0, 0]}
      coupling: {q00: 0, q11: 0, q22: 0, q01: 0, q02: 0, q12: 0.15}
    evolve: {initial: [0, 0, 1], t_min_s: 1.0e-12, t_max_s: 10, points: 200}
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import yaml

from .bath import BathSpec
from .errors import ConfigError
from .model import CouplingMatrix, DimerConfig, DipoleSet, Monomer, coupling_constant

COMMANDS = ("spectrum", "rates", "evolve", "scan-dark", "ensemble", "polaron")
NEEDS_DIMER = ("spectrum", "rates", "evolve", "polaron")

DEFAULTS = {
    "master_seed": 0,
    "threads": 1,
    "output": "out",
    "lambda_override": None,
    "include_self_dipole": False,
    "bath": {"temperature": 300.0, "cutoff_energy": 10.0, "refractive_index": 1.0, "coupling_constant": None},
    "threshold": 1e-6,
}

BLOCK_DEFAULTS = {
    "spectrum": {"case": "auto"},
    "rates": {"case": "auto"},
    "evolve": {"case": "auto", "initial": [0.0, 0.0, 1.0], "t_min_s": 1e-12, "t_max_s": 10.0, "points": 200},
    "polaron": {"case": "auto", "second_term_at_shifted": False, "full": True},
    "scan-dark": {
        "epsilon": 2.5,
        "mu1": [2.0, 0.0, 0.0],
        "mu2": [-2.0, 0.0, 0.0],
        "delta_dir1": [1.0, 0.0, 0.0],
        "delta_dir2": [-1.0, 0.0, 0.0],
        "q01": {"min": -0.2, "max": 0.2, "steps": 80},
        "delta": {"min": 0.0, "max": 300.0, "steps": 61},
        "q02_values": [0.0, 0.05, 0.1],
    },
    "ensemble": {
        "epsilon": 2.4,
        "mu": 10.0,
        "splitting": 0.15,
        "sigma": 0.025,
        "samples": 1000,
        "perturb_couplings": False,
        "ratio": {"min": 0.0, "max": 1.5, "steps": 31},
        "delta": [0.0, 25.0, 50.0, 75.0, 100.0],
    },
}

MONOMER_KEYS = {"energy", "mu", "ground", "excited"}
COUPLING_KEYS = {"q00", "q11", "q22", "q01", "q02", "q12"}


@dataclass
class RunConfig:
    command: str
    raw: dict = field(repr=False)

    @property
    def master_seed(self) -> int:
        return self.raw["master_seed"]

    @property
    def threads(self) -> int:
        return self.raw["threads"]

    @property
    def output(self) -> str:
        return self.raw["output"]

    @property
    def threshold(self) -> float:
        return self.raw["threshold"]

    @property
    def block(self) -> dict:
        return self.raw.get(self.command, {})

    def bath(self) -> BathSpec:
        b = self.raw["bath"]
        s = b["coupling_constant"]
        if s is None:
            s = coupling_constant(b["refractive_index"], b["cutoff_energy"])
        return BathSpec(s, b["cutoff_energy"], b["temperature"])

    def dimer(self) -> DimerConfig:
        d = self.raw.get("dimer")
        if d is None:
            raise ConfigError(f"command {self.command!r} needs a dimer block", key="dimer")
        b = self.raw["bath"]

        def monomer(m):
            return Monomer(m["energy"], DipoleSet(m["mu"], m["ground"], m["excited"]))

        return DimerConfig(
            monomer(d["monomer1"]),
            monomer(d["monomer2"]),
            CouplingMatrix(**d["coupling"]),
            include_self_dipole=self.raw["include_self_dipole"],
            cutoff_energy=b["cutoff_energy"],
            coupling_constant=b["coupling_constant"],
            refractive_index=b["refractive_index"],
            lambda_override=self.raw["lambda_override"],
        )

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True, default_flow_style=None)


def _merge(defaults: dict, given: dict, path: str) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if k not in defaults:
            raise ConfigError(f"unknown key {path}{k}", key=f"{path}{k}")
        if isinstance(defaults[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{path}{k} must be a mapping", key=f"{path}{k}")
            out[k] = _merge(defaults[k], v, f"{path}{k}.")
        else:
            out[k] = v
    return out


def _number(value, key, *, positive=False, nonneg=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key} must be a finite number, got {value!r}", key=key)
    if positive and value <= 0:
        raise ConfigError(f"{key} must be positive, got {value}", key=key)
    if nonneg and value < 0:
        raise ConfigError(f"{key} must be non-negative, got {value}", key=key)
    return float(value)


def _integer(value, key, lo, hi=None):
    if isinstance(value, bool) or not isinstance(value, int) or value < lo or (hi is not None and value > hi):
        raise ConfigError(f"{key} must be an integer in [{lo}, {hi if hi is not None else 'inf'}]", key=key)
    return value


def _vector(value, key):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{key} must be a list of 3 numbers (Debye)", key=key)
    return [_number(x, f"{key}[{i}]") for i, x in enumerate(value)]


def _axis(value, key, steps_min=1):
    for k in ("min", "max", "steps"):
        if k not in value:
            raise ConfigError(f"missing required key {key}.{k}", key=f"{key}.{k}")
    lo = _number(value["min"], f"{key}.min")
    hi = _number(value["max"], f"{key}.max")
    steps = _integer(value["steps"], f"{key}.steps", steps_min)
    if steps > 1 and hi <= lo:
        raise ConfigError(f"{key}.max must exceed {key}.min", key=f"{key}.max")
    return {"min": lo, "max": hi, "steps": steps}


def _ascending(values, key):
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError(f"{key} must be a non-empty list", key=key)
    vals = [_number(v, f"{key}[{i}]") for i, v in enumerate(values)]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(f"{key} must be strictly increasing", key=key)
    return vals


def _dimer(d: dict) -> dict:
    if not isinstance(d, dict):
        raise ConfigError("dimer must be a mapping", key="dimer")
    out = {}
    for name in ("monomer1", "monomer2"):
        if name not in d:
            raise ConfigError(f"missing required key dimer.{name}", key=f"dimer.{name}")
        m = d[name]
        if not isinstance(m, dict):
            raise ConfigError(f"dimer.{name} must be a mapping", key=f"dimer.{name}")
        extra = set(m) - MONOMER_KEYS
        if extra:
            k = sorted(extra)[0]
            raise ConfigError(f"unknown key dimer.{name}.{k}", key=f"dimer.{name}.{k}")
        if "energy" not in m:
            raise ConfigError(f"missing required key dimer.{name}.energy", key=f"dimer.{name}.energy")
        zero = [0.0, 0.0, 0.0]
        out[name] = {
            "energy": _number(m["energy"], f"dimer.{name}.energy", positive=True),
            "mu": _vector(m.get("mu", zero), f"dimer.{name}.mu"),
            "ground": _vector(m.get("ground", zero), f"dimer.{name}.ground"),
            "excited": _vector(m.get("excited", zero), f"dimer.{name}.excited"),
        }
    extra = set(d) - {"monomer1", "monomer2", "coupling"}
    if extra:
        k = sorted(extra)[0]
        raise ConfigError(f"unknown key dimer.{k}", key=f"dimer.{k}")
    c = d.get("coupling", {}) or {}
    extra = set(c) - COUPLING_KEYS
    if extra:
        k = sorted(extra)[0]
        raise ConfigError(f"unknown key dimer.coupling.{k}", key=f"dimer.coupling.{k}")
    out["coupling"] = {k: _number(c.get(k, 0.0), f"dimer.coupling.{k}") for k in sorted(COUPLING_KEYS)}
    return out


def _validate_block(cmd: str, b: dict) -> dict:
    p = f"{cmd}."
    if "case" in b and b["case"] not in ("auto", "a", "b", "c", "numeric"):
        raise ConfigError(f"{p}case must be one of auto, a, b, c, numeric", key=f"{p}case")
    if cmd == "evolve":
        init = b["initial"]
        if not isinstance(init, (list, tuple)) or len(init) != 3:
            raise ConfigError(f"{p}initial must list 3 populations", key=f"{p}initial")
        b["initial"] = [_number(x, f"{p}initial[{i}]", nonneg=True) for i, x in enumerate(init)]
        if abs(sum(b["initial"]) - 1) > 1e-12:
            raise ConfigError(f"{p}initial must sum to 1", key=f"{p}initial")
        b["t_min_s"] = _number(b["t_min_s"], f"{p}t_min_s", positive=True)
        b["t_max_s"] = _number(b["t_max_s"], f"{p}t_max_s", positive=True)
        if b["t_max_s"] <= b["t_min_s"]:
            raise ConfigError(f"{p}t_max_s must exceed t_min_s", key=f"{p}t_max_s")
        b["points"] = _integer(b["points"], f"{p}points", 2)
    elif cmd == "scan-dark":
        b["epsilon"] = _number(b["epsilon"], f"{p}epsilon", positive=True)
        for k in ("mu1", "mu2", "delta_dir1", "delta_dir2"):
            b[k] = _vector(b[k], f"{p}{k}")
        b["q01"] = _axis(b["q01"], f"{p}q01")
        b["delta"] = _axis(b["delta"], f"{p}delta")
        b["q02_values"] = _ascending(b["q02_values"], f"{p}q02_values")
    elif cmd == "ensemble":
        b["epsilon"] = _number(b["epsilon"], f"{p}epsilon", positive=True)
        b["mu"] = _number(b["mu"], f"{p}mu")
        b["splitting"] = _number(b["splitting"], f"{p}splitting", positive=True)
        b["sigma"] = _number(b["sigma"], f"{p}sigma", nonneg=True)
        b["samples"] = _integer(b["samples"], f"{p}samples", 1)
        if not isinstance(b["perturb_couplings"], bool):
            raise ConfigError(f"{p}perturb_couplings must be true or false", key=f"{p}perturb_couplings")
        b["ratio"] = _axis(b["ratio"], f"{p}ratio")
        if b["ratio"]["min"] < 0:
            raise ConfigError(f"{p}ratio.min must be non-negative", key=f"{p}ratio.min")
        b["delta"] = _ascending(b["delta"], f"{p}delta")
    elif cmd == "polaron":
        for k in ("second_term_at_shifted", "full"):
            if not isinstance(b[k], bool):
                raise ConfigError(f"{p}{k} must be true or false", key=f"{p}{k}")
    return b


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    cmd = data.get("command")
    if cmd is None:
        raise ConfigError("missing required key command", key="command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}", key="command")
    for other in COMMANDS:
        if other != cmd and other in data:
            raise ConfigError(f"block {other!r} does not match command {cmd!r}", key=other)

    allowed = dict(DEFAULTS, command=cmd, dimer=None, **{cmd: BLOCK_DEFAULTS[cmd]})
    given = {k: v for k, v in data.items() if k not in ("dimer",)}
    raw = _merge(allowed, given, "")
    if "dimer" in data:
        raw["dimer"] = _dimer(data["dimer"])
    elif cmd in NEEDS_DIMER:
        raise ConfigError(f"missing required key dimer (command {cmd})", key="dimer")
    else:
        del raw["dimer"]

    raw["master_seed"] = _integer(raw["master_seed"], "master_seed", 0, 2**64 - 1)
    raw["threads"] = _integer(raw["threads"], "threads", 1)
    if not isinstance(raw["output"], str) or not raw["output"]:
        raise ConfigError("output must be a directory path", key="output")
    raw["threshold"] = _number(raw["threshold"], "threshold", positive=True)
    raw["lambda_override"] = _number(raw["lambda_override"], "lambda_override", nonneg=True, allow_none=True)
    if not isinstance(raw["include_self_dipole"], bool):
        raise ConfigError("include_self_dipole must be true or false", key="include_self_dipole")
    b = raw["bath"]
    b["temperature"] = _number(b["temperature"], "bath.temperature", nonneg=True)
    b["cutoff_energy"] = _number(b["cutoff_energy"], "bath.cutoff_energy", positive=True)
    b["refractive_index"] = _number(b["refractive_index"], "bath.refractive_index", positive=True)
    b["coupling_constant"] = _number(b["coupling_constant"], "bath.coupling_constant", nonneg=True, allow_none=True)
    raw[cmd] = _validate_block(cmd, raw[cmd])
    return RunConfig(cmd, raw)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
