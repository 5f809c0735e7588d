"""Experiment configuration in a line-oriented ``section.key = value`` format.

Example::

    experiment = timer
    realizations = 10
    spin.n_spins = 10
    task.taus = 5, 20
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .gaussian import GaussianConfig
from .spin import MAX_SPINS, OBSERVABLE_SETS, SpinConfig

EXPERIMENTS = ("timer", "classify", "ipc", "invariants")


class ConfigError(ValueError):
    """Invalid configuration text; the message names the offending line."""


def _int(v: str) -> int:
    return int(v)


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not finite")
    return x


def _bool(v: str) -> bool:
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _list(conv):
    def parse(v: str):
        items = [p.strip() for p in v.split(",") if p.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(p) for p in items)

    return parse


def _choice(*allowed):
    def parse(v: str):
        if v not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return v

    return parse


def _str(v: str) -> str:
    return v


SCHEMA = {
    "": {
        "experiment": _choice(*EXPERIMENTS),
        "realizations": _int,
        "base_seed": _int,
        "output_dir": _str,
    },
    "spin": {
        "n_spins": _int,
        "h": _float,
        "coupling_low": _float,
        "coupling_high": _float,
        "dt": _float,
        "multiplex_v": _int,
        "encoding": _choice("pure", "mixed"),
        "observable_sets": _list(_choice(*OBSERVABLE_SETS)),
    },
    "gaussian": {
        "n_osc": _int,
        "omega0": _float,
        "coupling_low": _float,
        "coupling_high": _float,
        "dt_candidates": _list(_float),
        "input_osc": _int,
    },
    "task": {
        "c": _int,
        "taus": _list(_int),
        "length": _int,
        "washout": _int,
        "class_counts": _list(_int),
        "phase_modes": _list(_choice("constant", "random")),
        "n_train": _int,
        "n_test": _int,
        "r_max": _float,
        "phi_max": _float,
        "d_max": _int,
        "delay_max": _int,
        "substrate": _choice("spin", "gaussian", "identity"),
        "suite": _choice("spin", "gaussian", "readout", "all"),
    },
    "training": {
        "ridge": _float,
        "eval_mode": _choice("train_window", "holdout"),
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    realizations: int = 1
    base_seed: int = 0
    output_dir: str = "results"
    spin: dict = field(default_factory=dict)
    gaussian: dict = field(default_factory=dict)
    task: dict = field(default_factory=dict)
    training: dict = field(default_factory=dict)

    def spin_config(self, seed: int, observable_set: str = "XYZ_ZZ") -> SpinConfig:
        s = self.spin
        return SpinConfig(
            n_spins=s["n_spins"],
            field_h=s["h"],
            coupling_low=s["coupling_low"],
            coupling_high=s["coupling_high"],
            dt=s["dt"],
            multiplex_v=s["multiplex_v"],
            encoding=s["encoding"],
            observable_set=observable_set,
            seed=seed,
        )

    def gaussian_config(self, seed: int, dt: float) -> GaussianConfig:
        g = self.gaussian
        return GaussianConfig(
            n_osc=g["n_osc"],
            omega0=g["omega0"],
            coupling_low=g["coupling_low"],
            coupling_high=g["coupling_high"],
            dt=dt,
            input_osc=g["input_osc"],
            seed=seed,
        )

    def resolved_lines(self) -> list[str]:
        """Every setting, defaults included, in the input format."""
        out = [
            f"experiment = {self.experiment}",
            f"realizations = {self.realizations}",
            f"base_seed = {self.base_seed}",
            f"output_dir = {self.output_dir}",
        ]
        for section in ("spin", "gaussian", "task", "training"):
            for key, value in sorted(getattr(self, section).items()):
                if isinstance(value, tuple):
                    value = ", ".join(str(v) for v in value)
                out.append(f"{section}.{key} = {value}")
        return out


# published defaults: spin network of the timer task, oscillator network of the classifier
DEFAULTS = {
    "spin": dict(
        n_spins=10, h=10.0, coupling_low=-0.5, coupling_high=0.5, dt=10.0,
        multiplex_v=1, encoding="pure", observable_sets=("Z", "XYZ", "XYZ_ZZ"),
    ),
    "gaussian": dict(
        n_osc=4, omega0=0.25, coupling_low=0.0, coupling_high=0.2,
        dt_candidates=(1.0, 2.0, 5.0, 10.0, 20.0, 50.0), input_osc=0,
    ),
    "training": dict(ridge=0.0, eval_mode="train_window"),
}

TASK_DEFAULTS = {
    "timer": dict(c=500, taus=(5, 20), length=800, washout=400),
    "classify": dict(
        class_counts=(2, 3, 4, 5), phase_modes=("constant", "random"),
        n_train=500, n_test=200, r_max=2.0, phi_max=math.pi / 4,
    ),
    "ipc": dict(length=5000, washout=500, d_max=3, delay_max=20, substrate="spin"),
    "invariants": dict(suite="all"),
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text, filling defaults."""
    values: dict[str, dict] = {k: {} for k in SCHEMA}
    lines: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        section, _, name = key.rpartition(".")
        if section not in SCHEMA or name not in SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if (section, name) in lines:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if not value:
            raise ConfigError(f"line {lineno}: {key}: value required")
        try:
            values[section][name] = SCHEMA[section][name](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
        lines[(section, name)] = lineno

    top = values[""]
    if "experiment" not in top:
        raise ConfigError("experiment: required")
    exp = top["experiment"]

    def where(section, name):
        n = lines.get((section, name))
        prefix = f"{section}.{name}" if section else name
        return f"line {n}: {prefix}" if n else prefix

    unused = set(values["task"]) - set(TASK_DEFAULTS[exp])
    if unused:
        name = sorted(unused, key=lambda k: lines[("task", k)])[0]
        raise ConfigError(f"{where('task', name)}: not used by experiment '{exp}'")

    cfg = ExperimentConfig(
        experiment=exp,
        realizations=top.get("realizations", 1),
        base_seed=top.get("base_seed", 0),
        output_dir=top.get("output_dir", "results"),
        spin={**DEFAULTS["spin"], **values["spin"]},
        gaussian={**DEFAULTS["gaussian"], **values["gaussian"]},
        task={**TASK_DEFAULTS[exp], **values["task"]},
        training={**DEFAULTS["training"], **values["training"]},
    )
    _validate(cfg, where)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _validate(cfg: ExperimentConfig, where) -> None:
    def fail(section, name, msg):
        raise ConfigError(f"{where(section, name)}: {msg}")

    if cfg.realizations < 1:
        fail("", "realizations", "must be >= 1")
    s, g, t = cfg.spin, cfg.gaussian, cfg.task
    if s["n_spins"] > MAX_SPINS:
        fail("spin", "n_spins", f"exceeds hard cap {MAX_SPINS}")
    if s["n_spins"] < 2:
        fail("spin", "n_spins", "must be >= 2")
    if s["dt"] <= 0:
        fail("spin", "dt", "must be positive")
    if s["multiplex_v"] < 1:
        fail("spin", "multiplex_v", "must be >= 1")
    if not s["coupling_low"] <= s["coupling_high"]:
        fail("spin", "coupling_high", "must not be below coupling_low")
    if g["n_osc"] < 2:
        fail("gaussian", "n_osc", "must be >= 2")
    if g["omega0"] <= 0:
        fail("gaussian", "omega0", "must be positive")
    if not 0 <= g["coupling_low"] <= g["coupling_high"]:
        fail("gaussian", "coupling_high", "need 0 <= coupling_low <= coupling_high")
    if any(dt < 0 for dt in g["dt_candidates"]):
        fail("gaussian", "dt_candidates", "must be non-negative")
    if not 0 <= g["input_osc"] < g["n_osc"]:
        fail("gaussian", "input_osc", "out of range")
    if cfg.training["ridge"] < 0:
        fail("training", "ridge", "must be non-negative")

    if cfg.experiment == "timer":
        if not 0 <= t["washout"] < t["length"]:
            fail("task", "washout", "must satisfy 0 <= washout < length")
        for tau in t["taus"]:
            if tau < 0 or t["c"] + tau >= t["length"]:
                fail("task", "taus", f"tau={tau} needs 0 <= tau and c + tau < length")
        if cfg.training["eval_mode"] == "holdout" and t["length"] - t["washout"] < 4:
            fail("training", "eval_mode", "holdout needs at least 4 post-washout steps")
    elif cfg.experiment == "classify":
        if any(n < 2 for n in t["class_counts"]):
            fail("task", "class_counts", "each class count must be >= 2")
        if t["n_train"] < 1 or t["n_test"] < 1:
            fail("task", "n_train", "dataset sizes must be positive")
        if t["r_max"] <= 0:
            fail("task", "r_max", "must be positive")
    elif cfg.experiment == "ipc":
        if t["d_max"] < 1:
            fail("task", "d_max", "must be >= 1")
        if t["delay_max"] < 1:
            fail("task", "delay_max", "must be >= 1")
        if t["washout"] < t["delay_max"] - 1:
            fail("task", "washout", "must cover delay_max")
        if t["length"] <= t["washout"]:
            fail("task", "length", "must exceed washout")


def replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(cfg, **changes)
