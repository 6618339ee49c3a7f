"""Flat ``key = value`` experiment configs."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..learners import DEFAULTS, COMMON, KINDS, LearnerError, LearnerSpec
from .registry import TASKS, RegistryError


class ConfigError(ValueError):
    """Carries every problem found, each prefixed with its line number."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


_INT = re.compile(r"^[+-]?\d+$")
_FLOAT = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def parse_value(text: str):
    """Booleans, integers, decimals, comma lists of numbers, else a string."""
    t = text.strip()
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    if _INT.match(t):
        return int(t)
    if _FLOAT.match(t):
        return float(t)
    if "," in t:
        parts = [p.strip() for p in t.split(",")]
        if parts and all(_INT.match(p) or _FLOAT.match(p) for p in parts):
            return tuple(parse_value(p) for p in parts)
    return t


def parse_flat(text: str) -> tuple[dict, dict, list[str]]:
    """-> (values, line numbers, errors).  ``#`` starts a comment."""
    values, lines, errors = {}, {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            errors.append(f"line {lineno}: bad key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r} (first on line {lines[key]})")
            continue
        if val == "":
            errors.append(f"line {lineno}: {key} has no value")
            continue
        values[key] = parse_value(val)
        lines[key] = lineno
    return values, lines, errors


ACCEPTANCE_KEYS = ("precision_min", "precision_max", "phi_min", "phi_max", "abs_phi_max", "max_seconds")
TOP_KEYS = ("name", "task", "learner", "protocol", "seed", "domain", "output", "hierarchy",
            "description", "conditional_env")
PROTOCOLS = ("holdout", "kfold", "fixed")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    task: str
    task_params: dict
    learner: LearnerSpec
    protocol: str = "holdout"
    train_fraction: float = 0.8
    k: int = 5
    seed: int = 0
    domain: str = ""
    output: str = ""
    hierarchy: bool = True
    description: str = ""
    conditional_env: str = ""
    acceptance: dict = field(default_factory=dict)
    source: str = ""

    def as_dict(self) -> dict:
        proto = {"kind": self.protocol}
        if self.protocol == "holdout":
            proto["train_fraction"] = self.train_fraction
        elif self.protocol == "kfold":
            proto["k"] = self.k
        return {
            "name": self.name,
            "task": self.task,
            "task_params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.task_params.items()},
            "learner": self.learner.as_dict(),
            "protocol": proto,
            "seed": self.seed,
            "domain": self.domain,
            "hierarchy": self.hierarchy,
            "conditional_env": self.conditional_env,
            "acceptance": dict(self.acceptance),
        }


def _type_ok(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, tuple):
        return isinstance(value, (tuple, int))
    return isinstance(value, str)


def _type_name(default) -> str:
    return {bool: "a boolean", int: "an integer", float: "a number", tuple: "a list",
            str: "a string"}[type(default)]


def parse_config(text: str, source: str = "") -> ExperimentConfig:
    values, lines, errors = parse_flat(text)

    def err(key, msg):
        errors.append(f"line {lines[key]}: {msg}" if key in lines else msg)

    for key in ("name", "task", "learner", "seed"):
        if key not in values:
            err(key, f"missing required key {key!r}")

    task = values.get("task")
    tdef = None
    if task is not None:
        try:
            tdef = TASKS[task] if isinstance(task, str) else None
        except KeyError:
            tdef = None
        if tdef is None:
            err("task", f"unknown task {task!r} (known: {', '.join(sorted(TASKS))})")

    kind = values.get("learner")
    if kind is not None and kind not in KINDS:
        err("learner", f"unknown learner kind {kind!r} for key 'learner' (known: {', '.join(KINDS)})")
        kind = None

    protocol = values.get("protocol", "holdout")
    if protocol not in PROTOCOLS:
        err("protocol", f"protocol must be one of {', '.join(PROTOCOLS)}, got {protocol!r}")

    task_params, learner_params, acceptance = {}, {}, {}
    train_fraction, k = 0.8, 5
    for key, val in values.items():
        if key in TOP_KEYS:
            continue
        head, _, rest = key.partition(".")
        if head == "task" and rest:
            if tdef is None:
                continue
            if rest not in tdef.defaults:
                err(key, f"unknown parameter {key!r} for task {task!r} "
                         f"(known: {', '.join(sorted(tdef.defaults)) or 'none'})")
            elif not _type_ok(tdef.defaults[rest], val):
                err(key, f"{key} must be {_type_name(tdef.defaults[rest])}, got {val!r}")
            else:
                task_params[rest] = float(val) if isinstance(tdef.defaults[rest], float) else val
        elif head == "learner" and rest:
            if kind is None:
                continue
            if rest not in {**COMMON, **DEFAULTS[kind]}:
                err(key, f"unknown parameter {key!r} for learner {kind!r}")
                continue
            try:
                LearnerSpec(kind, {rest: val})
            except LearnerError as e:
                err(key, f"{key}: {e}")
                continue
            learner_params[rest] = val
        elif head == "protocol" and rest == "train_fraction":
            if not isinstance(val, (int, float)) or isinstance(val, bool) or not 0 < val < 1:
                err(key, f"protocol.train_fraction must be in (0, 1), got {val!r}")
            else:
                train_fraction = float(val)
        elif head == "protocol" and rest == "k":
            if not isinstance(val, int) or isinstance(val, bool) or val < 2:
                err(key, f"protocol.k must be an integer >= 2, got {val!r}")
            else:
                k = val
        elif head == "acceptance" and rest in ACCEPTANCE_KEYS:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                err(key, f"{key} must be a number, got {val!r}")
            else:
                acceptance[rest] = float(val)
        else:
            err(key, f"unknown key {key!r}")

    seed = values.get("seed", 0)
    if "seed" in values and (not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**63):
        err("seed", f"seed must be a non-negative integer, got {seed!r}")
    for key in ("name", "domain", "output", "description", "conditional_env"):
        if key in values and not isinstance(values[key], str):
            err(key, f"{key} must be a string, got {values[key]!r}")
    hierarchy = values.get("hierarchy", True)
    if not isinstance(hierarchy, bool):
        err("hierarchy", f"hierarchy must be true or false, got {hierarchy!r}")
    if tdef is not None and protocol in PROTOCOLS:
        if tdef.fixed_split and protocol != "fixed":
            err("protocol", f"task {task!r} has a fixed train/test split; use protocol = fixed")
        if not tdef.fixed_split and protocol == "fixed":
            err("protocol", f"task {task!r} has no fixed split; use holdout or kfold")
    if tdef is not None and not errors:
        try:
            tdef.check(task_params)
        except RegistryError as e:
            err("task", str(e))
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        name=values["name"], task=task, task_params=task_params,
        learner=LearnerSpec(kind, learner_params, seed), protocol=protocol,
        train_fraction=train_fraction, k=k, seed=seed, domain=values.get("domain", tdef.domain),
        output=values.get("output", ""), hierarchy=hierarchy,
        description=values.get("description", ""), conditional_env=values.get("conditional_env", ""),
        acceptance=acceptance, source=source,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
