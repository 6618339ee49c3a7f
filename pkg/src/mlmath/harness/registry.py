"""Task registry: generator id -> parameter defaults, domain tag and builder."""
from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from ..gen import algebra, arith, geometry, graphs, su3


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class TaskDef:
    name: str
    domain: str
    defaults: dict
    build: Callable          # (params, seed) -> LabeledDataset or (train, test)
    fixed_split: bool = False
    checks: Callable | None = None
    help: str = ""

    def resolve(self, params: dict) -> dict:
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            raise RegistryError(f"unknown parameter(s) for {self.name}: {', '.join(unknown)}")
        return {**self.defaults, **params}

    def check(self, params: dict) -> None:
        p = self.resolve(params)
        if self.checks is not None:
            msg = self.checks(p)
            if msg:
                raise RegistryError(f"{self.name}: {msg}")

    def __call__(self, params: dict, seed: int):
        self.check(params)
        return self.build(self.resolve(params), seed)


def shipped_data(name: str) -> str:
    return str(resources.files("mlmath") / "data" / name)


def data_path(param: str, env: str, sample: str) -> tuple[str, str]:
    """-> (path, origin); explicit parameter, then environment variable, then the shipped sample."""
    if param:
        return param, "parameter"
    if os.environ.get(env):
        return os.environ[env], f"${env}"
    return shipped_data(sample), "shipped sample"


def _positive(*keys):
    def check(p):
        bad = [k for k in keys if p[k] < 1]
        return f"{', '.join(bad)} must be positive" if bad else None
    return check


def _quadratic(p, seed):
    return geometry.gen_quadratic_multiplicity(p["count"], p["bound"], seed, p["rare_class"])


def _quadratic_real(p, seed):
    return geometry.gen_quadratic_real_roots(p["count"], p["bound"], seed, p["rare_class"])


def _cicy(p, seed):
    path, origin = data_path(p["path"], "MLMATH_CICY_PATH", "cicy_sample.txt")
    configs = geometry.load_cicy(path)
    ds = geometry.gen_cicy_hodge_task(configs, p["copies"], seed)
    return ds.replace(meta={**ds.meta, "source": origin, "source_file": os.path.basename(path)})


def _modp_variable(p, seed):
    primes = [q for q in range(3, p["p_max"] + 1) if arith.prime_sieve(max(3, p["p_max"])).delta(q)]
    return arith.gen_modp_variable_task(primes, (p["n_lo"], p["n_hi"]), seed, p["base"], p["per_p"])


def _curves(p, seed):
    path, origin = data_path(p["path"], "MLMATH_CURVES_PATH", "curves_sample.csv")
    curves = arith.load_curve_labels(path)
    ds = arith.gen_curve_task(curves, p["property"], p["N"], seed, p["max_rank"], p["min_class"],
                              p["balance"])
    return ds.replace(meta={**ds.meta, "source": origin, "source_file": os.path.basename(path)})


def _window(p):
    return arith.WindowSpec(p["w"], p["k"], p["i_max"])


def _graph(prop):
    def build(p, seed):
        return graphs.gen_graph_property_task(prop, p["count"], (p["v_min"], p["v_max"]), seed,
                                              p["copies"])
    return build


def _graph_check(p):
    if not 4 <= p["v_min"] <= p["v_max"] <= graphs.HAMILTON_MAX_V:
        return f"need 4 <= v_min <= v_max <= {graphs.HAMILTON_MAX_V}"
    if p["count"] < 2 or p["copies"] < 0:
        return "count must be at least 2 and copies non-negative"
    return None


_GRAPH_DEFAULTS = {"count": 2000, "v_min": 6, "v_max": 14, "copies": 1}

TASKS: dict[str, TaskDef] = {}


def _register(t: TaskDef):
    TASKS[t.name] = t


_register(TaskDef("quadratic-multiplicity", "algebraic-geometry",
                  {"count": 1_000_000, "bound": 10, "rare_class": "enumerate"}, _quadratic,
                  checks=_positive("count", "bound"),
                  help="Gaussian-integer quadratics -> one or two distinct roots"))
_register(TaskDef("quadratic-real-roots", "algebraic-geometry",
                  {"count": 1_000_000, "bound": 10, "rare_class": "enumerate"}, _quadratic_real,
                  checks=_positive("count", "bound"),
                  help="integer quadratics -> number of distinct real roots"))
_register(TaskDef("cicy-h11", "algebraic-geometry", {"path": "", "copies": 10}, _cicy,
                  help="CICY configuration matrices -> h11 (file from task.path or $MLMATH_CICY_PATH)"))
_register(TaskDef("parity", "algebra", {"count": 100_000},
                  lambda p, s: geometry.gen_parity_functions(p["count"], s),
                  checks=_positive("count"), help="(x, y, -x, +-y) -> even or odd function"))
_register(TaskDef("group-vs-latin", "algebra", {"per_class": 5000, "pool_size": 100},
                  lambda p, s: algebra.gen_group_vs_latin_task(p["per_class"], s, 12, p["pool_size"]),
                  checks=_positive("per_class", "pool_size"),
                  help="order-12 Cayley tables against non-group Latin squares"))
_register(TaskDef("simple-groups", "algebra", {"per_class": 5000, "max_order": 70},
                  lambda p, s: algebra.gen_simple_group_task(p["per_class"], s, p["max_order"]),
                  checks=lambda p: None if p["per_class"] >= 1 and 5 <= p["max_order"] <= 70
                  else "need per_class >= 1 and 5 <= max_order <= 70",
                  help="padded Cayley tables -> simple or not"))
_register(TaskDef("simple-groups-extrapolation", "algebra",
                  {"per_class": 5000, "test_copies": 50, "split_order": 60},
                  lambda p, s: algebra.gen_simple_group_extrapolation(p["per_class"], p["test_copies"], s,
                                                                      p["split_order"]),
                  fixed_split=True, checks=_positive("per_class", "test_copies"),
                  help="train on small orders, test on larger ones"))
_register(TaskDef("su3-terms", "algebra", {"max_label": 10, "bound": 8, "balance": False},
                  lambda p, s: su3.gen_su3_task(p["max_label"], s, p["bound"], p["balance"]),
                  checks=lambda p: None if p["max_label"] >= 2 and p["bound"] >= 0
                  else "need max_label >= 2 and bound >= 0",
                  help="SU(3) weight pairs -> number of irreducible summands"))
for _prop in graphs.PROPERTIES:
    _register(TaskDef(f"graph-{_prop}", "combinatorics", dict(_GRAPH_DEFAULTS), _graph(_prop),
                      checks=_graph_check, help=f"adjacency matrices -> {_prop}"))
_register(TaskDef("prime-window", "elementary-number-theory",
                  {"w": 100, "k": 10_000, "i_max": 50_000, "per_class": 9000},
                  lambda p, s: arith.gen_prime_window_task(_window(p), s, p["per_class"]),
                  checks=_positive("w", "k", "i_max", "per_class"),
                  help="windows of the prime indicator on odd numbers -> a later value"))
_register(TaskDef("liouville-window", "analytic-number-theory",
                  {"w": 100, "k": 10_000, "i_max": 50_000, "per_class": 9000},
                  lambda p, s: arith.gen_liouville_task(_window(p), s, p["per_class"]),
                  checks=_positive("w", "k", "i_max", "per_class"),
                  help="windows of the Liouville function on odd numbers -> a later value"))
_register(TaskDef("modp-fixed", "elementary-number-theory",
                  {"p": 2, "n_lo": 0, "n_hi": 65536, "base": 2, "count": 0},
                  lambda p, s: arith.gen_modp_fixed_task(p["p"], (p["n_lo"], p["n_hi"]), p["base"], s,
                                                         p["count"] or None),
                  checks=lambda p: None if p["p"] >= 2 and p["base"] >= 2 and 0 <= p["n_lo"] < p["n_hi"]
                  and p["count"] >= 0 else "need p >= 2, base >= 2, 0 <= n_lo < n_hi, count >= 0",
                  help="binary digits of n -> n mod p"))
_register(TaskDef("modp-variable", "elementary-number-theory",
                  {"p_max": 53, "n_lo": 0, "n_hi": 65536, "base": 2, "per_p": 2000}, _modp_variable,
                  checks=lambda p: None if p["p_max"] >= 5 and p["base"] >= 2 and 0 <= p["n_lo"] < p["n_hi"]
                  and p["per_p"] >= 2 else "need p_max >= 5, base >= 2, 0 <= n_lo < n_hi, per_p >= 2",
                  help="digits of (n, p) -> p divides n"))
_register(TaskDef("curves", "arithmetic-geometry",
                  {"path": "", "property": "torsion", "N": 100, "max_rank": 2, "min_class": 1,
                   "balance": True}, _curves,
                  checks=lambda p: None if p["property"] in ("rank", "torsion", "integer_points")
                  and p["N"] >= 1 else "property must be rank, torsion or integer_points and N >= 1",
                  help="a_p vectors -> rank, torsion order or integer points "
                       "(labels from task.path or $MLMATH_CURVES_PATH)"))
