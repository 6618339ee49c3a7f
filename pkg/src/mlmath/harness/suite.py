"""Run a pack of configs and check the cross-domain ordering."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .config import ConfigError, load_config, parse_flat
from .hierarchy import HierarchyReport, check_order, hierarchy_report
from .runner import ExperimentReport, run_experiment, write_report

PACK_FILE = "pack.cfg"


@dataclass
class SuiteResult:
    reports: list
    hierarchy: HierarchyReport | None
    hierarchy_failures: list

    @property
    def failed(self) -> list[str]:
        return [r.name for r in self.reports if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failed and not self.hierarchy_failures


def pack_dir(pack: str) -> Path:
    """A pack name shipped with the package, or a directory path."""
    p = Path(pack)
    if p.is_dir():
        return p
    shipped = Path(str(resources.files("mlmath") / "configs" / pack))
    if shipped.is_dir():
        return shipped
    raise FileNotFoundError(f"no pack named or located at {pack!r}")


def pack_configs(pack: str):
    d = pack_dir(pack)
    return [load_config(p) for p in sorted(d.glob("*.cfg")) if p.name != PACK_FILE]


def pack_expectations(pack: str):
    """-> (list of (higher, lower) domain pairs, domain expected last or None)."""
    f = pack_dir(pack) / PACK_FILE
    if not f.exists():
        return [], None
    values, lines, errors = parse_flat(f.read_text(encoding="utf-8"))
    above = []
    for item in str(values.get("hierarchy.above", "")).split(","):
        item = item.strip()
        if not item:
            continue
        hi, sep, lo = item.partition(">")
        if not sep:
            errors.append(f"line {lines['hierarchy.above']}: expected 'domain > domain', got {item!r}")
            continue
        above.append((hi.strip(), lo.strip()))
    unknown = sorted(set(values) - {"hierarchy.above", "hierarchy.last"})
    errors += [f"line {lines[k]}: unknown key {k!r}" for k in unknown]
    if errors:
        raise ConfigError(errors)
    return above, values.get("hierarchy.last")


def run_suite(pack: str = "default", out_dir=None, only=None, log=print) -> SuiteResult:
    configs = pack_configs(pack)
    if only:
        missing = sorted(set(only) - {c.name for c in configs})
        if missing:
            raise ConfigError([f"no config named {m!r} in pack {pack!r}" for m in missing])
        configs = [c for c in configs if c.name in only]
    reports: list[ExperimentReport] = []
    for cfg in configs:
        target = Path(out_dir) / f"{cfg.name}.json" if out_dir else None
        rep = run_experiment(cfg, target)
        reports.append(rep)
        if log:
            log(summary_line(rep))
    hier, fails = None, []
    ranked = [r for r in reports if r.data["config"].get("hierarchy", True) and not r.data["acceptance"].get("smoke")]
    if len({r.data["config"]["domain"] for r in ranked}) >= 2:
        hier = hierarchy_report(reports)
        if not only:
            above, last = pack_expectations(pack)
            fails = check_order(hier, above, last)
        if out_dir:
            out = Path(out_dir)
            (out / "hierarchy.json").write_text(hier.to_json(), encoding="utf-8")
            (out / "hierarchy.txt").write_text(hier.to_text(), encoding="utf-8")
            (out / "hierarchy.csv").write_text(hier.to_csv(), encoding="utf-8")
    return SuiteResult(reports, hier, fails)


def summary_line(rep: ExperimentReport) -> str:
    acc = rep.data["acceptance"]
    status = "PASS" if rep.passed else "FAIL"
    if acc.get("smoke"):
        status = "SMOKE"
    t = rep.data["timing"]["duration_seconds"]
    return f"{status:<6}{rep.name:<36}precision={rep.precision:.4f}  phi={rep.phi:.4f}  ({t:.1f}s)"
