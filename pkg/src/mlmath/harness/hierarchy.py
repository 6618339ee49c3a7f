"""Cross-domain difficulty table: best phi per domain tag, in descending order."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .runner import ExperimentReport


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True)
class TaskRow:
    name: str
    task: str
    domain: str
    learner: str
    precision: float
    phi: float
    size: int


@dataclass(frozen=True)
class DomainRow:
    domain: str
    best: TaskRow
    tasks: tuple


@dataclass(frozen=True)
class HierarchyReport:
    rows: tuple          # DomainRow, best phi first

    @property
    def order(self) -> list[str]:
        return [r.domain for r in self.rows]

    def rank(self, domain: str) -> int:
        return self.order.index(domain)

    def as_dict(self) -> dict:
        return {"ordering": "descending best phi per domain",
                "domains": [{"rank": i + 1, "domain": r.domain, "best_task": r.best.name,
                             "precision": r.best.precision, "phi": r.best.phi,
                             "tasks": [t.__dict__ for t in r.tasks]}
                            for i, r in enumerate(self.rows)]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"{'rank':<5}{'domain':<28}{'best task':<34}{'precision':>10}{'phi':>9}"]
        for i, r in enumerate(self.rows, start=1):
            lines.append(f"{i:<5}{r.domain:<28}{r.best.name:<34}{r.best.precision:>10.3f}{r.best.phi:>9.3f}")
            for t in r.tasks:
                if t is not r.best:
                    lines.append(f"{'':<5}{'':<28}{'  ' + t.name:<34}{t.precision:>10.3f}{t.phi:>9.3f}")
        sizes = ", ".join(f"{t.name}={t.size}" for r in self.rows for t in r.tasks)
        lines.append(f"evaluation-set sizes: {sizes}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "domain", "task", "learner", "precision", "phi", "size", "best"])
        for i, r in enumerate(self.rows, start=1):
            for t in r.tasks:
                w.writerow([i, r.domain, t.name, t.learner, f"{t.precision:.6f}", f"{t.phi:.6f}",
                            t.size, int(t is r.best)])
        return buf.getvalue()


def _row(rep: ExperimentReport) -> TaskRow:
    cfg = rep.data["config"]
    res = rep.data["result"]
    size = res.get("validation_size")
    if size is None:
        size = sum(d["size"] for d in rep.data["dataset"] if d["role"] in ("all", "test"))
    return TaskRow(cfg["name"], cfg["task"], cfg["domain"], cfg["learner"]["kind"],
                   float(res["precision"]), float(res["phi"]), int(size))


def hierarchy_report(reports) -> HierarchyReport:
    """Group reports by domain tag and rank domains by their best phi.

    Reports whose config sets ``hierarchy = false`` and smoke runs (conditional
    thresholds skipped for lack of external data) are left out.
    Ties in phi are broken by precision, then by domain name.
    """
    rows = [_row(r) for r in reports
            if r.data["config"].get("hierarchy", True) and not r.data["acceptance"].get("smoke")]
    if not rows:
        raise HierarchyError("no reports to rank")
    by_domain: dict[str, list[TaskRow]] = {}
    for t in rows:
        by_domain.setdefault(t.domain, []).append(t)
    if len(by_domain) < 2:
        raise HierarchyError(f"need reports from at least two domains, got {sorted(by_domain)}")
    out = []
    for dom, ts in by_domain.items():
        ts = sorted(ts, key=lambda t: (-t.phi, -t.precision, t.name))
        out.append(DomainRow(dom, ts[0], tuple(ts)))
    out.sort(key=lambda r: (-r.best.phi, -r.best.precision, r.domain))
    return HierarchyReport(tuple(out))


def check_order(h: HierarchyReport, above: list[tuple[str, str]], last: str | None) -> list[str]:
    """Failures of the expected ordering constraints (empty list if all hold)."""
    fails = []
    order = h.order
    for hi, lo in above:
        for d in (hi, lo):
            if d not in order:
                fails.append(f"domain {d!r} missing from the hierarchy")
        if hi in order and lo in order and order.index(hi) >= order.index(lo):
            fails.append(f"{hi} is not ranked above {lo}")
    if last is not None:
        if last not in order:
            fails.append(f"domain {last!r} missing from the hierarchy")
        elif order[-1] != last:
            fails.append(f"{last} is not last (last is {order[-1]})")
    return fails
