"""Command line: ``mlmath gen | run | suite | report hierarchy | catalog dump``.

Exit codes: 0 success, 1 usage or config error, 2 acceptance failure,
3 data or ingestion error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..dataset import DatasetError, write_csv
from .config import ConfigError, load_config, parse_value
from .hierarchy import HierarchyError, hierarchy_report
from .registry import TASKS, RegistryError
from .runner import StageError, load_report, run_experiment
from .suite import run_suite, summary_line

EXIT_OK, EXIT_USAGE, EXIT_ACCEPTANCE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = parse_value(val)
    return out


def cmd_gen(args) -> int:
    if args.task == "list":
        for name in sorted(TASKS):
            t = TASKS[name]
            defaults = " ".join(f"{k}={v}" for k, v in t.defaults.items())
            print(f"{name:<30}{t.domain:<26}{t.help}")
            print(f"{'':<30}defaults: {defaults or '-'}")
        return EXIT_OK
    if args.out is None:
        raise UsageError("gen needs --out")
    if args.task not in TASKS:
        raise UsageError(f"unknown task {args.task!r} (known: {', '.join(sorted(TASKS))})")
    tdef = TASKS[args.task]
    params = _parse_params(args.param)
    try:
        tdef.check(params)
    except RegistryError as e:
        raise UsageError(str(e)) from None
    built = tdef(params, args.seed)
    out = Path(args.out)
    if tdef.fixed_split:
        train, test = built
        write_csv(train, out.with_name(out.stem + "-train" + out.suffix))
        write_csv(test, out.with_name(out.stem + "-test" + out.suffix))
        print(f"wrote {len(train)} train and {len(test)} test examples next to {out}")
    else:
        write_csv(built, out)
        print(f"wrote {len(built)} examples to {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    rep = run_experiment(cfg, args.out)
    print(summary_line(rep))
    for c in rep.data["acceptance"]["checks"]:
        print(f"  {c['status']:<5} {c['check']} {c['threshold']} (value {c['value']:.4f})")
    if args.out is None and not cfg.output:
        print(rep.to_json(), end="")
    return EXIT_OK if rep.passed else EXIT_ACCEPTANCE


def cmd_suite(args) -> int:
    res = run_suite(args.pack, args.out_dir, args.only or None)
    if res.hierarchy is not None:
        print()
        print(res.hierarchy.to_text(), end="")
    for f in res.hierarchy_failures:
        print(f"FAIL  hierarchy: {f}")
    if res.hierarchy is not None and not res.hierarchy_failures and not args.only:
        print("PASS  hierarchy ordering")
    if res.failed:
        print(f"failed: {', '.join(res.failed)}")
    return EXIT_OK if res.passed else EXIT_ACCEPTANCE


def cmd_report(args) -> int:
    reports = [load_report(p) for p in args.reports]
    h = hierarchy_report(reports)
    text = {"text": h.to_text, "json": h.to_json, "csv": h.to_csv}[args.format]()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_catalog(args) -> int:
    from ..gen.groups import catalog
    groups = catalog(args.max_order)
    rows = [{"name": g.name, "order": g.order, "simple": g.is_simple} for g in groups]
    if args.tables:
        for r, g in zip(rows, groups):
            r["table"] = g.table.tolist()
    text = json.dumps(rows, indent=1 if args.tables else 2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mlmath", description="ML experiments on mathematical datasets")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a dataset as CSV")
    g.add_argument("task", help="task id (see 'mlmath gen list')")
    g.add_argument("--param", "-p", action="append", metavar="KEY=VALUE", help="task parameter")
    g.add_argument("--out", help="output CSV path")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--out", help="report path (default: the config's output key, else stdout)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("suite", help="run every config of a pack and the hierarchy check")
    s.add_argument("--pack", default="default", help="shipped pack name or directory of .cfg files")
    s.add_argument("--out-dir", default="reports")
    s.add_argument("--only", nargs="*", help="run only these config names")
    s.set_defaults(func=cmd_suite)

    rep = sub.add_parser("report", help="summaries built from report files")
    rsub = rep.add_subparsers(dest="report_kind", required=True, parser_class=_Parser)
    h = rsub.add_parser("hierarchy", help="rank domains by best phi")
    h.add_argument("reports", nargs="+")
    h.add_argument("--format", choices=("text", "json", "csv"), default="text")
    h.add_argument("--out")
    h.set_defaults(func=cmd_report)

    c = sub.add_parser("catalog", help="group catalog")
    csub = c.add_subparsers(dest="catalog_kind", required=True, parser_class=_Parser)
    d = csub.add_parser("dump", help="list the constructible groups")
    d.add_argument("--max-order", type=int, default=70)
    d.add_argument("--tables", action="store_true", help="include Cayley tables")
    d.add_argument("--out")
    d.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, HierarchyError) as e:
        print(f"mlmath: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as e:
        print(f"mlmath: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (DatasetError, OSError, ValueError) as e:
        print(f"mlmath: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
