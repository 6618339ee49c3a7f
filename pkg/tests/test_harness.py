import json
import os

import numpy as np
import pytest

from mlmath.dataset import read_csv
from mlmath.harness.cli import EXIT_ACCEPTANCE, EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from mlmath.harness.config import ConfigError, parse_config, parse_flat, parse_value
from mlmath.harness.hierarchy import HierarchyError, check_order, hierarchy_report
from mlmath.harness.registry import TASKS, RegistryError
from mlmath.harness.runner import StageError, check_acceptance, load_report, run_experiment
from mlmath.harness.suite import pack_configs, pack_expectations, run_suite

PARITY = """\
name = tiny-parity   # comment
task = parity
task.count = 400
learner = knn
learner.k = 3
seed = 4
acceptance.precision_min = 0.5
"""

MODP = """\
name = tiny-modp
task = modp-fixed
task.n_hi = 512
learner = decision_tree
seed = 0
acceptance.precision_min = 0.99
"""


# --- config parsing --------------------------------------------------------------------

@pytest.mark.parametrize("text,value", [
    ("12", 12), ("-3", -3), ("0.25", 0.25), ("1e-3", 1e-3), ("true", True), ("False", False),
    ("abc", "abc"), ("'12'", "12"), ("1, 2, 3", (1, 2, 3)), ("a, b", "a, b"),
])
def test_parse_value(text, value):
    assert parse_value(text) == value and type(parse_value(text)) is type(value)


def test_parse_flat_line_numbers():
    values, lines, errors = parse_flat("a = 1\n\n# c\nb = x # y\nbad line\na = 2\nc =\n")
    assert values == {"a": 1, "b": "x"} and lines == {"a": 1, "b": 4}
    assert errors == ["line 5: expected 'key = value'", "line 6: duplicate key 'a' (first on line 1)",
                      "line 7: c has no value"]


def test_config_fields():
    cfg = parse_config(PARITY)
    assert cfg.name == "tiny-parity" and cfg.task_params == {"count": 400}
    assert cfg.learner.kind == "knn" and cfg.learner.params["k"] == 3 and cfg.seed == 4
    assert cfg.domain == "algebra" and cfg.protocol == "holdout" and cfg.train_fraction == 0.8


@pytest.mark.parametrize("extra,msg", [
    ("task.bogus = 1", "line 8: unknown parameter 'task.bogus'"),
    ("task.count = abc", "duplicate key"),
    ("learner.gamma = 1", "line 8: unknown parameter 'learner.gamma' for learner 'knn'"),
    ("learner.k = -1", "duplicate key"),
    ("protocol = loo", "protocol must be one of"),
    ("protocol = fixed", "has no fixed split"),
    ("protocol.train_fraction = 1.5", "protocol.train_fraction must be in (0, 1)"),
    ("protocol.k = 1", "protocol.k must be an integer >= 2"),
    ("acceptance.phi_min = high", "acceptance.phi_min must be a number"),
    ("colour = blue", "line 8: unknown key 'colour'"),
    ("hierarchy = 3", "hierarchy must be true or false"),
])
def test_config_errors(extra, msg):
    with pytest.raises(ConfigError) as e:
        parse_config(PARITY + extra + "\n")
    assert any(msg in m for m in e.value.errors), e.value.errors


def test_config_reports_every_error():
    text = "name = x\ntask = nope\nlearner = perceptron\nseed = -1\n"
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    errs = e.value.errors
    assert any(m.startswith("line 2: unknown task 'nope'") for m in errs)
    assert any(m.startswith("line 3: unknown learner kind 'perceptron'") for m in errs)
    assert any(m.startswith("line 4: seed must be") for m in errs)


def test_config_missing_keys_and_types():
    with pytest.raises(ConfigError, match="missing required key 'seed'"):
        parse_config("name = a\ntask = parity\nlearner = svm\n")
    with pytest.raises(ConfigError, match="task.count must be an integer"):
        parse_config("name = a\ntask = parity\nlearner = svm\nseed = 0\ntask.count = 0.5\n")
    with pytest.raises(ConfigError, match="count must be positive"):
        parse_config("name = a\ntask = parity\nlearner = svm\nseed = 0\ntask.count = 0\n")


# --- registry ---------------------------------------------------------------------------

def test_registry_domains():
    domains = {t.domain for t in TASKS.values()}
    assert domains == {"algebraic-geometry", "algebra", "combinatorics", "elementary-number-theory",
                       "analytic-number-theory", "arithmetic-geometry"}
    for name in ("quadratic-multiplicity", "parity", "group-vs-latin", "simple-groups", "su3-terms",
                 "graph-planar", "prime-window", "liouville-window", "modp-fixed", "modp-variable",
                 "curves", "cicy-h11"):
        assert name in TASKS


def test_registry_rejects_unknown_params():
    with pytest.raises(RegistryError, match="unknown parameter"):
        TASKS["parity"]({"size": 3}, 0)
    with pytest.raises(RegistryError, match="v_min"):
        TASKS["graph-euler"]({"v_min": 2}, 0)


# --- runner ---------------------------------------------------------------------------

def test_run_is_deterministic(tmp_path):
    cfg = parse_config(PARITY)
    a = run_experiment(cfg, tmp_path / "a.json")
    b = run_experiment(cfg, tmp_path / "b.json")
    assert a.deterministic_view() == b.deterministic_view()
    da, db = (json.loads((tmp_path / f).read_text()) for f in ("a.json", "b.json"))
    del da["timing"], db["timing"]
    assert json.dumps(da) == json.dumps(db)
    assert load_report(tmp_path / "a.json").deterministic_view() == a.deterministic_view()


def test_report_regenerates_its_dataset():
    rep = run_experiment(parse_config(PARITY))
    prov = rep.data["provenance"]
    ds = TASKS[rep.data["config"]["task"]](prov["task_params"], prov["data_seed"])
    assert len(ds) == rep.data["dataset"][0]["size"]
    assert ds.class_counts().tolist() == rep.data["dataset"][0]["class_counts"]


def test_report_contents():
    rep = run_experiment(parse_config(MODP))
    d = rep.data
    assert list(d) == ["format", "version", "config", "dataset", "result", "acceptance", "provenance",
                       "timing"]
    assert rep.precision == 1.0 and rep.passed
    M = np.array(d["result"]["confusion"])
    assert M.sum() == d["result"]["validation_size"]
    assert d["acceptance"]["checks"][0]["status"] == "PASS"


def test_kfold_protocol():
    rep = run_experiment(parse_config(MODP + "protocol = kfold\nprotocol.k = 4\n"))
    assert rep.data["result"]["k"] == 4 and len(rep.data["result"]["cv"]["per_fold"]) == 4


def test_acceptance_checks_and_conditional(monkeypatch):
    cfg = parse_config(PARITY.replace("acceptance.precision_min = 0.5",
                                      "acceptance.phi_max = 0.1\nacceptance.abs_phi_max = 0.2\n"
                                      "conditional_env = MLMATH_TEST_UNSET"))
    monkeypatch.delenv("MLMATH_TEST_UNSET", raising=False)
    out = check_acceptance(cfg, 0.9, 0.15)
    assert out["smoke"] and out["passed"] and {c["status"] for c in out["checks"]} == {"SKIP"}
    monkeypatch.setenv("MLMATH_TEST_UNSET", "1")
    out = check_acceptance(cfg, 0.9, 0.15)
    assert [c["status"] for c in out["checks"]] == ["FAIL", "PASS"] and not out["passed"]


def test_stage_errors_name_the_stage(tmp_path):
    bad = tmp_path / "c.csv"
    bad.write_text("a,b,rank,torsion,integer_points\n-3,2,0,1,0\n")
    cfg = parse_config(f"name = c\ntask = curves\ntask.path = {bad}\nlearner = knn\nseed = 0\n")
    with pytest.raises(StageError, match=r"\[generate\] ArithError: line 2: singular"):
        run_experiment(cfg)


# --- hierarchy -------------------------------------------------------------------------

def _fake(name, domain, phi, precision=0.5, smoke=False, hierarchy=True):
    from mlmath.harness.runner import ExperimentReport
    return ExperimentReport({
        "config": {"name": name, "task": name, "domain": domain, "learner": {"kind": "svm"},
                   "hierarchy": hierarchy},
        "result": {"precision": precision, "phi": phi, "validation_size": 10},
        "acceptance": {"smoke": smoke}, "dataset": []})


def test_hierarchy_ranks_domains_by_best_phi():
    h = hierarchy_report([_fake("parity", "algebra", 0.99), _fake("liouville", "analytic", 0.001),
                          _fake("lsq", "algebra", 0.02), _fake("graph", "combinatorics", 0.4),
                          _fake("smoke", "analytic", 0.9, smoke=True),
                          _fake("off", "combinatorics", 0.95, hierarchy=False)])
    assert h.order == ["algebra", "combinatorics", "analytic"]
    assert h.rows[0].best.name == "parity"
    assert check_order(h, [("algebra", "combinatorics")], "analytic") == []
    assert check_order(h, [("analytic", "algebra")], "algebra") == [
        "analytic is not ranked above algebra", "algebra is not last (last is analytic)"]
    assert h.to_csv().splitlines()[0] == "rank,domain,task,learner,precision,phi,size,best"
    assert "evaluation-set sizes" in h.to_text()


def test_hierarchy_ties_and_errors():
    h = hierarchy_report([_fake("a", "x", 0.5, 0.7), _fake("b", "y", 0.5, 0.8)])
    assert h.order == ["y", "x"]
    with pytest.raises(HierarchyError, match="at least two domains"):
        hierarchy_report([_fake("a", "x", 0.5), _fake("b", "x", 0.2)])
    with pytest.raises(HierarchyError):
        hierarchy_report([])


# --- shipped pack ----------------------------------------------------------------------

def test_default_pack_parses():
    cfgs = pack_configs("default")
    names = {c.name for c in cfgs}
    assert {"s31-quadratic", "s32-parity", "s32-group-vs-latin", "s32-simple-groups",
            "s32-simple-groups-extrapolation", "s33-graph-acyclic", "s34-prime-window",
            "s34-liouville", "s34-modp-fixed", "s34-modp-variable", "s34-curves-torsion",
            "s31-cicy"} <= names
    above, last = pack_expectations("default")
    assert last == "analytic-number-theory" and ("algebra", "combinatorics") in above


def test_suite_on_custom_pack(tmp_path):
    pack = tmp_path / "pack"
    pack.mkdir()
    (pack / "a.cfg").write_text(MODP)
    (pack / "b.cfg").write_text(PARITY)
    (pack / "pack.cfg").write_text("hierarchy.above = elementary-number-theory > algebra\n")
    res = run_suite(str(pack), tmp_path / "out", log=None)
    assert res.passed and [r.name for r in res.reports] == ["tiny-modp", "tiny-parity"]
    assert (tmp_path / "out" / "hierarchy.csv").exists()
    (pack / "pack.cfg").write_text("hierarchy.above = algebra > elementary-number-theory\n")
    assert not run_suite(str(pack), None, log=None).passed
    (pack / "pack.cfg").write_text("hierarchy.first = algebra\n")
    with pytest.raises(ConfigError, match="unknown key"):
        run_suite(str(pack), None, log=None)


# --- CLI --------------------------------------------------------------------------------

def test_cli_gen_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["gen", "modp-fixed", "-p", "n_hi=64", "-p", "p=3", "--out", str(out), "--seed", "1"]) == EXIT_OK
    ds = read_csv(out)
    assert len(ds) == 63 and ds.label_arity == 3
    assert main(["gen", "simple-groups-extrapolation", "-p", "per_class=5", "-p", "test_copies=1",
                 "--out", str(tmp_path / "e.csv")]) == EXIT_OK
    assert (tmp_path / "e-train.csv").exists() and (tmp_path / "e-test.csv").exists()
    assert main(["gen", "list"]) == EXIT_OK
    assert main(["gen", "nope", "--out", str(out)]) == EXIT_USAGE
    assert main(["gen", "parity", "-p", "count", "--out", str(out)]) == EXIT_USAGE
    assert main(["gen", "parity", "-p", "size=3", "--out", str(out)]) == EXIT_USAGE
    assert main(["gen", "parity"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == EXIT_USAGE


def test_cli_run_and_report(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text(MODP)
    failing = tmp_path / "fail.cfg"
    failing.write_text(PARITY.replace("precision_min = 0.5", "precision_min = 1.01"))
    assert main(["run", str(good), "--out", str(tmp_path / "g.json")]) == EXIT_OK
    assert main(["run", str(failing), "--out", str(tmp_path / "f.json")]) == EXIT_ACCEPTANCE
    assert "FAIL  precision_min" in capsys.readouterr().out
    assert main(["report", "hierarchy", str(tmp_path / "g.json"), str(tmp_path / "f.json"),
                 "--format", "csv", "--out", str(tmp_path / "h.csv")]) == EXIT_OK
    assert (tmp_path / "h.csv").read_text().count("\n") == 3
    assert main(["report", "hierarchy", str(tmp_path / "g.json")]) == EXIT_USAGE
    bad = tmp_path / "bad.cfg"
    bad.write_text("name = x\n")
    assert main(["run", str(bad)]) == EXIT_USAGE
    assert main(["run", str(tmp_path / "missing.cfg")]) == EXIT_DATA
    notreport = tmp_path / "n.json"
    notreport.write_text("{}")
    assert main(["report", "hierarchy", str(notreport)]) == EXIT_DATA


def test_cli_data_error(tmp_path):
    bad = tmp_path / "c.csv"
    bad.write_text("a,b\n")
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"name = c\ntask = curves\ntask.path = {bad}\nlearner = knn\nseed = 0\n")
    assert main(["run", str(cfg)]) == EXIT_DATA


def test_cli_catalog(tmp_path):
    out = tmp_path / "cat.json"
    assert main(["catalog", "dump", "--max-order", "12", "--out", str(out)]) == EXIT_OK
    rows = json.loads(out.read_text())
    assert {r["order"] for r in rows} <= set(range(1, 13))
    assert sum(r["simple"] for r in rows) == 5          # C2, C3, C5, C7, C11
