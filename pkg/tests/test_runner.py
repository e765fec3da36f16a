import json

import pytest

from favprop.cli import main
from favprop.config import parse_config
from favprop.recipes import load_recipe, recipe_text
from favprop.runner import CROSS_TERM_COLUMNS, SWEEP_COLUMNS, fmt, run_experiment

SMALL = """\
experiment_name = "small"
master_seed = 7
trials = 600
m_values = [4, 16, 64]

[ensembles.iid]
L = 3
gain_model = "iid-complex-gaussian"
geometry = { kind = "uniform-linear", M = 4 }

[[metrics]]
name = "mz"
kind = "mean_z"
ensemble = "iid"
checks = [{ type = "zero-mean", k = 5.0 }]

[[metrics]]
name = "ct"
kind = "cross_terms"
ensemble = "iid"
checks = [{ type = "diagonal-unit" }]

[[metrics]]
name = "dec"
kind = "decomposition"
ensemble = "iid"
checks = [{ type = "consistent" }]
"""


def csvs(path):
    return {p.name: p.read_bytes() for p in sorted(path.glob("*.csv"))}


def test_fmt_17_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(3) == "3" and fmt(True) == "true"


def test_outputs_and_schema(tmp_path):
    res = run_experiment(parse_config(SMALL), tmp_path)
    assert res.passed
    head = (tmp_path / "mz.csv").read_text().splitlines()[0]
    assert head.split(",") == SWEEP_COLUMNS
    head = (tmp_path / "ct_M16.csv").read_text().splitlines()[0]
    assert head.split(",") == CROSS_TERM_COLUMNS
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["all_pass"] and summary["master_seed"] == 7
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config_digest"] == parse_config(SMALL).digest()
    assert "mz.csv" in manifest["files"]


def test_thread_count_does_not_change_bytes(tmp_path):
    cfg = parse_config(SMALL)
    run_experiment(cfg, tmp_path / "a", workers=1)
    run_experiment(cfg, tmp_path / "b", workers=4)
    a, b = csvs(tmp_path / "a"), csvs(tmp_path / "b")
    assert a == b and a
    assert (tmp_path / "a" / "summary.json").read_bytes() == \
        (tmp_path / "b" / "summary.json").read_bytes()


def test_seed_changes_output(tmp_path):
    run_experiment(parse_config(SMALL), tmp_path / "a")
    run_experiment(parse_config(SMALL.replace("master_seed = 7", "master_seed = 8")),
                   tmp_path / "b")
    assert (tmp_path / "a" / "mz.csv").read_bytes() != (tmp_path / "b" / "mz.csv").read_bytes()


def test_counterexample_recipe_summary(tmp_path):
    res = run_experiment(load_recipe("counterexample-audit"), tmp_path)
    audit = res.summary["metrics"]["audit"]
    assert audit["L"] == 3
    assert audit["mean_z"] == 9 and audit["bound_rhs"] == 3 and audit["violation"] is True
    assert res.verdicts["complex_ordering.lhs-nonreal"]


def test_prop2_recipe_passes(tmp_path):
    res = run_experiment(load_recipe("prop2-zero-mean"), tmp_path)
    assert res.passed
    pts = res.summary["metrics"]["mean_z"]["points"]
    assert [p["M"] for p in pts] == [8, 64, 512]


def test_cli_recipes_and_explain(capsys):
    assert main(["recipes"]) == 0
    out = capsys.readouterr().out
    assert "prop1-sweep" in out and "cosine-demo" in out
    assert main(["explain", "cosine-demo"]) == 0
    assert capsys.readouterr().out == recipe_text("cosine-demo")
    assert main(["explain", "nope"]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "cosine-demo", "--out", str(tmp_path / "c")]) == 0
    bad = tmp_path / "bad.toml"
    bad.write_text(SMALL.replace("master_seed = 7\n", ""))
    assert main(["run", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "master_seed" in capsys.readouterr().err
    assert main(["run", "no-such-thing"]) == 2
    failing = tmp_path / "fail.toml"
    failing.write_text(SMALL.replace('type = "zero-mean", k = 5.0',
                                     'type = "equals", value = 5.0, tol = 1e-3'))
    assert main(["run", str(failing), "--out", str(tmp_path / "f")]) == 1


def test_cli_seed_override(tmp_path):
    cfg = tmp_path / "small.toml"
    cfg.write_text(SMALL)
    assert main(["run", str(cfg), "--seed", "8", "--out", str(tmp_path / "a")]) == 0
    run_experiment(parse_config(SMALL.replace("master_seed = 7", "master_seed = 8")),
                   tmp_path / "b")
    assert csvs(tmp_path / "a") == csvs(tmp_path / "b")
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["master_seed"] == 8


def test_cli_hypothesis_violation(tmp_path, capsys):
    cfg = tmp_path / "coupled.toml"
    cfg.write_text(SMALL.replace('gain_model = "iid-complex-gaussian"',
                                 'gain_model = "counterexample"'))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "hypothesis violated" in err and "iid" in err


def test_io_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match=str(blocker)):
        run_experiment(parse_config(SMALL), blocker / "sub")
    assert main(["run", "cosine-demo", "--out", str(blocker / "sub")]) == 2
