import json

import pytest

from paretogp.cli import main, suggest_drivers
from paretogp.analysis import VariableScore
from pipeline import make_project, run_pipeline, snapshot

TINY = {"population_size": 60, "elite_size": 10, "tournament_size": 10,
        "max_generations": 6, "time_budget_seconds": None, "independent_evolutions": 2}
LOOSE = {"stage1": {"max_error": 0.6}, "stage2": {"max_error": 0.6, "retain_fraction": 1.0},
         "ensemble": {"size": 3}}


@pytest.fixture(scope="module")
def project(tmp_path_factory):
    root = tmp_path_factory.mktemp("proj")
    config = make_project(root, TINY, **LOOSE)
    run_pipeline(config, root / "a")
    return root, config


def test_pipeline_outputs(project):
    root, _ = project
    out = root / "a"
    for rel in ("data/train.csv", "data/test.json", "stage1/runs/run_00.json",
                "stage1/runs/run_01.json", "stage1/superset.json", "stage1/model_set.json",
                "stage1/analysis/presence.csv", "stage1/analysis/contribution.csv",
                "stage1/analysis/niches.csv", "stage2/model_set.json",
                "ensemble/ensemble.json", "ensemble/members.csv",
                "predict/predictions.csv", "report/summary.json",
                "report/pareto_stage1.csv", "report/predicted_vs_actual.csv"):
        assert (out / rel).is_file(), rel
    ens = json.loads((out / "ensemble/ensemble.json").read_text())
    assert ens["variables"] == ["windGust2", "dewPoint"] and len(ens["models"]) == 3


def test_rerun_is_byte_identical(project):
    root, config = project
    run_pipeline(config, root / "b")
    a, b = snapshot(root / "a"), snapshot(root / "b")
    assert a.keys() == b.keys()
    assert [k for k in a if a[k] != b[k]] == []


def test_missing_artifact_exit_code(tmp_path, project):
    _, config = project
    assert main(["select", "--stage", "1", "--config", str(config),
                 "--out", str(tmp_path / "empty")]) == 3
    assert main(["ensemble", "--config", str(config), "--out", str(tmp_path / "empty")]) == 3


def test_input_error_exit_codes(tmp_path, capsys):
    assert main(["ingest", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"evolution": {"population_size": 0}}))
    assert main(["evolve", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"predictors": {"path": "gone.csv"},
                               "response": {"path": "gone.csv"}}))
    assert main(["ingest", "--config", str(bad)]) == 2
    assert "gone.csv" in capsys.readouterr().err


def test_stage2_needs_variables(tmp_path, project):
    root, config = project
    d = json.loads(config.read_text())
    d.pop("stage2_variables")
    d["out"] = str(root / "a")
    cfg2 = tmp_path / "c.json"
    cfg2.write_text(json.dumps(d))
    assert main(["evolve", "--stage", "2", "--config", str(cfg2)]) == 2


def test_suggest_drivers():
    scores = [VariableScore("a", 0.5, 1, 3), VariableScore("b", 0.2, 2, 3),
              VariableScore("c", 0.01, 3, 2), VariableScore("d", None, 4, 0)]
    assert suggest_drivers(scores) == ["a", "b"]


def test_common_flags_before_subcommand(tmp_path, project):
    _, config = project
    out = tmp_path / "front"
    assert main(["--config", str(config), "--out", str(out), "--seed", "0", "ingest"]) == 0
    assert (out / "data" / "train.csv").is_file()


def test_config_is_required():
    with pytest.raises(SystemExit) as err:
        main(["ingest"])
    assert err.value.code == 2
