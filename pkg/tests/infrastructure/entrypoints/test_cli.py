import json

import pytest

from src.infrastructure.entrypoints import cli

SMALL = {
    "orchard": {
        "preset": "walnut-like",
        "seed": 9,
        "overrides": {"branching_levels": 2, "leaf_count_per_terminal": [1, 2], "fruit_count": [3, 5]},
        "layout_overrides": {"rows": 1, "cols": 2},
    },
    "camera": {"width": 16, "height": 12},
    "visibility": {"strategies": ["ground"], "sample_spacing": 1.0},
    "sweep": {"heights": [1.0, 2.0], "mount_sets": ["front"], "n_seeds": 1, "sample_spacing": 1.0},
}


@pytest.fixture(autouse=True)
def no_langfuse(monkeypatch):
    monkeypatch.setattr(cli, "langfuse_configured", lambda: False)
    monkeypatch.setattr(cli, "configure_logging", lambda: None)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(SMALL))
    return path


def parse_stdout(text: str) -> dict:
    return {k: json.loads(v) for k, v in (pair.split("=", 1) for pair in text.split())}


def test_generate_is_deterministic(config_path, tmp_path, capsys) -> None:
    scenes = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["generate", "--config", str(config_path), "--out", str(out)]) == cli.EXIT_OK
        result = parse_stdout(capsys.readouterr().out)
        assert result["trees"] == 2
        assert result["scene"] == str(out / cli.DEFAULT_SCENE)
        scenes.append((out / cli.DEFAULT_SCENE).read_bytes())
        assert json.loads((out / "orchard.json").read_text())["seed"] == 9
    assert scenes[0] == scenes[1]


def test_visibility_and_report_use_a_saved_scene(config_path, tmp_path, capsys) -> None:
    out = tmp_path / "results"
    scene = tmp_path / "orchard.scn"
    assert cli.main(["generate", "--config", str(config_path), "--out", str(out), "--scene", str(scene)]) == 0
    assert cli.main(["visibility", "--config", str(config_path), "--out", str(out), "--scene", str(scene)]) == 0
    assert cli.main(["report", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    fraction = parse_stdout(lines[1])["ground"]
    assert 0.0 <= fraction <= 1.0
    assert parse_stdout(lines[2]) == {"artifacts": ["orchard", "visibility"]}
    assert (out / "visibility_ground.csv").exists()
    assert (out / "summary.txt").exists()


def test_sweep_reports_best_heights(config_path, tmp_path, capsys) -> None:
    assert cli.main(["sweep", "--config", str(config_path), "--out", str(tmp_path), "--threads", "2"]) == 0
    assert parse_stdout(capsys.readouterr().out)["front"] in (1.0, 2.0)
    assert (tmp_path / "sweep.csv").exists()


def test_invalid_config_exits_with_config_code(tmp_path, capsys) -> None:
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"orchard": {"preset": "banana-like"}}))
    assert cli.main(["generate", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "ConfigError"
    assert "banana-like" in error["message"]


def test_thread_count_must_be_positive(config_path, tmp_path, capsys) -> None:
    code = cli.main(["generate", "--config", str(config_path), "--out", str(tmp_path), "--threads", "0"])
    assert code == cli.EXIT_CONFIG
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "ConfigError"


def test_missing_scene_is_a_runtime_error(config_path, tmp_path, capsys) -> None:
    code = cli.main(["fly", "--config", str(config_path), "--out", str(tmp_path), "--scene", str(tmp_path / "none.scn")])
    assert code == cli.EXIT_RUNTIME
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "FileNotFoundError"


def test_corrupt_scene_is_a_runtime_error(config_path, tmp_path, capsys) -> None:
    scene = tmp_path / "broken.scn"
    scene.write_bytes(b"ORCHSCN\0")
    code = cli.main(["count", "--config", str(config_path), "--out", str(tmp_path), "--scene", str(scene)])
    assert code == cli.EXIT_RUNTIME
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "SceneFormatError"


def test_counting_tree_must_exist(config_path, tmp_path) -> None:
    config = cli.load_config(config_path)
    runner = cli.CommandRunner(config, tmp_path, 1, cli.LoggingObservabilityHandler())
    model = runner._orchard(None)
    bad = config.model_copy(update={"counting": config.counting.model_copy(update={"tree_id": 5})})
    with pytest.raises(cli.ConfigError):
        cli.CommandRunner(bad, tmp_path, 1, cli.LoggingObservabilityHandler()).counting_cameras(model)
    assert len(runner.counting_cameras(model)) > 2


@pytest.mark.slow
def test_fly_and_count_commands(config_path, tmp_path, capsys) -> None:
    assert cli.main(["fly", "--config", str(config_path), "--out", str(tmp_path)]) == 0
    assert cli.main(["count", "--config", str(config_path), "--out", str(tmp_path)]) == 0
    fly_line, count_line = capsys.readouterr().out.splitlines()
    flight = parse_stdout(fly_line)
    assert set(flight) == {"reached", "steps", "fallbacks", "min_clearance_m", "contact"}
    counted = parse_stdout(count_line)
    assert counted["ground_truth_visible_count"] >= 0
    assert (tmp_path / "planner_trace.jsonl").exists()
    assert (tmp_path / "count.json").exists()
