import csv
import json

import pytest
import yaml
from typer.testing import CliRunner

from rootcloak.cli.main import app

pytestmark = pytest.mark.integration

SMALL_CONFIG = {
    "n": 2,
    "logger": {"type": "none", "progress_display": False},
    "executor": {"max_workers": 1},
    "epsilon_search": {"grid_resolution": 9, "iterations": 20},
    "integrator": {"rel_tol": 1e-11, "abs_tol": 1e-11},
    "verification": {"rays": 3, "symmetry_samples": 100, "energy_points": 300, "section_rays": 2, "obstruction_grid": 7},
}


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "rootcloak.config.yaml"
    path.write_text(yaml.safe_dump(SMALL_CONFIG))
    return path


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_version_and_welcome(runner):
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert "rootcloak" in result.output
    result = runner.invoke(app, [])
    assert result.exit_code == 0
    assert "verify" in result.output


def test_build_reports_the_construction(runner, config_file, tmp_path):
    out = tmp_path / "build.json"
    result = runner.invoke(app, ["build", "--config", str(config_file), "-o", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["n"] == 2 and report["balls"] == 6
    assert report["epsilon_auto"] is True
    assert report["epsilon"] == pytest.approx(0.5 * report["epsilon_threshold"])
    assert report["geometry"]["passed"] is True
    assert report["max_grad_phi"] > 0 and report["max_hess_phi"] > 0
    assert len(report["config_digest"]) == 64


def test_build_is_deterministic(runner, config_file, tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        runner.invoke(app, ["build", "-o", str(tmp_path / name)])
        outputs.append(json.loads((tmp_path / name).read_text()))
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize(
    "overrides",
    [["n=1"], ["amplitudes=[1.0, 0.4, 0.6]"], ["epsilon=-1"], ["nonsense"], ["integrator.method=Euler"]],
)
def test_invalid_configuration_exits_2(runner, config_file, overrides):
    args = ["build"]
    for assignment in overrides:
        args += ["--set", assignment]
    assert runner.invoke(app, args).exit_code == 2


def test_missing_config_file_exits_2(runner, tmp_path):
    assert runner.invoke(app, ["build", "--config", str(tmp_path / "missing.yaml")]).exit_code == 2


def test_build_with_overlapping_balls_exits_1(runner, config_file, tmp_path):
    out = tmp_path / "build.json"
    result = runner.invoke(app, ["build", "--set", "epsilon=0.01", "--set", "ball_radius=2.0", "-o", str(out)])
    assert result.exit_code == 1
    assert json.loads(out.read_text())["geometry"]["passed"] is False


def test_field_export(runner, config_file, tmp_path):
    out = tmp_path / "field.csv"
    result = runner.invoke(app, ["field", "--grid", "5", "-o", str(out)])
    assert result.exit_code == 0, result.output
    rows = read_csv(out)
    assert rows[0] == ["x_1", "x_2", "h_11", "h_12", "h_22", "min_eig", "in_ball"]
    assert len(rows) == 1 + 25
    for row in rows[1:]:
        ball = int(row[-1])
        assert ball == -1 or 1 <= ball <= 6
        if ball == -1:
            assert [float(v) for v in row[2:6]] == [1.0, 0.0, 1.0, 1.0]
        assert float(row[5]) > 0


def test_field_extent(runner, config_file, tmp_path):
    out = tmp_path / "field.csv"
    runner.invoke(app, ["field", "--grid", "3", "--extent", "100", "-o", str(out)])
    rows = read_csv(out)
    assert [float(v) for v in rows[1][:2]] == [-100.0, -100.0]
    assert rows[1][-1] == "-1"


def test_trace_export(runner, config_file, tmp_path):
    out = tmp_path / "trace.json"
    polylines = tmp_path / "polylines"
    result = runner.invoke(app, ["trace", "--direction", "root:1", "--rays", "3", "--polylines", str(polylines), "-o", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data["direction"] == "root:1"
    assert len(data["traces"]) == 3
    for record in data["traces"]:
        assert record["lateral"] <= 1e-6
        assert all(1 <= b <= 6 for b in record["balls_crossed"])
    files = sorted(polylines.glob("*.csv"))
    assert len(files) == 3
    assert read_csv(files[0])[0] == ["t", "x_1", "x_2", "p_1", "p_2"]


def test_trace_explicit_offsets(runner, config_file, tmp_path):
    out = tmp_path / "trace.json"
    result = runner.invoke(app, ["trace", "--direction", "custom:1,0.2", "--offset", "0,0", "--offset", "0.1,-0.5", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert len(json.loads(out.read_text())["traces"]) == 2


@pytest.mark.parametrize("args", [["--direction", "root:4"], ["--direction", "sideways"], ["--offset", "0.1"]])
def test_trace_rejects_bad_input(runner, config_file, args):
    assert runner.invoke(app, ["trace", *args]).exit_code == 2


def test_verify_selected_suites(runner, config_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["verify", "--suite", "geometry", "--suite", "symmetry", "-o", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert report["invisibility"] is None
    assert report["symmetry"]["passed"] is True


def test_verify_single_direction_with_records(runner, config_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["verify", "-s", "invisibility", "--direction", "root:2", "--rays", "2", "--records", "-o", str(out)])
    assert result.exit_code == 0, result.output
    invisibility = json.loads(out.read_text())["invisibility"]
    assert len(invisibility) == 1
    assert len(invisibility[0]["records"]) == 2


def test_verify_failure_exits_1(runner, config_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["verify", "-s", "symmetry", "--set", "thresholds.symmetry=-1", "-o", str(out)])
    assert result.exit_code == 1
    assert json.loads(out.read_text())["passed"] is False


def test_verify_unknown_suite_exits_2(runner, config_file):
    assert runner.invoke(app, ["verify", "--suite", "speed"]).exit_code == 2


def test_obstruction_export(runner, config_file, tmp_path):
    out = tmp_path / "obstruction.csv"
    summary = tmp_path / "summary.json"
    result = runner.invoke(app, ["obstruction", "--grid", "5", "--summary", str(summary), "-o", str(out)])
    assert result.exit_code == 0, result.output
    rows = read_csv(out)
    assert rows[0] == ["x_1", "x_2", "obs_1_2"]
    assert len(rows) == 26
    data = json.loads(summary.read_text())
    assert data["nonzero"] is True
    assert data["pairs"][0]["k"] == 1 and data["pairs"][0]["l"] == 2


def test_epsilon_max(runner, config_file, tmp_path):
    out = tmp_path / "eps.json"
    result = runner.invoke(app, ["epsilon-max", "--grid", "7", "-o", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert 0 < data["epsilon_max"] <= 2.0
    assert data["epsilon_auto"] == pytest.approx(0.5 * data["epsilon_max"])
    assert data["grid_resolution"] == 7
    assert data["max_grad_phi"] > 0


def test_check(runner, config_file):
    result = runner.invoke(app, ["check"])
    assert result.exit_code == 0, result.output
    assert "Config File" in result.output
    result = runner.invoke(app, ["check", "show", str(config_file)])
    assert result.exit_code == 0
    assert "epsilon_search" in result.output


@pytest.mark.slow
def test_verify_visible_direction_exits_1(runner, config_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["verify", "-s", "invisibility", "--direction", "custom:0.92,0.39", "--rays", "5", "-o", str(out)])
    assert result.exit_code == 1
    (inv,) = json.loads(out.read_text())["invisibility"]
    assert inv["passed"] is False
    assert inv["hits"] > 0


@pytest.mark.parametrize("flag", ["--quiet", "--verbose"])
def test_verbosity_flags_keep_results(runner, config_file, tmp_path, flag):
    out = tmp_path / "report.json"
    result = runner.invoke(app, [flag, "verify", "-s", "geometry", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert json.loads(out.read_text())["geometry"]["passed"] is True
