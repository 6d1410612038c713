import json

import pytest
import yaml

from rootcloak.config import Settings, deep_merge, get_settings, load_config_file, parse_override
from rootcloak.core.exceptions import ConfigInvalid


def test_defaults():
    settings = Settings()
    assert settings.n == 2
    assert settings.epsilon == "auto"
    assert settings.ball_radius == "auto"
    assert settings.root_count == 3
    assert settings.integrator.rel_tol == 1e-12
    assert settings.thresholds.lateral == 1e-6
    assert settings.verification.rays == 100


def test_dimension_below_two_is_invalid():
    with pytest.raises(ConfigInvalid) as info:
        get_settings(overrides=["n=1"])
    assert info.value.field == "n"


def test_amplitude_count_must_match_roots():
    with pytest.raises(ConfigInvalid):
        get_settings(overrides=["amplitudes=[1.0, 0.5]"])


def test_chamber_point_length_must_match_dimension():
    with pytest.raises(ConfigInvalid):
        get_settings(overrides=["chamber_point=[1.0, 0.5, 0.2]"])


def test_negative_epsilon_is_invalid():
    with pytest.raises(ConfigInvalid) as info:
        get_settings(overrides=["epsilon=-0.1"])
    assert info.value.field == "epsilon"


def test_unknown_field_is_invalid():
    with pytest.raises(ConfigInvalid):
        get_settings(overrides=["integrator.order=5"])


def test_parse_override_nested_scientific():
    assert parse_override("integrator.rel_tol=1e-10") == {"integrator": {"rel_tol": 1e-10}}
    assert parse_override("epsilon=auto") == {"epsilon": "auto"}
    assert parse_override("amplitudes=[1, 0.5, 0.7]") == {"amplitudes": [1, 0.5, 0.7]}


@pytest.mark.parametrize("assignment", ["epsilon", "=3", "n=[1,"])
def test_parse_override_rejects_malformed(assignment):
    with pytest.raises(ConfigInvalid):
        parse_override(assignment)


def test_deep_merge_keeps_siblings():
    merged = deep_merge({"integrator": {"rel_tol": 1e-12, "method": "DOP853"}}, {"integrator": {"rel_tol": 1e-9}})
    assert merged == {"integrator": {"rel_tol": 1e-9, "method": "DOP853"}}


def test_yaml_file_and_overrides(tmp_path):
    path = tmp_path / "custom.yaml"
    path.write_text(yaml.safe_dump({"n": 3, "epsilon": 0.01, "integrator": {"rel_tol": 1e-10}}))
    settings = get_settings(path, overrides=["epsilon=0.02"])
    assert settings.n == 3
    assert settings.epsilon == 0.02
    assert settings.integrator.rel_tol == 1e-10
    assert settings.integrator.abs_tol == 1e-12


def test_json_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"n": 2, "amplitudes": {"seed": 5}}))
    assert get_settings(path).amplitudes.seed == 5


def test_config_file_is_discovered_from_parent(tmp_path, monkeypatch):
    (tmp_path / "rootcloak.config.yaml").write_text("n: 3\n")
    nested = tmp_path / "a" / "b"
    nested.mkdir(parents=True)
    monkeypatch.chdir(nested)
    assert Settings.find_config() == tmp_path / "rootcloak.config.yaml"
    assert get_settings().n == 3


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigInvalid):
        get_settings(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("n: [1,\n")
    with pytest.raises(ConfigInvalid):
        load_config_file(bad)
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("3\n")
    with pytest.raises(ConfigInvalid):
        load_config_file(scalar)


def test_environment_variables(monkeypatch):
    monkeypatch.setenv("ROOTCLOAK_N", "3")
    monkeypatch.setenv("ROOTCLOAK_INTEGRATOR__REL_TOL", "1e-9")
    settings = get_settings()
    assert settings.n == 3
    assert settings.integrator.rel_tol == 1e-9


def test_file_ranks_above_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ROOTCLOAK_N", "3")
    path = tmp_path / "rootcloak.config.yaml"
    path.write_text("n: 4\n")
    assert get_settings(path).n == 4


def test_amplitude_range_is_checked():
    with pytest.raises(ConfigInvalid):
        get_settings(overrides=["amplitudes.low=2.0", "amplitudes.high=1.0"])
