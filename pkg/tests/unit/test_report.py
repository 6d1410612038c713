import json

import pytest

from rootcloak.core.error_handling import emit_error_json, error_record
from rootcloak.core.exceptions import AmplitudeDegenerate, ConfigInvalid, SingularSystem
from rootcloak.verify.curvature import verify_flatness
from rootcloak.verify.report import SymmetryReport, VerificationReport, to_json
from rootcloak.verify.runner import SUITES, expand_suites, run_verification


def test_floats_round_trip():
    text = to_json({"value": 0.1 + 0.2, "bad": float("nan")})
    data = json.loads(text)
    assert data["value"] == 0.1 + 0.2
    assert "0.30000000000000004" in text
    assert data["bad"] == "nan"


def test_passed_is_serialised():
    report = VerificationReport(
        config_digest="abc",
        symmetry=SymmetryReport(samples=1, per_generator=[1.0], max_residual=1.0, threshold=1e-10, passed=False),
    )
    data = json.loads(to_json(report))
    assert data["passed"] is False
    assert data["symmetry"]["passed"] is False
    assert report.summary() == {"symmetry": False}


def test_expand_suites():
    assert expand_suites(["all"]) == SUITES
    assert expand_suites(["flatness", "geometry"]) == ["geometry", "flatness"]
    with pytest.raises(ConfigInvalid):
        expand_suites(["speed"])


def test_error_records():
    record = error_record(AmplitudeDegenerate("degenerate", "a_3 = a_1 - a_2", pair=(1, 2)))
    assert record == {"error": "AmplitudeDegenerate", "message": "degenerate", "details": "a_3 = a_1 - a_2", "field": "amplitudes", "pair": [1, 2]}
    assert error_record(SingularSystem("singular", condition_number=1e13))["condition_number"] == 1e13
    assert error_record(ValueError("plain"))["error"] == "ValueError"


def test_error_json_is_strict_for_infinite_condition(capsys):
    emit_error_json(SingularSystem("Metric system is singular", condition_number=float("inf")))
    line = capsys.readouterr().err.strip()
    assert "Infinity" not in line
    assert json.loads(line)["condition_number"] == "inf"


def test_flatness_suite(field_n2):
    report = verify_flatness(field_n2, fd_step_fraction=1e-3, obstruction_grid=11)
    assert report.claimed
    assert report.flat.max_riemann == 0.0
    assert report.outside.max_riemann == 0.0
    assert report.noise_floor == 1e-6
    assert report.floor_ratio > 10
    assert report.passed


def test_flatness_is_not_claimed_at_zero_epsilon(field_n2):
    report = verify_flatness(field_n2.with_epsilon(0.0), obstruction_grid=5)
    assert not report.claimed
    assert report.passed


def test_run_selected_suites(construction_n2):
    report = run_verification(construction_n2, ["geometry", "symmetry"])
    assert report.geometry.passed and report.symmetry.passed
    assert report.invisibility is None and report.energy is None and report.flatness is None
    assert report.passed
    assert report.config_digest == construction_n2.digest


def test_run_single_direction(construction_n2):
    report = run_verification(construction_n2, ["invisibility"], direction="root:-2", rays=1)
    assert [r.label for r in report.invisibility] == ["root:-2"]
    assert report.invisibility[0].rays == 1
