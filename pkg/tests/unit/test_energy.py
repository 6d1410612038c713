import pytest

from rootcloak.config import IntegratorSettings
from rootcloak.verify.energy import grid_resolution_for, level_deviation, pushed_deviation, section_invariance, verify_energy


def test_grid_resolution_for():
    assert grid_resolution_for(2, 10_000) == 113
    assert grid_resolution_for(3, 10_000) == 27
    assert grid_resolution_for(2, 1) == 2


def test_sections_lie_in_the_energy_level(field_n2):
    points, deviation = level_deviation(field_n2, 2000)
    assert points > 1000
    assert deviation <= 1e-10


def test_pushed_sections_lie_in_the_energy_level(field_n2):
    points, deviation = pushed_deviation(field_n2, 20, seed=2)
    assert points == 20 * 6
    assert deviation <= 1e-10


def test_zero_epsilon_level_is_exact(field_n2):
    _, deviation = level_deviation(field_n2.with_epsilon(0.0), 200)
    assert deviation <= 1e-14


@pytest.mark.parametrize("root", [0, 1, 2])
def test_section_is_invariant_along_single_ball_geodesics(field_n2, root):
    residual = section_invariance(field_n2, root, 3, IntegratorSettings(rel_tol=1e-12, abs_tol=1e-12))
    assert residual.rays == 3
    assert residual.max_residual <= 1e-8
    assert residual.max_exit_angle <= 1e-8


def test_energy_suite(field_n2):
    report = verify_energy(field_n2, points=500, section_rays=2, integrator=IntegratorSettings(rel_tol=1e-12, abs_tol=1e-12))
    assert report.passed
    assert len(report.sections) == 3


def test_sections_lie_in_the_energy_level_n3(construction_n3):
    points, deviation = level_deviation(construction_n3.field, 2000)
    assert points > 1000
    assert deviation <= 1e-10


def test_pushed_sections_lie_in_the_energy_level_n3(construction_n3):
    points, deviation = pushed_deviation(construction_n3.field, 5, seed=3)
    assert points == 5 * 24
    assert deviation <= 1e-10


@pytest.mark.slow
@pytest.mark.parametrize("root", range(6))
def test_section_is_invariant_n3(construction_n3, root):
    residual = section_invariance(construction_n3.field, root, 3, IntegratorSettings(rel_tol=1e-12, abs_tol=1e-12))
    assert residual.max_residual <= 1e-8
    assert residual.max_exit_angle <= 1e-8
