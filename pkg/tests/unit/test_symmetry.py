import numpy as np

from rootcloak.geometry.rootsys import reflection
from rootcloak.verify.symmetry import equivariance_residual, sample_points, verify_symmetry


def test_sample_points_cover_the_balls(field_n2):
    points = sample_points(field_n2, 200, seed=1)
    assert points.shape == (200, 2)
    inside = [field_n2.locate(x) >= 0 for x in points]
    assert sum(inside) >= 100
    np.testing.assert_array_equal(points, sample_points(field_n2, 200, seed=1))


def test_reflections_are_isometries(field_n2):
    report = verify_symmetry(field_n2, 200, seed=3)
    assert report.passed
    assert len(report.per_generator) == 3
    assert report.max_residual <= 1e-10


def test_three_dimensional_reflections_are_isometries(construction_n3):
    report = verify_symmetry(construction_n3.field, 100, seed=4)
    assert report.passed


def test_unrotated_piece_breaks_symmetry(perturbed_field):
    report = verify_symmetry(perturbed_field, 200, seed=3)
    assert not report.passed
    assert report.max_residual > 1e-6


def test_residual_of_a_single_generator(field_n2):
    s = reflection(field_n2.rs.roots[2])
    points = np.array([field_n2.centers[k] + 0.3 * field_n2.radius * np.array([0.6, 0.8]) for k in range(6)])
    assert equivariance_residual(field_n2, s, points) <= 1e-10
