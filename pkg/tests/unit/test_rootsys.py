from math import factorial

import numpy as np
import pytest

from rootcloak.core.exceptions import ConfigInvalid, GeometryInvalid
from rootcloak.geometry.rootsys import (
    build_roots,
    build_weyl_group,
    default_chamber_point,
    dual_basis,
    reflection,
)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_root_count_and_lengths(n):
    rs = build_roots(n)
    assert rs.N == n * (n + 1) // 2
    np.testing.assert_allclose(np.linalg.norm(rs.roots, axis=1), np.sqrt(2.0), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pair_roots_are_differences(n):
    rs = build_roots(n)
    assert len(rs.pair_index) == n * (n - 1) // 2
    for (k, l), index in rs.pair_index.items():
        assert index >= n
        assert np.array_equal(rs.roots[index], rs.roots[k] - rs.roots[l])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gram_matches_ambient_vectors(n):
    rs = build_roots(n)
    np.testing.assert_allclose(rs.gram(), rs.ambient @ rs.ambient.T, atol=1e-12)
    np.testing.assert_allclose(rs.embedding @ rs.embedding.T, np.eye(n), atol=1e-12)
    assert abs(np.linalg.det(rs.roots[:n])) > 1e-9


def test_gram_values_n2():
    rs = build_roots(2)
    gram = rs.gram()
    np.testing.assert_allclose(np.diag(gram), [2.0, 2.0, 2.0], atol=1e-12)
    assert gram[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert rs.pair_index == {(0, 1): 2}


def test_rejects_small_dimension():
    with pytest.raises(ConfigInvalid):
        build_roots(1)


def test_dual_basis_pairs_with_first_roots():
    rs = build_roots(3)
    np.testing.assert_allclose(dual_basis(rs) @ rs.roots[:3].T, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_default_chamber_point_is_inside_the_chamber(n):
    rs = build_roots(n)
    point = default_chamber_point(rs)
    assert np.linalg.norm(point) == pytest.approx(1.0)
    assert np.all(rs.roots @ point > 0.1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_group_order(n):
    group = build_weyl_group(build_roots(n))
    assert group.order == factorial(n + 1)
    np.testing.assert_array_equal(group.elements[0], np.eye(n))


def test_group_elements_are_orthogonal_and_permute_roots():
    rs = build_roots(3)
    group = build_weyl_group(rs)
    for g in group.elements:
        np.testing.assert_allclose(g @ g.T, np.eye(3), atol=1e-12)
        images = [rs.match_root(g @ v) for v in rs.roots]
        assert None not in images
        assert sorted(j for j, _ in images) == list(range(rs.N))


def test_generators_are_reflections():
    rs = build_roots(3)
    group = build_weyl_group(rs)
    for v, s in zip(rs.roots, group.generators):
        np.testing.assert_allclose(s @ v, -v, atol=1e-12)
        np.testing.assert_allclose(s @ s, np.eye(3), atol=1e-12)
        perpendicular = np.linalg.svd(v[None, :])[2][1:]
        np.testing.assert_allclose(perpendicular @ s.T, perpendicular, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_centers_are_distinct(n):
    group = build_weyl_group(build_roots(n))
    distances = np.linalg.norm(group.centers[:, None] - group.centers[None, :], axis=-1)
    np.fill_diagonal(distances, np.inf)
    assert distances.min() > 1e-3
    np.testing.assert_allclose(group.centers[0], group.chamber_point)


def test_reflection_pairs_cover_all_balls():
    rs = build_roots(2)
    group = build_weyl_group(rs)
    for k in range(rs.N):
        pairs = group.reflection_pairs(k)
        assert len(pairs) == 3
        assert sorted(i for pair in pairs for i in pair) == list(range(6))


def test_ball_permutation():
    rs = build_roots(2)
    group = build_weyl_group(rs)
    perm = group.ball_permutation(reflection(rs.roots[0]))
    assert sorted(perm) == list(range(6))
    assert np.all(perm[perm] == np.arange(6))


def test_chamber_point_outside_chamber_is_rejected():
    rs = build_roots(2)
    with pytest.raises(GeometryInvalid):
        build_weyl_group(rs, -default_chamber_point(rs))


def test_chamber_point_with_wrong_length_is_rejected():
    rs = build_roots(2)
    with pytest.raises(ConfigInvalid):
        build_weyl_group(rs, np.ones(3))


def test_match_root():
    rs = build_roots(3)
    assert rs.match_root(-rs.roots[4]) == (4, -1)
    assert rs.match_root(rs.roots[2]) == (2, 1)
    assert rs.match_root(np.ones(3)) is None
