import numpy as np
import pytest

from palgp import designs
from palgp.exceptions import RegionTooSmallError
from palgp.partition import DesignSpace, ExplicitRuleClassifier

UNIT = DesignSpace([0.0], [1.0])
SQUARE = DesignSpace([0.0, 0.0], [1.0, 1.0])


def assert_stratified(points, space):
    U = space.normalize(points)
    n = U.shape[0]
    for j in range(U.shape[1]):
        strata = np.floor(U[:, j] * n).astype(int)
        strata = np.clip(strata, 0, n - 1)
        assert sorted(strata) == list(range(n))


def test_lhd_single_point():
    batch = designs.lhd_maximin(UNIT, 1, seed=0)
    assert batch.points.shape == (1, 1)
    assert 0.0 <= batch.points[0, 0] <= 1.0


def test_lhd_stratification_1d():
    batch = designs.lhd_maximin(UNIT, 5, seed=1)
    assert_stratified(batch.points, UNIT)


def test_lhd_stratification_2d_many_seeds():
    for seed in range(10):
        batch = designs.lhd_maximin(SQUARE, 20, seed=seed)
        assert_stratified(batch.points, SQUARE)


def test_lhd_respects_bounds():
    space = DesignSpace([-2.0, 3.0], [6.0, 4.0])
    pts = designs.lhd_maximin(space, 50, seed=2).points
    assert np.all(pts >= space.lower) and np.all(pts <= space.upper)


def test_maximin_beats_plain_lhd():
    wins = 0
    for seed in range(50):
        plain = designs.lhd_maximin(SQUARE, 20, seed=seed, restarts=1).points
        optimized = designs.lhd_maximin(SQUARE, 20, seed=seed).points

        def min_dist(P):
            d = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
            return d[np.triu_indices(20, 1)].min()

        if min_dist(optimized) >= min_dist(plain):
            wins += 1
    assert wins >= 45


def test_lhd_deterministic():
    a = designs.lhd_maximin(SQUARE, 15, seed=7).points
    b = designs.lhd_maximin(SQUARE, 15, seed=7).points
    assert np.array_equal(a, b)


def test_uniform_random_basics():
    assert designs.uniform_random(UNIT, 0, seed=0).points.shape == (0, 1)
    pts = designs.uniform_random(UNIT, 10_000, seed=3).points
    assert abs(pts.mean() - 0.5) < 0.02
    again = designs.uniform_random(UNIT, 10_000, seed=3).points
    assert np.array_equal(pts, again)


def test_grid_cell_centers():
    pts = designs.grid(UNIT, 4).points
    assert np.allclose(pts[:, 0], [0.125, 0.375, 0.625, 0.875])
    pts2 = designs.grid(SQUARE, 3).points
    assert pts2.shape == (9, 2)


def test_filter_to_region():
    g = ExplicitRuleClassifier(UNIT, [[(0, "lt", 0.5)], [(0, "ge", 0.5)]])
    batch = designs.DesignBatch(np.array([[0.2], [0.7]]), "grid", 0)
    kept = designs.filter_to_region(batch, g, 2)
    assert np.allclose(kept.points, [[0.7]])
    kept1 = designs.filter_to_region(batch, g, 1)
    # filtered pieces together reconstruct the batch
    assert sorted(np.vstack([kept1.points, kept.points])[:, 0]) == [0.2, 0.7]


def test_region_lhd_all_points_inside():
    g = ExplicitRuleClassifier(UNIT, [[(0, "lt", 0.5)], [(0, "ge", 0.5)]])
    batch = designs.region_lhd(UNIT, g, 2, 40, seed=4)
    assert batch.points.shape == (40, 1)
    assert np.all(g.labels(batch.points) == 2)


def test_region_lhd_deterministic():
    g = ExplicitRuleClassifier(UNIT, [[(0, "lt", 0.5)], [(0, "ge", 0.5)]])
    a = designs.region_lhd(UNIT, g, 1, 25, seed=5).points
    b = designs.region_lhd(UNIT, g, 1, 25, seed=5).points
    assert np.array_equal(a, b)


def test_region_lhd_tiny_region_errors():
    # region 1 is a 1e-4-wide sliver: rejection cap must trigger
    g = ExplicitRuleClassifier(UNIT, [[(0, "lt", 1e-4)], [(0, "ge", 1e-4)]])
    with pytest.raises(RegionTooSmallError):
        designs.region_lhd(UNIT, g, 1, 50, seed=6, restarts=1)
