"""
許容集合（箱型・単体・予算付き箱型）のテスト
"""
import math

import numpy as np
import pytest

from drsubmax.errors import DimensionMismatchError, DomainError
from drsubmax.feasible_sets import BoxSet, BudgetBoxSet, SimplexSet
from drsubmax.objectives import QuadraticObjective
from drsubmax.oracles import grid_maximize
from drsubmax.utils import make_rng


class TestBoxSet:
    """箱型集合"""

    def test_project_clips(self):
        box = BoxSet([0.0, 0.5], [1.0, 2.0])
        np.testing.assert_array_equal(box.project([-1.0, 3.0]), [0.0, 2.0])

    def test_linear_max_prefers_lower_on_ties(self):
        box = BoxSet([0.0, 0.0, 0.25], [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(box.linear_max([1.0, -1.0, 0.0]), [1.0, 0.0, 0.25])

    def test_diameter(self):
        assert BoxSet.unit(2).diameter() == pytest.approx(math.sqrt(2.0))

    def test_corners(self):
        box = BoxSet([0.25], [0.75])
        assert box.lower_corner()[0] == 0.25
        assert box.upper_corner()[0] == 0.75
        assert not box.contains_origin()

    def test_reg_linear_max_is_projection(self):
        box = BoxSet.unit(2)
        np.testing.assert_allclose(box.reg_linear_max([1.0, 4.0], 2.0), [0.5, 1.0])

    def test_reg_linear_max_rejects_zero_alpha(self):
        with pytest.raises(ValueError):
            BoxSet.unit(2).reg_linear_max([1.0, 1.0], 0.0)

    def test_invalid_bounds(self):
        with pytest.raises(DomainError):
            BoxSet([1.0], [0.0])
        with pytest.raises(DomainError):
            BoxSet([-1.0], [1.0])

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            BoxSet.unit(2).project([1.0, 2.0, 3.0])


class TestSimplexSet:
    """単体"""

    def test_project_uniform(self):
        simplex = SimplexSet(3, 1.0)
        np.testing.assert_allclose(simplex.project([0.5, 0.5, 0.5]), [1 / 3, 1 / 3, 1 / 3])

    def test_project_keeps_feasible_point(self):
        simplex = SimplexSet(3, 2.0)
        x = np.array([1.0, 0.5, 0.5])
        np.testing.assert_allclose(simplex.project(x), x)

    def test_project_sparse(self):
        simplex = SimplexSet(2, 1.0)
        np.testing.assert_allclose(simplex.project([3.0, 0.0]), [1.0, 0.0])

    def test_linear_max_vertex(self):
        simplex = SimplexSet(3, 2.0)
        np.testing.assert_array_equal(simplex.linear_max([0.1, 0.3, 0.3]), [0.0, 2.0, 0.0])

    def test_diameter(self):
        assert SimplexSet(3, 2.0).diameter() == pytest.approx(2.0 * math.sqrt(2.0))
        assert SimplexSet(1, 1.0).diameter() == 0.0

    def test_contains(self):
        simplex = SimplexSet(2, 1.0)
        assert simplex.contains([0.5, 0.5])
        assert not simplex.contains([0.5, 0.4])
        assert not simplex.contains_origin()

    def test_invalid_radius(self):
        with pytest.raises(DomainError):
            SimplexSet(2, 0.0)


class TestBudgetBoxSet:
    """予算付き箱型"""

    def test_project_over_budget(self, budget_box_3):
        np.testing.assert_allclose(budget_box_3.project([1.0, 1.0, 1.0]), [2 / 3, 2 / 3, 2 / 3], atol=1e-9)

    def test_project_within_budget_is_clip(self, budget_box_3):
        np.testing.assert_allclose(budget_box_3.project([0.5, -0.2, 3.0]), [0.5, 0.0, 1.0])

    def test_linear_max_greedy(self):
        budget_box = BudgetBoxSet.uniform(3, 1.5)
        np.testing.assert_allclose(budget_box.linear_max([3.0, 1.0, 2.0]), [1.0, 0.0, 0.5])

    def test_linear_max_ignores_nonpositive(self, budget_box_3):
        np.testing.assert_array_equal(budget_box_3.linear_max([-1.0, 0.0, 1.0]), [0.0, 0.0, 1.0])

    def test_diameter_bound(self):
        assert BudgetBoxSet.uniform(3, 1.0).diameter() == pytest.approx(math.sqrt(2.0))
        assert BudgetBoxSet.uniform(3, 5.0).diameter() == pytest.approx(math.sqrt(3.0))

    def test_upper_corner_capped_by_budget(self):
        np.testing.assert_array_equal(BudgetBoxSet(0.5, [1.0, 0.25]).upper_corner(), [0.5, 0.25])

    def test_invalid_budget(self):
        with pytest.raises(DomainError):
            BudgetBoxSet.uniform(2, 0.0)


@pytest.mark.parametrize("feasible_set", [
    BoxSet([0.1, 0.0, 0.2], [0.9, 1.0, 0.5]),
    SimplexSet(3, 1.5),
    BudgetBoxSet.uniform(3, 1.2),
])
def test_samples_and_projections_are_feasible(feasible_set):
    """サンプルと射影が集合に含まれる"""
    rng = np.random.default_rng(7)
    samples = feasible_set.sample(rng, 50)
    assert np.all(feasible_set.contains_batch(samples, 1e-9))
    for y in rng.normal(0.0, 2.0, size=(20, 3)):
        assert feasible_set.contains(feasible_set.project(y), tol=1e-8)


@pytest.mark.parametrize("feasible_set", [
    BoxSet.unit(3),
    SimplexSet(3, 1.0),
    BudgetBoxSet.uniform(3, 1.5),
])
def test_linear_max_beats_samples(feasible_set):
    """LMO の値がサンプル点の値以上"""
    rng = np.random.default_rng(3)
    w = rng.normal(size=3)
    best = float(np.dot(w, feasible_set.linear_max(w)))
    values = feasible_set.sample(rng, 200) @ w
    assert np.all(values <= best + 1e-12)


SETS_3D = [
    BoxSet([0.1, 0.0, 0.2], [0.9, 1.0, 0.5]),
    SimplexSet(3, 1.5),
    BudgetBoxSet.uniform(3, 1.2),
]


@pytest.mark.parametrize("feasible_set", SETS_3D, ids=["box", "simplex", "budget_box"])
class TestProjectionProperties:
    """射影の冪等性・非拡大性と格子上の全探索との一致"""

    def test_idempotent(self, feasible_set):
        rng = make_rng(11)
        for y in rng.normal(0.0, 2.0, size=(1000, 3)):
            p = feasible_set.project(y)
            np.testing.assert_allclose(feasible_set.project(p), p, atol=1e-8)

    def test_nonexpansive(self, feasible_set):
        rng = make_rng(12)
        points = rng.normal(0.0, 2.0, size=(1000, 2, 3))
        for y, z in points:
            gap = np.linalg.norm(feasible_set.project(y) - feasible_set.project(z))
            assert gap <= np.linalg.norm(y - z) + 1e-8

    def test_projection_is_closest_grid_point(self, feasible_set):
        # 格子点は集合に含まれるので、どの格子点も射影より y に近くはない
        rng = make_rng(13)
        for y in rng.normal(0.0, 2.0, size=(100, 3)):
            distance_sq = float(np.sum((y - feasible_set.project(y)) ** 2))
            nearest = grid_maximize(QuadraticObjective(-2.0 * np.eye(3), 2.0 * y, -float(y @ y)),
                                    feasible_set, 0.05)
            assert distance_sq <= -nearest.value + 1e-8

    def test_linear_max_beats_grid(self, feasible_set):
        rng = make_rng(14)
        for w in rng.normal(size=(100, 3)):
            best = float(np.dot(w, feasible_set.linear_max(w)))
            assert best >= grid_maximize(QuadraticObjective.linear(w), feasible_set, 0.05).value - 1e-8
