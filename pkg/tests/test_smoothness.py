"""
Perron-Frobenius 固有値・幾何計画・平滑性定数のテスト
"""
import numpy as np
import pytest

from drsubmax.errors import (
    ConvergenceError,
    DomainError,
    FormulationError,
    GPInfeasibleError,
    ModeUnsupportedError,
)
from drsubmax.feasible_sets import BoxSet, SimplexSet
from drsubmax.graphs import Graph
from drsubmax.objectives import (
    MeanFieldKLObjective,
    NegativeDependencePoly,
    PowerTerm,
    QuadraticObjective,
    QuadraticTerm,
    StabilityObjective,
)
from drsubmax.oracles import jacobi_max_eigenvalue
from drsubmax.smoothness import (
    GPProblem,
    Posynomial,
    build_pf_gp,
    default_mode,
    estimate_smoothness,
    is_irreducible,
    pf_eigenvalue,
    pf_matrix,
    smoothness_constant,
    solve_gp,
)


class TestPerronFrobenius:
    """べき乗法"""

    def test_two_by_two(self):
        result = pf_eigenvalue([[2.0, 1.0], [1.0, 2.0]])
        assert result.eigenvalue == pytest.approx(3.0, rel=1e-9)
        np.testing.assert_allclose(result.eigvec, [0.5, 0.5])

    def test_complete_graph(self):
        K3 = Graph.complete(3).adjacency_matrix()
        assert pf_eigenvalue(2.0 * (K3 + np.eye(3))).eigenvalue == pytest.approx(6.0, rel=1e-9)

    def test_bipartite_matrix(self):
        # 周期 2 の行列でもシフトにより収束する
        assert pf_eigenvalue([[0.0, 1.0], [1.0, 0.0]]).eigenvalue == pytest.approx(1.0, rel=1e-9)

    def test_agrees_with_jacobi(self, rng):
        M = rng.uniform(0.0, 1.0, size=(6, 6))
        M = M + M.T
        expected = jacobi_max_eigenvalue(M)
        assert pf_eigenvalue(M).eigenvalue == pytest.approx(expected, rel=1e-8)
        assert expected == pytest.approx(float(np.max(np.linalg.eigvalsh(M))), rel=1e-10)

    def test_eigvec_is_positive_and_normalized(self, rng):
        M = rng.uniform(0.1, 1.0, size=(4, 4))
        result = pf_eigenvalue(M + M.T)
        assert np.all(result.eigvec > 0)
        assert result.eigvec.sum() == pytest.approx(1.0)

    def test_non_convergence_reports_best(self):
        with pytest.raises(ConvergenceError) as excinfo:
            pf_eigenvalue([[3.0, 1.0], [1.0, 1.0]], max_iter=1)
        assert excinfo.value.best.iterations == 1

    def test_negative_entries(self):
        with pytest.raises(DomainError):
            pf_eigenvalue([[1.0, -1.0], [-1.0, 1.0]])

    def test_irreducibility(self):
        assert is_irreducible([[0.0, 1.0], [1.0, 0.0]])
        assert not is_irreducible(np.eye(2))
        assert not is_irreducible([[0.0]])
        assert is_irreducible([[2.0]])

    def test_pf_matrix_rejects_negative(self):
        with pytest.raises(DomainError):
            pf_matrix([[1.0, -0.5], [-0.5, 1.0]])


class TestPosynomial:
    """posynomial の基本演算"""

    def test_evaluate_and_add(self):
        p = Posynomial.monomial(2.0, [1.0, -1.0]) + Posynomial.constant(1.0, 2)
        assert p([2.0, 4.0]) == pytest.approx(2.0)
        assert not p.is_monomial

    def test_log_value(self):
        p = Posynomial.monomial(3.0, [2.0])
        y = np.array([np.log(2.0)])
        assert p.log_value(y) == pytest.approx(np.log(12.0))
        np.testing.assert_allclose(p.log_gradient(y), [2.0])

    def test_sup_over_box(self):
        p = Posynomial.monomial(1.0, [1.0, -1.0])
        assert p.sup_over_box([0.5, 0.25], [2.0, 1.0]) == pytest.approx(8.0)

    def test_rejects_nonpositive_coefficients(self):
        with pytest.raises(FormulationError):
            Posynomial.monomial(-1.0, [1.0])

    def test_gp_objective_must_be_monomial(self):
        with pytest.raises(FormulationError):
            GPProblem(objective=Posynomial.constant(1.0, 1) + Posynomial.monomial(1.0, [1.0]), inequalities=[])


class TestSolveGP:
    """幾何計画の求解"""

    def test_simple_lower_bound(self):
        # minimize λ s.t. 3λ⁻¹ ≤ 1
        problem = GPProblem(
            objective=Posynomial.monomial(1.0, [1.0]),
            inequalities=[Posynomial.monomial(3.0, [-1.0])],
        )
        solution = solve_gp(problem)
        assert solution.optimum == pytest.approx(3.0, rel=1e-6)
        assert solution.max_violation <= 1e-8

    def test_infeasible(self):
        problem = GPProblem(
            objective=Posynomial.monomial(1.0, [1.0]),
            inequalities=[Posynomial.constant(2.0, 1)],
        )
        with pytest.raises(GPInfeasibleError):
            solve_gp(problem)

    def test_pf_gp_for_constant_hessian(self, monotone_quadratic, unit_box_2d):
        problem = build_pf_gp(monotone_quadratic, unit_box_2d)
        assert problem.nvars == 5
        assert problem.variable_names[-1] == "lambda"
        assert solve_gp(problem).optimum == pytest.approx(3.0, rel=1e-6)


class TestEstimateSmoothness:
    """平滑性定数 L の各モード"""

    def test_constant_mode(self, monotone_quadratic, unit_box_2d):
        estimate = estimate_smoothness(monotone_quadratic, unit_box_2d, "constant")
        assert estimate.value == pytest.approx(3.0, rel=1e-9)
        assert estimate.to_dict()["mode"] == "constant"
        assert smoothness_constant(monotone_quadratic, unit_box_2d, "corner") == pytest.approx(3.0, rel=1e-9)

    def test_gp_mode_matches_constant(self, monotone_quadratic, unit_box_2d):
        assert smoothness_constant(monotone_quadratic, unit_box_2d, "gp") == pytest.approx(3.0, rel=1e-6)

    def test_gp_mode_is_at_most_corner(self):
        cubic = NegativeDependencePoly([QuadraticTerm(2.0, 1.0)] * 3, [([0, 1, 2], -1.0)])
        box = BoxSet.unit(3)
        corner = smoothness_constant(cubic, box, "corner")
        assert corner == pytest.approx(3.0, rel=1e-9)
        gp = smoothness_constant(cubic, box, "gp")
        assert 1.0 - 1e-6 <= gp <= corner + 1e-6

    def test_stability_triangle_square_triangle(self, tst_objective, simplex_10):
        L = smoothness_constant(tst_objective, simplex_10, "constant")
        expected = float(np.max(np.linalg.eigvalsh(-tst_objective.hessian(np.full(10, 0.1)))))
        assert L == pytest.approx(expected, rel=1e-8)

    def test_reducible_hessian(self):
        obj = StabilityObjective.from_graph(Graph.empty(2))
        estimate = estimate_smoothness(obj, SimplexSet(2, 1.0), "constant")
        assert estimate.value == pytest.approx(2.0)
        assert estimate.components == 2

    def test_constant_mode_needs_constant_hessian(self):
        poly = NegativeDependencePoly([PowerTerm(1.0, 0.5)], lower=0.1, upper=1.0)
        with pytest.raises(ModeUnsupportedError):
            estimate_smoothness(poly, BoxSet([0.1], [1.0]), "constant")
        assert default_mode(poly) == "corner"

    def test_gp_mode_unsupported_for_mean_field(self, rng):
        obj = MeanFieldKLObjective.facility_location(rng.uniform(0.0, 1.0, size=(2, 2)))
        with pytest.raises(ModeUnsupportedError):
            estimate_smoothness(obj, BoxSet([0.05] * 2, [0.95] * 2), "gp")

    def test_not_dr_submodular(self, unit_box_2d):
        obj = QuadraticObjective([[-2.0, 1.0], [1.0, -2.0]], [4.0, 4.0])
        with pytest.raises(ModeUnsupportedError):
            estimate_smoothness(obj, unit_box_2d, "constant")
        with pytest.raises(ModeUnsupportedError):
            estimate_smoothness(obj, unit_box_2d, "gp")

    def test_L_below_mu(self, unit_interval):
        obj = QuadraticObjective([[-2.0]], [2.0], mu=5.0)
        with pytest.raises(ConvergenceError):
            estimate_smoothness(obj, unit_interval, "constant")

    def test_unknown_mode(self, monotone_quadratic, unit_box_2d):
        with pytest.raises(ModeUnsupportedError):
            estimate_smoothness(monotone_quadratic, unit_box_2d, "spectral")
