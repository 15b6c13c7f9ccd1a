"""
平滑性定数 L の計算

−∇²f は要素ごとに非負なので、既約なら Perron-Frobenius 固有値がスペクトル半径に一致し
L = λ_pf とおける。ヘッセ行列が x に依存する場合は、λ_pf の特徴付け
  minimize λ  s.t.  (λ⁻¹ vᵢ⁻¹) Σⱼ −∇²ᵢⱼf(x) vⱼ ≤ 1
を幾何計画 (GP) として組み立て、対数変数変換で凸化して解く。
"""
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from drsubmax.config import config
from drsubmax.errors import (
    ConvergenceError,
    DomainError,
    FormulationError,
    GPInfeasibleError,
    ModeUnsupportedError,
)
from drsubmax.numeric_core import Vector, as_sym_matrix

if TYPE_CHECKING:
    from drsubmax.feasible_sets import FeasibleSet
    from drsubmax.objectives import Objective


logger = logging.getLogger(__name__)

SMOOTHNESS_MODES = ("constant", "corner", "gp")


@dataclass(frozen=True)
class Posynomial:
    """Σₛ cₛ ∏ᵢ zᵢ^{aᵢₛ}（cₛ > 0）

    coefficients は長さ m、exponents は m × nvars の配列。
    """

    coefficients: NDArray[np.float64]
    exponents: NDArray[np.float64]

    def __post_init__(self):
        coefficients = np.atleast_1d(np.asarray(self.coefficients, dtype=np.float64))
        exponents = np.atleast_2d(np.asarray(self.exponents, dtype=np.float64))
        if coefficients.size == 0:
            raise FormulationError("posynomial must have at least one term")
        if exponents.shape[0] != coefficients.size:
            raise FormulationError("one exponent row per coefficient is required",
                                   terms=coefficients.size, rows=exponents.shape[0])
        if not np.all(coefficients > 0) or not np.all(np.isfinite(coefficients)):
            raise FormulationError("posynomial coefficients must be finite and strictly positive",
                                   coefficients=coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "exponents", exponents)

    @classmethod
    def monomial(cls, coefficient: float, exponents: ArrayLike) -> "Posynomial":
        return cls(np.array([coefficient]), np.atleast_2d(np.asarray(exponents, dtype=np.float64)))

    @classmethod
    def constant(cls, value: float, nvars: int) -> "Posynomial":
        return cls.monomial(value, np.zeros(nvars))

    @property
    def nvars(self) -> int:
        return self.exponents.shape[1]

    @property
    def is_monomial(self) -> bool:
        return self.coefficients.size == 1

    def __call__(self, z: ArrayLike) -> float:
        z = np.asarray(z, dtype=np.float64)
        if np.any(z <= 0):
            raise DomainError("posynomials are evaluated on the positive orthant")
        return float(np.sum(self.coefficients * np.prod(z ** self.exponents, axis=1)))

    def __add__(self, other: "Posynomial") -> "Posynomial":
        if other.nvars != self.nvars:
            raise FormulationError("posynomials over different variable counts")
        return Posynomial(np.concatenate([self.coefficients, other.coefficients]),
                          np.vstack([self.exponents, other.exponents]))

    def times_monomial(self, coefficient: float, exponents: ArrayLike) -> "Posynomial":
        """単項式との積"""
        return Posynomial(self.coefficients * coefficient, self.exponents + np.asarray(exponents, dtype=np.float64))

    def lift(self, nvars: int, offset: int = 0) -> "Posynomial":
        """変数を nvars 個の大きな空間の offset 以降へ埋め込む"""
        exps = np.zeros((self.coefficients.size, nvars))
        exps[:, offset:offset + self.nvars] = self.exponents
        return Posynomial(self.coefficients.copy(), exps)

    def log_value(self, y: NDArray[np.float64]) -> float:
        """log h(exp(y)) = logsumexp(A y + log c)"""
        return float(logsumexp(self.exponents @ y + np.log(self.coefficients)))

    def log_gradient(self, y: NDArray[np.float64]) -> NDArray[np.float64]:
        """log h(exp(y)) の y に関する勾配"""
        weights = softmax(self.exponents @ y + np.log(self.coefficients))
        return weights @ self.exponents

    def sup_over_box(self, lower: ArrayLike, upper: ArrayLike) -> float:
        """箱 [lower, upper] 上の上限（項ごとの上限の和）"""
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        total = 0.0
        for c, a in zip(self.coefficients, self.exponents):
            corner = np.where(a >= 0, upper, lower)
            with np.errstate(divide="ignore", over="ignore"):
                total += c * float(np.prod(np.where(a == 0, 1.0, corner ** a)))
        return total


@dataclass
class GPProblem:
    """幾何計画問題

    minimize objective(z) s.t. inequality(z) ≤ 1, equality(z) = 1, z ≻ 0
    """

    objective: Posynomial
    inequalities: List[Posynomial]
    equalities: List[Posynomial] = field(default_factory=list)
    variable_names: Optional[List[str]] = None

    def __post_init__(self):
        if not self.objective.is_monomial:
            raise FormulationError("GP objective must be a monomial")
        nvars = self.objective.nvars
        for p in list(self.inequalities) + list(self.equalities):
            if p.nvars != nvars:
                raise FormulationError("all GP posynomials must share the variable count")
        for p in self.equalities:
            if not p.is_monomial:
                raise FormulationError("GP equality constraints must be monomials")
        if self.variable_names is None:
            self.variable_names = [f"z{i}" for i in range(nvars)]

    @property
    def nvars(self) -> int:
        return self.objective.nvars


@dataclass
class GPSolution:
    """GP の解"""

    optimum: float
    variables: Vector
    max_violation: float
    bisections: int
    phase1_solves: int


@dataclass
class PFResult:
    """Perron-Frobenius 固有対"""

    eigenvalue: float
    eigvec: Vector
    residual: float
    iterations: int


@dataclass
class SmoothnessEstimate:
    """平滑性定数とその診断情報"""

    value: float
    mode: str
    residual: float
    iterations: int
    components: int = 1

    def to_dict(self) -> dict:
        return {"L": self.value, "mode": self.mode, "residual": self.residual,
                "iterations": self.iterations, "components": self.components}


def _check_nonnegative(matrix: NDArray[np.float64]) -> None:
    if np.any(matrix < 0):
        i, j = np.argwhere(matrix < 0)[0]
        raise DomainError(f"matrix must be entrywise nonnegative (entry ({i}, {j}) = {matrix[i, j]})")


def support_graph(matrix: NDArray[np.float64]) -> nx.Graph:
    """非対角成分の台から無向グラフを作る"""
    n = matrix.shape[0]
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    rows, cols = np.nonzero(np.triu(matrix, k=1) > 0)
    graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
    return graph


def is_irreducible(matrix: ArrayLike) -> bool:
    """非負対称行列の既約性（台グラフの連結性）"""
    m = as_sym_matrix(matrix)
    _check_nonnegative(m)
    if m.shape[0] == 1:
        return bool(m[0, 0] > 0)
    return nx.is_connected(support_graph(m))


def pf_eigenvalue(matrix: ArrayLike, tol: float = None, max_iter: int = None,
                  shift: Optional[float] = None) -> PFResult:
    """シフト付きべき乗法で Perron-Frobenius 固有対を求める

    M + εI を反復し（ε は固有ベクトルを変えず固有値を ε だけずらす）、
    レイリー商の残差 ‖Mv − λv‖/‖v‖ が tol·λ 以下になったら停止する。
    固有ベクトルは和が1になるよう正規化して返す。
    """
    tol = config.PF_TOL if tol is None else tol
    max_iter = config.PF_MAX_ITER if max_iter is None else max_iter
    m = as_sym_matrix(matrix)
    _check_nonnegative(m)
    n = m.shape[0]

    if shift is None:
        # 2周期（二部グラフ）を崩すには tol 程度のシフトでは足りない
        shift = 0.5 * float(m.sum(axis=1).max()) or 1.0
    shifted = m + shift * np.eye(n)

    v = np.full(n, 1.0 / n)
    best = PFResult(eigenvalue=0.0, eigvec=v, residual=math.inf, iterations=0)
    for iteration in range(1, max_iter + 1):
        w = shifted @ v
        rayleigh = float(v @ w) / float(v @ v)
        lam = rayleigh - shift
        residual = float(np.linalg.norm(w - rayleigh * v)) / float(np.linalg.norm(v))
        if residual < best.residual:
            best = PFResult(eigenvalue=lam, eigvec=v / v.sum(), residual=residual, iterations=iteration)
        if residual <= tol * max(abs(lam), np.finfo(float).tiny):
            logger.debug(f"べき乗法が収束: λ={lam:.12g}, 反復回数={iteration}, 残差={residual:.3e}")
            return best
        v = w / w.sum()

    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        best=best,
        residual=best.residual,
        eigenvalue=best.eigenvalue,
    )


def _pf_over_components(matrix: NDArray[np.float64], tol: float) -> Tuple[PFResult, int]:
    """既約でない場合は連結成分ごとの最大固有値（ブロック対角のスペクトル半径）"""
    n = matrix.shape[0]
    if n == 1 or is_irreducible(matrix):
        return pf_eigenvalue(matrix, tol=tol), 1

    components = [sorted(c) for c in nx.connected_components(support_graph(matrix))]
    logger.warning(f"−∇²f が既約ではないため {len(components)} 個の連結成分ごとに固有値を計算します")
    best: Optional[PFResult] = None
    iterations = 0
    for comp in components:
        block = matrix[np.ix_(comp, comp)]
        result = pf_eigenvalue(block, tol=tol)
        iterations += result.iterations
        if best is None or result.eigenvalue > best.eigenvalue:
            eigvec = np.zeros(n)
            eigvec[comp] = result.eigvec
            best = PFResult(result.eigenvalue, eigvec, result.residual, 0)
    best.iterations = iterations
    return best, len(components)


def build_pf_gp(obj: "Objective", feasible_set: "FeasibleSet") -> GPProblem:
    """−∇²f の固有値問題を変数 (x, v, λ) の GP として組み立てる

    制約: (λ⁻¹ vᵢ⁻¹) Σⱼ Pᵢⱼ(x) vⱼ ≤ 1（Pᵢⱼ は −∇²ᵢⱼf の posynomial 表現）、
    箱制約 xᵢ/ūᵢ ≤ 1（および l̄ᵢ > 0 なら l̄ᵢ/xᵢ ≤ 1）、正規化 ∏ vᵢ^{1/n} = 1。
    """
    entries: Dict[Tuple[int, int], Posynomial] = obj.neg_hessian_posynomials()
    n = obj.n
    nvars = 2 * n + 1
    lam = 2 * n

    rows: Dict[int, Posynomial] = {}
    for (i, j), entry in sorted(entries.items()):
        if entry.nvars != n:
            raise FormulationError(f"Hessian entry ({i}, {j}) is not a posynomial in x", entry=(i, j))
        shift = np.zeros(nvars)
        shift[n + j] += 1.0
        shift[n + i] -= 1.0
        shift[lam] -= 1.0
        term = entry.lift(nvars).times_monomial(1.0, shift)
        rows[i] = term if i not in rows else rows[i] + term

    inequalities = [rows[i] for i in sorted(rows)]
    lower, upper = feasible_set.bounding_box()
    for i in range(n):
        if np.isfinite(upper[i]) and upper[i] > 0:
            exps = np.zeros(nvars)
            exps[i] = 1.0
            inequalities.append(Posynomial.monomial(1.0 / upper[i], exps))
        if lower[i] > 0:
            exps = np.zeros(nvars)
            exps[i] = -1.0
            inequalities.append(Posynomial.monomial(lower[i], exps))

    normalization = np.zeros(nvars)
    normalization[n:2 * n] = 1.0 / n
    objective_exps = np.zeros(nvars)
    objective_exps[lam] = 1.0
    names = [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)] + ["lambda"]
    return GPProblem(
        objective=Posynomial.monomial(1.0, objective_exps),
        inequalities=inequalities,
        equalities=[Posynomial.monomial(1.0, normalization)],
        variable_names=names,
    )


class _LogSpaceGP:
    """対数変数 y = log z での GP（制約は log-sum-exp ≤ 0、目的は y の線形関数）"""

    def __init__(self, problem: GPProblem):
        self.problem = problem
        self.nvars = problem.nvars
        self.objective_exps = problem.objective.exponents[0]
        self.objective_log_c = float(np.log(problem.objective.coefficients[0]))
        self.eq_matrix = np.array([p.exponents[0] for p in problem.equalities]).reshape(-1, self.nvars)
        self.eq_offset = np.array([np.log(p.coefficients[0]) for p in problem.equalities])

    def log_objective(self, y: NDArray[np.float64]) -> float:
        return float(self.objective_exps @ y) + self.objective_log_c

    def violations(self, y: NDArray[np.float64], level: Optional[float]) -> NDArray[np.float64]:
        """各不等式制約の対数値（level があれば目的関数 − level も含む）"""
        values = [p.log_value(y) for p in self.problem.inequalities]
        if level is not None:
            values.append(self.log_objective(y) - level)
        return np.array(values)

    def max_violation(self, y: NDArray[np.float64], level: Optional[float]) -> float:
        ineq = self.violations(y, level)
        eq = np.abs(self.eq_matrix @ y + self.eq_offset) if self.eq_offset.size else np.zeros(0)
        return float(max(ineq.max(initial=-math.inf), eq.max(initial=-math.inf)))

    def phase1(self, y0: NDArray[np.float64], level: Optional[float], max_iter: int) -> NDArray[np.float64]:
        """min s s.t. 制約の対数値 ≤ s をエピグラフ形式で解く"""
        gradients = lambda y: [p.log_gradient(y) for p in self.problem.inequalities]

        def ineq_fun(z):
            y, s = z[:-1], z[-1]
            return s - self.violations(y, level)

        def ineq_jac(z):
            y = z[:-1]
            grads = gradients(y)
            if level is not None:
                grads.append(self.objective_exps)
            jac = np.hstack([-np.array(grads), np.ones((len(grads), 1))])
            return jac

        constraints = [{"type": "ineq", "fun": ineq_fun, "jac": ineq_jac}]
        if self.eq_offset.size:
            constraints.append({
                "type": "eq",
                "fun": lambda z: self.eq_matrix @ z[:-1] + self.eq_offset,
                "jac": lambda z: np.hstack([self.eq_matrix, np.zeros((self.eq_matrix.shape[0], 1))]),
            })

        s0 = float(self.violations(y0, level).max(initial=0.0)) + 1.0
        z0 = np.append(y0, s0)
        result = minimize(
            lambda z: z[-1],
            z0,
            jac=lambda z: np.append(np.zeros(self.nvars), 1.0),
            constraints=constraints,
            method="SLSQP",
            options={"maxiter": max_iter, "ftol": 1e-15},
        )
        y = result.x[:-1] if np.all(np.isfinite(result.x)) else y0
        # SLSQP が途中で止まっても、良くなっていれば採用する
        if self.max_violation(y, level) > self.max_violation(y0, level):
            return y0
        return y


def solve_gp(problem: GPProblem, tol: float = None) -> GPSolution:
    """対数変換 + 目的値の二分法 + phase-1 で GP を解く

    各水準 t について「目的 ≤ t かつ全制約を満たす点」が存在するかを phase-1 で判定し、
    実際に制約を満たす点が得られた水準だけを上側として採用する。
    """
    tol = config.GP_TOL if tol is None else tol
    feasibility_tol = 0.1 * tol
    max_iter = config.GP_PHASE1_MAX_ITER
    gp = _LogSpaceGP(problem)
    phase1_solves = 1

    y = gp.phase1(np.zeros(gp.nvars), None, max_iter)
    violation = gp.max_violation(y, None)
    if violation > feasibility_tol:
        raise GPInfeasibleError(
            f"geometric program is infeasible (best log-violation {violation:.3e})",
            best_violation=violation,
            point=np.exp(y),
        )

    hi_level, hi_point = gp.log_objective(y), y
    # 下側の実行不可能な水準を倍々で探す
    step = 1.0
    lo_level = hi_level - step
    for _ in range(64):
        candidate = gp.phase1(hi_point, lo_level, max_iter)
        phase1_solves += 1
        if gp.max_violation(candidate, lo_level) > feasibility_tol:
            break
        hi_level, hi_point = gp.log_objective(candidate), candidate
        step *= 2.0
        lo_level = hi_level - step
    else:
        raise ConvergenceError("geometric program appears unbounded below", best=np.exp(hi_point))

    bisections = 0
    while hi_level - lo_level > tol:
        if bisections >= config.GP_MAX_BISECTIONS:
            raise ConvergenceError(
                f"GP bisection did not reach tolerance {tol} in {bisections} steps",
                best=np.exp(hi_point),
                gap=hi_level - lo_level,
            )
        bisections += 1
        mid = 0.5 * (hi_level + lo_level)
        candidate = gp.phase1(hi_point, mid, max_iter)
        phase1_solves += 1
        if gp.max_violation(candidate, mid) <= feasibility_tol:
            hi_level, hi_point = min(mid, gp.log_objective(candidate)), candidate
        else:
            lo_level = mid

    optimum = math.exp(gp.log_objective(hi_point))
    logger.debug(f"GP の最適値: {optimum:.12g}（二分法 {bisections} 回、phase-1 {phase1_solves} 回）")
    return GPSolution(
        optimum=optimum,
        variables=np.exp(hi_point),
        max_violation=gp.max_violation(hi_point, None),
        bisections=bisections,
        phase1_solves=phase1_solves,
    )


def estimate_smoothness(obj: "Objective", feasible_set: "FeasibleSet", mode: str = None,
                        tol: float = None) -> SmoothnessEstimate:
    """平滑性定数 L とその診断情報を計算

    constant: 定数ヘッセ行列の λ_pf
    corner:   箱上での −∇²f の要素ごとの上限行列の λ_pf（λ_pf の単調性により上限として有効）
    gp:       build_pf_gp を solve_gp で解いた値
    """
    mode = config.SMOOTHNESS_MODE if mode is None else mode
    tol = config.PF_TOL if tol is None else tol
    if mode not in SMOOTHNESS_MODES:
        raise ModeUnsupportedError(f"unknown smoothness mode {mode!r}", mode=mode)

    lower, upper = feasible_set.bounding_box()
    if mode == "gp":
        try:
            solution = solve_gp(build_pf_gp(obj, feasible_set))
        except FormulationError as e:
            raise ModeUnsupportedError(f"gp mode needs posynomial Hessian entries: {e.message}", mode=mode) from e
        estimate = SmoothnessEstimate(solution.optimum, mode, solution.max_violation, solution.phase1_solves)
    else:
        if mode == "constant":
            if not obj.hessian_is_constant:
                raise ModeUnsupportedError(f"{obj.name} has an x-dependent Hessian; use corner or gp", mode=mode)
            matrix = -np.asarray(obj.hessian(obj.reference_point(lower, upper)))
        else:
            matrix = np.asarray(obj.neg_hessian_bound(lower, upper))
        if np.any(matrix < -1e-12):
            raise ModeUnsupportedError("−∇²f has negative entries; the objective is not DR-submodular", mode=mode)
        matrix = np.maximum(matrix, 0.0)
        result, components = _pf_over_components(matrix, tol)
        estimate = SmoothnessEstimate(result.eigenvalue, mode, result.residual, result.iterations, components)

    if estimate.value < obj.mu - 1e-9 * max(1.0, obj.mu):
        raise ConvergenceError(
            f"computed L={estimate.value} is below mu={obj.mu}, which contradicts mu <= L",
            best=estimate.value,
        )
    logger.info(f"平滑性定数 L={estimate.value:.10g}（mode={mode}, μ={obj.mu}）")
    return estimate


def smoothness_constant(obj: "Objective", feasible_set: "FeasibleSet", mode: str = None) -> float:
    """平滑性定数 L（スカラー）"""
    return estimate_smoothness(obj, feasible_set, mode).value


def default_mode(obj: "Objective") -> str:
    """定数ヘッセ行列なら constant、そうでなければ corner"""
    return "constant" if obj.hessian_is_constant else "corner"


def pf_matrix(entries: Sequence[Sequence[float]]) -> NDArray[np.float64]:
    """テストや CLI から非負対称行列を作るヘルパー"""
    m = as_sym_matrix(entries)
    _check_nonnegative(m)
    return m
