"""
独立した総当たり・数値オラクル

受け入れテストと CLI の check サブコマンドで使う。
最適化アルゴリズム本体とは別の方法で同じ量を計算し、結果を突き合わせる。
"""
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from drsubmax.config import config
from drsubmax.errors import ConvergenceError, PreconditionError
from drsubmax.feasible_sets import BoxSet, FeasibleSet
from drsubmax.numeric_core import Vector, as_sym_matrix, join, meet
from drsubmax.utils import make_rng

if TYPE_CHECKING:
    from drsubmax.graphs import Graph
    from drsubmax.objectives import Objective


logger = logging.getLogger(__name__)

GRID_MAX_DIMENSION = 4
EXACT_STABILITY_MAX_VERTICES = 30
BRUTE_FORCE_MAX_VERTICES = 20
# レポートに保存する違反例の上限
MAX_RECORDED_VIOLATIONS = 20


@dataclass
class CheckReport:
    """標本ごとの不等式チェックの結果

    excess は「左辺 − 右辺」で、許容誤差を超えた標本を違反として記録する。
    """

    name: str
    checked: int = 0
    violation_count: int = 0
    max_excess: float = -math.inf
    violations: List[Dict[str, Any]] = field(default_factory=list)
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def record(self, excess: float, tol: float, **context) -> bool:
        """1標本の結果を記録し、違反なら False を返す"""
        self.checked += 1
        self.max_excess = max(self.max_excess, float(excess))
        if excess <= tol:
            return True
        self.violation_count += 1
        if len(self.violations) < MAX_RECORDED_VIOLATIONS:
            self.violations.append({
                "excess": float(excess),
                **{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in context.items()},
            })
        return False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "violation_count": self.violation_count,
            "max_excess": self.max_excess,
            "violations": self.violations,
            "notes": self.notes,
        }


@dataclass
class GridOptimum:
    """格子上の最良点"""

    point: Vector
    value: float
    resolution: float
    evaluated: int


def _scaled_tol(tol: float, *values: float) -> float:
    return tol * max(1.0, *(abs(v) for v in values))


def finite_diff_gradient(obj: "Objective", x: ArrayLike, h: float = 1e-6) -> Vector:
    """中心差分による勾配"""
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty(x.size)
    for i in range(x.size):
        step = np.zeros(x.size)
        step[i] = h
        grad[i] = (obj.value(x + step) - obj.value(x - step)) / (2.0 * h)
    return grad


def _axis_values(low: float, high: float, resolution: float) -> NDArray[np.float64]:
    count = max(1, int(math.ceil((high - low) / resolution - 1e-12)))
    return np.linspace(low, high, count + 1) if high > low else np.array([low])


def grid_maximize(obj: "Objective", feasible_set: FeasibleSet, resolution: float = None) -> GridOptimum:
    """外接箱上の格子点のうち許容なものの最大値（n ≤ 4）

    単体では最後の座標を 1ᵀx = s から決めるので、格子点が集合上に乗る。
    先頭座標ごとにまとめて評価する。
    """
    resolution = config.GRID_RESOLUTION if resolution is None else resolution
    n = feasible_set.n
    if n > GRID_MAX_DIMENSION:
        raise PreconditionError(f"grid_maximize supports n <= {GRID_MAX_DIMENSION}", n=n)
    if not resolution > 0:
        raise PreconditionError("resolution must be positive", resolution=resolution)

    lower, upper = feasible_set.bounding_box()
    on_simplex = feasible_set.kind == "simplex"
    free = n - 1 if on_simplex else n
    axes = [_axis_values(lower[i], upper[i], resolution) for i in range(free)]
    tol = config.FEASIBILITY_TOL

    best_value, best_point, evaluated = -math.inf, None, 0
    leading = axes[0] if free > 0 else np.array([0.0])
    if free > 1:
        mesh = np.meshgrid(*axes[1:], indexing="ij")
        rest = np.stack([m.ravel() for m in mesh], axis=1)
    for first in leading:
        if free > 1:
            points = np.hstack([np.full((rest.shape[0], 1), first), rest])
        elif free == 1:
            points = np.array([[first]])
        else:
            points = np.zeros((1, 0))
        if on_simplex:
            last = feasible_set.radius - points.sum(axis=1, keepdims=True)
            points = np.hstack([points, last])
            points = points[points[:, -1] >= -tol]
            points[:, -1] = np.maximum(points[:, -1], 0.0)
        points = points[feasible_set.contains_batch(points, tol)]
        if points.shape[0] == 0:
            continue
        values = obj.value_batch(points)
        evaluated += points.shape[0]
        index = int(np.argmax(values))
        if values[index] > best_value:
            best_value, best_point = float(values[index]), points[index].copy()

    if best_point is None:
        raise PreconditionError("no grid point is feasible; use a finer resolution")
    logger.debug(f"格子最大化: {evaluated} 点を評価、最大値 {best_value:.12g}")
    return GridOptimum(point=best_point, value=best_value, resolution=resolution, evaluated=evaluated)


def grid_gap_bound(L: float, diameter: float, resolution: float, n: int) -> float:
    """格子最適値と真の最適値の差の上界 L·R·resolution·√n"""
    return L * diameter * resolution * math.sqrt(n)


def _complement_masks(graph: "Graph") -> List[int]:
    full = (1 << graph.n) - 1
    adjacency = [0] * graph.n
    for u, v in graph.edges:
        adjacency[u - 1] |= 1 << (v - 1)
        adjacency[v - 1] |= 1 << (u - 1)
    return [full & ~adjacency[v] & ~(1 << v) for v in range(graph.n)]


def exact_stability_number(graph: "Graph") -> int:
    """補グラフの最大クリークを分枝限定法で求めて s(G) を返す（n ≤ 30）

    上界は貪欲彩色の色数で与える。
    """
    if graph.n > EXACT_STABILITY_MAX_VERTICES:
        raise PreconditionError(f"exact stability number supports n <= {EXACT_STABILITY_MAX_VERTICES}",
                                n=graph.n)
    if graph.n == 0:
        return 0
    neighbors = _complement_masks(graph)
    best = 0

    def color_sort(candidates: int):
        order, bounds = [], []
        uncolored = candidates
        color = 0
        while uncolored:
            color += 1
            available = uncolored
            while available:
                v = (available & -available).bit_length() - 1
                available &= ~(1 << v) & ~neighbors[v]
                uncolored &= ~(1 << v)
                order.append(v)
                bounds.append(color)
        return order, bounds

    def expand(size: int, candidates: int) -> None:
        nonlocal best
        order, bounds = color_sort(candidates)
        for v, bound in zip(reversed(order), reversed(bounds)):
            if size + bound <= best:
                return
            remaining = candidates & neighbors[v]
            if remaining:
                expand(size + 1, remaining)
            elif size + 1 > best:
                best = size + 1
            candidates &= ~(1 << v)

    expand(0, (1 << graph.n) - 1)
    return best


def brute_force_stability_number(graph: "Graph") -> int:
    """2ⁿ 通りの頂点集合を列挙して s(G) を返す（n ≤ 20）"""
    if graph.n > BRUTE_FORCE_MAX_VERTICES:
        raise PreconditionError(f"brute force supports n <= {BRUTE_FORCE_MAX_VERTICES}", n=graph.n)
    masks = np.arange(1 << graph.n, dtype=np.int64)
    independent = np.ones(masks.size, dtype=bool)
    for u, v in graph.edges:
        independent &= ((masks >> (u - 1)) & (masks >> (v - 1)) & 1) == 0
    sizes = sum((masks >> i) & 1 for i in range(graph.n)) if graph.n else np.zeros(1, dtype=np.int64)
    return int(np.max(sizes[independent]))


def jacobi_max_eigenvalue(matrix: ArrayLike, tol: float = 1e-14, max_sweeps: int = 100) -> float:
    """巡回 Jacobi 法による対称行列の最大固有値"""
    A = np.array(as_sym_matrix(matrix), dtype=np.float64)
    n = A.shape[0]
    scale = max(float(np.linalg.norm(A)), np.finfo(float).tiny)
    off_diagonal = ~np.eye(n, dtype=bool)

    for sweep in range(max_sweeps):
        off = math.sqrt(float(np.sum(A[off_diagonal] ** 2)))
        if off <= tol * scale:
            logger.debug(f"Jacobi 法が {sweep} スイープで収束")
            return float(np.max(np.diag(A)))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                A[p, q] = A[q, p] = 0.0

    raise ConvergenceError(f"Jacobi rotations did not converge in {max_sweeps} sweeps",
                           best=float(np.max(np.diag(A))))


def _pairs(feasible_set: FeasibleSet, samples: int, seed: int):
    rng = make_rng(seed)
    return zip(feasible_set.sample(rng, samples), feasible_set.sample(rng, samples))


def lemma2_check(obj: "Objective", feasible_set: FeasibleSet, c_f: float, mu: float,
                 samples: int = None, seed: int = None, tol: float = None) -> CheckReport:
    """f(z) − (1+c_f)f(x) ≤ ⟨∇f(x), z−x⟩ − (μ/2)‖z−x‖² をランダムな許容点の組で検査

    u = x ∨ z, w = x ∧ z について f(u) + f(w) − 2f(x) ≤ 同じ右辺 も併せて確認する。
    f が負になる標本は notes に数える。
    """
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    tol = config.ORACLE_TOL if tol is None else tol
    report = CheckReport(name="lemma2")
    report.notes["negative_values"] = 0
    for x, z in _pairs(feasible_set, samples, seed):
        fx, fz = obj.value(x), obj.value(z)
        if min(fx, fz) < -tol:
            report.notes["negative_values"] += 1
        d = z - x
        rhs = float(obj.gradient(x) @ d) - 0.5 * mu * float(d @ d)
        report.record(fz - (1.0 + c_f) * fx - rhs, _scaled_tol(tol, fx, fz), x=x, z=z, kind="main")
        fu, fw = obj.value(join(x, z)), obj.value(meet(x, z))
        report.record(fu + fw - 2.0 * fx - rhs, _scaled_tol(tol, fu, fw, fx), x=x, z=z, kind="join_meet")
    if report.notes["negative_values"]:
        logger.warning(f"{obj.name} は {report.notes['negative_values']} 個の標本で負の値を取ります")
    return report


def monotonicity_check(obj: "Objective", feasible_set: FeasibleSet, samples: int = None,
                       seed: int = None, tol: float = None) -> CheckReport:
    """許容点で ∇f ⪰ −tol を検査（ū の射影も含める）"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    tol = config.ORACLE_TOL if tol is None else tol
    report = CheckReport(name="monotonicity")
    points = np.vstack([
        feasible_set.project(feasible_set.upper_corner())[None, :],
        feasible_set.sample(make_rng(seed), samples),
    ])
    for x in points:
        grad = obj.gradient(x)
        report.record(float(np.max(-grad)), tol, x=x)
    return report


def _box_pairs(box: BoxSet, samples: int, seed: int):
    rng = make_rng(seed)
    return zip(box.sample(rng, samples), box.sample(rng, samples))


def lemma1_check(obj: "Objective", box: BoxSet, mu: float, samples: int = None,
                 seed: int = None, tol: float = None) -> CheckReport:
    """f(x+v) ≤ f(x) + ⟨∇f(x), v⟩ − (μ/2)‖v‖² を v ⪰ 0 と v ⪯ 0 の両方向で検査"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    tol = config.ORACLE_TOL if tol is None else tol
    report = CheckReport(name="lemma1")
    for x, y in _box_pairs(box, samples, seed):
        fx, grad = obj.value(x), obj.gradient(x)
        for direction, target in (("up", join(x, y)), ("down", meet(x, y))):
            v = target - x
            f_target = obj.value(target)
            bound = fx + float(grad @ v) - 0.5 * mu * float(v @ v)
            report.record(f_target - bound, _scaled_tol(tol, fx, f_target), x=x, v=v, kind=direction)
    return report


def order_reversal_check(obj: "Objective", box: BoxSet, mu: float, samples: int = None,
                         seed: int = None, tol: float = None) -> CheckReport:
    """x ⪯ y について ∇f(x) ⪰ ∇f(y) + μ(y − x) を検査"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    tol = config.ORACLE_TOL if tol is None else tol
    report = CheckReport(name="order_reversal")
    for a, b in _box_pairs(box, samples, seed):
        x, y = meet(a, b), join(a, b)
        gx, gy = obj.gradient(x), obj.gradient(y)
        excess = float(np.max(gy + mu * (y - x) - gx))
        report.record(excess, _scaled_tol(tol, float(np.max(np.abs(gx))), float(np.max(np.abs(gy)))), x=x, y=y)
    return report


def smoothness_check(obj: "Objective", feasible_set: FeasibleSet, L: float, samples: int = None,
                     seed: int = None, tol: float = 1e-8) -> CheckReport:
    """f(y) ≥ f(x) + ⟨∇f(x), y−x⟩ − (L/2)‖y−x‖² をランダムな許容点の組で検査"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    report = CheckReport(name="smoothness")
    for x, y in _pairs(feasible_set, samples, seed):
        fx, fy = obj.value(x), obj.value(y)
        d = y - x
        excess = fx + float(obj.gradient(x) @ d) - 0.5 * L * float(d @ d) - fy
        report.record(excess, _scaled_tol(tol, fx, fy), x=x, y=y)
    return report


def gradient_check(obj: "Objective", box: BoxSet, samples: int = 100, seed: int = None,
                   rel_tol: float = 1e-5, h: float = 1e-6) -> CheckReport:
    """箱の内部のランダムな点で勾配と中心差分を比較（相対誤差）"""
    seed = config.DEFAULT_SEED if seed is None else seed
    lower = np.maximum(box.lower, obj.domain_lower)
    upper = np.minimum(box.upper, obj.domain_upper)
    # 差分のステップが定義域からはみ出さないよう内側に縮める
    margin = np.minimum(10 * h, 0.25 * (upper - lower))
    rng = make_rng(seed)
    report = CheckReport(name="gradient")
    for x in rng.uniform(lower + margin, upper - margin, size=(samples, obj.n)):
        exact = obj.gradient(x)
        approx = finite_diff_gradient(obj, x, h)
        error = float(np.linalg.norm(exact - approx)) / max(1.0, float(np.linalg.norm(exact)))
        report.record(error, rel_tol, x=x)
    return report


def default_check_box(obj: "Objective", feasible_set: Optional[FeasibleSet] = None) -> BoxSet:
    """検査に使う箱（集合の外接箱を目的関数の定義域に制限したもの）"""
    if feasible_set is None:
        lower, upper = obj.domain_lower, np.where(np.isfinite(obj.domain_upper), obj.domain_upper, 1.0)
    else:
        lower, upper = feasible_set.bounding_box()
        lower = np.maximum(lower, obj.domain_lower)
        upper = np.minimum(upper, obj.domain_upper)
    return BoxSet(lower, upper)
