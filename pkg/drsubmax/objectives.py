"""
(強) DR-submodular な目的関数族

各目的関数は値・勾配・ヘッセ行列のオラクルを持つ。モジュール関数として
ℓ ベクトル、曲率 c_f、μ の推定と検証を提供する。
目的関数は生成後に変更されないので、スレッド間で共有してよい。
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from drsubmax.config import config
from drsubmax.errors import (
    CapabilityError,
    CurvatureUndefinedError,
    DimensionMismatchError,
    DomainError,
    FormulationError,
    ModeUnsupportedError,
    PreconditionError,
)
from drsubmax.feasible_sets import BoxSet, FeasibleSet
from drsubmax.numeric_core import SymMatrix, Vector, as_sym_matrix, as_vector
from drsubmax.oracles import CheckReport
from drsubmax.smoothness import Posynomial
from drsubmax.utils import make_rng


logger = logging.getLogger(__name__)

# MeanFieldKL で列挙する集合関数の最大要素数
MAX_ENUMERATION_SIZE = 20


class Objective(ABC):
    """ℝⁿ₊ 上の目的関数の基底クラス

    mu は宣言された強 DR-submodularity のパラメータ（μ = 0 なら通常の DR-submodular）。
    domain_lower / domain_upper は値を評価できる座標ごとの範囲。
    """

    name: str = "objective"

    def __init__(self, n: int, mu: float, domain_lower: ArrayLike = 0.0, domain_upper: ArrayLike = math.inf):
        if n < 1:
            raise DimensionMismatchError("objective dimension must be at least 1", n=n)
        if mu < 0:
            raise DomainError(f"mu must be nonnegative, got {mu}")
        self.n = n
        self.mu = float(mu)
        self.domain_lower = np.broadcast_to(np.asarray(domain_lower, dtype=np.float64), (n,)).copy()
        self.domain_upper = np.broadcast_to(np.asarray(domain_upper, dtype=np.float64), (n,)).copy()

    def check_domain(self, x: ArrayLike) -> Vector:
        """x を検証してベクトルとして返す"""
        x = as_vector(x, name="x")
        if x.shape != (self.n,):
            raise DimensionMismatchError(f"{self.name} expects a vector of length {self.n}", shape=x.shape)
        tol = config.FEASIBILITY_TOL
        if np.any(x < self.domain_lower - tol) or np.any(x > self.domain_upper + tol):
            raise DomainError(
                f"x lies outside the domain of {self.name}",
                lower=self.domain_lower, upper=self.domain_upper, x=x,
            )
        return x

    @abstractmethod
    def value(self, x: ArrayLike) -> float:
        """f(x)"""

    @abstractmethod
    def gradient(self, x: ArrayLike) -> Vector:
        """∇f(x)"""

    @abstractmethod
    def hessian(self, x: ArrayLike) -> SymMatrix:
        """∇²f(x)"""

    def value_batch(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """行ごとに f を評価"""
        return np.array([self.value(p) for p in np.atleast_2d(points)])

    @property
    def hessian_is_constant(self) -> bool:
        return False

    def reference_point(self, lower: Vector, upper: Vector) -> Vector:
        """箱の中点を定義域へクリップした点"""
        upper = np.where(np.isfinite(upper), upper, np.asarray(lower) + 1.0)
        mid = 0.5 * (np.asarray(lower) + upper)
        return np.clip(mid, self.domain_lower, self.domain_upper)

    def neg_hessian_bound(self, lower: Vector, upper: Vector) -> SymMatrix:
        """箱 [lower, upper] 上での −∇²f の要素ごとの上限"""
        raise ModeUnsupportedError(f"{self.name} has no entrywise Hessian bound", objective=self.name)

    def neg_hessian_posynomials(self) -> Dict[Tuple[int, int], Posynomial]:
        """−∇²f の非零要素を x の posynomial として返す"""
        raise FormulationError(f"{self.name} has no posynomial Hessian description", objective=self.name)

    def describe(self) -> dict:
        return {"objective": self.name, "n": self.n, "mu": self.mu}


def _posynomials_from_constant(neg_hessian: NDArray[np.float64]) -> Dict[Tuple[int, int], Posynomial]:
    n = neg_hessian.shape[0]
    entries = {}
    for i in range(n):
        for j in range(n):
            entry = neg_hessian[i, j]
            if entry < 0:
                raise FormulationError(
                    f"Hessian entry ({i}, {j}) is positive, so -Hessian is not a posynomial",
                    entry=(i, j), value=float(-entry),
                )
            if entry > 0:
                entries[(i, j)] = Posynomial.constant(float(entry), n)
    return entries


class QuadraticObjective(Objective):
    """f(x) = ½ xᵀHx + hᵀx + c0（H は対称）"""

    name = "quadratic"

    def __init__(self, H: ArrayLike, h: ArrayLike, c0: float = 0.0, mu: Optional[float] = None):
        H = as_sym_matrix(H, name="H")
        h = as_vector(h, name="h")
        if H.shape[0] != h.size:
            raise DimensionMismatchError("H and h sizes differ", H=H.shape, h=h.shape)
        if mu is None:
            mu = max(0.0, float(np.min(-np.diag(H))))
        super().__init__(h.size, mu)
        self.H = H
        self.h = h
        self.c0 = float(c0)

    @classmethod
    def linear(cls, h: ArrayLike, c0: float = 0.0) -> "QuadraticObjective":
        """線形関数 hᵀx + c0"""
        h = as_vector(h, name="h")
        return cls(np.zeros((h.size, h.size)), h, c0)

    @classmethod
    def from_asymmetric(cls, H: ArrayLike) -> "QuadraticObjective":
        """f(x) = (½x − 1)ᵀHx を H_sym = (H + Hᵀ)/2, h = −Hᵀ1, c0 = 0 に正規化"""
        H = np.array(H, dtype=np.float64)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatchError("H must be square", shape=H.shape)
        return cls(H, -H.T @ np.ones(H.shape[0]), 0.0)

    def value(self, x: ArrayLike) -> float:
        x = self.check_domain(x)
        return float(0.5 * x @ self.H @ x + self.h @ x + self.c0)

    def gradient(self, x: ArrayLike) -> Vector:
        x = self.check_domain(x)
        return self.H @ x + self.h

    def hessian(self, x: ArrayLike) -> SymMatrix:
        self.check_domain(x)
        return self.H

    def value_batch(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        X = np.atleast_2d(points)
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.H, X) + X @ self.h + self.c0

    @property
    def hessian_is_constant(self) -> bool:
        return True

    def neg_hessian_bound(self, lower: Vector, upper: Vector) -> SymMatrix:
        return -self.H

    def neg_hessian_posynomials(self) -> Dict[Tuple[int, int], Posynomial]:
        return _posynomials_from_constant(-self.H)

    def describe(self) -> dict:
        return {**super().describe(), "H": self.H.tolist(), "h": self.h.tolist(), "c0": self.c0}


class StabilityObjective(Objective):
    """f(x) = 2·1ᵀx − xᵀ(A + I)x

    単体上の最大値 f* から安定数が s(G) = 1/(2 − f*) で得られる。
    """

    name = "stability"

    def __init__(self, adjacency: ArrayLike):
        A = as_sym_matrix(adjacency, name="adjacency")
        if not np.all((A == 0) | (A == 1)) or np.any(np.diag(A) != 0):
            raise DomainError("adjacency must be a 0/1 matrix with zero diagonal")
        super().__init__(A.shape[0], 2.0)
        self.adjacency = A
        self._quad = A + np.eye(self.n)

    @classmethod
    def from_graph(cls, graph) -> "StabilityObjective":
        return cls(graph.adjacency_matrix())

    def value(self, x: ArrayLike) -> float:
        x = self.check_domain(x)
        return float(2.0 * x.sum() - x @ self._quad @ x)

    def gradient(self, x: ArrayLike) -> Vector:
        x = self.check_domain(x)
        return 2.0 - 2.0 * (self._quad @ x)

    def hessian(self, x: ArrayLike) -> SymMatrix:
        self.check_domain(x)
        return -2.0 * self._quad

    def value_batch(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        X = np.atleast_2d(points)
        return 2.0 * X.sum(axis=1) - np.einsum("ij,jk,ik->i", X, self._quad, X)

    @property
    def hessian_is_constant(self) -> bool:
        return True

    def neg_hessian_bound(self, lower: Vector, upper: Vector) -> SymMatrix:
        return 2.0 * self._quad

    def neg_hessian_posynomials(self) -> Dict[Tuple[int, int], Posynomial]:
        return _posynomials_from_constant(2.0 * self._quad)

    @staticmethod
    def stability_estimate(f_value: float) -> float:
        """1/(2 − f)（f ≥ 2 では inf）"""
        gap = 2.0 - f_value
        return math.inf if gap <= 0 else 1.0 / gap


@dataclass(frozen=True)
class QuadraticTerm:
    """a·x − ½b·x²"""

    a: float
    b: float


@dataclass(frozen=True)
class PowerTerm:
    """a·x^p（0 < p < 1, a > 0）"""

    a: float
    p: float


DiagonalTerm = Union[QuadraticTerm, PowerTerm]


class NegativeDependencePoly(Objective):
    """負の依存を持つ凹関数 Σᵢ hᵢ(xᵢ) + Σ_T θ_T ∏_{k∈T} x_k（θ_T ≤ 0）

    対角項は座標ごとに QuadraticTerm か PowerTerm。交互作用項は相異なる座標の組と係数の対。
    PowerTerm を含む座標では x > 0 が必要。
    """

    name = "negative_dependence"

    def __init__(self, diagonal: Sequence[DiagonalTerm],
                 interactions: Sequence[Tuple[Sequence[int], float]] = (),
                 lower: ArrayLike = 0.0, upper: ArrayLike = 1.0):
        n = len(diagonal)
        if n < 1:
            raise DimensionMismatchError("at least one diagonal term is required")
        for i, term in enumerate(diagonal):
            if isinstance(term, QuadraticTerm):
                if term.b < 0:
                    raise DomainError(f"quadratic term {i} needs b >= 0", b=term.b)
            elif isinstance(term, PowerTerm):
                if not (0 < term.p < 1 and term.a > 0):
                    raise DomainError(f"power term {i} needs 0 < p < 1 and a > 0", a=term.a, p=term.p)
            else:
                raise DomainError(f"unknown diagonal term type {type(term).__name__}")

        parsed: List[Tuple[Tuple[int, ...], float]] = []
        for indices, theta in interactions:
            indices = tuple(int(i) for i in indices)
            if len(indices) < 2 or len(set(indices)) != len(indices):
                raise DomainError("interaction terms need at least two distinct coordinates", indices=indices)
            if min(indices) < 0 or max(indices) >= n:
                raise DimensionMismatchError("interaction index out of range", indices=indices)
            if theta > 0:
                raise DomainError("interaction coefficients must be <= 0", indices=indices, theta=theta)
            parsed.append((indices, float(theta)))

        lower = np.broadcast_to(np.asarray(lower, dtype=np.float64), (n,)).copy()
        upper = np.broadcast_to(np.asarray(upper, dtype=np.float64), (n,)).copy()
        if np.any(lower < 0) or np.any(lower > upper) or not np.all(np.isfinite(upper)):
            raise DomainError("domain must be a finite box in the nonnegative orthant")

        self.diagonal = tuple(diagonal)
        self.interactions = tuple(parsed)
        # 二階微分の大きさは x について減少するので上端で最小
        curvatures = [
            t.b if isinstance(t, QuadraticTerm) else t.a * t.p * (1 - t.p) * upper[i] ** (t.p - 2)
            for i, t in enumerate(self.diagonal)
        ]
        super().__init__(n, min(curvatures), lower, upper)

    @property
    def degree(self) -> int:
        return max((len(idx) for idx, _ in self.interactions), default=0)

    def _check_power_support(self, x: Vector) -> None:
        for i, term in enumerate(self.diagonal):
            if isinstance(term, PowerTerm) and x[i] <= 0:
                raise DomainError(f"coordinate {i} carries a power term and needs x > 0", x=x)

    def value(self, x: ArrayLike) -> float:
        x = self.check_domain(x)
        total = 0.0
        for i, term in enumerate(self.diagonal):
            if isinstance(term, QuadraticTerm):
                total += term.a * x[i] - 0.5 * term.b * x[i] ** 2
            else:
                total += term.a * x[i] ** term.p
        for indices, theta in self.interactions:
            total += theta * float(np.prod(x[list(indices)]))
        return float(total)

    def gradient(self, x: ArrayLike) -> Vector:
        x = self.check_domain(x)
        self._check_power_support(x)
        grad = np.empty(self.n)
        for i, term in enumerate(self.diagonal):
            if isinstance(term, QuadraticTerm):
                grad[i] = term.a - term.b * x[i]
            else:
                grad[i] = term.a * term.p * x[i] ** (term.p - 1)
        for indices, theta in self.interactions:
            for i in indices:
                grad[i] += theta * float(np.prod([x[k] for k in indices if k != i]))
        return grad

    def hessian(self, x: ArrayLike) -> SymMatrix:
        x = self.check_domain(x)
        self._check_power_support(x)
        H = np.zeros((self.n, self.n))
        for i, term in enumerate(self.diagonal):
            if isinstance(term, QuadraticTerm):
                H[i, i] = -term.b
            else:
                H[i, i] = term.a * term.p * (term.p - 1) * x[i] ** (term.p - 2)
        for indices, theta in self.interactions:
            for i, j in combinations(indices, 2):
                rest = float(np.prod([x[k] for k in indices if k != i and k != j]))
                H[i, j] += theta * rest
                H[j, i] += theta * rest
        return H

    @property
    def hessian_is_constant(self) -> bool:
        return all(isinstance(t, QuadraticTerm) for t in self.diagonal) and self.degree <= 2

    def neg_hessian_posynomials(self) -> Dict[Tuple[int, int], Posynomial]:
        entries: Dict[Tuple[int, int], Posynomial] = {}

        def add(key, poly):
            entries[key] = poly if key not in entries else entries[key] + poly

        for i, term in enumerate(self.diagonal):
            if isinstance(term, QuadraticTerm):
                if term.b > 0:
                    add((i, i), Posynomial.constant(term.b, self.n))
            else:
                exps = np.zeros(self.n)
                exps[i] = term.p - 2
                add((i, i), Posynomial.monomial(term.a * term.p * (1 - term.p), exps))
        for indices, theta in self.interactions:
            if theta == 0:
                continue
            for i, j in combinations(indices, 2):
                exps = np.zeros(self.n)
                exps[[k for k in indices if k != i and k != j]] = 1.0
                add((i, j), Posynomial.monomial(-theta, exps))
                add((j, i), Posynomial.monomial(-theta, exps))
        return entries

    def neg_hessian_bound(self, lower: Vector, upper: Vector) -> SymMatrix:
        lower = np.maximum(lower, self.domain_lower)
        upper = np.minimum(upper, self.domain_upper)
        bound = np.zeros((self.n, self.n))
        for (i, j), poly in self.neg_hessian_posynomials().items():
            bound[i, j] = poly.sup_over_box(lower, upper)
        if not np.all(np.isfinite(bound)):
            raise ModeUnsupportedError("power terms are unbounded near zero; give the box a positive lower bound")
        return bound

    def describe(self) -> dict:
        return {
            **super().describe(),
            "diagonal": [asdict(t) | {"kind": type(t).__name__} for t in self.diagonal],
            "interactions": [[list(idx), theta] for idx, theta in self.interactions],
        }


class MeanFieldKLObjective(Objective):
    """平均場近似の目的関数 −KL(Q_x ‖ P)

    P(S) ∝ exp(F(S)) は 2ⁿ 個の値の表で与え、Q_x(S) = ∏_{i∈S} xᵢ ∏_{i∉S} (1 − xᵢ)。
    表の添字はビットマスク（ビット i が立っていれば i ∈ S）。
    −KL = E_Q[F] + Σᵢ H(xᵢ) − ln Z を厳密に列挙して計算する。
    """

    name = "mean_field_kl"

    def __init__(self, set_function: ArrayLike, delta: float = 0.05):
        table = np.asarray(set_function, dtype=np.float64).ravel()
        n = int(round(math.log2(table.size))) if table.size > 0 else 0
        if n < 1 or 2 ** n != table.size:
            raise DimensionMismatchError("set function table must have 2^n entries", size=table.size)
        if n > MAX_ENUMERATION_SIZE:
            raise DimensionMismatchError(f"exact enumeration supports n <= {MAX_ENUMERATION_SIZE}", n=n)
        if not np.all(np.isfinite(table)):
            raise DomainError("set function values must be finite")
        if not 0 < delta < 0.5:
            raise DomainError(f"delta must be in (0, 1/2), got {delta}")
        # −1/x − 1/(1−x) ≤ −4 なので μ = 4
        super().__init__(n, 4.0, delta, 1.0 - delta)
        self.table = table
        self.delta = float(delta)
        self.log_partition = float(logsumexp(table))
        # 軸 i がビット i に対応するテンソル
        self._tensor = table.reshape((2,) * n).transpose(tuple(reversed(range(n))))

    @classmethod
    def facility_location(cls, weights: ArrayLike, delta: float = 0.05, scale: float = 1.0) -> "MeanFieldKLObjective":
        """F(S) = scale·Σ_k max_{i∈S} W[k, i]（F(∅) = 0）から構成（W ≥ 0 なら劣モジュラ）"""
        W = np.atleast_2d(np.asarray(weights, dtype=np.float64))
        if np.any(W < 0):
            raise DomainError("facility location weights must be nonnegative")
        n = W.shape[1]
        if n > MAX_ENUMERATION_SIZE:
            raise DimensionMismatchError(f"exact enumeration supports n <= {MAX_ENUMERATION_SIZE}", n=n)
        per_row = np.zeros((W.shape[0], 1))
        for i in range(n):
            per_row = np.concatenate([per_row, np.maximum(per_row, W[:, i:i + 1])], axis=1)
        table = scale * per_row.sum(axis=0)
        return cls(table, delta)

    def _contract(self, x: Vector, keep: Tuple[int, ...] = ()) -> NDArray[np.float64]:
        """keep 以外の座標について Q_x で期待値を取る"""
        tensor = self._tensor
        for axis in reversed(range(self.n)):
            if axis in keep:
                continue
            tensor = np.tensordot(tensor, np.array([1.0 - x[axis], x[axis]]), axes=([axis], [0]))
        return tensor

    def value(self, x: ArrayLike) -> float:
        x = self.check_domain(x)
        entropy = -np.sum(x * np.log(x) + (1 - x) * np.log1p(-x))
        return float(self._contract(x)) + float(entropy) - self.log_partition

    def gradient(self, x: ArrayLike) -> Vector:
        x = self.check_domain(x)
        grad = np.empty(self.n)
        for i in range(self.n):
            marginal = self._contract(x, keep=(i,))
            grad[i] = marginal[1] - marginal[0]
        return grad + np.log1p(-x) - np.log(x)

    def hessian(self, x: ArrayLike) -> SymMatrix:
        x = self.check_domain(x)
        H = np.diag(-1.0 / x - 1.0 / (1.0 - x))
        for i, j in combinations(range(self.n), 2):
            block = self._contract(x, keep=(i, j))
            H[i, j] = H[j, i] = block[1, 1] - block[1, 0] - block[0, 1] + block[0, 0]
        return H

    def second_differences(self, i: int, j: int) -> NDArray[np.float64]:
        """F(S+i+j) − F(S+i) − F(S+j) + F(S)（S は i, j を含まない全ての集合）"""
        return np.diff(np.diff(self._tensor, axis=i), axis=j)

    def is_submodular(self, tol: float = 1e-12) -> bool:
        return all(np.all(self.second_differences(i, j) <= tol) for i, j in combinations(range(self.n), 2))

    def neg_hessian_bound(self, lower: Vector, upper: Vector) -> SymMatrix:
        lower = np.maximum(lower, self.domain_lower)
        upper = np.minimum(upper, self.domain_upper)
        # 1/x + 1/(1−x) は凸なので端点で最大
        entropy = lambda t: 1.0 / t + 1.0 / (1.0 - t)
        bound = np.diag(np.maximum(entropy(lower), entropy(upper)))
        for i, j in combinations(range(self.n), 2):
            bound[i, j] = bound[j, i] = max(0.0, float(np.max(-self.second_differences(i, j))))
        return bound

    def describe(self) -> dict:
        return {**super().describe(), "delta": self.delta, "log_partition": self.log_partition}


class CallableObjective(Objective):
    """値・勾配（・ヘッセ行列）を呼び出し可能オブジェクトで与える目的関数

    hessian_fn を省略した場合、ヘッセ行列を必要とする処理は CapabilityError になる。
    """

    name = "callable"

    def __init__(self, n: int, mu: float, value_fn: Callable[[Vector], float],
                 gradient_fn: Callable[[Vector], ArrayLike],
                 hessian_fn: Optional[Callable[[Vector], ArrayLike]] = None,
                 domain_lower: ArrayLike = 0.0, domain_upper: ArrayLike = math.inf):
        super().__init__(n, mu, domain_lower, domain_upper)
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn
        self._hessian_fn = hessian_fn

    @property
    def has_hessian(self) -> bool:
        return self._hessian_fn is not None

    def value(self, x: ArrayLike) -> float:
        return float(self._value_fn(self.check_domain(x)))

    def gradient(self, x: ArrayLike) -> Vector:
        grad = np.asarray(self._gradient_fn(self.check_domain(x)), dtype=np.float64)
        if grad.shape != (self.n,):
            raise DimensionMismatchError(f"gradient callable returned shape {grad.shape}", shape=grad.shape)
        return grad

    def hessian(self, x: ArrayLike) -> SymMatrix:
        if self._hessian_fn is None:
            raise CapabilityError(f"{self.name} objective was built without a Hessian oracle")
        return as_sym_matrix(self._hessian_fn(self.check_domain(x)), name="hessian")


def value(obj: Objective, x: ArrayLike) -> float:
    """f(x)"""
    return obj.value(x)


def gradient(obj: Objective, x: ArrayLike) -> Vector:
    """∇f(x)"""
    return obj.gradient(x)


def hessian(obj: Objective, x: ArrayLike) -> SymMatrix:
    """∇²f(x)"""
    return obj.hessian(x)


def ell_vector(obj: Objective, feasible_set: FeasibleSet) -> Vector:
    """ℓᵢ = min_x ∇ᵢf(x) を外接箱の上端 ū での勾配として計算

    勾配が順序を反転するので、外接箱上の最小値は ū で達成される。
    ū 自体が集合に含まれなくてもよい。
    """
    upper = feasible_set.upper_corner()
    if not np.all(np.isfinite(upper)):
        raise DomainError("feasible set is unbounded", upper=upper)
    return obj.gradient(upper)


def _clamp_unit(value: float) -> float:
    return float(min(1.0, max(0.0, value)))


def curvature(obj: Objective, feasible_set: FeasibleSet) -> float:
    """曲率 c_f = 1 − minᵢ ℓᵢ/∇ᵢf(0)（[0, 1] にクランプ）"""
    if not feasible_set.contains_origin():
        raise PreconditionError(
            "curvature needs a set containing the origin; use curvature_no_origin instead",
            set=feasible_set.kind,
        )
    grad0 = obj.gradient(np.zeros(obj.n))
    if np.any(grad0 <= 0):
        raise CurvatureUndefinedError("curvature is undefined when some gradient entry at 0 is <= 0",
                                      gradient=grad0)
    ell = ell_vector(obj, feasible_set)
    return _clamp_unit(1.0 - float(np.min(ell / grad0)))


def curvature_no_origin(obj: Objective, feasible_set: FeasibleSet) -> float:
    """外接箱の両端を使った曲率の上界 1 − minᵢ ∇ᵢf(ū)/∇ᵢf(l̄)"""
    lower, upper = feasible_set.bounding_box()
    if not np.all(np.isfinite(upper)):
        raise DomainError("feasible set is unbounded", upper=upper)
    grad_lower = obj.gradient(lower)
    if np.any(grad_lower <= 0):
        raise CurvatureUndefinedError("curvature is undefined when the gradient at the lower corner is <= 0",
                                      gradient=grad_lower)
    return _clamp_unit(1.0 - float(np.min(obj.gradient(upper) / grad_lower)))


def _sample_box(obj: Objective, box: BoxSet, samples: int, seed: int) -> NDArray[np.float64]:
    lower = np.maximum(box.lower, obj.domain_lower)
    upper = np.minimum(box.upper, obj.domain_upper)
    rng = make_rng(seed)
    return rng.uniform(lower, upper, size=(samples, obj.n))


def verify_strong_dr(obj: Objective, box: BoxSet, mu: float, samples: int = None,
                     seed: int = None, tol: float = None) -> CheckReport:
    """箱内のランダムな点で ∇²ᵢᵢf ≤ −μ と ∇²ᵢⱼf ≤ 0（i ≠ j）を検査"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    tol = config.ORACLE_TOL if tol is None else tol
    report = CheckReport(name="strong_dr")
    off_diagonal = ~np.eye(obj.n, dtype=bool)
    for x in _sample_box(obj, box, samples, seed):
        H = obj.hessian(x)
        diag_excess = float(np.max(np.diag(H) + mu))
        off_excess = float(np.max(H[off_diagonal], initial=-math.inf))
        report.record(diag_excess, tol, point=x, kind="diagonal")
        if obj.n > 1:
            report.record(off_excess, tol, point=x, kind="off_diagonal")
    if not report.passed:
        logger.warning(f"{obj.name} は μ={mu} の強 DR-submodularity を {len(report.violations)} 点で満たしません")
    return report


def estimate_mu(obj: Objective, box: BoxSet, samples: int = None, seed: int = None) -> float:
    """μ̂ = min_x minᵢ −∇²ᵢᵢf(x) をサンプリングで推定（定数ヘッセ行列なら厳密値）"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    if obj.hessian_is_constant:
        return max(0.0, float(np.min(-np.diag(obj.hessian(obj.reference_point(box.lower, box.upper))))))
    lower = np.maximum(box.lower, obj.domain_lower)
    upper = np.minimum(box.upper, obj.domain_upper)
    points = np.vstack([lower, upper, _sample_box(obj, box, samples, seed)])
    estimate = min(float(np.min(-np.diag(obj.hessian(x)))) for x in points)
    logger.debug(f"{obj.name} の μ̂={estimate:.6g}（宣言値 μ={obj.mu}）")
    return max(0.0, estimate)
