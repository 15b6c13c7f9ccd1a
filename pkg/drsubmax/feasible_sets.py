"""
凸な許容集合: 箱型、単体、予算制約付き箱型

各集合はユークリッド射影、線形最大化オラクル (LMO)、
正則化付き線形最大化（SDRFW の部分問題）を提供する。
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import bisect

from drsubmax.config import config
from drsubmax.errors import DimensionMismatchError, DomainError
from drsubmax.numeric_core import Vector, as_vector


logger = logging.getLogger(__name__)


class FeasibleSet(ABC):
    """ℝⁿ₊ に含まれる有界な凸集合"""

    kind: str = "abstract"

    def __init__(self, n: int):
        if n < 1:
            raise DimensionMismatchError("dimension must be at least 1", n=n)
        self.n = n

    def _coerce(self, y: ArrayLike) -> Vector:
        y = as_vector(y, name="point")
        if y.shape != (self.n,):
            raise DimensionMismatchError(f"expected a vector of length {self.n}", shape=y.shape)
        return y

    @abstractmethod
    def project(self, y: ArrayLike) -> Vector:
        """Proj_K(y) = argmin_{z∈K} ‖z − y‖"""

    @abstractmethod
    def linear_max(self, w: ArrayLike) -> Vector:
        """argmax_{x∈K} ⟨w, x⟩（同値の場合は添字の小さい方を優先）"""

    @abstractmethod
    def upper_corner(self) -> Vector:
        """ūᵢ = max_{x∈K} xᵢ"""

    @abstractmethod
    def lower_corner(self) -> Vector:
        """l̄ᵢ = min_{x∈K} xᵢ"""

    @abstractmethod
    def diameter(self) -> float:
        """R = max_{x,y∈K} ‖y − x‖（予算付き箱型では上界）"""

    @abstractmethod
    def contains_batch(self, points: NDArray[np.float64], tol: float) -> NDArray[np.bool_]:
        """行ごとの所属判定"""

    @abstractmethod
    def sample(self, rng: np.random.Generator, count: int) -> NDArray[np.float64]:
        """集合内の点をランダムに count 個生成（一様分布とは限らない）"""

    def reg_linear_max(self, w: ArrayLike, alpha: float) -> Vector:
        """argmax_{x∈K} ⟨w, x⟩ − (α/2)‖x‖² = Proj_K(w/α)"""
        if not alpha > 0:
            raise ValueError(f"alpha must be positive (use linear_max for alpha=0), got {alpha}")
        w = self._coerce(w)
        return self.project(w / alpha)

    def contains(self, x: ArrayLike, tol: float = None) -> bool:
        """許容誤差 tol での所属判定"""
        tol = config.FEASIBILITY_TOL if tol is None else tol
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,) or not np.all(np.isfinite(x)):
            return False
        return bool(self.contains_batch(x[None, :], tol)[0])

    def contains_origin(self) -> bool:
        """原点を含むか"""
        return self.contains(np.zeros(self.n), tol=0.0)

    def bounding_box(self) -> Tuple[Vector, Vector]:
        """座標ごとの下限・上限からなる外接箱"""
        return self.lower_corner(), self.upper_corner()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n}


class BoxSet(FeasibleSet):
    """箱型集合 {x: lower ⪯ x ⪯ upper}"""

    kind = "box"

    def __init__(self, lower: ArrayLike, upper: ArrayLike):
        lower = as_vector(lower, name="lower")
        upper = as_vector(upper, name="upper")
        if lower.shape != upper.shape:
            raise DimensionMismatchError("lower and upper must have the same length")
        if np.any(lower > upper):
            raise DomainError("lower must be entrywise <= upper", lower=lower, upper=upper)
        if np.any(lower < 0):
            raise DomainError("box must lie in the nonnegative orthant", lower=lower)
        super().__init__(lower.size)
        self.lower = lower
        self.upper = upper

    @classmethod
    def unit(cls, n: int) -> "BoxSet":
        return cls(np.zeros(n), np.ones(n))

    def project(self, y: ArrayLike) -> Vector:
        return np.clip(self._coerce(y), self.lower, self.upper)

    def linear_max(self, w: ArrayLike) -> Vector:
        w = self._coerce(w)
        return np.where(w > 0, self.upper, self.lower)

    def upper_corner(self) -> Vector:
        return self.upper.copy()

    def lower_corner(self) -> Vector:
        return self.lower.copy()

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains_batch(self, points: NDArray[np.float64], tol: float) -> NDArray[np.bool_]:
        points = np.atleast_2d(points)
        return np.all((points >= self.lower - tol) & (points <= self.upper + tol), axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> NDArray[np.float64]:
        return rng.uniform(self.lower, self.upper, size=(count, self.n))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


class SimplexSet(FeasibleSet):
    """スケール付き単体 {x ⪰ 0: 1ᵀx = s}"""

    kind = "simplex"

    def __init__(self, n: int, radius: float = 1.0):
        if not radius > 0:
            raise DomainError(f"simplex radius must be positive, got {radius}")
        super().__init__(n)
        self.radius = float(radius)

    def project(self, y: ArrayLike) -> Vector:
        # 降順ソートと累積和でしきい値 τ を求める
        y = self._coerce(y)
        u = np.sort(y)[::-1]
        cssv = np.cumsum(u) - self.radius
        ind = np.arange(1, self.n + 1)
        rho = np.count_nonzero(u - cssv / ind > 0)
        theta = cssv[rho - 1] / rho
        return np.maximum(y - theta, 0.0)

    def linear_max(self, w: ArrayLike) -> Vector:
        w = self._coerce(w)
        vertex = np.zeros(self.n)
        vertex[int(np.argmax(w))] = self.radius
        return vertex

    def upper_corner(self) -> Vector:
        return np.full(self.n, self.radius)

    def lower_corner(self) -> Vector:
        return np.zeros(self.n)

    def diameter(self) -> float:
        # 2頂点間の距離で達成される
        return self.radius * math.sqrt(2.0) if self.n > 1 else 0.0

    def contains_batch(self, points: NDArray[np.float64], tol: float) -> NDArray[np.bool_]:
        points = np.atleast_2d(points)
        return np.all(points >= -tol, axis=1) & (np.abs(points.sum(axis=1) - self.radius) <= tol)

    def sample(self, rng: np.random.Generator, count: int) -> NDArray[np.float64]:
        return self.radius * rng.dirichlet(np.ones(self.n), size=count)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "radius": self.radius}


class BudgetBoxSet(FeasibleSet):
    """予算制約付き箱型 {x: 1ᵀx ≤ s, 0 ⪯ x ⪯ upper}"""

    kind = "budget_box"

    def __init__(self, budget: float, upper: ArrayLike):
        upper = as_vector(upper, name="upper")
        if not budget > 0:
            raise DomainError(f"budget must be positive, got {budget}")
        if np.any(upper <= 0):
            raise DomainError("upper must be strictly positive", upper=upper)
        super().__init__(upper.size)
        self.budget = float(budget)
        self.upper = upper

    @classmethod
    def uniform(cls, n: int, budget: float, upper: float = 1.0) -> "BudgetBoxSet":
        return cls(budget, np.full(n, upper))

    def _clamp(self, y: Vector, tau: float) -> Vector:
        return np.clip(y - tau, 0.0, self.upper)

    def project(self, y: ArrayLike) -> Vector:
        y = self._coerce(y)
        clamped = self._clamp(y, 0.0)
        if clamped.sum() <= self.budget:
            return clamped
        # Σ clamp(yᵢ − τ, 0, uᵢ) = s となる τ ≥ 0 を二分法で求める
        residual = lambda tau: float(self._clamp(y, tau).sum() - self.budget)
        tau = bisect(
            residual,
            0.0,
            float(np.max(y)),
            xtol=config.BUDGET_BISECTION_TOL / self.n,
            maxiter=config.BUDGET_MAX_ITER,
        )
        return self._clamp(y, tau)

    def linear_max(self, w: ArrayLike) -> Vector:
        # wᵢ の降順（同値は添字順）に予算を埋める
        w = self._coerce(w)
        x = np.zeros(self.n)
        remaining = self.budget
        for i in np.argsort(-w, kind="stable"):
            if w[i] <= 0 or remaining <= 0:
                break
            x[i] = min(self.upper[i], remaining)
            remaining -= x[i]
        return x

    def upper_corner(self) -> Vector:
        return np.minimum(self.upper, self.budget)

    def lower_corner(self) -> Vector:
        return np.zeros(self.n)

    def diameter(self) -> float:
        """直径の上界 min(√2·max‖x‖, ‖ū‖)

        x, y ⪰ 0 なので ‖x − y‖² ≤ ‖x‖² + ‖y‖²。max‖x‖² は uᵢ の大きい順に
        予算を埋めた頂点で達成される。予算が効かない場合は箱の対角で厳密値。
        """
        corner = self.upper_corner()
        if self.upper.sum() <= self.budget:
            return float(np.linalg.norm(self.upper))
        filled = self.linear_max(self.upper)
        return float(min(math.sqrt(2.0) * np.linalg.norm(filled), np.linalg.norm(corner)))

    def contains_batch(self, points: NDArray[np.float64], tol: float) -> NDArray[np.bool_]:
        points = np.atleast_2d(points)
        in_box = np.all((points >= -tol) & (points <= self.upper + tol), axis=1)
        return in_box & (points.sum(axis=1) <= self.budget + tol)

    def sample(self, rng: np.random.Generator, count: int) -> NDArray[np.float64]:
        points = rng.uniform(0.0, self.upper, size=(count, self.n))
        sums = points.sum(axis=1)
        over = sums > self.budget
        # 予算超過の点は原点方向へ縮小する
        scale = self.budget * rng.uniform(size=count) / np.where(over, sums, 1.0)
        points[over] *= scale[over, None]
        return points

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "budget": self.budget, "upper": self.upper.tolist()}
