"""
最適化アルゴリズム

- sdrfw: 強 DR-submodular 関数向けの Frank-Wolfe 変種（原点を含む集合）
- fw_baseline: 従来の Frank-Wolfe 変種
- pga: 射影勾配上昇法
- oga: オンライン勾配上昇法と α-regret の計算

保証値の計算ヘルパーもここにまとめる。
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from drsubmax.config import config
from drsubmax.errors import (
    CurvatureUndefinedError,
    DimensionMismatchError,
    DomainError,
    PreconditionError,
)
from drsubmax.feasible_sets import FeasibleSet
from drsubmax.numeric_core import Vector
from drsubmax.objectives import Objective, curvature, curvature_no_origin, ell_vector
from drsubmax.utils import make_rng


logger = logging.getLogger(__name__)

STEP_RULES = ("strongly_convex", "fixed")


@dataclass
class Trace:
    """反復の記録（iterates, values, step_index, elapsed は同じ長さ）"""

    algorithm: str
    iterates: List[Vector] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    step_index: List[int] = field(default_factory=list)
    elapsed: List[float] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)
    _started: float = field(default_factory=time.perf_counter, repr=False)

    def record(self, step: int, x: Vector, value: float) -> None:
        self.iterates.append(np.array(x, dtype=np.float64))
        self.values.append(float(value))
        self.step_index.append(int(step))
        self.elapsed.append(time.perf_counter() - self._started)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def final_point(self) -> Vector:
        if not self.iterates:
            raise PreconditionError("trace is empty")
        return self.iterates[-1]

    @property
    def final_value(self) -> float:
        if not self.values:
            raise PreconditionError("trace is empty")
        return self.values[-1]


@dataclass(frozen=True)
class StepRule:
    """OGA のステップサイズ規則

    strongly_convex: η_t = 1/(μt)
    fixed:           η = R/(β√T)
    """

    kind: str
    mu: Optional[float] = None
    radius: Optional[float] = None
    beta: Optional[float] = None
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.kind not in STEP_RULES:
            raise PreconditionError(f"unknown step rule {self.kind!r}", kind=self.kind)
        if self.kind == "strongly_convex":
            if self.mu is None or not self.mu > 0:
                raise PreconditionError("strongly_convex step rule needs mu > 0", mu=self.mu)
        else:
            for name in ("radius", "beta", "horizon"):
                value = getattr(self, name)
                if value is None or not value > 0:
                    raise PreconditionError(f"fixed step rule needs {name} > 0", **{name: value})

    @classmethod
    def strongly_convex(cls, mu: float) -> "StepRule":
        return cls("strongly_convex", mu=mu)

    @classmethod
    def fixed(cls, radius: float, beta: float, horizon: int) -> "StepRule":
        return cls("fixed", radius=radius, beta=beta, horizon=horizon)

    def step(self, t: int) -> float:
        """t 回目（1 始まり）のステップサイズ η_t"""
        if self.kind == "strongly_convex":
            return 1.0 / (self.mu * t)
        return self.radius / (self.beta * math.sqrt(self.horizon))


def _try_curvature(obj: Objective, feasible_set: FeasibleSet) -> Optional[float]:
    """曲率（原点を含まない集合では外接箱による上界）。定義できなければ None"""
    try:
        if feasible_set.contains_origin():
            return curvature(obj, feasible_set)
        return curvature_no_origin(obj, feasible_set)
    except (CurvatureUndefinedError, DomainError) as e:
        logger.debug(f"曲率を計算できません: {e}")
        return None


def _require_feasible(feasible_set: FeasibleSet, x: Vector, name: str) -> None:
    if not feasible_set.contains(x):
        raise PreconditionError(f"{name} is not feasible", point=x)


def iterations_for(L: float, mu: float) -> int:
    """K = ⌈L/μ⌉"""
    return max(1, math.ceil(L / mu - 1e-12))


def sdrfw(obj: Objective, feasible_set: FeasibleSet, mu: float, L: float, K: Optional[int] = None,
          *, enforce_declared_mu: bool = True) -> Trace:
    """強 DR-submodular Frank-Wolfe

    g = f − ⟨ℓ, ·⟩ と分け、各反復で
      v_k = argmax_{x∈K} ⟨c_k ∇g(x_k) + ℓ, x⟩ − (μ c_k/2)‖x‖²,  c_k = (1 − 1/K)^{K−k−1}
    を解いて x_{k+1} = x_k + v_k/K と進める（K = 1 のとき c_0 = 1）。
    保証 f(x_K) − f(0) ≥ (1 − c_f/e)(OPT − f(0)) は f(0) を引いた正規化関数についてのもの。

    Args:
        enforce_declared_mu: True なら目的関数の宣言値を超える μ を拒否する

    Returns:
        x_0 = 0 から x_K までの Trace
    """
    if not feasible_set.contains_origin():
        raise PreconditionError("sdrfw needs a feasible set containing the origin; use pga instead",
                                set=feasible_set.kind)
    if not mu > 0:
        raise PreconditionError("sdrfw needs mu > 0; use fw_baseline for mu = 0", mu=mu)
    if enforce_declared_mu and mu > obj.mu * (1 + 1e-12):
        raise PreconditionError(f"requested mu={mu} exceeds the objective's mu={obj.mu}; a smaller mu is allowed",
                                mu=mu, declared=obj.mu)
    if L < mu:
        raise PreconditionError(f"L={L} must be at least mu={mu}", L=L, mu=mu)
    K = iterations_for(L, mu) if K is None else int(K)
    if K < 1:
        raise PreconditionError("K must be at least 1", K=K)

    ell = ell_vector(obj, feasible_set)
    c_f = _try_curvature(obj, feasible_set)
    x = np.zeros(obj.n)
    f0 = obj.value(x)
    trace = Trace(algorithm="sdrfw")
    trace.meta.update({
        "K": K, "mu": mu, "L": L, "c_f": c_f, "f0": f0,
        "guarantee_ratio": None if c_f is None else 1.0 - c_f / math.e,
    })
    logger.info(f"SDRFW: K={K}, μ={mu}, L={L}, c_f={c_f}")
    trace.record(0, x, f0)

    for k in range(K):
        coef = 1.0 if K == 1 else (1.0 - 1.0 / K) ** (K - k - 1)
        w = coef * (obj.gradient(x) - ell) + ell
        v = feasible_set.reg_linear_max(w, mu * coef)
        x = x + v / K
        value = obj.value(x)
        trace.record(k + 1, x, value)
        logger.debug(f"SDRFW k={k + 1}: f={value:.12g}")

    logger.info(f"SDRFW 完了: f(x_K)={trace.final_value:.12g}")
    return trace


def fw_baseline(obj: Objective, feasible_set: FeasibleSet, K: int, L: Optional[float] = None) -> Trace:
    """従来の Frank-Wolfe 変種: v_k = argmax ⟨∇f(x_k), x⟩, x_{k+1} = x_k + v_k/K"""
    if not feasible_set.contains_origin():
        raise PreconditionError("fw_baseline needs a feasible set containing the origin", set=feasible_set.kind)
    if K < 1:
        raise PreconditionError("K must be at least 1", K=K)

    x = np.zeros(obj.n)
    trace = Trace(algorithm="fw")
    trace.meta.update({"K": K, "L": L, "guarantee_ratio": 1.0 - 1.0 / math.e})
    if L is not None:
        trace.meta["guarantee_penalty"] = L * feasible_set.diameter() ** 2 / (2 * K)
    trace.record(0, x, obj.value(x))
    for k in range(K):
        v = feasible_set.linear_max(obj.gradient(x))
        x = x + v / K
        trace.record(k + 1, x, obj.value(x))
    logger.info(f"Frank-Wolfe 完了: K={K}, f={trace.final_value:.12g}")
    return trace


def pga(obj: Objective, feasible_set: FeasibleSet, x1: ArrayLike, L: float, K: int,
        opt_value: Optional[float] = None, mu: Optional[float] = None,
        c_f: Optional[float] = None) -> Trace:
    """射影勾配上昇法 x_{k+1} = Proj_K(x_k + ∇f(x_k)/L)

    Args:
        opt_value: OPT の推定値（与えられれば保証値を meta に記録する）

    Returns:
        x_1 から x_{K+1} までの Trace
    """
    if not L > 0:
        raise PreconditionError(f"L must be positive, got {L}", L=L)
    if K < 1:
        raise PreconditionError("K must be at least 1", K=K)
    x = np.asarray(x1, dtype=np.float64)
    if x.shape != (feasible_set.n,):
        raise DimensionMismatchError(f"x1 must have length {feasible_set.n}", shape=x.shape)
    _require_feasible(feasible_set, x, "x1")

    mu = obj.mu if mu is None else mu
    c_f = _try_curvature(obj, feasible_set) if c_f is None else c_f
    trace = Trace(algorithm="pga")
    trace.meta.update({"K": K, "mu": mu, "L": L, "c_f": c_f})
    if c_f is not None:
        trace.meta["guarantee_ratio"] = 1.0 / (1.0 + c_f)

    f_x1 = obj.value(x)
    trace.record(0, x, f_x1)
    for k in range(K):
        x = feasible_set.project(x + obj.gradient(x) / L)
        value = obj.value(x)
        trace.record(k + 1, x, value)
        logger.debug(f"PGA k={k + 1}: f={value:.12g}")

    if opt_value is not None and c_f is not None:
        trace.meta["opt_estimate"] = opt_value
        if mu > 0:
            trace.meta["guarantee"] = pga_bound(opt_value, c_f, mu, L, K, f_x1)
    logger.info(f"PGA 完了: K={K}, f={trace.final_value:.12g}")
    return trace


def oga(stream: Sequence[Objective], feasible_set: FeasibleSet, x1: ArrayLike, rule: StepRule) -> Trace:
    """オンライン勾配上昇法

    各ラウンドで x_t を出して報酬 f_t(x_t) を受け取り、
    x_{t+1} = Proj_K(x_t + η_t ∇f_t(x_t)) と更新する。
    """
    if len(stream) < 1:
        raise PreconditionError("stream must contain at least one objective")
    x = np.asarray(x1, dtype=np.float64)
    _require_feasible(feasible_set, x, "x1")

    trace = Trace(algorithm="oga")
    trace.meta.update({"T": len(stream), "rule": rule.kind})
    for t, f_t in enumerate(stream, start=1):
        trace.record(t, x, f_t.value(x))
        x = feasible_set.project(x + rule.step(t) * f_t.gradient(x))
    logger.info(f"OGA 完了: T={len(stream)}, 累積報酬={sum(trace.values):.12g}")
    return trace


def _check_stream(trace: Trace, stream: Sequence[Objective]) -> None:
    if len(trace) != len(stream):
        raise DimensionMismatchError("trace and stream lengths differ", trace=len(trace), stream=len(stream))


def alpha_regret(trace: Trace, stream: Sequence[Objective], feasible_set: FeasibleSet,
                 alpha: float, opt_point: ArrayLike) -> float:
    """α·Σ f_t(x*) − Σ f_t(x_t)"""
    _check_stream(trace, stream)
    opt_point = np.asarray(opt_point, dtype=np.float64)
    _require_feasible(feasible_set, opt_point, "opt_point")
    return alpha * sum(f.value(opt_point) for f in stream) - sum(trace.values)


def regret_series(trace: Trace, stream: Sequence[Objective], feasible_set: FeasibleSet,
                  alpha: float, opt_point: ArrayLike) -> List[float]:
    """各 t までの累積 α-regret（x* は全期間で固定）"""
    _check_stream(trace, stream)
    opt_point = np.asarray(opt_point, dtype=np.float64)
    _require_feasible(feasible_set, opt_point, "opt_point")
    best = np.cumsum([f.value(opt_point) for f in stream])
    played = np.cumsum(trace.values)
    return (alpha * best - played).tolist()


def estimate_beta(stream: Sequence[Objective], feasible_set: FeasibleSet,
                  samples: int = None, seed: int = None) -> float:
    """β = max_t max_x ‖∇f_t(x)‖ を外接箱の両端と集合内の標本点で推定"""
    samples = config.CHECK_SAMPLES if samples is None else samples
    seed = config.DEFAULT_SEED if seed is None else seed
    lower, upper = feasible_set.bounding_box()
    points = np.vstack([lower, upper, feasible_set.sample(make_rng(seed), samples)])
    return max(float(np.linalg.norm(f.gradient(x))) for f in stream for x in points)


def sdrfw_guarantee(opt_value: float, c_f: float, f0: float = 0.0) -> float:
    """f(0) + (1 − c_f/e)(OPT − f(0))"""
    return f0 + (1.0 - c_f / math.e) * (opt_value - f0)


def fw_bound(opt_value: float, L: float, diameter: float, K: int) -> float:
    """(1 − 1/e)·OPT − LR²/(2K)"""
    return (1.0 - 1.0 / math.e) * opt_value - L * diameter ** 2 / (2 * K)


def pga_half_bound(opt_value: float, L: float, diameter: float, K: int) -> float:
    """比較用の従来の保証 ½·OPT − LR²/(2K)"""
    return 0.5 * opt_value - L * diameter ** 2 / (2 * K)


def pga_bound(opt_value: float, c_f: float, mu: float, L: float, K: int, f_x1: float) -> float:
    """μ > 0 の保証 OPT/(1+c) − e^{−μK/L}(OPT − (1+c)f(x_1))/(1+c)"""
    scale = 1.0 + c_f
    return opt_value / scale - math.exp(-mu * K / L) * (opt_value - scale * f_x1) / scale


def pga_bound_dr(opt_value: float, c_f: float, L: float, K: int, distance_sq: float) -> float:
    """μ = 0 の保証 OPT/(1+c) − L‖x_1 − x*‖²/(2K(1+c))"""
    scale = 1.0 + c_f
    return opt_value / scale - L * distance_sq / (2 * K * scale)


def oga_regret_bound_strong(beta: float, mu: float, c: float, T: int) -> float:
    """η_t = 1/(μt) のときの regret 上界 β²(1 + ln T)/(2μ(1+c))"""
    return beta ** 2 / (2.0 * mu * (1.0 + c)) * (1.0 + math.log(T))


def oga_regret_bound_fixed(radius: float, beta: float, c: float, T: int) -> float:
    """η = R/(β√T) のときの regret 上界 Rβ√T/(1+c)"""
    return radius * beta * math.sqrt(T) / (1.0 + c)
