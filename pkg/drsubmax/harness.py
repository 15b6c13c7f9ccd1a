"""
実験ハーネス

設定から目的関数・許容集合を組み立て、ランダム二次関数・安定数・オンラインの各実験を実行し、
結果を CSV / JSON として出力する。
"""
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from drsubmax.algorithms import (
    StepRule,
    Trace,
    estimate_beta,
    fw_baseline,
    iterations_for,
    oga,
    oga_regret_bound_fixed,
    oga_regret_bound_strong,
    pga,
    regret_series,
    sdrfw,
)
from drsubmax.config import RunConfig, config
from drsubmax.errors import ConfigError, CurvatureUndefinedError, PreconditionError
from drsubmax.feasible_sets import BoxSet, BudgetBoxSet, FeasibleSet, SimplexSet
from drsubmax.graphs import Graph, parse_graph
from drsubmax.objectives import (
    MeanFieldKLObjective,
    NegativeDependencePoly,
    Objective,
    QuadraticObjective,
    QuadraticTerm,
    StabilityObjective,
    curvature,
    curvature_no_origin,
    verify_strong_dr,
)
from drsubmax.oracles import (
    GRID_MAX_DIMENSION,
    CheckReport,
    default_check_box,
    grid_gap_bound,
    grid_maximize,
    gradient_check,
    lemma1_check,
    lemma2_check,
    monotonicity_check,
    order_reversal_check,
    smoothness_check,
)
from drsubmax.smoothness import default_mode, estimate_smoothness
from drsubmax.utils import format_float, make_rng, measure_execution_time


logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["iter", "f_value", "estimate", "elapsed_s"]
TABLE_COLUMNS = ["s", "algorithm", "final_value", "K", "L", "mu", "c_f"]


@dataclass
class ExperimentResult:
    """出力対象（trace か table のどちらか）とメタ情報"""

    kind: str
    trace: Optional[Trace] = None
    estimates: Optional[List[float]] = None
    extra_columns: Dict[str, List[float]] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# 設定からの構築
# ---------------------------------------------------------------------------

def _as_bound(value: Union[float, List[float]], n: int, name: str) -> np.ndarray:
    bound = np.asarray(value, dtype=np.float64)
    if bound.ndim == 0:
        bound = np.full(n, float(bound))
    if bound.shape != (n,):
        raise ConfigError(f"{name} must be a number or a list of length {n}", **{name: value})
    return bound.copy()


def build_set(rc: RunConfig, n: int) -> FeasibleSet:
    """設定の set キーから許容集合を作る"""
    if rc.set == "box":
        return BoxSet(_as_bound(rc.lower, n, "lower"), _as_bound(rc.upper, n, "upper"))
    if rc.set == "simplex":
        return SimplexSet(n, rc.radius)
    return BudgetBoxSet(rc.budget, _as_bound(rc.upper, n, "upper"))


def random_quadratic(n: int, rng: np.random.Generator, low: float = -10.0, high: float = -5.0) -> QuadraticObjective:
    """成分が一様分布 [low, high] の H から f(x) = (½x − 1)ᵀHx を作る"""
    return QuadraticObjective.from_asymmetric(rng.uniform(low, high, size=(n, n)))


def random_negative_dependence(n: int, degree: int, rng: np.random.Generator, mu: float = 1.0) -> NegativeDependencePoly:
    """二次の対角項と次数 degree までの負の交互作用項を持つランダムな多項式"""
    diagonal = [QuadraticTerm(a=float(rng.uniform(2.0, 4.0) * n), b=float(rng.uniform(mu, 2.0 * mu)))
                for _ in range(n)]
    interactions = []
    for r in range(2, min(degree, n) + 1):
        for _ in range(n):
            indices = sorted(rng.choice(n, size=r, replace=False).tolist())
            interactions.append((indices, -float(rng.uniform(0.0, 1.0))))
    return NegativeDependencePoly(diagonal, interactions, lower=0.0, upper=1.0)


def build_objective(rc: RunConfig, rng: np.random.Generator) -> Objective:
    """設定の objective キーから目的関数を作る"""
    if rc.objective == "quadratic":
        if rc.H is None or rc.h is None:
            raise ConfigError("quadratic objective needs H and h")
        return QuadraticObjective(rc.H, rc.h, rc.c0)
    if rc.objective == "quadratic_random":
        return random_quadratic(rc.n, rng, rc.entry_low, rc.entry_high)
    if rc.objective == "stability":
        return StabilityObjective.from_graph(parse_graph(rc.graph, rc.graph_format))
    if rc.objective == "negative_dependence":
        return random_negative_dependence(rc.n, rc.degree, rng)
    return MeanFieldKLObjective.facility_location(rng.uniform(0.0, 1.0, size=(rc.n, rc.n)), delta=rc.delta)


def initial_point(feasible_set: FeasibleSet, start: Union[str, Sequence[float]]) -> np.ndarray:
    """x1 の指定（zero / uniform / 座標のリスト）から初期点を作る"""
    n = feasible_set.n
    if isinstance(start, str):
        if start == "zero":
            return np.zeros(n)
        if isinstance(feasible_set, SimplexSet):
            return np.full(n, feasible_set.radius / n)
        if isinstance(feasible_set, BudgetBoxSet):
            return np.minimum(feasible_set.upper, feasible_set.budget / n)
        lower, upper = feasible_set.bounding_box()
        return 0.5 * (lower + upper)
    x1 = np.asarray(start, dtype=np.float64)
    if x1.shape != (n,):
        raise ConfigError(f"x1 must have length {n}", x1=list(start))
    return x1


def _resolve_mu(rc: RunConfig, obj: Objective) -> float:
    return obj.mu if rc.mu == "auto" else float(rc.mu)


def _resolve_L(rc: RunConfig, obj: Objective, feasible_set: FeasibleSet) -> float:
    if rc.L != "auto":
        return float(rc.L)
    mode = rc.mode
    if mode == "constant" and not obj.hessian_is_constant:
        mode = default_mode(obj)
    return estimate_smoothness(obj, feasible_set, mode).value


def _optimum_estimate(obj: Objective, feasible_set: FeasibleSet, L: float) -> Optional[Dict[str, float]]:
    if feasible_set.n > GRID_MAX_DIMENSION:
        return None
    resolution = 1.0 / 50 if feasible_set.n <= 3 else 1.0 / 20
    grid = grid_maximize(obj, feasible_set, resolution)
    return {
        "grid_opt": grid.value,
        "grid_gap": grid_gap_bound(L, feasible_set.diameter(), resolution, feasible_set.n),
    }


# ---------------------------------------------------------------------------
# 実験
# ---------------------------------------------------------------------------

@measure_execution_time
def run_maximize(rc: RunConfig) -> ExperimentResult:
    """設定に従って sdrfw / fw / pga のいずれかを実行"""
    rng = make_rng(rc.seed)
    obj = build_objective(rc, rng)
    feasible_set = build_set(rc, obj.n)
    mu = _resolve_mu(rc, obj)
    L = _resolve_L(rc, obj, feasible_set)
    if rc.K != "auto":
        K = int(rc.K)
    elif rc.algorithm == "sdrfw" or (rc.algorithm == "pga" and mu > 0):
        K = iterations_for(L, mu)
    else:
        K = rc.iterations

    if rc.algorithm == "sdrfw":
        trace = sdrfw(obj, feasible_set, mu, L, K)
    elif rc.algorithm == "fw":
        trace = fw_baseline(obj, feasible_set, K, L)
    else:
        trace = pga(obj, feasible_set, initial_point(feasible_set, rc.x1), L, K, mu=mu)

    optimum = _optimum_estimate(obj, feasible_set, L)
    if optimum is not None:
        trace.meta.update(optimum)
    return ExperimentResult(kind="trace", trace=trace, meta={"objective": obj.describe(), **trace.meta})


@measure_execution_time
def run_quadratic_experiment(n: int = None, s_values: Sequence[float] = None, seed: int = None,
                             mu: float = None, entry_low: float = -10.0, entry_high: float = -5.0) -> ExperimentResult:
    """ランダムな非単調になりうる二次関数で sdrfw / fw / pga を予算ごとに比較

    H は seed から一度だけ生成し、全ての予算 s で共有する。
    """
    n = config.QUADRATIC_DIMENSION if n is None else n
    s_values = config.QUADRATIC_BUDGETS if s_values is None else s_values
    seed = config.DEFAULT_SEED if seed is None else seed
    mu = config.QUADRATIC_MU if mu is None else mu

    obj = random_quadratic(n, make_rng(seed), entry_low, entry_high)
    rows: List[Dict[str, Any]] = []
    monotone: Dict[str, bool] = {}
    for s in sorted(s_values):
        feasible_set = BudgetBoxSet.uniform(n, s)
        L = estimate_smoothness(obj, feasible_set, "constant").value
        K = iterations_for(L, mu)
        c_f = curvature(obj, feasible_set)
        runs = {
            "fw": fw_baseline(obj, feasible_set, K, L),
            "pga": pga(obj, feasible_set, np.zeros(n), L, K, mu=mu, c_f=c_f),
            "sdrfw": sdrfw(obj, feasible_set, mu, L, K),
        }
        for name in sorted(runs):
            rows.append({"s": float(s), "algorithm": name, "final_value": runs[name].final_value,
                         "K": K, "L": L, "mu": mu, "c_f": c_f})
        report = monotonicity_check(obj, feasible_set, seed=seed)
        monotone[format_float(s)] = report.passed
        if not report.passed:
            logger.warning(f"s={s} では目的関数が単調ではありません（{report.violation_count} 点で ∇f < 0）")

    return ExperimentResult(kind="table", rows=rows, meta={"n": n, "seed": seed, "monotone": monotone})


def _component_start(x1: Union[str, Sequence[float]], component: List[int], single: bool,
                     feasible_set: SimplexSet) -> np.ndarray:
    if isinstance(x1, str):
        return initial_point(feasible_set, x1)
    part = np.asarray(x1, dtype=np.float64)[[v - 1 for v in component]]
    return part if single else feasible_set.project(part)


@measure_execution_time
def run_stability(graph: Graph, iterations: int = None, x1: Union[str, Sequence[float]] = "uniform",
                  mode: str = "constant", seed: int = None) -> ExperimentResult:
    """単体上の PGA で安定数の推定値 1/(2 − f(x_k)) を追跡

    非連結グラフでは連結成分ごとに実行し、推定値と関数値を合計する。
    """
    iterations = config.STABILITY_ITERATIONS if iterations is None else iterations
    seed = config.DEFAULT_SEED if seed is None else seed
    if graph.n == 0:
        raise PreconditionError("stability experiment needs at least one vertex")
    if not isinstance(x1, str) and len(x1) != graph.n:
        raise ConfigError(f"x1 must have length {graph.n}")

    components = graph.connected_components()
    single = len(components) == 1
    traces, vertex_order = [], []
    min_sampled = math.inf
    for index, component in enumerate(components):
        obj = StabilityObjective.from_graph(graph.subgraph(component))
        feasible_set = SimplexSet(len(component), 1.0)
        L = estimate_smoothness(obj, feasible_set, mode).value
        trace = pga(obj, feasible_set, _component_start(x1, component, single, feasible_set), L, iterations)
        traces.append(trace)
        vertex_order.extend(component)
        samples = feasible_set.sample(make_rng(seed + index), config.CHECK_SAMPLES)
        min_sampled = min(min_sampled, float(np.min(obj.value_batch(samples))), min(trace.values))

    combined = Trace(algorithm="pga")
    estimates = []
    permutation = np.argsort(vertex_order)
    for k in range(iterations + 1):
        point = np.concatenate([t.iterates[k] for t in traces])[permutation]
        combined.record(k, point, sum(t.values[k] for t in traces))
        combined.elapsed[-1] = sum(t.elapsed[k] for t in traces)
        estimates.append(sum(StabilityObjective.stability_estimate(t.values[k]) for t in traces))

    combined.meta.update({
        "components": len(components),
        "L": [t.meta["L"] for t in traces],
        "mu": 2.0,
        "min_sampled_f": min_sampled,
        "final_estimate": estimates[-1],
    })
    logger.info(f"安定数の推定値: {estimates[-1]:.10g}（成分数 {len(components)}）")
    return ExperimentResult(kind="trace", trace=combined, estimates=estimates,
                            meta={"n": graph.n, "m": graph.m, **combined.meta})


def random_monotone_quadratic(n: int, rng: np.random.Generator, mu: float) -> QuadraticObjective:
    """単位箱上で単調な μ-強 DR-submodular 二次関数（μ = 0 なら DR-submodular）"""
    off = -rng.uniform(0.0, 1.0, size=(n, n))
    H = 0.5 * (off + off.T)
    np.fill_diagonal(H, -rng.uniform(mu, mu + 1.0, size=n) if mu > 0 else -rng.uniform(0.0, 1.0, size=n))
    # hᵢ ≥ Σⱼ |Hᵢⱼ| なら [0,1]ⁿ 上で ∇f ⪰ 0
    h = np.abs(H).sum(axis=1) + rng.uniform(0.0, 1.0, size=n)
    return QuadraticObjective(H, h, 0.0, mu=mu)


@measure_execution_time
def run_online(n: int = None, horizon: int = None, seed: int = None, step_rule: str = "strongly_convex",
               mu: float = 1.0) -> ExperimentResult:
    """ランダムな単調二次関数の系列で OGA を実行し、累積 α-regret と上界を記録

    α = 1/(1+c)（c は系列の最大曲率）、x* は総和の関数の格子最大点。
    fixed 規則では μ = 0 の系列を使う。
    """
    n = config.ONLINE_DIMENSION if n is None else n
    horizon = config.ONLINE_HORIZON if horizon is None else horizon
    seed = config.DEFAULT_SEED if seed is None else seed
    stream_mu = mu if step_rule == "strongly_convex" else 0.0

    rng = make_rng(seed)
    stream = [random_monotone_quadratic(n, rng, stream_mu) for _ in range(horizon)]
    box = BoxSet.unit(n)
    c = max(curvature(f, box) for f in stream)
    alpha = 1.0 / (1.0 + c)
    total = QuadraticObjective(sum(f.H for f in stream), sum(f.h for f in stream), 0.0, mu=0.0)
    opt_point = grid_maximize(total, box, 1.0 / 50 if n <= 3 else 1.0 / 20).point
    beta = estimate_beta(stream, box, seed=seed)

    if step_rule == "strongly_convex":
        rule = StepRule.strongly_convex(min(f.mu for f in stream))
        bounds = [oga_regret_bound_strong(beta, rule.mu, c, t) for t in range(1, horizon + 1)]
    else:
        rule = StepRule.fixed(box.diameter(), beta, horizon)
        bounds = [oga_regret_bound_fixed(box.diameter(), beta, c, horizon)] * horizon

    trace = oga(stream, box, np.zeros(n), rule)
    regret = regret_series(trace, stream, box, alpha, opt_point)
    trace.meta.update({"alpha": alpha, "c": c, "beta": beta, "opt_point": opt_point.tolist(),
                       "final_regret": regret[-1], "final_bound": bounds[-1]})
    logger.info(f"OGA: regret={regret[-1]:.6g}, 上界={bounds[-1]:.6g}")
    return ExperimentResult(kind="trace", trace=trace, estimates=regret, extra_columns={"bound": bounds},
                            meta={"n": n, "horizon": horizon, "step_rule": step_rule, **trace.meta})


def run_smoothness(rc: RunConfig) -> Dict[str, Any]:
    """設定の目的関数・集合について L と診断情報を返す"""
    obj = build_objective(rc, make_rng(rc.seed))
    feasible_set = build_set(rc, obj.n)
    return {"mu": obj.mu, **estimate_smoothness(obj, feasible_set, rc.mode).to_dict()}


def run_checks(rc: RunConfig) -> List[CheckReport]:
    """目的関数の性質を検査するオラクル群を実行

    単調性と非負性が成り立たない場合、lemma2 は参考情報（required=False）になる。
    """
    obj = build_objective(rc, make_rng(rc.seed))
    feasible_set = build_set(rc, obj.n)
    box = default_check_box(obj, feasible_set)
    mu = _resolve_mu(rc, obj)
    L = _resolve_L(rc, obj, feasible_set)
    try:
        c_f = curvature(obj, feasible_set) if feasible_set.contains_origin() else curvature_no_origin(obj, feasible_set)
    except CurvatureUndefinedError as e:
        logger.warning(f"曲率を計算できないため c_f = 1 で検査します: {e}")
        c_f = 1.0

    reports = [
        gradient_check(obj, box, seed=rc.seed),
        verify_strong_dr(obj, box, mu, seed=rc.seed),
        lemma1_check(obj, box, mu, seed=rc.seed),
        order_reversal_check(obj, box, mu, seed=rc.seed),
        smoothness_check(obj, feasible_set, L, seed=rc.seed),
    ]
    for report in reports:
        report.notes["required"] = True
    monotone = monotonicity_check(obj, feasible_set, seed=rc.seed)
    monotone.notes["required"] = False
    lemma2 = lemma2_check(obj, feasible_set, c_f, mu, seed=rc.seed)
    lemma2.notes["required"] = monotone.passed and lemma2.notes["negative_values"] == 0
    lemma2.notes["c_f"] = c_f
    return reports + [monotone, lemma2]


# ---------------------------------------------------------------------------
# 出力
# ---------------------------------------------------------------------------

def _trace_rows(result: ExperimentResult, timing: bool, dump_iterates: bool) -> List[List[str]]:
    trace = result.trace
    digits = config.FLOAT_DIGITS
    rows = []
    for i in range(len(trace)):
        estimate = result.estimates[i] if result.estimates is not None else None
        row = [
            str(trace.step_index[i]),
            format_float(trace.values[i], digits),
            format_float(estimate, digits),
            format_float(trace.elapsed[i], digits) if timing else "",
        ]
        row.extend(format_float(values[i], digits) for values in result.extra_columns.values())
        if dump_iterates:
            row.extend(format_float(v, digits) for v in trace.iterates[i])
        rows.append(row)
    return rows


def _to_csv(result: ExperimentResult, timing: bool, dump_iterates: bool) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if result.kind == "table":
        writer.writerow(TABLE_COLUMNS)
        for row in result.rows:
            writer.writerow([
                format_float(row[c], config.FLOAT_DIGITS) if isinstance(row[c], float) else
                ("" if row[c] is None else str(row[c]))
                for c in TABLE_COLUMNS
            ])
        return buffer.getvalue()

    header = list(TRACE_COLUMNS) + list(result.extra_columns)
    if dump_iterates and result.trace is not None and len(result.trace):
        header += [f"x{i + 1}" for i in range(result.trace.iterates[0].size)]
    writer.writerow(header)
    if result.trace is not None:
        writer.writerows(_trace_rows(result, timing, dump_iterates))
    return buffer.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        # 標準の JSON に inf / nan は無いので null にする
        return None
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def dumps_json(document: Any) -> str:
    """キー順を固定した JSON 文字列（非有限の数値は null）"""
    return json.dumps(_jsonable(document), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _to_json(result: ExperimentResult, run_config: Optional[Dict[str, Any]], seed: Optional[int],
             timing: bool, dump_iterates: bool) -> str:
    document: Dict[str, Any] = {"kind": result.kind, "seed": seed, "config": run_config, "meta": result.meta}
    if result.kind == "table":
        document["columns"] = TABLE_COLUMNS
        document["rows"] = result.rows
    else:
        trace = result.trace
        rows = []
        for i in range(len(trace) if trace is not None else 0):
            row = {
                "iter": trace.step_index[i],
                "f_value": trace.values[i],
                "estimate": result.estimates[i] if result.estimates is not None else None,
                "elapsed_s": trace.elapsed[i] if timing else None,
            }
            for name, values in result.extra_columns.items():
                row[name] = values[i]
            if dump_iterates:
                row["x"] = trace.iterates[i]
            rows.append(row)
        document["columns"] = list(TRACE_COLUMNS) + list(result.extra_columns)
        document["rows"] = rows
    return dumps_json(document)


def emit(result: ExperimentResult, fmt: str = "csv", path: Optional[Union[str, Path]] = None,
         run_config: Optional[Dict[str, Any]] = None, seed: Optional[int] = None,
         timing: bool = None, dump_iterates: bool = False) -> str:
    """結果を CSV / JSON に整形し、path があれば書き込んで文字列を返す

    elapsed_s は timing が有効なときだけ埋める（同じ設定と seed なら同じバイト列になる）。
    """
    timing = config.RECORD_TIMING if timing is None else timing
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}", format=fmt)
    text = _to_csv(result, timing, dump_iterates) if fmt == "csv" else \
        _to_json(result, run_config, seed, timing, dump_iterates)
    if path is not None:
        path = Path(path)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"結果を書き込みました: {path}")
    return text
