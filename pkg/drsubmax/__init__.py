"""
drsubmax: 強 DR-submodular 関数の最大化

SDRFW・PGA・OGA と Frank-Wolfe ベースライン、
Perron-Frobenius 固有値による平滑性定数 L の計算を提供する。
"""
from drsubmax.algorithms import Trace, StepRule, fw_baseline, oga, pga, sdrfw
from drsubmax.errors import DrSubmaxError
from drsubmax.feasible_sets import BoxSet, BudgetBoxSet, FeasibleSet, SimplexSet
from drsubmax.graphs import Graph, parse_graph
from drsubmax.objectives import (
    MeanFieldKLObjective,
    NegativeDependencePoly,
    Objective,
    QuadraticObjective,
    StabilityObjective,
    curvature,
)
from drsubmax.smoothness import pf_eigenvalue, smoothness_constant

__version__ = "1.0.0"

__all__ = [
    "BoxSet",
    "BudgetBoxSet",
    "DrSubmaxError",
    "FeasibleSet",
    "Graph",
    "MeanFieldKLObjective",
    "NegativeDependencePoly",
    "Objective",
    "QuadraticObjective",
    "SimplexSet",
    "StabilityObjective",
    "StepRule",
    "Trace",
    "curvature",
    "fw_baseline",
    "oga",
    "parse_graph",
    "pf_eigenvalue",
    "pga",
    "sdrfw",
    "smoothness_constant",
]
