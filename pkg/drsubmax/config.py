"""
アプリケーション設定の一元管理

Config は環境変数で上書きできる数値・ログ設定、
RunConfig は CLI に渡す実行設定ファイル（フラットな JSON）を表す。
"""
import json
import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from drsubmax.errors import ConfigError


logger = logging.getLogger(__name__)


@dataclass
class Config:
    """アプリケーション設定クラス"""

    # 乱数・出力設定
    DEFAULT_SEED: int = 20220607
    OUTPUT_FORMAT: str = "csv"
    FLOAT_DIGITS: int = 17
    RECORD_TIMING: bool = False

    # 許容誤差
    FEASIBILITY_TOL: float = 1e-8
    ORACLE_TOL: float = 1e-9

    # 平滑性定数（Perron-Frobenius / GP）
    PF_TOL: float = 1e-10
    PF_MAX_ITER: int = 100000
    GP_TOL: float = 1e-9
    GP_MAX_BISECTIONS: int = 200
    GP_PHASE1_MAX_ITER: int = 500
    SMOOTHNESS_MODE: str = "corner"

    # 射影
    BUDGET_BISECTION_TOL: float = 1e-10
    BUDGET_MAX_ITER: int = 200

    # オラクル
    CHECK_SAMPLES: int = 200
    GRID_RESOLUTION: float = 0.02

    # 実験のデフォルト値
    STABILITY_ITERATIONS: int = 50
    QUADRATIC_DIMENSION: int = 25
    QUADRATIC_MU: float = 5.0
    QUADRATIC_BUDGETS: list = field(default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0])
    ONLINE_HORIZON: int = 1000
    ONLINE_DIMENSION: int = 3

    # ロギング設定
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @classmethod
    def from_env(cls) -> "Config":
        """環境変数から設定を読み込み"""
        config = cls()

        for key in dir(config):
            if key.isupper() and not key.startswith("_"):
                env_value = os.environ.get(key)

                if env_value is not None:
                    current_type = type(getattr(config, key))

                    # 型変換
                    try:
                        if current_type == bool:
                            setattr(config, key, env_value.lower() in ("true", "1", "yes", "on"))
                        elif current_type == int:
                            setattr(config, key, int(env_value))
                        elif current_type == float:
                            setattr(config, key, float(env_value))
                        elif current_type == list:
                            # カンマ区切りの数値リストとして解析
                            setattr(config, key, [float(item.strip()) for item in env_value.split(",")])
                        else:
                            setattr(config, key, env_value)
                    except ValueError:
                        # 型変換に失敗した場合はデフォルト値を使用
                        logger.warning(f"環境変数 {key}={env_value!r} を解釈できないためデフォルト値を使用します")

        return config

    def validate(self) -> None:
        """設定値の妥当性を検証"""
        for key in ("FEASIBILITY_TOL", "ORACLE_TOL", "PF_TOL", "GP_TOL", "BUDGET_BISECTION_TOL"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive")

        for key in ("PF_MAX_ITER", "GP_MAX_BISECTIONS", "GP_PHASE1_MAX_ITER", "BUDGET_MAX_ITER",
                    "CHECK_SAMPLES", "STABILITY_ITERATIONS", "QUADRATIC_DIMENSION",
                    "ONLINE_HORIZON", "ONLINE_DIMENSION"):
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be at least 1")

        if not 0 < self.GRID_RESOLUTION <= 1:
            raise ValueError("GRID_RESOLUTION must be in (0, 1]")

        if self.QUADRATIC_MU <= 0:
            raise ValueError("QUADRATIC_MU must be positive")

        if any(s <= 0 for s in self.QUADRATIC_BUDGETS):
            raise ValueError("QUADRATIC_BUDGETS must be positive")

        if self.OUTPUT_FORMAT not in ("csv", "json"):
            raise ValueError("OUTPUT_FORMAT must be 'csv' or 'json'")

        if self.SMOOTHNESS_MODE not in ("constant", "corner", "gp"):
            raise ValueError("SMOOTHNESS_MODE must be one of constant, corner, gp")

        if not 1 <= self.FLOAT_DIGITS <= 17:
            raise ValueError("FLOAT_DIGITS must be between 1 and 17")

        if self.DEFAULT_SEED < 0 or self.DEFAULT_SEED >= 2 ** 64:
            raise ValueError("DEFAULT_SEED must be an unsigned 64-bit integer")

    def to_dict(self) -> Dict[str, Any]:
        """設定を辞書形式で返す"""
        return {
            key: getattr(self, key)
            for key in dir(self)
            if key.isupper() and not key.startswith("_")
        }

    def __str__(self) -> str:
        """設定の文字列表現"""
        return "\n".join(f"{key}={value}" for key, value in self.to_dict().items())


def load_config() -> Config:
    """環境変数から設定を読み込み、検証に失敗したらデフォルト設定を返す"""
    loaded = Config.from_env()
    try:
        loaded.validate()
    except ValueError as e:
        logger.warning(f"Configuration validation error: {e}")
        loaded = Config()
    return loaded


# グローバル設定インスタンス
config = load_config()


ALGORITHMS = ("sdrfw", "fw", "pga")
OBJECTIVE_FAMILIES = ("quadratic", "quadratic_random", "stability", "negative_dependence", "mean_field_kl")
SET_KINDS = ("box", "simplex", "budget_box")

Number = Union[int, float]


@dataclass
class RunConfig:
    """CLI の実行設定（フラットなキー・値の JSON 文書）

    "auto" の L は smoothness_constant を、"auto" の K は ⌈L/μ⌉ を意味する。
    """

    objective: str = "quadratic_random"
    n: int = 3
    # 目的関数のパラメータ（ファミリーごとに使うキーが異なる）
    H: Optional[List[List[float]]] = None
    h: Optional[List[float]] = None
    c0: float = 0.0
    entry_low: float = -10.0
    entry_high: float = -5.0
    graph: Optional[str] = None
    graph_format: str = "edgelist"
    degree: int = 2
    delta: float = 0.05
    # 許容集合
    set: str = "budget_box"
    budget: float = 1.0
    radius: float = 1.0
    lower: Union[Number, List[float]] = 0.0
    upper: Union[Number, List[float]] = 1.0
    # アルゴリズム
    algorithm: str = "sdrfw"
    mu: Union[Number, str] = "auto"
    L: Union[Number, str] = "auto"
    K: Union[int, str] = "auto"
    x1: Union[str, List[float]] = "zero"
    mode: str = "corner"
    iterations: int = 50
    horizon: int = 1000
    step_rule: str = "strongly_convex"
    seed: int = 20220607
    output: Optional[str] = None
    format: str = "csv"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """辞書から設定を構築し検証する"""
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}", keys=unknown)
        run_config = cls(**data)
        run_config.validate()
        return run_config

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """JSON ファイルから設定を読み込み"""
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {path}: {e}", path=str(path)) from e
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}", path=str(path)) from e
        return cls.from_dict(data)

    def validate(self) -> None:
        """設定値の妥当性を検証"""
        if self.objective not in OBJECTIVE_FAMILIES:
            raise ConfigError(f"objective must be one of {OBJECTIVE_FAMILIES}", objective=self.objective)
        if self.set not in SET_KINDS:
            raise ConfigError(f"set must be one of {SET_KINDS}", set=self.set)
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}", algorithm=self.algorithm)
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError("n must be a positive integer", n=self.n)
        for key in ("mu", "L"):
            value = getattr(self, key)
            if isinstance(value, str):
                if value != "auto":
                    raise ConfigError(f"{key} must be a number or 'auto'", **{key: value})
            elif value < 0:
                raise ConfigError(f"{key} must be nonnegative", **{key: value})
        if isinstance(self.K, str):
            if self.K != "auto":
                raise ConfigError("K must be a positive integer or 'auto'", K=self.K)
        elif not isinstance(self.K, int) or self.K < 1:
            raise ConfigError("K must be a positive integer or 'auto'", K=self.K)
        if isinstance(self.x1, str) and self.x1 not in ("zero", "uniform"):
            raise ConfigError("x1 must be 'zero', 'uniform' or a list of floats", x1=self.x1)
        if self.mode not in ("constant", "corner", "gp"):
            raise ConfigError("mode must be one of constant, corner, gp", mode=self.mode)
        if self.step_rule not in ("strongly_convex", "fixed"):
            raise ConfigError("step_rule must be 'strongly_convex' or 'fixed'", step_rule=self.step_rule)
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'", format=self.format)
        if self.graph_format not in ("edgelist", "dimacs"):
            raise ConfigError("graph_format must be 'edgelist' or 'dimacs'", graph_format=self.graph_format)
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", seed=self.seed)
        if self.iterations < 1 or self.horizon < 1:
            raise ConfigError("iterations and horizon must be positive")
        if not 0 < self.delta < 0.5:
            raise ConfigError("delta must be in (0, 1/2)", delta=self.delta)
        if self.objective == "stability" and not self.graph:
            raise ConfigError("stability objective needs a graph path")

    def to_dict(self) -> Dict[str, Any]:
        """設定を辞書形式で返す（JSON 出力へのエコー用）"""
        return {f.name: getattr(self, f.name) for f in fields(self)}
