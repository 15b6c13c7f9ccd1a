"""
ライブラリ共通の例外クラス

呼び出し側が自然に捕捉する組み込み例外（入力不正なら ValueError、
数値計算の失敗なら RuntimeError）を継承させる。
"""
from typing import Any, Dict, Optional


class DrSubmaxError(Exception):
    """全例外の基底（mixin）"""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """stderr 出力用の辞書表現"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(value: Any) -> Any:
    # numpy配列などは list に落とす
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return repr(value)


class DimensionMismatchError(DrSubmaxError, ValueError):
    """ベクトル・行列の次元不一致"""


class DomainError(DrSubmaxError, ValueError):
    """目的関数の定義域外の点で評価しようとした"""


class PreconditionError(DrSubmaxError, ValueError):
    """アルゴリズムの前提条件違反（原点非許容など）"""


class CurvatureUndefinedError(DrSubmaxError, ValueError):
    """∇f(0) が正でない座標があり曲率が定義できない"""


class ModeUnsupportedError(DrSubmaxError, ValueError):
    """指定された平滑性モードが目的関数に適用できない"""


class FormulationError(DrSubmaxError, ValueError):
    """ヘッセ行列の成分が posynomial で表現できない"""


class ConfigError(DrSubmaxError, ValueError):
    """実行設定ファイルの不正"""


class UsageError(DrSubmaxError, ValueError):
    """コマンドライン引数の誤り"""


class GraphParseError(DrSubmaxError, ValueError):
    """グラフファイルの解析エラー"""

    def __init__(self, message: str, line_number: Optional[int] = None, **details: Any):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, line_number=line_number, **details)
        self.line_number = line_number


class ConvergenceError(DrSubmaxError, RuntimeError):
    """反復法が許容誤差内に収束しなかった（best に最良の反復を保持）"""

    def __init__(self, message: str, best: Any = None, **details: Any):
        super().__init__(message, **details)
        self.best = best


class GPInfeasibleError(DrSubmaxError, RuntimeError):
    """幾何計画問題が実行不可能（最良の制約違反量が証拠）"""

    def __init__(self, message: str, best_violation: float, point: Any = None, **details: Any):
        super().__init__(message, best_violation=best_violation, **details)
        self.best_violation = best_violation
        self.point = point


class CapabilityError(DrSubmaxError, NotImplementedError):
    """目的関数がヘッセ行列などのオラクルを提供しない"""
