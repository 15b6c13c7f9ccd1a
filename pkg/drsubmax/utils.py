"""
ユーティリティ関数とヘルパー
"""
import functools
import logging
import math
import re
import time
from typing import Any, Callable, Dict, Optional

import numpy as np


logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    """シードから決定的な乱数生成器を作成

    カウンタベースの Philox を使うため、プラットフォームに依存せず
    同じシードから同じ系列が得られる。
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, count: int) -> list:
    """独立な部分系列を count 個生成（並列実行でも結果が順序に依存しない）"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def format_float(value: Optional[float], digits: int = 17) -> str:
    """再現性のため有効数字 digits 桁で浮動小数点数を文字列化"""
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return format(float(value), f".{digits}g")


def sanitize_error_message(error: Exception, include_type: bool = True) -> str:
    """エラーメッセージをサニタイズして安全に返す"""
    error_msg = str(error)

    # ホームディレクトリのパスはマスク
    error_msg = re.sub(r"/(home|Users)/[^/\s]+", r"/\1/***", error_msg)
    # 巨大な配列の repr は切り詰める
    if len(error_msg) > 2000:
        error_msg = error_msg[:2000] + "..."

    if include_type:
        return f"{type(error).__name__}: {error_msg}"
    return error_msg


def format_error_payload(error: Exception) -> Dict[str, Any]:
    """stderr に出力する機械可読なエラー情報を生成"""
    if hasattr(error, "to_dict"):
        payload = error.to_dict()
        payload["message"] = sanitize_error_message(error, include_type=False)
        return payload
    return {
        "error": type(error).__name__,
        "message": sanitize_error_message(error, include_type=False),
        "details": {},
    }


def measure_execution_time(func: Callable) -> Callable:
    """関数の実行時間を測定するデコレータ"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            execution_time = time.perf_counter() - start_time
            logger.info(f"{func.__name__} executed in {execution_time:.2f} seconds")
            return result
        except Exception as e:
            execution_time = time.perf_counter() - start_time
            logger.error(f"{func.__name__} failed after {execution_time:.2f} seconds: {str(e)}")
            raise

    return wrapper
