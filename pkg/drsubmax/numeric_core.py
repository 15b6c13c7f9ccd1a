"""
ベクトル・対称行列の基本演算

ベクトルは1次元の float64 配列、対称行列は2次元の float64 配列で表す。
生成関数が返す配列は書き込み不可にしてあるので、スレッド間で共有してよい。
"""
from typing import Iterable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from drsubmax.errors import DimensionMismatchError, DomainError


Vector = NDArray[np.float64]
SymMatrix = NDArray[np.float64]

# 完全一致比較に使う既定の許容誤差
EXACT_TOL = 1e-12


def as_vector(values: Union[ArrayLike, Iterable[float]], name: str = "vector") -> Vector:
    """入力を検証済みの読み取り専用ベクトルに変換"""
    arr = np.atleast_1d(np.array(values, dtype=np.float64))
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional", shape=arr.shape)
    if arr.size == 0:
        raise DimensionMismatchError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries", values=arr)
    arr.setflags(write=False)
    return arr


def as_sym_matrix(values: ArrayLike, name: str = "matrix") -> SymMatrix:
    """正方行列を (M + Mᵀ)/2 で対称化した読み取り専用配列を返す"""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatchError(f"{name} must be a nonempty square matrix", shape=arr.shape)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    sym = 0.5 * (arr + arr.T)
    sym.setflags(write=False)
    return sym


def _check_dims(a: Vector, b: Vector) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")


def join(a: Vector, b: Vector) -> Vector:
    """成分ごとの最大値 a ∨ b"""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return np.maximum(a, b)


def meet(a: Vector, b: Vector) -> Vector:
    """成分ごとの最小値 a ∧ b"""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return np.minimum(a, b)


def dominates(a: Vector, b: Vector) -> bool:
    """a ⪯ b（全ての i で a[i] ≤ b[i]）なら True

    引数の順序に注意: dominates(a, b) は「b が a を上から押さえる」ことを判定する。
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return bool(np.all(a <= b))


def dot(a: Vector, b: Vector) -> float:
    """標準内積"""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return float(np.dot(a, b))


def norm2(a: Vector) -> float:
    """ユークリッドノルム"""
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64)))


def is_symmetric(matrix: NDArray[np.float64], tol: float = EXACT_TOL) -> bool:
    """対称性の判定"""
    m = np.asarray(matrix)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.allclose(m, m.T, atol=tol, rtol=0.0))
