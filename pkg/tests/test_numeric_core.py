"""
ベクトル・対称行列の基本演算のテスト
"""
import numpy as np
import pytest

from drsubmax.errors import DimensionMismatchError, DomainError
from drsubmax.numeric_core import as_sym_matrix, as_vector, dominates, dot, is_symmetric, join, meet, norm2


class TestAsVector:
    """as_vector の検証"""

    def test_scalar_becomes_length_one(self):
        v = as_vector(3.0)
        assert v.shape == (1,)
        assert v[0] == 3.0

    def test_result_is_read_only(self):
        v = as_vector([1.0, 2.0])
        with pytest.raises(ValueError):
            v[0] = 5.0

    def test_rejects_matrix(self):
        with pytest.raises(DimensionMismatchError):
            as_vector([[1.0, 2.0], [3.0, 4.0]])

    def test_rejects_empty(self):
        with pytest.raises(DimensionMismatchError):
            as_vector([])

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            as_vector([1.0, float("nan")])


class TestAsSymMatrix:
    """as_sym_matrix の検証"""

    def test_symmetrizes(self):
        m = as_sym_matrix([[1.0, 2.0], [0.0, 1.0]])
        np.testing.assert_array_equal(m, [[1.0, 1.0], [1.0, 1.0]])
        assert is_symmetric(m)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            as_sym_matrix([[1.0, 2.0, 3.0]])

    def test_rejects_inf(self):
        with pytest.raises(DomainError):
            as_sym_matrix([[np.inf]])


class TestLatticeOperations:
    """join / meet / dominates"""

    def test_join_and_meet(self):
        a, b = np.array([1.0, 4.0, 2.0]), np.array([3.0, 0.0, 2.0])
        np.testing.assert_array_equal(join(a, b), [3.0, 4.0, 2.0])
        np.testing.assert_array_equal(meet(a, b), [1.0, 0.0, 2.0])

    def test_join_meet_sum_identity(self):
        a, b = np.array([0.2, 0.7]), np.array([0.5, 0.1])
        np.testing.assert_allclose(join(a, b) + meet(a, b), a + b)

    def test_dominates(self):
        assert dominates([0.0, 1.0], [0.0, 2.0])
        assert not dominates([0.0, 3.0], [0.0, 2.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            join([1.0], [1.0, 2.0])
        with pytest.raises(DimensionMismatchError):
            dot([1.0], [1.0, 2.0])

    def test_dot_and_norm(self):
        assert dot([1.0, 2.0], [3.0, 4.0]) == 11.0
        assert norm2([3.0, 4.0]) == 5.0


def test_is_symmetric_rejects_asymmetric():
    """非対称行列は False"""
    assert not is_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not is_symmetric(np.zeros(3))
