"""
pytest設定とフィクスチャ
"""
import pytest
import sys
import os

import numpy as np

# パッケージのパスを追加（インストールせずに実行する場合）
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from drsubmax.feasible_sets import BoxSet, BudgetBoxSet, SimplexSet
from drsubmax.graphs import Graph
from drsubmax.objectives import QuadraticObjective, StabilityObjective


@pytest.fixture
def one_dim_quadratic():
    """f(x) = 2x − x²（μ = L = 2、[0,1] 上で最大値 1）"""
    return QuadraticObjective([[-2.0]], [2.0])


@pytest.fixture
def unit_interval():
    return BoxSet.unit(1)


@pytest.fixture
def monotone_quadratic():
    """単位箱上で単調な2次元の強 DR-submodular 二次関数"""
    return QuadraticObjective([[-2.0, -1.0], [-1.0, -2.0]], [4.0, 4.0])


@pytest.fixture
def unit_box_2d():
    return BoxSet.unit(2)


@pytest.fixture
def tst_graph():
    """三角形・四角形・三角形のグラフ（s(G) = 4）"""
    return Graph.triangle_square_triangle()


@pytest.fixture
def tst_objective(tst_graph):
    return StabilityObjective.from_graph(tst_graph)


@pytest.fixture
def simplex_10():
    return SimplexSet(10, 1.0)


@pytest.fixture
def budget_box_3():
    return BudgetBoxSet.uniform(3, 2.0)


@pytest.fixture
def rng():
    """テスト用の決定的な乱数生成器"""
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return os.path.join(os.path.dirname(__file__), '..', 'data')


@pytest.fixture
def configs_dir():
    return os.path.join(os.path.dirname(__file__), '..', 'configs')


@pytest.fixture(autouse=True)
def setup_test_env(monkeypatch):
    """テスト環境のセットアップ"""
    # 環境変数の設定
    test_env = {
        "LOG_LEVEL": "DEBUG",
        "RECORD_TIMING": "false",
    }

    for key, value in test_env.items():
        monkeypatch.setenv(key, value)


@pytest.fixture
def captured_logs(caplog):
    """ログキャプチャヘルパー"""
    import logging
    caplog.set_level(logging.INFO)
    return caplog


# マーカーの定義
def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "integration: mark test as integration test (runs a full experiment end to end)"
    )
    config.addinivalue_line(
        "markers",
        "unit: mark test as unit test"
    )
    config.addinivalue_line(
        "markers",
        "slow: mark test as slow running"
    )


# テストセッションのセットアップ
def pytest_sessionstart(session):
    """テストセッション開始時の処理"""
    print("\n🧪 drsubmax テストスイート開始\n")


def pytest_sessionfinish(session, exitstatus):
    """テストセッション終了時の処理"""
    print("\n✅ テストスイート完了\n")
