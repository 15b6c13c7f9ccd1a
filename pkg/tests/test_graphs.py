"""
グラフと入力ファイルの読み込みのテスト
"""
import os

import numpy as np
import pytest

from drsubmax.errors import DomainError, GraphParseError
from drsubmax.graphs import Graph, parse_graph


class TestGraph:
    """Graph の構築と基本操作"""

    def test_triangle_square_triangle(self, tst_graph):
        assert tst_graph.n == 10
        assert tst_graph.m == 12
        assert tst_graph.is_connected()
        assert tst_graph.degrees().sum() == 24

    def test_edges_are_normalized(self):
        graph = Graph.from_edges(3, [(2, 1), (1, 2), (3, 2)])
        assert graph.edges == ((1, 2), (2, 3))

    def test_adjacency_matrix(self):
        A = Graph.complete(3).adjacency_matrix()
        np.testing.assert_array_equal(A, np.ones((3, 3)) - np.eye(3))

    def test_rejects_self_loop(self):
        with pytest.raises(DomainError):
            Graph.from_edges(2, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            Graph.from_edges(2, [(1, 3)])

    def test_components_and_subgraph(self):
        graph = Graph.from_edges(5, [(1, 3), (2, 4), (4, 5)])
        assert graph.connected_components() == [[1, 3], [2, 4, 5]]
        sub = graph.subgraph([2, 4, 5])
        assert sub.n == 3
        assert sub.edges == ((1, 2), (2, 3))
        assert not graph.is_connected()

    def test_is_independent(self, tst_graph):
        assert tst_graph.is_independent([1, 4, 7, 9])
        assert not tst_graph.is_independent([1, 2])

    def test_random_is_reproducible(self):
        assert Graph.random(15, 0.4, seed=9) == Graph.random(15, 0.4, seed=9)


class TestParseGraph:
    """edgelist / DIMACS の読み込み"""

    def test_bundled_edgelist(self, data_dir, tst_graph):
        graph = parse_graph(os.path.join(data_dir, "triangle_square_triangle.edgelist"))
        assert graph == tst_graph

    def test_edgelist_without_header(self, tmp_path):
        path = tmp_path / "g.edgelist"
        path.write_text("# comment\n1 2\n2 3  # trailing\n")
        graph = parse_graph(path)
        assert graph.n == 3
        assert graph.edges == ((1, 2), (2, 3))

    def test_edgelist_isolated_vertices(self, tmp_path):
        path = tmp_path / "g.edgelist"
        path.write_text("5\n1 2\n")
        assert parse_graph(path).n == 5

    def test_edgelist_malformed(self, tmp_path):
        path = tmp_path / "g.edgelist"
        path.write_text("1 2\n1 2 3\n")
        with pytest.raises(GraphParseError) as excinfo:
            parse_graph(path)
        assert excinfo.value.line_number == 2

    def test_edgelist_exceeds_declared_count(self, tmp_path):
        path = tmp_path / "g.edgelist"
        path.write_text("2\n1 3\n")
        with pytest.raises(GraphParseError):
            parse_graph(path)

    def test_dimacs_triangle(self, tmp_path):
        path = tmp_path / "k3.col"
        path.write_text("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n")
        assert parse_graph(path, "dimacs") == Graph.complete(3)

    def test_dimacs_self_loop(self, tmp_path):
        path = tmp_path / "loop.col"
        path.write_text("p edge 2 1\ne 1 1\n")
        with pytest.raises(GraphParseError) as excinfo:
            parse_graph(path, "dimacs")
        assert "line 2" in str(excinfo.value)

    def test_dimacs_edge_count_mismatch(self, tmp_path):
        path = tmp_path / "short.col"
        path.write_text("p edge 3 2\ne 1 2\n")
        with pytest.raises(GraphParseError):
            parse_graph(path, "dimacs")

    def test_dimacs_edge_before_header(self, tmp_path):
        path = tmp_path / "bad.col"
        path.write_text("e 1 2\np edge 2 1\n")
        with pytest.raises(GraphParseError):
            parse_graph(path, "dimacs")

    def test_unknown_format(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("1 2\n")
        with pytest.raises(GraphParseError):
            parse_graph(path, "graphml")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            parse_graph(tmp_path / "missing.edgelist")
