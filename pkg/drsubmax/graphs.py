"""
無向グラフと入力ファイルの読み込み

頂点番号は 1 始まり。自己ループは持たず、重複辺は取り除く。
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from drsubmax.errors import DomainError, GraphParseError
from drsubmax.utils import make_rng


logger = logging.getLogger(__name__)

GRAPH_FORMATS = ("edgelist", "dimacs")


@dataclass(frozen=True)
class Graph:
    """単純無向グラフ G = (V, E)"""

    n: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("vertex count must be nonnegative", n=self.n)
        normalized = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise DomainError(f"self-loop at vertex {u}", vertex=u)
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise DomainError(f"edge ({u}, {v}) has an id outside [1, {self.n}]", edge=(u, v))
            normalized.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        return cls(n, tuple(edges))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple((u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, ())

    @classmethod
    def random(cls, n: int, density: float, seed: int) -> "Graph":
        """各辺を確率 density で独立に含むランダムグラフ"""
        rng = make_rng(seed)
        pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
        keep = rng.uniform(size=len(pairs)) < density
        return cls(n, tuple(p for p, k in zip(pairs, keep) if k))

    @classmethod
    def triangle_square_triangle(cls) -> "Graph":
        """三角形・四角形・三角形を辺でつないだ10頂点12辺のグラフ（s(G) = 4）"""
        return cls(10, (
            (1, 2), (1, 3), (2, 3),
            (3, 4),
            (4, 5), (4, 6), (5, 7), (6, 7),
            (7, 8),
            (8, 9), (8, 10), (9, 10),
        ))

    @property
    def m(self) -> int:
        return len(self.edges)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.n + 1))
        graph.add_edges_from(self.edges)
        return graph

    def adjacency_matrix(self) -> NDArray[np.float64]:
        """0/1 の隣接行列（行・列は頂点 1..n の順）"""
        return nx.to_numpy_array(self.to_networkx(), nodelist=range(1, self.n + 1), dtype=np.float64)

    def degrees(self) -> NDArray[np.int64]:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return deg

    def is_connected(self) -> bool:
        return self.n > 0 and nx.is_connected(self.to_networkx())

    def connected_components(self) -> List[List[int]]:
        """連結成分を元の頂点番号のリストで返す（最小頂点番号の順）"""
        components = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(components, key=lambda c: c[0])

    def subgraph(self, vertices: List[int]) -> "Graph":
        """指定した頂点の誘導部分グラフ（頂点番号は 1..k に振り直す）"""
        index = {v: i + 1 for i, v in enumerate(vertices)}
        return Graph(len(vertices), tuple(
            (index[u], index[v]) for u, v in self.edges if u in index and v in index
        ))

    def is_independent(self, vertices: Iterable[int]) -> bool:
        chosen = set(vertices)
        return not any(u in chosen and v in chosen for u, v in self.edges)


def _parse_pair(tokens: List[str], line_number: int) -> Tuple[int, int]:
    try:
        u, v = int(tokens[0]), int(tokens[1])
    except (ValueError, IndexError):
        raise GraphParseError(f"expected two integer vertex ids, got {' '.join(tokens)!r}",
                              line_number=line_number)
    if u == v:
        raise GraphParseError(f"self-loop at vertex {u}", line_number=line_number)
    if u < 1 or v < 1:
        raise GraphParseError("vertex ids are 1-based", line_number=line_number)
    return u, v


def _parse_edgelist(lines: List[str]) -> Graph:
    """"u v" 形式（# はコメント）。先頭の整数1つだけの行は頂点数として扱う"""
    declared_n: Optional[int] = None
    edges = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) == 1 and declared_n is None and not edges:
            try:
                declared_n = int(tokens[0])
            except ValueError:
                raise GraphParseError(f"malformed vertex count {tokens[0]!r}", line_number=line_number)
            continue
        if len(tokens) != 2:
            raise GraphParseError(f"expected 'u v', got {line!r}", line_number=line_number)
        edges.append(_parse_pair(tokens, line_number))

    max_id = max((max(e) for e in edges), default=0)
    if declared_n is not None and max_id > declared_n:
        raise GraphParseError(f"vertex id {max_id} exceeds the declared count {declared_n}")
    return Graph(declared_n if declared_n is not None else max_id, tuple(edges))


def _parse_dimacs(lines: List[str]) -> Graph:
    """"p edge n m" ヘッダーと "e u v" 行（c はコメント）"""
    n: Optional[int] = None
    declared_m = 0
    edges = []
    for line_number, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        if tokens[0] == "p":
            if n is not None:
                raise GraphParseError("duplicate problem line", line_number=line_number)
            if len(tokens) != 4 or tokens[1] not in ("edge", "col"):
                raise GraphParseError(f"malformed problem line {raw.strip()!r}", line_number=line_number)
            try:
                n, declared_m = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise GraphParseError(f"malformed problem line {raw.strip()!r}", line_number=line_number)
        elif tokens[0] == "e":
            if n is None:
                raise GraphParseError("edge line before the problem line", line_number=line_number)
            if len(tokens) != 3:
                raise GraphParseError(f"expected 'e u v', got {raw.strip()!r}", line_number=line_number)
            u, v = _parse_pair(tokens[1:], line_number)
            if u > n or v > n:
                raise GraphParseError(f"vertex id outside [1, {n}]", line_number=line_number)
            edges.append((u, v))
        else:
            raise GraphParseError(f"unknown line type {tokens[0]!r}", line_number=line_number)

    if n is None:
        raise GraphParseError("missing 'p edge n m' problem line")
    if len(edges) != declared_m:
        raise GraphParseError(f"header declares {declared_m} edges but the file has {len(edges)}",
                              declared=declared_m, found=len(edges))
    return Graph(n, tuple(edges))


def parse_graph(path: Union[str, Path], fmt: str = "edgelist") -> Graph:
    """グラフファイルを読み込む（fmt は edgelist か dimacs）"""
    if fmt not in GRAPH_FORMATS:
        raise GraphParseError(f"unknown graph format {fmt!r}", format=fmt)
    with open(path, encoding="utf-8") as f:
        lines = f.readlines()
    graph = _parse_edgelist(lines) if fmt == "edgelist" else _parse_dimacs(lines)
    logger.info(f"グラフを読み込みました: {path}（n={graph.n}, m={graph.m}）")
    return graph
