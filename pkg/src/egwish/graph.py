"""Undirected graphs on {0, ..., p-1} and the chordal machinery built on them.

A graph here is the sparsity pattern of a precision matrix: vertices are
coordinates, edges are the off-diagonal positions allowed to be nonzero.
Everything downstream (constrained MLE, normalizing constants, the
graph sampler) consumes this type.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidPair, NotDecomposable

Edge = tuple[int, int]


def _normalize_edges(p: int, edges: Iterable[Sequence[int]]) -> frozenset[Edge]:
    out = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise InvalidPair(f"self loop ({i},{j})")
        if not (0 <= i < p and 0 <= j < p):
            raise InvalidPair(f"edge ({i},{j}) out of range for p={p}")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph; edges are stored as (i, j) with i < j."""

    p: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"need at least one vertex, got p={self.p}")
        object.__setattr__(self, "edges", _normalize_edges(self.p, self.edges))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def max_edges(self) -> int:
        return self.p * (self.p - 1) // 2

    @cached_property
    def edge_list(self) -> tuple[Edge, ...]:
        """Edges in lexicographic order; the canonical ordering everywhere."""
        return tuple(sorted(self.edges))

    @cached_property
    def _adj_sets(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.p)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(frozenset(s) for s in nbrs)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj_sets[v]

    def degree(self, v: int) -> int:
        return len(self._adj_sets[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self._adj_sets], dtype=np.int64)

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        return (min(i, j), max(i, j)) in self.edges

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix with zero diagonal."""
        a = np.zeros((self.p, self.p), dtype=np.int64)
        for i, j in self.edges:
            a[i, j] = 1
            a[j, i] = 1
        return a

    def key_bytes(self) -> bytes:
        """Canonical byte string: p followed by the edge-presence bitmask."""
        mask = 0
        for i, j in self.edges:
            mask |= 1 << pair_index(self.p, i, j)
        nbytes = (self.max_edges + 7) // 8
        return self.p.to_bytes(4, "big") + mask.to_bytes(max(nbytes, 1), "big")

    def short_hash(self) -> str:
        return hashlib.blake2b(self.key_bytes(), digest_size=8).hexdigest()

    def __hash__(self) -> int:
        return hash((self.p, self.edges))


def pair_index(p: int, i: int, j: int) -> int:
    """Index of pair (i, j), i < j, in the row-major upper-triangle enumeration."""
    if not (0 <= i < j < p):
        raise InvalidPair(f"pair ({i},{j}) invalid for p={p}")
    return i * (2 * p - i - 1) // 2 + (j - i - 1)


def pair_from_index(p: int, k: int) -> Edge:
    """Inverse of pair_index."""
    if not 0 <= k < p * (p - 1) // 2:
        raise InvalidPair(f"pair index {k} out of range for p={p}")
    i = 0
    row = p - 1
    while k >= row:
        k -= row
        i += 1
        row -= 1
    return i, i + 1 + k


def flip_edge(g: Graph, i: int, j: int) -> Graph:
    """Return the graph with edge (i, j) toggled; a self-inverse move."""
    if i == j:
        raise InvalidPair(f"cannot flip diagonal ({i},{j})")
    if not (0 <= i < g.p and 0 <= j < g.p):
        raise InvalidPair(f"pair ({i},{j}) out of range for p={g.p}")
    e = (min(i, j), max(i, j))
    if e in g.edges:
        return Graph(g.p, g.edges - {e})
    return Graph(g.p, g.edges | {e})


def mcs_order(g: Graph) -> list[int]:
    """Maximum cardinality search order; ties broken by lowest vertex index."""
    selected: list[int] = []
    weight = [0] * g.p
    done = [False] * g.p
    for _ in range(g.p):
        v = max(
            (u for u in range(g.p) if not done[u]),
            key=lambda u: (weight[u], -u),
        )
        selected.append(v)
        done[v] = True
        for u in g.neighbors(v):
            if not done[u]:
                weight[u] += 1
    return selected


def _later_neighbor_sets(g: Graph, order: Sequence[int]) -> list[set[int]]:
    pos = {v: k for k, v in enumerate(order)}
    return [
        {u for u in g.neighbors(v) if pos[u] > pos[v]}
        for v in order
    ]


def is_perfect_elimination(g: Graph, order: Sequence[int]) -> bool:
    """Check that each vertex's later neighbors along the ordering form a clique."""
    if sorted(order) != list(range(g.p)):
        raise ValueError("ordering must be a permutation of the vertices")
    for later in _later_neighbor_sets(g, order):
        nodes = sorted(later)
        for a in range(len(nodes)):
            for b in range(a + 1, len(nodes)):
                if not g.has_edge(nodes[a], nodes[b]):
                    return False
    return True


def is_decomposable(g: Graph) -> tuple[bool, list[int] | None]:
    """Chordality test; on success also return a perfect elimination ordering.

    The ordering is the reverse of the maximum cardinality search order, which
    is perfect exactly when the graph is chordal.
    """
    peo = list(reversed(mcs_order(g)))
    if is_perfect_elimination(g, peo):
        return True, peo
    return False, None


@dataclass(frozen=True)
class CliqueTree:
    """Maximal cliques and separators of a chordal graph, in an order
    satisfying the running intersection property.

    separators[k] joins cliques[k + 1] to the tree built from the earlier
    cliques; a one-clique graph has no separators.  Disconnected graphs get
    empty separators between components.
    """

    cliques: tuple[frozenset[int], ...]
    separators: tuple[frozenset[int], ...]


def clique_decomposition(g: Graph) -> CliqueTree:
    """Maximal cliques and running-intersection separators of a chordal graph."""
    ok, peo = is_decomposable(g)
    if not ok:
        raise NotDecomposable("graph is not chordal")
    assert peo is not None

    candidates = []
    for v, later in zip(peo, _later_neighbor_sets(g, peo)):
        candidates.append(frozenset({v} | later))
    maximal = [
        c for c in candidates
        if not any(c < other for other in candidates)
    ]
    # Deduplicate while keeping a deterministic order.
    cliques = sorted(set(maximal), key=lambda c: sorted(c))

    # Prim-style junction tree: attach the clique with the largest
    # intersection to the tree built so far; any maximum-weight spanning
    # tree of the clique graph satisfies running intersection.
    k = len(cliques)
    in_tree = [False] * k
    order = [0]
    in_tree[0] = True
    seps: list[frozenset[int]] = []
    while len(order) < k:
        best = None
        for cand in range(k):
            if in_tree[cand]:
                continue
            for t in order:
                w = len(cliques[cand] & cliques[t])
                key = (w, -t, -cand)
                if best is None or key > best[0]:
                    best = (key, t, cand)
        assert best is not None
        _, t, cand = best
        in_tree[cand] = True
        order.append(cand)
        seps.append(cliques[cand] & cliques[t])

    return CliqueTree(
        cliques=tuple(cliques[i] for i in order),
        separators=tuple(seps),
    )


@dataclass(frozen=True)
class ParamIndex:
    """Ordered free positions of a precision matrix restricted to a graph:
    the p diagonal positions first, then the edges lexicographically."""

    p: int
    positions: tuple[Edge, ...]

    @cached_property
    def _lookup(self) -> dict[Edge, int]:
        return {pos: k for k, pos in enumerate(self.positions)}

    def __len__(self) -> int:
        return len(self.positions)

    def index_of(self, i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        try:
            return self._lookup[key]
        except KeyError:
            raise InvalidPair(f"({i},{j}) is not a free position") from None

    def position(self, k: int) -> Edge:
        return self.positions[k]


def param_index(g: Graph) -> ParamIndex:
    diag = tuple((i, i) for i in range(g.p))
    return ParamIndex(p=g.p, positions=diag + g.edge_list)


def to_json_dict(g: Graph) -> dict:
    return {"p": g.p, "edges": [[i, j] for i, j in g.edge_list]}


def from_json_dict(d: dict) -> Graph:
    try:
        p = int(d["p"])
        edges = d["edges"]
    except (KeyError, TypeError) as exc:
        raise DimensionMismatch(f"malformed graph record: {exc}") from exc
    return Graph(p, [(int(e[0]), int(e[1])) for e in edges])


def write_graph_json(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(g), indent=0) + "\n")


def read_graph_json(path: str | Path) -> Graph:
    return from_json_dict(json.loads(Path(path).read_text()))


def write_adjacency_csv(g: Graph, path: str | Path) -> None:
    a = g.adjacency()
    lines = [",".join(str(int(x)) for x in row) for row in a]
    Path(path).write_text("\n".join(lines) + "\n")


def read_adjacency_csv(path: str | Path) -> Graph:
    rows = [
        [int(tok) for tok in line.split(",")]
        for line in Path(path).read_text().strip().splitlines()
    ]
    a = np.array(rows, dtype=np.int64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"adjacency matrix must be square, got {a.shape}")
    if np.any(a != a.T) or np.any(np.diag(a) != 0) or not np.isin(a, (0, 1)).all():
        raise DimensionMismatch("adjacency must be symmetric 0/1 with zero diagonal")
    p = a.shape[0]
    edges = [(i, j) for i in range(p) for j in range(i + 1, p) if a[i, j]]
    return Graph(p, edges)


def complete_graph(p: int) -> Graph:
    return Graph(p, [(i, j) for i in range(p) for j in range(i + 1, p)])


def empty_graph(p: int) -> Graph:
    return Graph(p)


def path_graph(p: int) -> Graph:
    return Graph(p, [(i, i + 1) for i in range(p - 1)])


def band_graph(p: int, width: int) -> Graph:
    """Edges between vertices at distance at most `width`."""
    return Graph(
        p,
        [(i, j) for i in range(p) for j in range(i + 1, min(i + width + 1, p))],
    )


def star_graph(p: int) -> Graph:
    """Hub at vertex 0."""
    return Graph(p, [(0, j) for j in range(1, p)])
