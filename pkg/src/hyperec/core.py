"""Hypergraph and graph value types, projections, d-clique enumeration,
two-connected components, and the text file formats.

All types are immutable after construction; every operation here is a pure
function, so instances are safe to share across worker processes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import FormatError

Edge = tuple[int, ...]
Pair = tuple[int, int]


def canon_edge(vertices: Iterable[int]) -> Edge:
    """Sorted tuple form of a hyperedge; raises on repeated vertices."""
    e = tuple(sorted(vertices))
    if len(set(e)) != len(e):
        raise ValueError(f"hyperedge has repeated vertices: {e}")
    return e


def pair(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Hypergraph:
    """d-uniform hypergraph on vertices 0..n-1.

    Hyperedges are stored as a frozenset of strictly ascending d-tuples.
    Isolated vertices are representable: n is explicit, never inferred.
    """

    n: int
    d: int
    edges: frozenset[Edge]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        if self.d < 2:
            raise ValueError("uniformity d must be >= 2")
        for e in self.edges:
            if len(e) != self.d or tuple(sorted(set(e))) != e:
                raise ValueError(f"not an ascending {self.d}-tuple: {e}")
            if e[0] < 0 or e[-1] >= self.n:
                raise ValueError(f"vertex id out of range in hyperedge {e}")

    @classmethod
    def from_edges(cls, n: int, d: int, edges: Iterable[Iterable[int]]) -> "Hypergraph":
        return cls(n, d, frozenset(canon_edge(e) for e in edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def vertices_used(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)


@dataclass(frozen=True)
class SimpleGraph:
    """Graph on vertices 0..n-1 with unordered edges stored as (u, v), u < v."""

    n: int
    edges: frozenset[Pair]

    def __post_init__(self):
        for (u, v) in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u}, {v}) for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "SimpleGraph":
        return cls(n, frozenset(pair(*e) for e in edges))

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for (u, v) in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def has_edge(self, u: int, v: int) -> bool:
        return pair(u, v) in self.edges


@dataclass(frozen=True)
class WeightedGraph:
    """Graph with positive integer edge multiplicities; absent pair = weight 0."""

    n: int
    weights: Mapping[Pair, int] = field(default_factory=dict)

    def __post_init__(self):
        for (u, v), w in self.weights.items():
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad pair ({u}, {v}) for n={self.n}")
            if w < 1:
                raise ValueError(f"stored weight must be >= 1, got {w} on ({u}, {v})")

    @classmethod
    def from_weights(cls, n: int, weights: Mapping[tuple[int, int], int]) -> "WeightedGraph":
        return cls(n, {pair(*k): int(v) for k, v in weights.items()})

    def total_weight(self) -> int:
        return sum(self.weights.values())

    def support(self) -> SimpleGraph:
        return SimpleGraph(self.n, frozenset(self.weights))


@dataclass(frozen=True)
class DensityResult:
    """Maximum hyperedges-per-vertex ratio over sub-hypergraphs.

    m and the appearance exponent d-1-1/m are exact rationals so threshold
    comparisons never hinge on float ties. witness_vertices is the
    lexicographically smallest optimal vertex subset.
    """

    m: Fraction
    witness_vertices: tuple[int, ...]
    exponent: Fraction


def project(h: Hypergraph) -> SimpleGraph:
    """Graph connecting every pair of vertices that co-occur in a hyperedge."""
    pairs: set[Pair] = set()
    for e in h.edges:
        pairs.update(itertools.combinations(e, 2))
    return SimpleGraph(h.n, frozenset(pairs))


def project_weighted(h: Hypergraph) -> WeightedGraph:
    """Like project() but each pair carries the number of hyperedges containing it."""
    w: dict[Pair, int] = {}
    for e in h.edges:
        for pr in itertools.combinations(e, 2):
            w[pr] = w.get(pr, 0) + 1
    return WeightedGraph(h.n, w)


def enumerate_d_cliques(g: SimpleGraph, d: int) -> list[Edge]:
    """All vertex d-subsets whose pairs are all edges of g, in ascending order.

    Ordered extension: each added vertex exceeds the current maximum and is
    adjacent to everything chosen so far, so each clique appears exactly once.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    adj = g.adjacency()
    out: list[Edge] = []

    def extend(chosen: list[int], candidates: set[int]):
        if len(chosen) == d:
            out.append(tuple(chosen))
            return
        # candidates are already adjacent to all chosen vertices
        for v in sorted(candidates):
            extend(chosen + [v], {u for u in candidates if u > v and u in adj[v]})

    if d == 2:
        return sorted(g.edges)
    for (u, v) in sorted(g.edges):
        extend([u, v], {x for x in adj[u] if x > v and x in adj[v]})
    return sorted(out)


def clique_hypergraph(g: SimpleGraph, d: int) -> Hypergraph:
    """Hypergraph whose edge set is exactly the d-cliques of g."""
    return Hypergraph(g.n, d, frozenset(enumerate_d_cliques(g, d)))


def two_connected_components(h: Hypergraph) -> list[frozenset[Edge]]:
    """Partition of E(h) into blocks chained by pairwise intersections of size >= 2.

    Blocks are returned sorted by their smallest hyperedge.
    """
    edges = h.sorted_edges()
    parent = list(range(len(edges)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    # vertex -> incident hyperedge indices; two hyperedges sharing a pair of
    # vertices meet in the pair-incidence map
    by_pair: dict[Pair, list[int]] = {}
    for i, e in enumerate(edges):
        for pr in itertools.combinations(e, 2):
            by_pair.setdefault(pr, []).append(i)
    for members in by_pair.values():
        for j in members[1:]:
            union(members[0], j)

    blocks: dict[int, set[Edge]] = {}
    for i, e in enumerate(edges):
        blocks.setdefault(find(i), set()).add(e)
    return sorted((frozenset(b) for b in blocks.values()), key=min)


def sub_hypergraph(h: Hypergraph, edges: Iterable[Edge]) -> Hypergraph:
    return Hypergraph(h.n, h.d, frozenset(edges))


# ---------------------------------------------------------------------------
# Text formats (UTF-8, LF).
#   hypergraph: "HG <n> <d>" then one ascending hyperedge per line
#   graph:      "G <n>"      then "u v" per line, u < v
#   weighted:   "WG <n>"     then "u v w" per line, u < v, w >= 1
# ---------------------------------------------------------------------------


def _data_lines(text: str) -> list[list[str]]:
    rows = []
    for ln in text.splitlines():
        ln = ln.strip()
        if ln and not ln.startswith("#"):
            rows.append(ln.split())
    return rows


def _parse_int(tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"expected integer {what}, got {tok!r}") from None


def parse_hypergraph(text: str) -> Hypergraph:
    rows = _data_lines(text)
    if not rows or rows[0][0] != "HG" or len(rows[0]) != 3:
        raise FormatError("hypergraph file must start with 'HG <n> <d>'")
    n = _parse_int(rows[0][1], "n")
    d = _parse_int(rows[0][2], "d")
    seen: set[Edge] = set()
    for row in rows[1:]:
        if len(row) != d:
            raise FormatError(f"hyperedge {' '.join(row)} does not have {d} vertices")
        e = tuple(_parse_int(t, "vertex id") for t in row)
        if any(v < 0 or v >= n for v in e):
            raise FormatError(f"vertex id out of range in {e}")
        if tuple(sorted(set(e))) != e:
            raise FormatError(f"hyperedge must be strictly ascending: {e}")
        if e in seen:
            raise FormatError(f"duplicate hyperedge {e}")
        seen.add(e)
    try:
        return Hypergraph(n, d, frozenset(seen))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_hypergraph(h: Hypergraph) -> str:
    lines = [f"HG {h.n} {h.d}"]
    lines.extend(" ".join(map(str, e)) for e in h.sorted_edges())
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> SimpleGraph:
    rows = _data_lines(text)
    if not rows or rows[0][0] != "G" or len(rows[0]) != 2:
        raise FormatError("graph file must start with 'G <n>'")
    n = _parse_int(rows[0][1], "n")
    seen: set[Pair] = set()
    for row in rows[1:]:
        if len(row) != 2:
            raise FormatError(f"graph edge line must be 'u v': {' '.join(row)}")
        u, v = (_parse_int(t, "vertex id") for t in row)
        if not (0 <= u < v < n):
            raise FormatError(f"bad edge ({u}, {v}) for n={n}")
        if (u, v) in seen:
            raise FormatError(f"duplicate edge ({u}, {v})")
        seen.add((u, v))
    return SimpleGraph(n, frozenset(seen))


def format_graph(g: SimpleGraph) -> str:
    lines = [f"G {g.n}"]
    lines.extend(f"{u} {v}" for (u, v) in sorted(g.edges))
    return "\n".join(lines) + "\n"


def parse_weighted_graph(text: str) -> WeightedGraph:
    rows = _data_lines(text)
    if not rows or rows[0][0] != "WG" or len(rows[0]) != 2:
        raise FormatError("weighted graph file must start with 'WG <n>'")
    n = _parse_int(rows[0][1], "n")
    weights: dict[Pair, int] = {}
    for row in rows[1:]:
        if len(row) != 3:
            raise FormatError(f"weighted edge line must be 'u v w': {' '.join(row)}")
        u, v, w = (_parse_int(t, "field") for t in row)
        if not (0 <= u < v < n):
            raise FormatError(f"bad edge ({u}, {v}) for n={n}")
        if w < 1:
            raise FormatError(f"weight must be >= 1 on ({u}, {v})")
        if (u, v) in weights:
            raise FormatError(f"duplicate edge ({u}, {v})")
        weights[(u, v)] = w
    return WeightedGraph(n, weights)


def format_weighted_graph(w: WeightedGraph) -> str:
    lines = [f"WG {w.n}"]
    lines.extend(f"{u} {v} {wt}" for (u, v), wt in sorted(w.weights.items()))
    return "\n".join(lines) + "\n"
