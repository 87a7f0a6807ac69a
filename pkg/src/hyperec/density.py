"""Exact densest-subhypergraph engine.

m(H) = max over vertex subsets S of (#hyperedges fully inside S) / |S|,
reported as an exact rational together with the appearance exponent
d - 1 - 1/m.  The maximizer search is a Dinkelbach iteration: each step
solves one min-cut on the standard density network (source -> hyperedge
with capacity den, hyperedge -> member vertices with infinite capacity,
vertex -> sink with capacity num) and either improves the candidate ratio
or proves optimality.  All capacities stay integral, so every comparison
is exact.

A brute-force subset maximizer is provided as the independent oracle for
small instances; both paths break ties by the lexicographically smallest
optimal vertex subset.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from .core import DensityResult, Hypergraph
from .errors import ParameterError


class _Dinic:
    def __init__(self, num_nodes: int):
        self.n = num_nodes
        self.head: list[list[int]] = [[] for _ in range(num_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, cap: int):
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for ei in self.head[u]:
                    v = self.to[ei]
                    if self.cap[ei] > 0 and level[v] < 0:
                        level[v] = level[u] + 1
                        q.append(v)
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, pushed: int) -> int:
                if u == t:
                    return pushed
                while it[u] < len(self.head[u]):
                    ei = self.head[u][it[u]]
                    v = self.to[ei]
                    if self.cap[ei] > 0 and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, self.cap[ei]))
                        if got > 0:
                            self.cap[ei] -= got
                            self.cap[ei ^ 1] += got
                            return got
                    it[u] += 1
                return 0

            while True:
                pushed = dfs(s, 1 << 62)
                if pushed == 0:
                    break
                flow += pushed

    def side_reaching_sink(self, t: int) -> set[int]:
        """Nodes with a residual path to t (complement = maximal min-cut source side)."""
        reach = {t}
        q = deque([t])
        # arc u->v with residual capacity lets u reach t once v does
        incoming: list[list[int]] = [[] for _ in range(self.n)]
        for u in range(self.n):
            for ei in self.head[u]:
                if self.cap[ei] > 0:
                    incoming[self.to[ei]].append(u)
        while q:
            v = q.popleft()
            for u in incoming[v]:
                if u not in reach:
                    reach.add(u)
                    q.append(u)
        return reach


def _max_gain_witness(
    edges: list[tuple[int, ...]],
    vertices: list[int],
    num: int,
    den: int,
    forced: frozenset[int],
) -> tuple[int, list[int]]:
    """Maximize den*e(S) - num*|S| over S containing `forced`.

    Returns (gain, S) where S is the maximal optimal subset (largest min-cut
    source side), so a zero gain with nonempty S certifies the ratio num/den
    is attained.
    """
    vid = {v: i for i, v in enumerate(vertices)}
    e = len(edges)
    source, sink = 0, 1
    net = _Dinic(2 + e + len(vertices))
    inf = den * e + num * len(vertices) + 1
    for i, edge in enumerate(edges):
        net.add_edge(source, 2 + i, den)
        for v in edge:
            net.add_edge(2 + i, 2 + e + vid[v], inf)
    for v in vertices:
        net.add_edge(2 + e + vid[v], sink, num)
        if v in forced:
            net.add_edge(source, 2 + e + vid[v], inf)
    flow = net.max_flow(source, sink)
    sink_side = net.side_reaching_sink(sink)
    witness = [v for v in vertices if (2 + e + vid[v]) not in sink_side]
    return den * e - flow, sorted(witness)


def _edges_inside(edges: list[tuple[int, ...]], subset: frozenset[int]) -> int:
    return sum(1 for e in edges if subset.issuperset(e))


def max_subgraph_density(h: Hypergraph) -> DensityResult:
    """Exact m(H) with the lexicographically smallest optimal witness."""
    if not h.edges:
        raise ParameterError("max subgraph density is undefined for an empty hypergraph")
    edges = h.sorted_edges()
    used = sorted(h.vertices_used())

    # Dinkelbach: start from the whole-hypergraph ratio and improve until no
    # subset beats the current candidate.
    m = Fraction(len(edges), len(used))
    while True:
        gain, witness = _max_gain_witness(edges, used, m.numerator, m.denominator, frozenset())
        if gain > 0 and witness:
            improved = Fraction(_edges_inside(edges, frozenset(witness)), len(witness))
            if improved > m:
                m = improved
                continue
        break

    # Lexicographically smallest witness: scan vertices in order, keep v iff
    # some optimal subset extends the kept set without the discarded ones.
    kept: list[int] = []
    banned: set[int] = set()
    for v in used:
        if kept:
            k = frozenset(kept)
            if Fraction(_edges_inside(edges, k), len(kept)) == m:
                break  # kept is itself optimal; extensions are lex-larger
        active = [e for e in edges if not banned.intersection(e)]
        gain, witness = _max_gain_witness(
            active, [u for u in used if u not in banned], m.numerator, m.denominator,
            frozenset(kept + [v]),
        )
        if gain == 0 and witness:
            kept.append(v)
        else:
            banned.add(v)

    exponent = Fraction(h.d - 1) - 1 / m
    return DensityResult(m=m, witness_vertices=tuple(kept), exponent=exponent)


def max_subgraph_density_bruteforce(h: Hypergraph, limit: int = 20) -> DensityResult:
    """Independent subset-enumeration oracle (2^v states, v <= limit)."""
    if not h.edges:
        raise ParameterError("max subgraph density is undefined for an empty hypergraph")
    used = sorted(h.vertices_used())
    if len(used) > limit:
        raise ParameterError(f"brute force limited to {limit} used vertices, got {len(used)}")
    import numpy as np

    vid = {v: i for i, v in enumerate(used)}
    nv = len(used)
    subs = np.arange(1, 1 << nv, dtype=np.int64)
    sizes = np.zeros(subs.shape, dtype=np.int64)
    for i in range(nv):
        sizes += (subs >> i) & 1
    inside = np.zeros(subs.shape, dtype=np.int64)
    for e in h.edges:
        mask = 0
        for v in e:
            mask |= 1 << vid[v]
        inside += (subs & mask) == mask

    best_num, best_den = 0, 1
    while True:
        better = inside * best_den > best_num * sizes
        if not better.any():
            break
        i = int(np.nonzero(better)[0][0])
        best_num, best_den = int(inside[i]), int(sizes[i])
    m = Fraction(best_num, best_den)

    opt = subs[inside * m.denominator == m.numerator * sizes]
    chosen_mask = 0
    chosen: list[int] = []
    while True:
        if (opt == chosen_mask).any():
            break  # the chosen set alone is optimal: lex-minimal prefix
        rem = opt & ~np.int64(chosen_mask)
        low = rem & -rem
        v_bit = int(low[low > 0].min())
        keep = (opt & v_bit) > 0
        # among optima agreeing on the prefix, the next element is minimal
        mask_below = v_bit - 1
        agree = (opt & mask_below) == (chosen_mask & mask_below)
        opt = opt[keep & agree]
        chosen_mask |= v_bit
        chosen.append(used[v_bit.bit_length() - 1])

    exponent = Fraction(h.d - 1) - 1 / m
    return DensityResult(m=m, witness_vertices=tuple(sorted(chosen)), exponent=exponent)
