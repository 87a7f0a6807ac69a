"""Extremal ambiguous gadgets, minimal-preimage censuses, and hard instances.

The unweighted gadget family has, per minimal preimage, 2d^2-5d+5 vertices
and 2d-1 hyperedges (density (2d-1)/(2d^2-5d+5), appearance exponent
(2d-4)/(2d-1)); the weighted family has 2d vertices and 4 hyperedges
(density 2/d, exponent d/2-1).  Vertex labels are canonical so golden files
reproduce byte-for-byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    DensityResult,
    Edge,
    Hypergraph,
    SimpleGraph,
    WeightedGraph,
    enumerate_d_cliques,
    project,
    project_weighted,
    two_connected_components,
)
from .density import max_subgraph_density
from .errors import ParameterError
from .recovery import DEFAULT_BUDGET, _BlockCover, _Budget, _WeightedBlockCover


@dataclass(frozen=True)
class GadgetSpec:
    """Which extremal gadget to build: variant 'unweighted' or 'weighted'."""

    d: int
    variant: str

    def __post_init__(self):
        if self.d < 3:
            raise ParameterError("gadgets require d >= 3")
        if self.variant not in ("unweighted", "weighted"):
            raise ParameterError(f"unknown gadget variant {self.variant!r}")


@dataclass(frozen=True)
class GadgetBuild:
    spec: GadgetSpec
    graph: SimpleGraph | WeightedGraph
    preimage: Hypergraph
    alternate: Hypergraph
    vertex_roles: dict[int, str]


def unweighted_gadget_size(d: int) -> tuple[int, int]:
    """(vertices, hyperedges) of one minimal preimage of the unweighted gadget."""
    return 2 * d * d - 5 * d + 5, 2 * d - 1


def build_gadget(spec: GadgetSpec) -> GadgetBuild:
    """Construct the gadget graph together with its two minimal preimages.

    Canonical labels, unweighted variant: u=0, w=1, spine v_1..v_{d-1} next,
    then the S-blocks of u in order, then the S-blocks of w.  The preimages
    differ in exactly one hyperedge ({u} vs {w} joined to the spine).

    Weighted variant: S_1 then S_2 (d-2 vertices each), then w_1..w_4; the
    preimages exchange the roles of S_1 and S_2 across all four hyperedges.
    """
    d = spec.d
    if spec.variant == "unweighted":
        u, w = 0, 1
        spine = list(range(2, d + 1))
        roles = {u: "u", w: "w"}
        roles.update({v: f"v{i + 1}" for i, v in enumerate(spine)})
        next_id = d + 1
        s_u, s_w = [], []
        for i in range(d - 1):
            block = list(range(next_id, next_id + d - 2))
            next_id += d - 2
            s_u.append(block)
            roles.update({x: f"S{i + 1}u" for x in block})
        for i in range(d - 1):
            block = list(range(next_id, next_id + d - 2))
            next_id += d - 2
            s_w.append(block)
            roles.update({x: f"S{i + 1}w" for x in block})
        n = next_id
        central = [u] + spine
        edges = [central]
        edges += [[u, spine[i]] + s_u[i] for i in range(d - 1)]
        edges += [[w, spine[i]] + s_w[i] for i in range(d - 1)]
        h = Hypergraph.from_edges(n, d, edges)
        h_alt = Hypergraph.from_edges(n, d, [[w] + spine] + edges[1:])
        graph = project(h)
        assert graph == project(h_alt)
        return GadgetBuild(spec, graph, h, h_alt, roles)

    s1 = list(range(d - 2))
    s2 = list(range(d - 2, 2 * d - 4))
    w1, w2, w3, w4 = range(2 * d - 4, 2 * d)
    roles = {x: "S1" for x in s1}
    roles.update({x: "S2" for x in s2})
    roles.update({w1: "w1", w2: "w2", w3: "w3", w4: "w4"})
    n = 2 * d
    h = Hypergraph.from_edges(
        n, d, [s1 + [w1, w2], s1 + [w3, w4], s2 + [w2, w3], s2 + [w4, w1]]
    )
    h_alt = Hypergraph.from_edges(
        n, d, [s2 + [w1, w2], s2 + [w3, w4], s1 + [w2, w3], s1 + [w4, w1]]
    )
    graph = project_weighted(h)
    assert graph == project_weighted(h_alt)
    return GadgetBuild(spec, graph, h, h_alt, roles)


@dataclass(frozen=True)
class AmbiguityReport:
    minimal_preimage_count: int
    min_edges: int
    preimages: tuple[Hypergraph, ...]
    weighted: bool
    density: DensityResult | None


def find_minimal_preimages(
    g: SimpleGraph | WeightedGraph,
    d: int,
    cap: int = 64,
    budget: int = DEFAULT_BUDGET,
) -> AmbiguityReport:
    """Census of minimum-hyperedge preimages (multiplicity-exact when weighted).

    Counts saturate at cap; blocks are solved independently and combined, so
    the count of a k-block instance is the capped product of block counts.
    """
    weighted = isinstance(g, WeightedGraph)
    if weighted:
        from .recovery import _weighted_blocks

        blocks = _weighted_blocks(g, d)
        n = g.n
        per_block: list[list[tuple[Edge, ...]]] = []
        for block in blocks:
            deficits = {
                pr: g.weights[pr] for cl in block for pr in itertools.combinations(cl, 2)
            }
            covers = _WeightedBlockCover(block, deficits, _Budget(budget, len(block))).enumerate(cap)
            if not covers:
                from .errors import NotAProjectionError

                raise NotAProjectionError("a weighted block admits no exact cover")
            per_block.append([tuple(block[i] for i in cover) for cover in covers])
    else:
        from .recovery import _cover_blocks

        blocks = _cover_blocks(g, d)
        n = g.n
        per_block = []
        for block in blocks:
            tracker = _Budget(budget, len(block))
            solver = _BlockCover(block, d, tracker)
            k = solver.min_size()
            covers = solver.enumerate_covers(k, cap)
            per_block.append([tuple(block[i] for i in cover) for cover in covers])

    count = 1
    for options in per_block:
        count = min(cap, count * len(options))
    min_edges = sum(len(options[0]) for options in per_block)

    preimages: list[Hypergraph] = []
    for combo in itertools.islice(itertools.product(*per_block), cap):
        edges = frozenset(e for part in combo for e in part)
        preimages.append(Hypergraph(n, d, edges))
    if not preimages:
        preimages = [Hypergraph(n, d, frozenset())]

    density = max_subgraph_density(preimages[0]) if min_edges else None
    return AmbiguityReport(
        minimal_preimage_count=max(count, 1),
        min_edges=min_edges,
        preimages=tuple(preimages),
        weighted=weighted,
        density=density,
    )


def threshold_of_preimage(h: Hypergraph) -> Fraction:
    """Appearance exponent d - 1 - 1/m(h), exact."""
    return max_subgraph_density(h).exponent


def ratio_quantity(e_h: int, u_size: int, p_size: int, d: int) -> Fraction:
    """((d-1)|E_h| - |U| + |P|) / (|E_h| + |P|) for an overlap witness."""
    if e_h < 0 or u_size < 0 or p_size < 0:
        raise ParameterError("counts must be non-negative")
    if e_h + p_size == 0:
        raise ParameterError("denominator |E_h| + |P| must be positive")
    return Fraction((d - 1) * e_h - u_size + p_size, e_h + p_size)


def make_hard_instance(d: int, m: int, n: int) -> Hypergraph:
    """m vertex-disjoint copies of the unweighted gadget's minimal preimage.

    Exact recovery on the projection then fails with probability at least
    m/(m+1) for any tie rule: each block swaps independently, so the planted
    instance is one of >= 2^m equally minimal preimages.
    """
    if m < 1:
        raise ParameterError("need at least one block")
    block_v, _ = unweighted_gadget_size(d)
    if n < m * block_v:
        raise ParameterError(f"need n >= {m * block_v} for {m} blocks at d={d}")
    base = build_gadget(GadgetSpec(d, "unweighted")).preimage
    edges: set[Edge] = set()
    for b in range(m):
        off = b * block_v
        edges.update(tuple(v + off for v in e) for e in base.edges)
    return Hypergraph(n, d, frozenset(edges))


# ---------------------------------------------------------------------------
# Exhaustive scan over small hypergraphs, up to isomorphism.
# ---------------------------------------------------------------------------


def _refinement_colors(h: Hypergraph) -> tuple[tuple[int, ...], tuple]:
    """Stable vertex coloring refined by edge-membership structure."""
    verts = sorted(h.vertices_used())
    edges = h.sorted_edges()
    color = {v: 0 for v in verts}
    for _ in range(len(verts)):
        edge_sig = {e: tuple(sorted(color[v] for v in e)) for e in edges}
        sig = {}
        for v in verts:
            mine = tuple(sorted(edge_sig[e] for e in edges if v in e))
            sig[v] = (color[v], mine)
        palette = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: palette[sig[v]] for v in verts}
        if new == color:
            break
        color = new
    cert = tuple(sorted(tuple(sorted(color[v] for v in e)) for e in edges))
    return tuple(color[v] for v in verts), cert


def certificate(h: Hypergraph) -> tuple:
    """Isomorphism-invariant summary (refinement classes + colored edge list)."""
    colors, cert = _refinement_colors(h)
    return (len(h.vertices_used()), h.num_edges, tuple(sorted(colors)), cert)


def isomorphic(h1: Hypergraph, h2: Hypergraph) -> bool:
    """Exact backtracking test on used vertices, pruned by refinement colors."""
    v1, v2 = sorted(h1.vertices_used()), sorted(h2.vertices_used())
    if len(v1) != len(v2) or h1.num_edges != h2.num_edges or h1.d != h2.d:
        return False
    c1, _ = _refinement_colors(h1)
    c2, _ = _refinement_colors(h2)
    if sorted(c1) != sorted(c2):
        return False
    col1 = dict(zip(v1, c1))
    col2 = dict(zip(v2, c2))
    edges2 = set(h2.edges)
    inc1: dict[int, list[Edge]] = {v: [] for v in v1}
    for e in h1.edges:
        for v in e:
            inc1[v].append(e)

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def feasible(v: int) -> bool:
        # every fully-mapped edge through v must land on an edge of h2
        for e in inc1[v]:
            if all(x in mapping for x in e):
                if tuple(sorted(mapping[x] for x in e)) not in edges2:
                    return False
        return True

    def assign(i: int) -> bool:
        if i == len(v1):
            return True
        v = v1[i]
        for w in v2:
            if w in used or col1[v] != col2[w]:
                continue
            mapping[v] = w
            used.add(w)
            if feasible(v) and assign(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return assign(0)


def small_hypergraph_classes(d: int, max_edges: int):
    """Connected d-uniform hypergraphs with <= max_edges edges, one per iso class.

    Grown edge by edge: every new hyperedge overlaps the current vertex set,
    fresh vertices take the smallest unused labels.  Duplicates are rejected
    by certificate bucketing plus an exact isomorphism test.
    """
    seed = Hypergraph.from_edges(d, d, [range(d)])
    levels = [[seed]]
    yield seed
    for _ in range(max_edges - 1):
        buckets: dict[tuple, list[Hypergraph]] = {}
        next_level: list[Hypergraph] = []
        for h in levels[-1]:
            used = sorted(h.vertices_used())
            for overlap_size in range(1, d + 1):
                for overlap in itertools.combinations(used, overlap_size):
                    fresh = list(range(len(used), len(used) + d - overlap_size))
                    edge = tuple(sorted(list(overlap) + fresh))
                    if edge in h.edges:
                        continue
                    n_new = max(len(used), edge[-1] + 1)
                    cand = Hypergraph(n_new, d, h.edges | {edge})
                    cert = certificate(cand)
                    bucket = buckets.setdefault(cert, [])
                    if any(isomorphic(cand, other) for other in bucket):
                        continue
                    bucket.append(cand)
                    next_level.append(cand)
                    yield cand
        levels.append(next_level)


def scan_small_ambiguous(d: int, max_edges: int, budget: int = DEFAULT_BUDGET):
    """All small connected preimages whose projection is ambiguous.

    Returns (hypergraph, census, exponent) triples; corroborates that no
    ambiguous preimage falls below the (2d-4)/(2d-1) appearance exponent.
    """
    out = []
    for h in small_hypergraph_classes(d, max_edges):
        report = find_minimal_preimages(project(h), d, cap=2, budget=budget)
        if report.minimal_preimage_count >= 2:
            out.append((h, report, threshold_of_preimage(h)))
    return out


def gadget_report(spec: GadgetSpec, cap: int = 64, budget: int = DEFAULT_BUDGET) -> dict:
    """JSON-ready summary used by the CLI."""
    build = build_gadget(spec)
    density = max_subgraph_density(build.preimage)
    census = find_minimal_preimages(build.graph, spec.d, cap=cap, budget=budget)
    return {
        "variant": "gadw" if spec.variant == "weighted" else "gad",
        "d": spec.d,
        "vertices": build.preimage.n,
        "hyperedges": build.preimage.num_edges,
        "m": f"{density.m.numerator}/{density.m.denominator}",
        "exponent": f"{density.exponent.numerator}/{density.exponent.denominator}",
        "minimal_preimage_count": census.minimal_preimage_count,
    }
