"""Reconstruction algorithms and Monte-Carlo loss / success-rate estimators.

MAP search decomposes the clique hypergraph of the input into two-connected
components before covering: two d-cliques sharing a pair always land in the
same component, so each projected edge is covered from exactly one block and
blocks can be solved independently.  Cover search is exact branch-and-bound
(lower bound: ceil(uncovered pairs / C(d,2))) with a hard node budget that
raises a typed resource error rather than approximating silently.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import (
    Edge,
    Hypergraph,
    SimpleGraph,
    WeightedGraph,
    enumerate_d_cliques,
    project,
    project_weighted,
    two_connected_components,
)
from .errors import NotAProjectionError, ParameterError, ResourceLimitError
from .model import ModelParams, derived_rng, sample_hypergraph

DEFAULT_BUDGET = 10_000_000
ALGORITHMS = ("clique-cover", "map", "map-weighted", "empty")


@dataclass(frozen=True)
class RecoveryReport:
    """A prediction plus its symmetric difference against the ground truth."""

    predicted: Hypergraph
    missing: int
    spurious: int
    loss_contribution: Fraction

    @classmethod
    def against(cls, predicted: Hypergraph, truth: Hypergraph) -> "RecoveryReport":
        missing = len(truth.edges - predicted.edges)
        spurious = len(predicted.edges - truth.edges)
        return cls(predicted, missing, spurious, Fraction(missing + spurious))


@dataclass(frozen=True)
class LossEstimate:
    mean: float
    stderr: float
    trials: int
    normalizer: float
    failures: int


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    stderr: float
    trials: int
    failures: int


class _Budget:
    __slots__ = ("left", "component_size")

    def __init__(self, nodes: int, component_size: int):
        self.left = nodes
        self.component_size = component_size

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise ResourceLimitError(
                f"search budget exhausted on a component of {self.component_size} cliques",
                component_size=self.component_size,
            )


def clique_cover_recover(g: SimpleGraph, d: int) -> Hypergraph:
    """Maximum Clique Cover: output every d-clique of the projection."""
    if d < 3:
        raise ParameterError("recovery requires d >= 3")
    return Hypergraph(g.n, d, frozenset(enumerate_d_cliques(g, d)))


class _BlockCover:
    """Exact minimum clique cover of one two-connected block's pair set."""

    def __init__(self, cliques: list[Edge], d: int, budget: _Budget):
        self.cliques = cliques
        self.d = d
        self.budget = budget
        pairs = sorted({pr for cl in cliques for pr in itertools.combinations(cl, 2)})
        self.pair_index = {pr: i for i, pr in enumerate(pairs)}
        self.num_pairs = len(pairs)
        self.masks = []
        for cl in cliques:
            m = 0
            for pr in itertools.combinations(cl, 2):
                m |= 1 << self.pair_index[pr]
            self.masks.append(m)
        self.full = (1 << self.num_pairs) - 1
        self.covers_pair: list[list[int]] = [[] for _ in range(self.num_pairs)]
        for i, m in enumerate(self.masks):
            for b in range(self.num_pairs):
                if (m >> b) & 1:
                    self.covers_pair[b].append(i)

    def min_size(self) -> int:
        per = comb(self.d, 2)
        best = len(self.cliques) + 1
        memo: dict[int, int] = {}

        def dfs(uncovered: int, used: int):
            nonlocal best
            self.budget.spend()
            if uncovered == 0:
                best = min(best, used)
                return
            if used + -(-uncovered.bit_count() // per) >= best:
                return
            seen = memo.get(uncovered)
            if seen is not None and seen <= used:
                return
            memo[uncovered] = used
            # branch on the uncovered pair with fewest covering cliques
            target, fan = -1, 1 << 30
            u = uncovered
            while u:
                b = (u & -u).bit_length() - 1
                if len(self.covers_pair[b]) < fan:
                    target, fan = b, len(self.covers_pair[b])
                u &= u - 1
            for i in self.covers_pair[target]:
                dfs(uncovered & ~self.masks[i], used + 1)

        dfs(self.full, 0)
        return best

    def enumerate_covers(self, size: int, cap: int) -> list[tuple[int, ...]]:
        """All covers of exactly `size` cliques, in lexicographic index order."""
        per = comb(self.d, 2)
        out: list[tuple[int, ...]] = []
        last = [max(c) if c else -1 for c in self.covers_pair]

        def dfs(start: int, uncovered: int, chosen: list[int]):
            if len(out) >= cap:
                return
            self.budget.spend()
            if uncovered == 0:
                out.append(tuple(chosen))
                return
            if len(chosen) + -(-uncovered.bit_count() // per) > size:
                return
            u = uncovered
            while u:
                b = (u & -u).bit_length() - 1
                if last[b] < start:
                    return  # some pair can no longer be covered
                u &= u - 1
            for i in range(start, len(self.cliques)):
                if self.masks[i] & uncovered:
                    dfs(i + 1, uncovered & ~self.masks[i], chosen + [i])
                    if len(out) >= cap:
                        return

        dfs(0, self.full, [])
        return out


def _cover_blocks(g: SimpleGraph, d: int, budget: _Budget | None = None):
    """Split the cover problem along two-connected components of the clique set."""
    cliques = enumerate_d_cliques(g, d)
    covered = {pr for cl in cliques for pr in itertools.combinations(cl, 2)}
    stray = g.edges - covered
    if stray:
        raise NotAProjectionError(
            f"{len(stray)} edges lie in no d-clique, e.g. {sorted(stray)[0]}"
        )
    blocks = two_connected_components(Hypergraph(g.n, d, frozenset(cliques)))
    return [sorted(b) for b in blocks]


def map_recover(
    g: SimpleGraph,
    d: int,
    budget: int = DEFAULT_BUDGET,
    *,
    tie_break: str = "lex",
    tie_seed: int = 0,
    cap: int = 64,
) -> Hypergraph:
    """Minimum-hyperedge-count preimage of g (the MAP estimate).

    tie_break "lex" returns the preimage whose sorted hyperedge tuple is
    smallest; "random" draws uniformly from the minimal preimages found per
    block (seeded), which exists solely to exercise ambiguity bounds.
    """
    if d < 3:
        raise ParameterError("recovery requires d >= 3")
    if tie_break not in ("lex", "random"):
        raise ParameterError(f"unknown tie_break {tie_break!r}")
    rng = derived_rng(tie_seed, 0xC0FE) if tie_break == "random" else None
    chosen: list[Edge] = []
    for block in _cover_blocks(g, d):
        tracker = _Budget(budget, len(block))
        solver = _BlockCover(block, d, tracker)
        k = solver.min_size()
        if tie_break == "lex":
            covers = solver.enumerate_covers(k, cap=1)
        else:
            covers = solver.enumerate_covers(k, cap=cap)
        pick = covers[0] if rng is None else covers[int(rng.integers(len(covers)))]
        chosen.extend(block[i] for i in pick)
    return Hypergraph(g.n, d, frozenset(chosen))


class _WeightedBlockCover:
    """Exact multiplicity cover of one block of a weighted projection."""

    def __init__(self, cliques: list[Edge], deficits: dict, budget: _Budget):
        self.cliques = cliques
        self.budget = budget
        self.pairs = sorted(deficits)
        self.pair_index = {pr: i for i, pr in enumerate(self.pairs)}
        self.target = [deficits[pr] for pr in self.pairs]
        self.clique_pairs = [
            [self.pair_index[pr] for pr in itertools.combinations(cl, 2)] for cl in cliques
        ]
        self.covers_pair: list[list[int]] = [[] for _ in self.pairs]
        for i, prs in enumerate(self.clique_pairs):
            for b in prs:
                self.covers_pair[b].append(i)

    def enumerate(self, cap: int) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = []
        remaining = list(self.target)
        used = [False] * len(self.cliques)

        def apply(i: int, sign: int) -> bool:
            for b in self.clique_pairs[i]:
                remaining[b] -= sign
            return all(remaining[b] >= 0 for b in self.clique_pairs[i])

        def dfs(chosen: list[int]):
            if len(out) >= cap:
                return
            self.budget.spend()
            try:
                q = next(b for b, r in enumerate(remaining) if r > 0)
            except StopIteration:
                out.append(tuple(sorted(chosen)))
                return
            need = remaining[q]
            avail = [i for i in self.covers_pair[q] if not used[i]]
            if len(avail) < need:
                return
            for combo in itertools.combinations(avail, need):
                ok = True
                applied = []
                for i in combo:
                    used[i] = True
                    applied.append(i)
                    if not apply(i, +1):
                        ok = False
                        break
                if ok:
                    dfs(chosen + list(combo))
                for i in reversed(applied):
                    apply(i, -1)
                    used[i] = False
                if len(out) >= cap:
                    return

        dfs([])
        return out


def _weighted_blocks(w: WeightedGraph, d: int):
    support = w.support()
    cliques = enumerate_d_cliques(support, d)
    covered = {pr for cl in cliques for pr in itertools.combinations(cl, 2)}
    stray = set(w.weights) - covered
    if stray:
        raise NotAProjectionError(
            f"{len(stray)} weighted edges lie in no d-clique, e.g. {sorted(stray)[0]}"
        )
    blocks = two_connected_components(Hypergraph(w.n, d, frozenset(cliques)))
    return [sorted(b) for b in blocks]


def map_recover_weighted(
    w: WeightedGraph, d: int, budget: int = DEFAULT_BUDGET, *, cap: int = 64
) -> Hypergraph:
    """A hypergraph whose weighted projection equals w.

    Every preimage has exactly total_weight / C(d,2) hyperedges (each
    hyperedge contributes C(d,2) weight), so any feasible answer is already
    MAP-optimal; ties go to the lexicographically smallest edge tuple among
    the covers found per block.
    """
    if d < 3:
        raise ParameterError("recovery requires d >= 3")
    per = comb(d, 2)
    if w.total_weight() % per != 0:
        raise NotAProjectionError(
            f"total weight {w.total_weight()} is not a multiple of C(d,2)={per}"
        )
    chosen: list[Edge] = []
    for block in _weighted_blocks(w, d):
        deficits = {
            pr: w.weights[pr]
            for cl in block
            for pr in itertools.combinations(cl, 2)
        }
        tracker = _Budget(budget, len(block))
        covers = _WeightedBlockCover(block, deficits, tracker).enumerate(cap=cap)
        if not covers:
            raise NotAProjectionError("no exact multiset cover for a weighted block")
        best = min(tuple(sorted(block[i] for i in cover)) for cover in covers)
        chosen.extend(best)
    result = Hypergraph(w.n, d, frozenset(chosen))
    if project_weighted(result).weights != dict(w.weights):
        raise NotAProjectionError("weighted cover does not reproduce the input multiplicities")
    return result


# ---------------------------------------------------------------------------
# Monte-Carlo estimators over seeded trials.
# ---------------------------------------------------------------------------


def count_d_cliques(g: SimpleGraph, d: int) -> int:
    """Number of d-cliques, via bitset intersection (no materialized list)."""
    adj = [0] * g.n
    for (u, v) in g.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    if d == 2:
        return len(g.edges)

    def walk(common: int, depth: int) -> int:
        if depth == d:
            return common.bit_count()
        total = 0
        m = common
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            total += walk(common & adj[v] & -(1 << (v + 1)), depth + 1)
        return total

    total = 0
    for (u, v) in g.edges:
        total += walk(adj[u] & adj[v] & -(1 << (v + 1)), 3)
    return total


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("HYPEREC_THREADS")
    if env:
        return max(1, int(env))
    return 1


def _loss_trial(args) -> tuple[int, float | None]:
    params, algorithm, stream, budget = args
    h = sample_hypergraph(params, stream=stream)
    norm = params.p * comb(params.n, params.d)
    try:
        if algorithm == "empty":
            diff = h.num_edges
        elif algorithm == "clique-cover":
            # H is always a subset of its projection's cliques: only spurious
            diff = count_d_cliques(project(h), params.d) - h.num_edges
        elif algorithm == "map":
            pred = map_recover(project(h), params.d, budget)
            diff = len(pred.edges.symmetric_difference(h.edges))
        elif algorithm == "map-weighted":
            pred = map_recover_weighted(project_weighted(h), params.d, budget)
            diff = len(pred.edges.symmetric_difference(h.edges))
        else:
            raise ParameterError(f"unknown algorithm {algorithm!r}")
        return stream[-1], diff / norm
    except ResourceLimitError:
        return stream[-1], None


def _exact_trial(args) -> tuple[int, bool | None]:
    params, algorithm, stream, budget = args
    h = sample_hypergraph(params, stream=stream)
    try:
        if algorithm == "map":
            pred = map_recover(project(h), params.d, budget)
        elif algorithm == "map-weighted":
            pred = map_recover_weighted(project_weighted(h), params.d, budget)
        else:
            raise ParameterError(f"exact recovery needs map or map-weighted, got {algorithm!r}")
        return stream[-1], pred.edges == h.edges
    except ResourceLimitError:
        return stream[-1], None


def _run_indexed(fn, tasks, workers: int):
    """Run indexed trial tasks, merging results in trial order regardless of
    how they were distributed over workers."""
    if workers <= 1:
        results = [fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [row[1:] for row in sorted(results, key=lambda row: row[0])]


def estimate_partial_loss(
    params: ModelParams,
    algorithm: str,
    trials: int,
    *,
    workers: int | None = None,
    budget: int = DEFAULT_BUDGET,
    stream_prefix: tuple[int, ...] = (),
) -> LossEstimate:
    """Mean of |prediction Δ truth| / (p C(n,d)) over seeded trials."""
    if trials < 1:
        raise ParameterError("need at least one trial")
    if algorithm not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {algorithm!r}; pick from {ALGORITHMS}")
    tasks = [(params, algorithm, stream_prefix + (t,), budget) for t in range(trials)]
    values = [row[0] for row in _run_indexed(_loss_trial, tasks, resolve_workers(workers))]
    ok = [v for v in values if v is not None]
    failures = trials - len(ok)
    if not ok:
        return LossEstimate(math.nan, math.nan, trials, params.p * comb(params.n, params.d), failures)
    mean = sum(ok) / len(ok)
    var = sum((v - mean) ** 2 for v in ok) / (len(ok) - 1) if len(ok) > 1 else 0.0
    return LossEstimate(
        mean=mean,
        stderr=math.sqrt(var / len(ok)),
        trials=trials,
        normalizer=params.p * comb(params.n, params.d),
        failures=failures,
    )


def _sweep_trial(args) -> tuple[int, float | None, bool | None]:
    params, algorithm, stream, budget = args
    h = sample_hypergraph(params, stream=stream)
    norm = params.p * comb(params.n, params.d)
    try:
        if algorithm == "empty":
            return stream[-1], h.num_edges / norm, None
        if algorithm == "clique-cover":
            diff = count_d_cliques(project(h), params.d) - h.num_edges
            return stream[-1], diff / norm, None
        if algorithm == "map":
            pred = map_recover(project(h), params.d, budget)
        elif algorithm == "map-weighted":
            pred = map_recover_weighted(project_weighted(h), params.d, budget)
        else:
            raise ParameterError(f"unknown algorithm {algorithm!r}")
        diff = len(pred.edges.symmetric_difference(h.edges))
        return stream[-1], diff / norm, pred.edges == h.edges
    except ResourceLimitError:
        return stream[-1], None, None


def sweep_point(
    params: ModelParams,
    algorithm: str,
    trials: int,
    *,
    workers: int | None = None,
    budget: int = DEFAULT_BUDGET,
    stream_prefix: tuple[int, ...] = (),
) -> tuple[LossEstimate, RateEstimate | None]:
    """One sweep row: loss estimate plus (for MAP algorithms) the exact rate,
    both measured on the same seeded trials."""
    if trials < 1:
        raise ParameterError("need at least one trial")
    if algorithm not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {algorithm!r}; pick from {ALGORITHMS}")
    tasks = [(params, algorithm, stream_prefix + (t,), budget) for t in range(trials)]
    raw = _run_indexed(_sweep_trial, tasks, resolve_workers(workers))
    losses = [v for v, _ in raw if v is not None]
    failures = trials - len(losses)
    norm = params.p * comb(params.n, params.d)
    if losses:
        mean = sum(losses) / len(losses)
        var = (
            sum((v - mean) ** 2 for v in losses) / (len(losses) - 1)
            if len(losses) > 1
            else 0.0
        )
        loss = LossEstimate(mean, math.sqrt(var / len(losses)), trials, norm, failures)
    else:
        loss = LossEstimate(math.nan, math.nan, trials, norm, failures)
    rate = None
    if algorithm in ("map", "map-weighted"):
        flags = [x for _, x in raw if x is not None]
        if flags:
            r = sum(flags) / len(flags)
            rate = RateEstimate(r, math.sqrt(r * (1 - r) / len(flags)), trials, failures)
        else:
            rate = RateEstimate(math.nan, math.nan, trials, failures)
    return loss, rate


def exact_recovery_rate(
    params: ModelParams,
    algorithm: str,
    trials: int,
    *,
    workers: int | None = None,
    budget: int = DEFAULT_BUDGET,
    stream_prefix: tuple[int, ...] = (),
) -> RateEstimate:
    """Fraction of seeded trials where the prediction equals the truth exactly."""
    if trials < 1:
        raise ParameterError("need at least one trial")
    if algorithm not in ("map", "map-weighted"):
        raise ParameterError(
            f"exact recovery needs map or map-weighted, got {algorithm!r}"
        )
    tasks = [(params, algorithm, stream_prefix + (t,), budget) for t in range(trials)]
    values = [row[0] for row in _run_indexed(_exact_trial, tasks, resolve_workers(workers))]
    ok = [v for v in values if v is not None]
    failures = trials - len(ok)
    if not ok:
        return RateEstimate(math.nan, math.nan, trials, failures)
    rate = sum(ok) / len(ok)
    return RateEstimate(
        rate=rate,
        stderr=math.sqrt(rate * (1.0 - rate) / len(ok)),
        trials=trials,
        failures=failures,
    )
