"""Exhaustive Bayes-optimal computations at tiny n.

Enumerates all 2^C(n,d) hypergraphs, grouped by their (weighted) projection,
and reads every posterior quantity off the grouped counts.  States are
walked with meet-in-the-middle lookup tables: the projection key of a state
is the OR (unweighted) or field-wise sum (weighted multiplicities) of the
keys of its low and high candidate halves, so the enumeration does two table
lookups per state instead of rebuilding projections.

Arithmetic: when p is an exact Fraction and C(n,d) <= 16, every reported
value is an exact rational (state weights p^e (1-p)^(C-e) become integers
a^e (b-a)^(C-e) over the common denominator b^C).  Larger instances fall
back to double precision with compensated summation; the hard size guard is
C(n,d) <= 24.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .core import Edge, SimpleGraph, WeightedGraph
from .errors import NotAProjectionError, ParameterError, ResourceLimitError

MAX_CANDIDATES = 24
EXACT_LIMIT = 16


@dataclass(frozen=True)
class TinyParams:
    """Exhaustive-enumeration instance: explicit p instead of (c, delta)."""

    n: int
    d: int
    p: Fraction | float

    def __post_init__(self):
        if self.d < 2 or self.n < self.d:
            raise ParameterError("need n >= d >= 2")
        if comb(self.n, self.d) > MAX_CANDIDATES:
            raise ResourceLimitError(
                f"C({self.n},{self.d}) = {comb(self.n, self.d)} candidate hyperedges "
                f"exceeds the exhaustive limit {MAX_CANDIDATES}",
                component_size=comb(self.n, self.d),
            )
        if isinstance(self.p, Fraction):
            if not (0 < self.p < 1):
                raise ParameterError("p must lie strictly inside (0, 1)")
        elif not (0.0 < float(self.p) < 1.0):
            raise ParameterError("p must lie strictly inside (0, 1)")

    @property
    def num_candidates(self) -> int:
        return comb(self.n, self.d)

    @property
    def rational(self) -> bool:
        return isinstance(self.p, Fraction) and self.num_candidates <= EXACT_LIMIT


@dataclass(frozen=True)
class PosteriorSummary:
    graph: SimpleGraph | WeightedGraph
    per_hyperedge: dict
    evidence: Fraction | float


class _Space:
    """Candidate hyperedges plus the lane encoding of projection keys."""

    def __init__(self, n: int, d: int, weighted: bool):
        self.n = n
        self.d = d
        self.weighted = weighted
        self.candidates: list[Edge] = list(itertools.combinations(range(n), d))
        self.index = {e: i for i, e in enumerate(self.candidates)}
        self.C = len(self.candidates)
        pairs = list(itertools.combinations(range(n), 2))
        per_pair_max = {
            pr: sum(1 for e in self.candidates if pr[0] in e and pr[1] in e) for pr in pairs
        }
        # field layout: each pair gets a bit slot (unweighted) or a count
        # field wide enough for its maximum multiplicity (weighted)
        self.slot: dict = {}
        lane, shift = 0, 0
        for pr in pairs:
            width = 1 if not weighted else max(1, per_pair_max[pr].bit_length())
            if shift + width > 64:
                lane, shift = lane + 1, 0
            self.slot[pr] = (lane, shift)
            shift += width
        self.lanes = lane + 1
        self.vectors = np.zeros((self.C, self.lanes), dtype=np.uint64)
        for i, e in enumerate(self.candidates):
            for pr in itertools.combinations(e, 2):
                ln, sh = self.slot[pr]
                if weighted:
                    self.vectors[i, ln] += np.uint64(1) << np.uint64(sh)
                else:
                    self.vectors[i, ln] |= np.uint64(1) << np.uint64(sh)

    def _combine(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b if self.weighted else a | b

    def _table(self, bit_indices: list[int]) -> np.ndarray:
        table = np.zeros((1, self.lanes), dtype=np.uint64)
        for i in bit_indices:
            table = np.vstack([table, self._combine(table, self.vectors[i])])
        return table

    def encode_graph(self, g: SimpleGraph | WeightedGraph) -> bytes:
        key = np.zeros(self.lanes, dtype=np.uint64)
        items = g.weights.items() if self.weighted else ((pr, 1) for pr in g.edges)
        for pr, wt in items:
            ln, sh = self.slot[pr]
            if self.weighted:
                max_mult = sum(
                    1 for e in self.candidates if pr[0] in e and pr[1] in e
                )
                if wt > max_mult:
                    raise NotAProjectionError(
                        f"weight {wt} on pair {pr} exceeds the maximum multiplicity {max_mult}"
                    )
            key[ln] += np.uint64(wt) << np.uint64(sh)
        return key.tobytes()

    def grouped_counts(self, forced_mask: int = 0) -> dict[bytes, np.ndarray]:
        """key -> array of state counts per edge count, over states containing forced_mask."""
        k = min(self.C, 13)
        lo_table = self._table(list(range(k)))
        hi_table = self._table(list(range(k, self.C)))
        lo_idx = np.arange(1 << k, dtype=np.int64)
        pop_lo = np.zeros(1 << k, dtype=np.int64)
        for b in range(k):
            pop_lo += (lo_idx >> b) & 1
        forced_lo = forced_mask & ((1 << k) - 1)
        forced_hi = forced_mask >> k
        lo_keep = (lo_idx & forced_lo) == forced_lo

        groups: dict[bytes, np.ndarray] = {}
        for hi in range(1 << (self.C - k)):
            if (hi & forced_hi) != forced_hi:
                continue
            rows = self._combine(lo_table[lo_keep], hi_table[hi])
            e = pop_lo[lo_keep] + bin(hi).count("1")
            stacked = np.column_stack([rows, e.astype(np.uint64)])
            uniq, counts = np.unique(stacked, axis=0, return_counts=True)
            for row, cnt in zip(uniq, counts):
                key = row[:-1].tobytes()
                arr = groups.get(key)
                if arr is None:
                    arr = np.zeros(self.C + 1, dtype=np.int64)
                    groups[key] = arr
                arr[int(row[-1])] += int(cnt)
        return groups

    def target_counts(self, target_key: bytes):
        """(by-e counts, per-candidate-by-e counts) over states projecting to target."""
        k = min(self.C, 13)
        lo_table = self._table(list(range(k)))
        hi_table = self._table(list(range(k, self.C)))
        lo_idx = np.arange(1 << k, dtype=np.int64)
        pop_lo = np.zeros(1 << k, dtype=np.int64)
        for b in range(k):
            pop_lo += (lo_idx >> b) & 1
        target = np.frombuffer(target_key, dtype=np.uint64)

        total = np.zeros(self.C + 1, dtype=np.int64)
        per_candidate = np.zeros((self.C, self.C + 1), dtype=np.int64)
        for hi in range(1 << (self.C - k)):
            rows = self._combine(lo_table, hi_table[hi])
            match = np.all(rows == target, axis=1)
            if not match.any():
                continue
            idx = lo_idx[match]
            e = pop_lo[match] + bin(hi).count("1")
            np.add.at(total, e, 1)
            for i in range(self.C):
                present = ((idx >> i) & 1).astype(bool) if i < k else np.full(
                    idx.shape, bool((hi >> (i - k)) & 1)
                )
                if present.any():
                    np.add.at(per_candidate[i], e[present], 1)
        return total, per_candidate


def _weights(tiny: TinyParams):
    """Per-edge-count state weights plus the common denominator (exact mode)."""
    C = tiny.num_candidates
    if tiny.rational:
        a, b = tiny.p.numerator, tiny.p.denominator
        return [a**e * (b - a) ** (C - e) for e in range(C + 1)], b**C
    p = float(tiny.p)
    return [p**e * (1.0 - p) ** (C - e) for e in range(C + 1)], None


def _total(arr: np.ndarray, weights) -> int | float:
    terms = [int(c) * weights[e] for e, c in enumerate(arr) if c]
    if not terms:
        return 0 if isinstance(weights[0], int) else 0.0
    if isinstance(weights[0], int):
        return sum(terms)
    return math.fsum(terms)


def exhaustive_posterior(
    tiny: TinyParams, g: SimpleGraph | WeightedGraph
) -> PosteriorSummary:
    """Exact posterior Pr[h in H | projection = g] for every candidate h."""
    weighted = isinstance(g, WeightedGraph)
    if g.n != tiny.n:
        raise ParameterError("graph vertex count does not match the instance")
    space = _Space(tiny.n, tiny.d, weighted)
    key = space.encode_graph(g)
    weights, denom = _weights(tiny)
    total_by_e, per_cand = space.target_counts(key)
    T = _total(total_by_e, weights)
    if T == 0:
        raise NotAProjectionError("graph has no preimage: evidence is zero")

    support = g.support() if weighted else g
    per_h = {}
    for i, cand in enumerate(space.candidates):
        if not all(support.has_edge(u, v) for u, v in itertools.combinations(cand, 2)):
            continue
        X = _total(per_cand[i], weights)
        per_h[cand] = Fraction(X, T) if denom is not None else (X / T)
    evidence = Fraction(T, denom) if denom is not None else T
    return PosteriorSummary(graph=g, per_hyperedge=per_h, evidence=evidence)


def _distinguished_stats(tiny: TinyParams, weighted: bool):
    """(T_G, X_G) pairs over projection classes, X restricted to H containing [d]."""
    space = _Space(tiny.n, tiny.d, weighted)
    weights, denom = _weights(tiny)
    groups = space.grouped_counts()
    forced = space.grouped_counts(forced_mask=1)  # candidate 0 is (0,..,d-1)
    out = []
    for key, arr in groups.items():
        T = _total(arr, weights)
        far = forced.get(key)
        X = _total(far, weights) if far is not None else (0 if denom else 0.0)
        out.append((T, X))
    return out, denom


def optimal_partial_loss(tiny: TinyParams, weighted: bool = False):
    """Loss of the posterior-threshold rule, exactly:
    sum_G Pr[G] * min(post, 1-post) * C(n,d) / (p * C(n,d)).

    Exchangeability reduces the per-hyperedge sum to the distinguished
    candidate (0..d-1).  Exact Fraction in rational mode, float otherwise.
    """
    stats, denom = _distinguished_stats(tiny, weighted)
    S = sum(min(X, T - X) for T, X in stats) if denom else math.fsum(
        min(X, T - X) for T, X in stats
    )
    if denom is not None:
        a, b = tiny.p.numerator, tiny.p.denominator
        return Fraction(S, a * b ** (tiny.num_candidates - 1))
    return S / float(tiny.p)


def expected_overlap(tiny: TinyParams, weighted: bool = False):
    """E |E(H) ∩ E(H')| for two conditionally iid draws given the projection:
    C(n,d) * sum_G Pr[G] * Pr[[d] in H | G]^2.
    """
    stats, denom = _distinguished_stats(tiny, weighted)
    if denom is not None:
        by_t: dict = {}
        for T, X in stats:
            if X:
                by_t[T] = by_t.get(T, 0) + X * X
        total = sum(Fraction(sq, T) for T, sq in by_t.items())
        return comb(tiny.n, tiny.d) * total / denom
    return comb(tiny.n, tiny.d) * math.fsum(X * X / T for T, X in stats if X)


def correlation_quantity(tiny: TinyParams, hyperedges) -> Fraction | float:
    """sum_G Pr[h_1..h_k in H | G]^2 Pr[G] for the given distinct d-subsets."""
    hs = [tuple(sorted(h)) for h in hyperedges]
    if len(set(hs)) != len(hs):
        raise ParameterError("hyperedges must be distinct")
    space = _Space(tiny.n, tiny.d, False)
    forced = 0
    for h in hs:
        if h not in space.index:
            raise ParameterError(f"{h} is not a d-subset of the vertex set")
        forced |= 1 << space.index[h]
    weights, denom = _weights(tiny)
    groups = space.grouped_counts()
    forced_groups = space.grouped_counts(forced_mask=forced)
    if denom is not None:
        by_t: dict = {}
        for key, arr in forced_groups.items():
            X = _total(arr, weights)
            if X:
                T = _total(groups[key], weights)
                by_t[T] = by_t.get(T, 0) + X * X
        return sum(Fraction(sq, T) for T, sq in by_t.items()) / denom
    return math.fsum(
        _total(arr, weights) ** 2 / _total(groups[key], weights)
        for key, arr in forced_groups.items()
    )


def evidence_normalization_gap(tiny: TinyParams, weighted: bool = False):
    """|1 - sum_G Pr[G]|: zero in rational mode, tiny float otherwise."""
    space = _Space(tiny.n, tiny.d, weighted)
    weights, denom = _weights(tiny)
    groups = space.grouped_counts()
    total = (
        sum(_total(arr, weights) for arr in groups.values())
        if denom is not None
        else math.fsum(_total(arr, weights) for arr in groups.values())
    )
    if denom is not None:
        return abs(Fraction(total, denom) - 1)
    return abs(total - 1.0)
