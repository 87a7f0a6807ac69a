"""The random d-uniform hypergraph model and its closed-form quantities.

Hyperedges are included independently with probability p = c * n^(delta-d+1).
delta is held as an exact rational so regime comparisons against the
recovery thresholds (d-1)/(d+1) and (2d-4)/(2d-1) never depend on float
rounding.  Asymptotic formulas (fake-edge density, extension counts) return
leading-order values; their validity regime is documented per function and
statistical agreement is checked with confidence bands, not exact equality.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, log1p, expm1

import numpy as np

from .core import Hypergraph
from .errors import FormatError, ParameterError


def as_fraction(x) -> Fraction:
    """Exact rationals pass through; floats are snapped to denominator <= 10^6."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**6)


@dataclass(frozen=True)
class ModelParams:
    """(n, d, c, delta, seed) with p = c * n^(delta - d + 1)."""

    n: int
    d: int
    c: float
    delta: Fraction
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.d < 3:
            raise ParameterError("model requires uniformity d >= 3")
        if self.n < self.d:
            raise ParameterError("need n >= d")
        if self.c <= 0:
            raise ParameterError("rate constant c must be positive")
        if self.delta >= self.d - 1:
            raise ParameterError("delta must satisfy delta < d - 1")
        if not (0.0 < self.p < 1.0):
            raise ParameterError(
                f"hyperedge probability p={self.p:.3g} outside (0, 1)"
            )

    @property
    def p(self) -> float:
        return self.c * self.n ** float(self.delta - self.d + 1)


def derived_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for a (seed, stream...) pair.

    Streams are mixed in through SeedSequence spawn keys, so trial index
    (and sweep-point index) give statistically independent, reproducible
    generators regardless of how trials are distributed over workers.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=stream)))


def edge_probability(params: ModelParams) -> float:
    return params.p


def _decode_colex(k: int, d: int, tables: list[list[int]]) -> tuple[int, ...]:
    # colex rank k = sum_j C(a_j, j) over the ascending vertices a_1 < .. < a_d
    out = []
    rem = k
    for j in range(d, 0, -1):
        a = bisect_right(tables[j], rem) - 1
        out.append(a)
        rem -= tables[j][a]
    return tuple(reversed(out))


def sample_hypergraph(params: ModelParams, *, stream: tuple[int, ...] = ()) -> Hypergraph:
    """One draw of the model: every candidate hyperedge kept with probability p.

    Candidates are walked in colex order with geometric gap skipping, so the
    cost is proportional to the number of realized hyperedges rather than
    C(n, d).  Deterministic given (params.seed, stream).
    """
    n, d, p = params.n, params.d, params.p
    total = comb(n, d)
    rng = derived_rng(params.seed, *stream)

    positions: list[int] = []
    pos = -1
    if p > 1e-9:
        # batched gaps; a gap of g lands on the (g-1)th candidate after pos
        expected_left = p * total + 1
        while True:
            batch = max(64, int(expected_left + 6 * math.sqrt(expected_left)))
            gaps = rng.geometric(p, size=batch)
            done = False
            for g in gaps:
                pos += int(g)
                if pos >= total:
                    done = True
                    break
                positions.append(pos)
            if done:
                break
            expected_left = max(1.0, p * (total - pos))
    else:
        log1m = log1p(-p)
        while True:
            u = rng.random()
            pos += int(math.log(u) / log1m) + 1
            if pos >= total:
                break
            positions.append(pos)

    tables = [[comb(i, j) for i in range(n)] for j in range(d + 1)]
    edges = frozenset(_decode_colex(k, d, tables) for k in positions)
    return Hypergraph(n, d, edges)


def fake_edge_density(params: ModelParams) -> float:
    """Leading-order hyperedge density q of the clique hypergraph of Proj(H).

    q = p + (c n^(delta-1) / (d-2)!)^C(d,2): a d-subset is a clique of the
    projection either because it is a true hyperedge or because each of its
    pairs lies in some other hyperedge.
    """
    n, d = params.n, params.d
    second = (params.c * n ** float(params.delta - 1) / factorial(d - 2)) ** comb(d, 2)
    return params.p + second


@dataclass(frozen=True)
class RegimeReport:
    """Exact recovery-threshold comparisons for one (d, delta)."""

    partial_threshold: Fraction
    exact_threshold_unweighted: Fraction
    exact_threshold_weighted: Fraction
    classification: dict[str, str]


def _classify(delta: Fraction, threshold: Fraction) -> str:
    if delta < threshold:
        return "below"
    if delta == threshold:
        return "at"
    return "above"


def classify_regime(d: int, delta) -> RegimeReport:
    if d < 3:
        raise ParameterError("thresholds are defined for d >= 3")
    delta = as_fraction(delta)
    partial = Fraction(d - 1, d + 1)
    exact_unweighted = min(partial, Fraction(2 * d - 4, 2 * d - 1))
    exact_weighted = partial
    return RegimeReport(
        partial_threshold=partial,
        exact_threshold_unweighted=exact_unweighted,
        exact_threshold_weighted=exact_weighted,
        classification={
            "partial": _classify(delta, partial),
            "exact_unweighted": _classify(delta, exact_unweighted),
            "exact_weighted": _classify(delta, exact_weighted),
        },
    )


def cover_probability_exact(params: ModelParams, k: int, family) -> float:
    """Probability that every u in family is realized as h∩[k] by some hyperedge.

    The candidate hyperedges for distinct u are disjoint, so the events are
    independent and the product formula is exact (not asymptotic):
    prod_u (1 - (1-p)^C(n-k, d-|u|)).
    """
    n, d, p = params.n, params.d, params.p
    if k < 0 or k > n:
        raise ParameterError("marked-vertex count k out of range")
    sets = {frozenset(u) for u in family}
    value = 1.0
    for u in sets:
        if any(x < 0 or x >= k for x in u):
            raise ParameterError(f"subset {sorted(u)} not contained in [k]")
        if len(u) > d:
            raise ParameterError(f"subset size {len(u)} exceeds uniformity d={d}")
        count = comb(n - k, d - len(u))
        value *= -expm1(count * log1p(-p))
    return value


def relaxation_exponent_g(d: int, delta, M: int) -> float:
    """Vertex value of the relaxed covering exponent.

    g(M) = M(delta-1) + 2 - (1 + sqrt(8(C(d,2)-M+1)+1))/2; the endpoints are
    g(1) = -d+1+delta and g(C(d,2)) = C(d,2)(delta-1), and g is convex in M,
    so intermediate cover shapes are dominated.
    """
    pairs = comb(d, 2)
    if not 1 <= M <= pairs:
        raise ParameterError(f"M must lie in [1, C(d,2)] = [1, {pairs}]")
    delta = float(as_fraction(delta))
    return M * (delta - 1) + 2 - (1 + math.sqrt(8 * (pairs - M + 1) + 1)) / 2


def expected_extension_count(params: ModelParams, l: int, m: int) -> float:
    """Leading-order expected number of d-sets h with h∩[l]=[m] whose pairs
    outside [m] all appear in the projection.

    Only proved above the partial threshold; below it the formula is not
    meaningful and a ParameterError is raised.
    """
    n, d = params.n, params.d
    if not 0 <= m <= d - 1:
        raise ParameterError("need 0 <= m <= d-1")
    if l < m:
        raise ParameterError("need l >= m")
    if params.delta <= Fraction(d - 1, d + 1):
        raise ParameterError(
            "extension-count formula is valid only for delta > (d-1)/(d+1)"
        )
    base = params.c * n ** float(params.delta - 1) / factorial(d - 2)
    return comb(n, d - m) * base ** (comb(d, 2) - comb(m, 2))


def binary_entropy(p: float) -> float:
    """H_B(p) in nats."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * log1p(-p)


def hypergraph_entropy(params: ModelParams) -> float:
    """H of the product-measure hypergraph: C(n,d) * H_B(p) nats."""
    return comb(params.n, params.d) * binary_entropy(params.p)


def projection_entropy_lower_bound(params: ModelParams) -> float:
    """Chain-rule lower bound on the entropy of the projection, in nats.

    Valid only while C(n, d-2) * p < 1; outside that region the prefactor
    is meaningless and a ParameterError is raised.
    """
    n, d, p = params.n, params.d, params.p
    budget = comb(n, d - 2) * p
    if budget >= 1.0:
        raise ParameterError("bound requires C(n, d-2) * p < 1")
    prefactor = 1.0 - budget / (1.0 - budget)
    total = 0.0
    for i in range(2, n - d + 3):
        covered = -expm1(comb(n - i, d - 2) * log1p(-p))
        total += (i - 1) * binary_entropy(covered)
    return prefactor * total


# ---------------------------------------------------------------------------
# Flat key=value config files; the same keys are accepted as CLI flags.
# ---------------------------------------------------------------------------


def params_to_config(params: ModelParams) -> str:
    return (
        f"n={params.n}\n"
        f"d={params.d}\n"
        f"c={params.c!r}\n"
        f"delta={params.delta.numerator}/{params.delta.denominator}\n"
        f"seed={params.seed}\n"
    )


def parse_config(text: str) -> dict:
    out: dict = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise FormatError(f"config line is not key=value: {ln!r}")
        key, value = (part.strip() for part in ln.split("=", 1))
        if key in ("n", "d", "seed"):
            out[key] = int(value)
        elif key == "c":
            out[key] = float(value)
        elif key == "delta":
            out[key] = Fraction(value)
        else:
            raise FormatError(f"unknown config key {key!r}")
    return out
