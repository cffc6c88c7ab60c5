"""Simple undirected graphs on labeled vertices.

A graph on n vertices is stored as a single integer bitmask over the
C(n, 2) vertex pairs in colexicographic order: pair (i, j) with i < j has
bit index j*(j-1)/2 + i.  That order is also the byte order of the graph6
format and the edge-index order used by the G(n, p) sampler, so one
convention serves representation, serialization, and sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from . import rng
from .errors import DimensionError, GuardError
from .linalg import (
    IntMatrix,
    RatMatrix,
    char_poly,
    invariant_factors,
    rank_mod,
    rank_rational,
    _RANK_PRIME,
)

ISOMORPHISM_LIMIT = 10
ENUMERATION_LIMIT = 8


def edge_index(i: int, j: int) -> int:
    """Colexicographic index of the unordered pair {i, j}, 0-based."""
    if i == j:
        raise ValueError("self-loops have no edge index")
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


class Graph:
    """Immutable simple graph: vertex count plus an edge bitmask."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: int = 0):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        m = n * (n - 1) // 2
        if bits < 0 or bits >> m:
            raise ValueError("edge bitmask out of range for vertex count")
        self.n = n
        self.bits = bits

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "Graph":
        bits = 0
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range")
            bits |= 1 << edge_index(i, j)
        return cls(n, bits)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, (1 << (n * (n - 1) // 2)) - 1)

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        return bool(self.bits >> edge_index(i, j) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for j in range(self.n) for i in range(j) if self.has_edge(i, j)]

    def edge_count(self) -> int:
        return self.bits.bit_count()

    def degree(self, v: int) -> int:
        return sum(1 for u in range(self.n) if u != v and self.has_edge(u, v))

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(self.degree(v) for v in range(self.n)))

    def neighbors(self, v: int) -> list[int]:
        return [u for u in range(self.n) if u != v and self.has_edge(u, v)]

    def adjacency(self) -> IntMatrix:
        """Symmetric 0/1 adjacency matrix with zero diagonal."""
        n = self.n
        a = [[0] * n for _ in range(n)]
        for i, j in self.edges():
            a[i][j] = a[j][i] = 1
        return IntMatrix(a)

    def complement(self) -> "Graph":
        m = self.n * (self.n - 1) // 2
        return Graph(self.n, self.bits ^ ((1 << m) - 1))

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex v renamed to perm[v]."""
        return Graph.from_edges(self.n, [(perm[i], perm[j]) for i, j in self.edges()])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and (self.n, self.bits) == (other.n, other.bits)

    def __hash__(self) -> int:
        return hash((self.n, self.bits))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edges()!r})"


@dataclass(frozen=True)
class GnpSampler:
    """Reproducible G(n, p) sampler with an exact rational edge probability.

    The inclusion decision for edge k of trial t compares a uniform integer in
    [0, denominator) drawn from the SplitMix64 stream keyed by
    (master_seed, t, k) against the numerator.  Identical
    (n, p, master_seed, trial) tuples therefore reproduce identical graphs on
    any platform, in any call order.
    """

    n: int
    p: Fraction
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        if not (0 <= self.p <= 1):
            raise ValueError("edge probability must lie in [0, 1]")
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")

    def sample(self, trial_index: int) -> Graph:
        a = self.p.numerator
        b = self.p.denominator
        bits = 0
        m = self.n * (self.n - 1) // 2
        for k in range(m):
            u = rng.stream(self.master_seed, trial_index, k).below(b)
            if u < a:
                bits |= 1 << k
        return Graph(self.n, bits)


def sample(sampler: GnpSampler, trial_index: int) -> Graph:
    return sampler.sample(trial_index)


class WalkMatrixReport:
    """Walk matrix of a graph, its controllability, and last invariant factor.

    ``d_n`` is computed lazily: controllability sweeps only need the rank, and
    the Smith normal form of large walk matrices is far more expensive.
    """

    __slots__ = ("w", "controllable", "__dict__")

    def __init__(self, w: IntMatrix, controllable: bool):
        self.w = w
        self.controllable = controllable

    @cached_property
    def d_n(self) -> int:
        if not self.controllable:
            return 0
        factors = invariant_factors(self.w)
        return factors[-1]


def walk_matrix(g: Graph) -> WalkMatrixReport:
    """Walk matrix [e, Ae, ..., A^(n-1) e] plus controllability and d_n."""
    if g.n < 1:
        raise DimensionError("walk matrix needs at least one vertex")
    n = g.n
    a = g.adjacency()
    v = [1] * n
    cols = [v[:]]
    for _ in range(n - 1):
        v = a.mul_vector(v)
        cols.append(v[:])
    w = IntMatrix([[cols[j][i] for j in range(n)] for i in range(n)])
    controllable = rank_rational(w.to_rational()) == n
    return WalkMatrixReport(w, controllable)


def is_controllable(g: Graph) -> bool:
    """Fast controllability test.

    Builds the walk matrix modulo a fixed 61-bit prime; full modular rank
    certifies full rational rank.  Deficient modular rank falls back to the
    exact test on the integer walk matrix.
    """
    n = g.n
    if n < 1:
        raise DimensionError("controllability needs at least one vertex")
    p = _RANK_PRIME
    a = g.adjacency()
    v = [1] * n
    cols = [v[:]]
    for _ in range(n - 1):
        v = [x % p for x in a.mul_vector(v)]
        cols.append(v[:])
    wp = IntMatrix([[cols[j][i] for j in range(n)] for i in range(n)])
    if rank_mod(wp, p) == n:
        return True
    return walk_matrix(g).controllable


def _refine_colors(g: Graph) -> tuple[int, ...]:
    """Iterated neighbor-color refinement (stable coloring)."""
    n = g.n
    colors = [g.degree(v) for v in range(n)]
    for _ in range(n):
        sigs = [
            (colors[v], tuple(sorted(colors[u] for u in g.neighbors(v))))
            for v in range(n)
        ]
        relabel = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [relabel[s] for s in sigs]
        if new == colors:
            break
        colors = new
    return tuple(colors)


def are_isomorphic(g: Graph, h: Graph, limit: int = ISOMORPHISM_LIMIT) -> bool:
    """Exhaustive isomorphism test with color-refinement pruning.

    Backtracks over candidate bijections consistent with the stable coloring;
    intended for small orders (guarded at ``limit``).
    """
    if g.n != h.n:
        return False
    if g.n > limit:
        raise GuardError(f"isomorphism test guarded at n <= {limit}")
    if g.bits == h.bits:
        return True
    if g.edge_count() != h.edge_count():
        return False
    if g.degree_sequence() != h.degree_sequence():
        return False
    cg = _refine_colors(g)
    ch = _refine_colors(h)
    if sorted(cg) != sorted(ch):
        return False
    n = g.n
    # Map most-constrained vertices first: rarest color class, then index.
    color_freq: dict[int, int] = {}
    for c in cg:
        color_freq[c] = color_freq.get(c, 0) + 1
    order = sorted(range(n), key=lambda v: (color_freq[cg[v]], cg[v], v))
    candidates = [[u for u in range(n) if ch[u] == cg[v]] for v in range(n)]
    mapping = [-1] * n
    used = [False] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        v = order[k]
        for u in candidates[v]:
            if used[u]:
                continue
            ok = True
            for prev in order[:k]:
                if g.has_edge(v, prev) != h.has_edge(u, mapping[prev]):
                    ok = False
                    break
            if ok:
                mapping[v] = u
                used[u] = True
                if extend(k + 1):
                    return True
                used[u] = False
                mapping[v] = -1
        return False

    return extend(0)


def is_cospectral(g: Graph, h: Graph) -> bool:
    """True iff the adjacency spectra agree and the graphs are not isomorphic."""
    if g.n != h.n:
        raise DimensionError("cospectrality is defined for graphs of equal order")
    if char_poly(g.adjacency()) != char_poly(h.adjacency()):
        return False
    return not are_isomorphic(g, h)


def is_generalized_cospectral(g: Graph, h: Graph) -> bool:
    """Cospectral, and the complements share their spectrum as well."""
    if not is_cospectral(g, h):
        return False
    return char_poly(g.complement().adjacency()) == char_poly(h.complement().adjacency())


def enumerate_graphs(n: int, limit: int = ENUMERATION_LIMIT) -> Iterator[Graph]:
    """All 2^C(n,2) labeled graphs on n vertices, in bitmask order."""
    if n > limit:
        raise GuardError(f"graph enumeration guarded at n <= {limit}")
    m = n * (n - 1) // 2
    for bits in range(1 << m):
        yield Graph(n, bits)


def canonical_bits(g: Graph, limit: int = ENUMERATION_LIMIT) -> int:
    """Minimum edge bitmask over all vertex relabelings (brute force)."""
    if g.n > limit:
        raise GuardError(f"canonical form guarded at n <= {limit}")
    from itertools import permutations

    best = None
    for perm in permutations(range(g.n)):
        bits = 0
        for i, j in g.edges():
            bits |= 1 << edge_index(perm[i], perm[j])
        if best is None or bits < best:
            best = bits
    return best if best is not None else 0
