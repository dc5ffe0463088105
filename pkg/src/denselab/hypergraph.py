"""Core combinatorial types for r-uniform hypergraphs.

Vertices are 1-based everywhere in the public API. A hyperedge is a strictly
increasing tuple of r vertex ids; edges are ranked lexicographically on the
sorted vertex tuple, giving a fixed bijection onto [0, C(n, r)).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError

Edge = Tuple[int, ...]


def validate_edge(edge: Sequence[int], n: int, r: int) -> Edge:
    """Check canonical form (strictly increasing, in [1, n], length r)."""
    e = tuple(int(v) for v in edge)
    if len(e) != r:
        raise InvalidArgumentError(f"edge {e} does not have {r} vertices")
    if any(a >= b for a, b in zip(e, e[1:])):
        raise InvalidArgumentError(f"edge {e} is not strictly increasing")
    if e[0] < 1 or e[-1] > n:
        raise InvalidArgumentError(f"edge {e} has a vertex outside [1, {n}]")
    return e


def rank_edge(edge: Sequence[int], n: int, r: int) -> int:
    """Lexicographic rank of a canonical edge among all edges of K_n^r."""
    if n < r:
        raise InvalidArgumentError(f"n={n} < r={r}")
    e = validate_edge(edge, n, r)
    rank = 0
    prev = 0
    for i, c in enumerate(e):
        k = r - i - 1
        # sum_{v=prev+1}^{c-1} C(n-v, k), telescoped
        rank += comb(n - prev, k + 1) - comb(n - c + 1, k + 1)
        prev = c
    return rank


def unrank_edge(index: int, n: int, r: int) -> Edge:
    """Inverse of rank_edge."""
    m = comb(n, r)
    if not 0 <= index < m:
        raise InvalidArgumentError(f"index {index} outside [0, {m})")
    edge: List[int] = []
    prev = 0
    rem = index
    for i in range(r):
        k = r - i - 1
        c = prev + 1
        while True:
            block = comb(n - c, k)
            if rem < block:
                break
            rem -= block
            c += 1
        edge.append(c)
        prev = c
    return tuple(edge)


def all_edges(n: int, r: int) -> Iterator[Edge]:
    """All edges of K_n^r in rank (lexicographic) order."""
    return itertools.combinations(range(1, n + 1), r)


def induced_vertices(edges: Iterable[Edge]) -> FrozenSet[int]:
    """Union of the edges' vertex sets (the edge-induced vertex set)."""
    out: set = set()
    for e in edges:
        out.update(e)
    return frozenset(out)


def count_isolated_free_edge_sets(ell: int, m: int, r: int) -> int:
    """Number of m-edge sets on ell labeled vertices covering all of them.

    Inclusion-exclusion over the set of missed vertices:
    sum_j (-1)^j C(ell, j) C(C(ell - j, r), m). Exact arbitrary-precision
    integer; degenerate inputs give 0.
    """
    if m < 0 or ell < 0:
        return 0
    return sum(
        (-1) ** j * comb(ell, j) * comb(comb(ell - j, r), m)
        for j in range(ell + 1)
    )


def count_subgraph_class(n: int, ell: int, m: int, r: int) -> int:
    """|S_{ell,m}|: edge-induced subgraphs of K_n^r with ell vertices, m edges."""
    if n < ell:
        raise InvalidArgumentError(f"n={n} < ell={ell}")
    return comb(n, ell) * count_isolated_free_edge_sets(ell, m, r)


@dataclass(frozen=True)
class Hypergraph:
    """An r-uniform hypergraph on vertex set [1, n] with a duplicate-free edge set."""

    n: int
    r: int
    edges: FrozenSet[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.r < 2:
            raise InvalidArgumentError(f"r={self.r} < 2")
        if self.n < self.r:
            raise InvalidArgumentError(f"n={self.n} < r={self.r}")
        canon = frozenset(validate_edge(e, self.n, self.r) for e in self.edges)
        object.__setattr__(self, "edges", canon)

    @classmethod
    def complete(cls, n: int, r: int) -> "Hypergraph":
        return cls(n, r, frozenset(all_edges(n, r)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def to_tensor(self) -> "AdjacencyTensor":
        m = comb(self.n, self.r)
        bits = np.zeros(m, dtype=bool)
        for e in self.edges:
            bits[rank_edge(e, self.n, self.r)] = True
        return AdjacencyTensor(self.n, self.r, bits)


@dataclass
class AdjacencyTensor:
    """Presence bits for every ranked edge of K_n^r."""

    n: int
    r: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        m = comb(self.n, self.r)
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (m,):
            raise InvalidArgumentError(
                f"expected {m} bits for n={self.n}, r={self.r}, got shape {bits.shape}"
            )
        self.bits = bits

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def present_count(self) -> int:
        return int(self.bits.sum())

    def present_edges(self) -> List[Edge]:
        return [unrank_edge(int(i), self.n, self.r) for i in np.flatnonzero(self.bits)]

    def to_hypergraph(self) -> Hypergraph:
        return Hypergraph(self.n, self.r, frozenset(self.present_edges()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AdjacencyTensor):
            return NotImplemented
        return (
            self.n == other.n
            and self.r == other.r
            and bool(np.array_equal(self.bits, other.bits))
        )


# --- hypergraph text format ------------------------------------------------
#
# First line "n r"; then one edge per line as r space-separated 1-based vertex
# ids in increasing order, lines sorted by rank. Blank lines and '#' comments
# are ignored on input; comments may be emitted before the edge list.


def write_hypergraph_text(hg: Hypergraph, comments: Optional[Sequence[str]] = None) -> str:
    lines = [f"{hg.n} {hg.r}"]
    for c in comments or []:
        lines.append(f"# {c}")
    for e in hg.sorted_edges():
        lines.append(" ".join(str(v) for v in e))
    return "\n".join(lines) + "\n"


def parse_hypergraph_text(text: str) -> Tuple[Hypergraph, List[str]]:
    """Parse the text format; returns the hypergraph and the comment lines."""
    comments: List[str] = []
    header: Optional[Tuple[int, int]] = None
    edges: List[Edge] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise InvalidArgumentError(f"bad header line: {raw!r}")
            header = (int(parts[0]), int(parts[1]))
            continue
        edges.append(tuple(int(v) for v in parts))
    if header is None:
        raise InvalidArgumentError("missing header line")
    n, r = header
    return Hypergraph(n, r, frozenset(edges)), comments
