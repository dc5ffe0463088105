"""Balancedness checking, the complement inequality, and balanced-motif search.

A hypergraph is balanced when every nonempty subhypergraph has edge/vertex
ratio at most the whole graph's ratio (non-strict). The motif search targets
the minimal-denominator rational in the open interval (1/beta, gamma/alpha),
selected by Stern-Brocot descent on inward-rounded rational endpoints.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, FrozenSet, List, Optional, Tuple

from .errors import BudgetExceededError, InvalidArgumentError, RegimeError
from .hypergraph import Edge, Hypergraph, all_edges, induced_vertices

DENSITY_BUDGET_VERTICES = 20
ENDPOINT_DENOM = 10 ** 9


@dataclass(frozen=True)
class BalanceCertificate:
    ratio: Fraction
    max_sub_density: Fraction
    witness: FrozenSet[int]

    @property
    def balanced(self) -> bool:
        return self.max_sub_density <= self.ratio


@dataclass(frozen=True)
class BalancedMotif:
    motif: Hypergraph
    ell: int
    m: int
    ratio: Fraction
    aut_count: int
    certificate: BalanceCertificate

    def to_json_dict(self) -> dict:
        return {
            "n": self.motif.n,
            "r": self.motif.r,
            "edges": [list(e) for e in self.motif.sorted_edges()],
            "ratio": [self.ratio.numerator, self.ratio.denominator],
            "maxSubDensity": [
                self.certificate.max_sub_density.numerator,
                self.certificate.max_sub_density.denominator,
            ],
            "witness": sorted(self.certificate.witness),
            "autCount": self.aut_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def motif_from_json_dict(d: dict) -> BalancedMotif:
    hg = Hypergraph(d["n"], d["r"], frozenset(tuple(e) for e in d["edges"]))
    return certify_motif(hg)


def certify_motif(hg: Hypergraph) -> BalancedMotif:
    """Build a BalancedMotif for hg, recomputing its certificate from scratch."""
    verts = induced_vertices(hg.edges)
    if len(verts) != hg.n:
        raise InvalidArgumentError("motif must have no isolated vertices")
    ok, cert = is_balanced(hg)
    if not ok:
        raise InvalidArgumentError("motif is not balanced")
    return BalancedMotif(
        motif=hg,
        ell=hg.n,
        m=hg.edge_count,
        ratio=Fraction(hg.edge_count, hg.n),
        aut_count=automorphism_count(hg),
        certificate=cert,
    )


def max_subgraph_density(hg: Hypergraph) -> Tuple[Fraction, FrozenSet[int]]:
    """Max over nonempty vertex subsets V' of |E(H[V'])| / |V'|, with a witness.

    The vertex-subset form suffices: isolated vertices only lower the ratio,
    and for fixed V' the ratio is maximized by taking all induced edges.
    """
    verts = sorted(induced_vertices(hg.edges))
    if len(verts) != hg.n or not verts:
        raise InvalidArgumentError("hypergraph must be nonempty with no isolated vertices")
    if hg.n > DENSITY_BUDGET_VERTICES:
        raise BudgetExceededError(
            f"{hg.n} vertices exceed the {DENSITY_BUDGET_VERTICES}-vertex budget"
        )
    edges = [frozenset(e) for e in hg.edges]
    best = Fraction(0)
    best_witness: FrozenSet[int] = frozenset({verts[0]})
    for size in range(1, len(verts) + 1):
        for sub in itertools.combinations(verts, size):
            vs = frozenset(sub)
            m_in = sum(1 for e in edges if e <= vs)
            ratio = Fraction(m_in, size)
            if ratio > best:
                best = ratio
                best_witness = vs
    return best, best_witness


def is_balanced(hg: Hypergraph) -> Tuple[bool, BalanceCertificate]:
    ratio = Fraction(hg.edge_count, hg.n)
    max_density, witness = max_subgraph_density(hg)
    cert = BalanceCertificate(ratio=ratio, max_sub_density=max_density, witness=witness)
    return cert.balanced, cert


def check_complement_inequality(
    hg: Hypergraph, sub_vertices: FrozenSet[int], sub_edges: FrozenSet[Edge]
) -> bool:
    """Complement-density inequality for a balanced H and a proper subhypergraph H'.

    Returns whether (|E(H)|-|E(H')|)/(|V(H)|-|V(H')|) >= |E(H)|/|V(H)|; this
    must always be true for balanced H, so a False return flags an
    implementation bug, not a counterexample.
    """
    ok, _ = is_balanced(hg)
    if not ok:
        raise InvalidArgumentError("H must be balanced")
    verts = induced_vertices(hg.edges)
    if not sub_vertices < verts:
        raise InvalidArgumentError("V(H') must be a proper subset of V(H)")
    if not sub_edges <= hg.edges:
        raise InvalidArgumentError("E(H') must be a subset of E(H)")
    if any(not set(e) <= sub_vertices for e in sub_edges):
        raise InvalidArgumentError("H' edges must lie within V(H')")
    lhs = Fraction(
        hg.edge_count - len(sub_edges), len(verts) - len(sub_vertices)
    )
    return lhs >= Fraction(hg.edge_count, len(verts))


def automorphism_count(hg: Hypergraph) -> int:
    """|Aut(H)| by brute force over vertex permutations (small graphs only)."""
    verts = sorted(induced_vertices(hg.edges))
    if len(verts) > 10:
        raise BudgetExceededError("automorphism brute force limited to 10 vertices")
    edges = hg.edges
    count = 0
    for perm in itertools.permutations(verts):
        mapping = dict(zip(verts, perm))
        if all(tuple(sorted(mapping[v] for v in e)) in edges for e in edges):
            count += 1
    return count


def simplest_fraction_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Minimal-denominator fraction in the open interval (lo, hi), lo < hi."""
    if not lo < hi:
        raise InvalidArgumentError(f"empty interval ({lo}, {hi})")
    fl = lo.numerator // lo.denominator
    if fl + 1 < hi:
        return Fraction(fl + 1)
    a, b = lo - fl, hi - fl  # 0 <= a < b <= 1
    if a == 0:
        # simplest in (0, b) is 1/k for the smallest valid k
        k = (1 / b).numerator // (1 / b).denominator + 1
        return fl + Fraction(1, k)
    return fl + 1 / simplest_fraction_between(1 / b, 1 / a)


def ratio_interval(alpha: float, beta: float, gamma: float) -> Tuple[Fraction, Fraction]:
    """Rational brackets of (1/beta, gamma/alpha), rounded inward at 1e-9 width."""
    lo = Fraction(math.ceil(ENDPOINT_DENOM / beta), ENDPOINT_DENOM)
    hi = Fraction(math.floor(gamma / alpha * ENDPOINT_DENOM), ENDPOINT_DENOM)
    if not lo < hi:
        raise RegimeError(f"interval (1/{beta}, {gamma}/{alpha}) too narrow to bracket")
    return lo, hi


def find_balanced_motif(
    alpha: float,
    beta: float,
    gamma: float,
    r: int,
    max_ell: int = 12,
    max_candidates: int = 5_000_000,
) -> BalancedMotif:
    """Search for the canonically smallest balanced motif with ratio in (1/beta, gamma/alpha).

    Requires the small-gamma regime gamma < 1/2, alpha < beta*gamma. Candidate
    sizes are (ell, m) = k * (denominator, numerator) of the Stern-Brocot
    target ratio; within a size, edge sets of K_ell^r are scanned in
    lexicographic rank order and the first balanced isolated-free set wins.
    """
    if not (gamma < 0.5 and alpha < beta * gamma):
        raise RegimeError(
            f"regime gamma < 1/2 and alpha < beta*gamma required; "
            f"got gamma={gamma}, alpha={alpha}, beta*gamma={beta * gamma}"
        )
    lo, hi = ratio_interval(alpha, beta, gamma)
    target = simplest_fraction_between(lo, hi)
    num, den = target.numerator, target.denominator
    examined = 0
    k = 0
    while True:
        k += 1
        ell, m = k * den, k * num
        if ell > max_ell:
            raise BudgetExceededError(
                f"no balanced motif with ratio {target} found within "
                f"ell <= {max_ell} ({examined} candidates examined)"
            )
        if ell < r or m > comb(ell, r):
            continue
        universe = list(all_edges(ell, r))
        full = frozenset(range(1, ell + 1))
        for edge_set in itertools.combinations(universe, m):
            examined += 1
            if examined > max_candidates:
                raise BudgetExceededError(
                    f"motif search budget of {max_candidates} candidates "
                    f"exhausted before reaching ratio {target}"
                )
            if induced_vertices(edge_set) != full:
                continue
            hg = Hypergraph(ell, r, frozenset(edge_set))
            ok, cert = is_balanced(hg)
            if ok:
                return BalancedMotif(
                    motif=hg,
                    ell=ell,
                    m=m,
                    ratio=target,
                    aut_count=automorphism_count(hg),
                    certificate=cert,
                )
