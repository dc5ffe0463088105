"""Squared norm of the low-degree likelihood ratio, plain and conditional.

The basis is the standardized edge-product family phi_S = prod_{e in S}
(Y_e - q)/sigma, orthonormal under the null. The unconditional norm has a
closed form as a sum over (vertex count, edge count) classes; the conditional
variant restricts the planted model to the event E that the planted part
contains no subgraph whose class index lies in the conditioning index set.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .errors import BudgetExceededError, InvalidArgumentError
from .hypergraph import (
    AdjacencyTensor,
    Edge,
    all_edges,
    count_isolated_free_edge_sets,
    count_subgraph_class,
    induced_vertices,
)
from .models import PlantedSample, ProblemParams, RationalParams, sample_planted
from .rng import child_rng

LDLR_DPS = 40
BRUTEFORCE_BUDGET = 10 ** 7
EVENT_ENUM_BUDGET = 10 ** 7


@dataclass(frozen=True)
class SigmaScaled:
    """A real of the form coeff / sigma^sigma_pow with rational coeff.

    sigma = sqrt(q(1-q)) is irrational, but even powers reduce to the rational
    q(1-q), so squares of these values are exactly rational.
    """

    coeff: Fraction
    sigma_pow: int

    def squared(self, rp: RationalParams) -> Fraction:
        return self.coeff ** 2 / rp.sigma_sq ** self.sigma_pow

    def to_float(self, rp: RationalParams) -> float:
        return float(self.coeff) / float(rp.sigma_sq) ** (self.sigma_pow / 2.0)


def phi_expectation_planted(S: Iterable[Edge], params: ProblemParams) -> float:
    """E_P[phi_S] = rho^{|V(S)|} ((p-q)/sigma)^{|S|}, evaluated in log space."""
    edges = list(S)
    if not edges:
        return 1.0
    ell = len(induced_vertices(edges))
    m = len(edges)
    w = (params.p - params.q) / params.sigma
    if w == 0.0:
        return 0.0
    return math.exp(ell * math.log(params.rho) + m * math.log(w))


def phi_expectation_planted_scaled(S: Iterable[Edge], rp: RationalParams) -> SigmaScaled:
    """Exact sigma-scaled E_P[phi_S]: coeff = rho^ell (p-q)^m over sigma^m."""
    edges = list(S)
    ell = len(induced_vertices(edges))
    m = len(edges)
    return SigmaScaled(rp.rho ** ell * (rp.p - rp.q) ** m, m)


@dataclass(frozen=True)
class LdlrClassTerm:
    ell: int
    m: int
    class_count: int
    term: float

    @property
    def class_count_log10(self) -> float:
        return math.log10(self.class_count) if self.class_count > 0 else -math.inf

    @property
    def term_log10(self) -> float:
        return math.log10(self.term) if self.term > 0 else -math.inf


@dataclass(frozen=True)
class LdlrResult:
    value: float
    value_minus_one: float
    per_class: Tuple[LdlrClassTerm, ...]
    method: str  # "exact-formula" | "brute-force" | "conditional-exact"
    exact_value: Optional[Fraction] = None
    p_event: Optional[Fraction] = None
    good_sum: Optional[Fraction] = None
    bad_sum: Optional[Fraction] = None

    def to_json_dict(self) -> dict:
        d = {
            "value": self.value,
            "valueMinusOne": self.value_minus_one,
            "method": self.method,
            "perClass": [
                {"ell": t.ell, "m": t.m, "classCount": t.class_count, "term": t.term}
                for t in self.per_class
            ],
        }
        if self.p_event is not None:
            d["pEvent"] = float(self.p_event)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["ell", "m", "classCountLog10", "termLog10"])
        for t in self.per_class:
            writer.writerow(
                [t.ell, t.m, repr(t.class_count_log10), repr(t.term_log10)]
            )
        return buf.getvalue()


def ldlr_norm_exact(params: ProblemParams, D: int) -> LdlrResult:
    """||L_{<=D}||^2 = 1 + sum_{ell,m} |S_{ell,m}| rho^{2ell} ((p-q)^2/sigma^2)^m.

    Class counts are exact big integers; terms are accumulated at 40 decimal
    digits so classes spanning hundreds of orders of magnitude sum stably.
    Cost is polynomial in D and independent of M.
    """
    if D < 0:
        raise InvalidArgumentError("D >= 0 required")
    n, r = params.n, params.r
    terms: List[LdlrClassTerm] = []
    with mpmath.workdps(LDLR_DPS):
        rho = mpmath.mpf(params.rho)
        w2 = (mpmath.mpf(params.p) - mpmath.mpf(params.q)) ** 2 / (
            mpmath.mpf(params.q) * (1 - mpmath.mpf(params.q))
        )
        total = mpmath.mpf(0)
        for ell in range(r, min(r * D, n) + 1):
            for m in range(max(1, -(-ell // r)), D + 1):
                cnt = count_subgraph_class(n, ell, m, r)
                if cnt == 0:
                    continue
                term = mpmath.mpf(cnt) * rho ** (2 * ell) * w2 ** m
                total += term
                terms.append(LdlrClassTerm(ell, m, cnt, float(term)))
        return LdlrResult(
            value=float(1 + total),
            value_minus_one=float(total),
            per_class=tuple(terms),
            method="exact-formula",
        )


def _subset_budget(M: int, D: int) -> int:
    return sum(comb(M, d) for d in range(D + 1))


def ldlr_norm_bruteforce(
    params: ProblemParams, D: int, exact: bool = False
) -> LdlrResult:
    """Direct sum of E_P[phi_S]^2 over every edge subset with |S| <= D.

    With exact=True the sum is carried in rational arithmetic on the exact
    binary values of (p, q, rho) and returned in exact_value.
    """
    if D < 0:
        raise InvalidArgumentError("D >= 0 required")
    M = params.M
    if _subset_budget(M, D) > BRUTEFORCE_BUDGET:
        raise BudgetExceededError(
            f"sum of C({M}, d) for d <= {D} exceeds the {BRUTEFORCE_BUDGET} budget"
        )
    universe = list(all_edges(params.n, params.r))
    rp = params.exact()
    by_class: Dict[Tuple[int, int], Tuple[int, Fraction]] = {}
    total_sq = Fraction(0)
    for m in range(1, D + 1):
        for S in itertools.combinations(universe, m):
            ell = len(induced_vertices(S))
            sq = phi_expectation_planted_scaled(S, rp).squared(rp)
            cnt, acc = by_class.get((ell, m), (0, Fraction(0)))
            by_class[(ell, m)] = (cnt + 1, acc + sq)
            total_sq += sq
    terms = tuple(
        LdlrClassTerm(ell, m, cnt, float(acc))
        for (ell, m), (cnt, acc) in sorted(by_class.items())
    )
    return LdlrResult(
        value=float(1 + total_sq),
        value_minus_one=float(total_sq),
        per_class=terms,
        method="brute-force",
        exact_value=(1 + total_sq) if exact else None,
    )


# --- conditioning on the sparse-planted-part event E -------------------------


@dataclass(frozen=True)
class ConditioningSpec:
    """delta, degree cap D, the table ell -> m_ell, and the index set I.

    m_ell = ceil(ell * (gamma/alpha + delta)), computed in exact rational
    arithmetic on the decimal forms of gamma, alpha, delta; I keeps only the
    (ell, m) with m_ell <= m <= D and a nonempty subgraph class.
    """

    delta: float
    D: int
    r: int
    rate: Fraction
    m_table: Dict[int, int]
    index_set: FrozenSet[Tuple[int, int]]

    def l_max(self, m: int) -> int:
        """Largest ell with m_ell <= m, or 0 if none (within the table range)."""
        best = 0
        for ell, m_ell in self.m_table.items():
            if m_ell <= m:
                best = max(best, ell)
        return best


def build_conditioning_spec(
    params: ProblemParams, delta: float, D: int
) -> ConditioningSpec:
    if delta <= 0:
        raise InvalidArgumentError("delta > 0 required")
    if D < 0:
        raise InvalidArgumentError("D >= 0 required")
    if params.alpha is None or params.gamma is None:
        raise InvalidArgumentError("conditioning requires exponent-form params")
    rate = Fraction(str(params.gamma)) / Fraction(str(params.alpha)) + Fraction(
        str(delta)
    )
    r = params.r
    m_table = {ell: math.ceil(ell * rate) for ell in range(r, r * D + 1)}
    index = frozenset(
        (ell, m)
        for ell, m_ell in m_table.items()
        for m in range(m_ell, D + 1)
        if count_isolated_free_edge_sets(ell, m, r) > 0
    )
    return ConditioningSpec(
        delta=float(delta), D=D, r=r, rate=rate, m_table=m_table, index_set=index
    )


def _edges_within(Z: FrozenSet[int], params: ProblemParams) -> List[Edge]:
    zs = sorted(Z)
    if len(zs) < params.r:
        return []
    return list(itertools.combinations(zs, params.r))


def _dense_subset_exists(
    present: Sequence[Edge], spec: ConditioningSpec
) -> bool:
    """Whether some S of the present edges, |S| <= D, has |S| >= m_{|V(S)|}.

    Equivalent vertex form: some ell-subset of V(C) induces at least m_ell
    edges, for an ell with m_ell <= D feasible on ell vertices (taking m_ell
    of those edges gives a witness S, since m_ell is nondecreasing in ell).
    Enumerating vertex subsets keeps the cost bounded by the planted part's
    vertex count rather than its edge count.
    """
    if not spec.index_set or not present:
        return False
    verts = sorted(induced_vertices(present))
    edge_sets = [frozenset(e) for e in present]
    work = 0
    for ell in range(spec.r, min(spec.r * spec.D, len(verts)) + 1):
        m_req = spec.m_table[ell]
        if m_req > spec.D or comb(ell, spec.r) < m_req or m_req > len(present):
            continue
        work += comb(len(verts), ell)
        if work > EVENT_ENUM_BUDGET:
            raise BudgetExceededError(
                f"event check over C({len(verts)}, {ell}) vertex subsets "
                f"exceeds budget"
            )
        for sub in itertools.combinations(verts, ell):
            vs = set(sub)
            if sum(1 for e in edge_sets if e <= vs) >= m_req:
                return True
    return False


def event_holds(
    Z: FrozenSet[int],
    Y: AdjacencyTensor,
    params: ProblemParams,
    spec: ConditioningSpec,
) -> bool:
    """E of the conditional construction: the planted part C = H[Z] contains no
    edge subset whose (vertex count, edge count) lies in the index set."""
    edge_set = set(Y.present_edges())
    present = [e for e in _edges_within(Z, params) if e in edge_set]
    return not _dense_subset_exists(present, spec)


@dataclass(frozen=True)
class EventProbability:
    value: float
    std_error: float
    trials: int


def estimate_event_probability(
    params: ProblemParams, spec: ConditioningSpec, trials: int, seed: int
) -> EventProbability:
    if trials < 1:
        raise InvalidArgumentError("trials >= 1 required")
    hits = 0
    for t in range(trials):
        sample = sample_planted(params, seed, key=(t,))
        if event_holds(sample.Z, sample.Y, params, spec):
            hits += 1
    freq = hits / trials
    se = math.sqrt(freq * (1.0 - freq) / trials)
    return EventProbability(value=freq, std_error=se, trials=trials)


CONDITIONAL_TINY_BUDGET_N = {2: 4, 3: 4}


def _enumerate_conditional_numerators(
    params: ProblemParams, spec: ConditioningSpec
) -> Tuple[Fraction, Dict[Tuple[Edge, ...], Fraction]]:
    """P(E) and the map S -> E_P[phi_S 1_E] * sigma^{|S|}, all exact.

    The numerator vanishes unless V(S) lies inside Z, so for each Z only the
    configurations of the edges within Z need enumerating.
    """
    n, r, D = params.n, params.r, spec.D
    limit = CONDITIONAL_TINY_BUDGET_N.get(r)
    if limit is None or n > limit:
        raise BudgetExceededError(
            f"conditional enumeration supports n <= {limit} at r = {r}"
        )
    rp = params.exact()
    p_event = Fraction(0)
    coeff: Dict[Tuple[Edge, ...], Fraction] = {}
    for z_mask in range(2 ** n):
        Z = frozenset(i + 1 for i in range(n) if z_mask >> i & 1)
        prob_z = rp.rho ** len(Z) * (1 - rp.rho) ** (n - len(Z))
        c_edges = _edges_within(Z, params)
        for bits in itertools.product((0, 1), repeat=len(c_edges)):
            present = [e for e, b in zip(c_edges, bits) if b]
            if _dense_subset_exists(present, spec):
                continue
            weight = prob_z
            for b in bits:
                weight *= rp.p if b else (1 - rp.p)
            p_event += weight
            signed = {e: (Fraction(b) - rp.q) for e, b in zip(c_edges, bits)}
            for m in range(1, D + 1):
                for S in itertools.combinations(c_edges, m):
                    contrib = weight
                    for e in S:
                        contrib *= signed[e]
                    coeff[S] = coeff.get(S, Fraction(0)) + contrib
    return p_event, coeff


def conditional_ldlr_exact_tiny(
    params: ProblemParams, spec: ConditioningSpec
) -> LdlrResult:
    """Exact ||L'_{<=D}||^2 by full enumeration, tiny instances only.

    E_{P'}[phi_S] = E_P[phi_S 1_E] / P(E). All arithmetic is rational (sigma
    powers kept symbolic), so the I = empty case reproduces the unconditional
    brute-force value exactly. Also reports the split into good terms (class
    outside the index set) and bad terms (class inside it).
    """
    rp = params.exact()
    p_event, coeff = _enumerate_conditional_numerators(params, spec)
    if p_event == 0:
        raise InvalidArgumentError("conditioning event has probability zero")
    good = Fraction(1)  # the empty S contributes 1 and is always good
    bad = Fraction(0)
    by_class: Dict[Tuple[int, int], Tuple[int, Fraction]] = {}
    for S, c in coeff.items():
        m = len(S)
        ell = len(induced_vertices(S))
        sq = c ** 2 / (p_event ** 2 * rp.sigma_sq ** m)
        if (ell, m) in spec.index_set:
            bad += sq
        else:
            good += sq
        cnt, acc = by_class.get((ell, m), (0, Fraction(0)))
        by_class[(ell, m)] = (cnt + 1, acc + sq)
    total = good + bad
    terms = tuple(
        LdlrClassTerm(ell, m, cnt, float(acc))
        for (ell, m), (cnt, acc) in sorted(by_class.items())
    )
    return LdlrResult(
        value=float(total),
        value_minus_one=float(total - 1),
        per_class=terms,
        method="conditional-exact",
        exact_value=total,
        p_event=p_event,
        good_sum=good,
        bad_sum=bad,
    )


def conditional_term_bound(
    params: ProblemParams, spec: ConditioningSpec, ell: int, m: int
) -> float:
    """Closed-form bound on |E_P[phi_S 1_E]| for one S with the given class.

    Good classes use rho^ell (2p/sigma)^m; bad classes additionally exploit
    that E forces at least m - m_ell + 1 of S's edges to be absent.
    """
    rho, p, q, sigma = params.rho, params.p, params.q, params.sigma
    if (ell, m) not in spec.index_set:
        return rho ** ell * (2.0 * p / sigma) ** m
    m_ell = spec.m_table[ell]
    return (
        rho ** ell
        * comb(m, m_ell - 1)
        * q ** (m - m_ell + 1)
        * (2.0 * p) ** (m_ell - 1)
        / sigma ** m
    )


def conditional_numerators_exact_tiny(
    params: ProblemParams, spec: ConditioningSpec
) -> Dict[Tuple[Edge, ...], SigmaScaled]:
    """Exact E_P[phi_S 1_E] per subset S, for bound checks at tiny scale."""
    _, coeff = _enumerate_conditional_numerators(params, spec)
    return {S: SigmaScaled(c, len(S)) for S, c in coeff.items()}
