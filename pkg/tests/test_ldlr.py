import itertools
import math
from fractions import Fraction

import pytest

from denselab.errors import BudgetExceededError, InvalidArgumentError
from denselab.hypergraph import Hypergraph, all_edges, induced_vertices
from denselab.ldlr import (
    build_conditioning_spec,
    conditional_ldlr_exact_tiny,
    conditional_numerators_exact_tiny,
    conditional_term_bound,
    estimate_event_probability,
    event_holds,
    ldlr_norm_bruteforce,
    ldlr_norm_exact,
    phi_expectation_planted,
    phi_expectation_planted_scaled,
)
from denselab.models import derive_params, enumerate_planted_exact


def tiny_params():
    return derive_params(4, 2, 0.25, 0.5, 0.5)


def test_phi_expectation_empty_set():
    assert phi_expectation_planted([], tiny_params()) == 1.0


def test_phi_expectation_examples():
    pp = tiny_params()
    assert phi_expectation_planted([(1, 2)], pp) == pytest.approx(0.10355, abs=1e-4)
    assert phi_expectation_planted([(1, 2), (2, 3)], pp) == pytest.approx(
        0.021446, abs=1e-5
    )


def test_phi_expectation_matches_exhaustive_enumeration():
    """Closed form vs full outcome enumeration, exact rational arithmetic."""
    pp = tiny_params()
    rp = pp.exact()
    dist = enumerate_planted_exact(rp)
    universe = list(all_edges(4, 2))
    idx = {e: i for i, e in enumerate(universe)}
    for m in range(1, 4):
        for S in itertools.combinations(universe, m):
            want = sum(
                (
                    pr * math.prod(Fraction(bits[idx[e]]) - rp.q for e in S)
                    for _, bits, pr in dist.outcomes
                ),
                Fraction(0),
            )
            assert phi_expectation_planted_scaled(S, rp).coeff == want


def test_ldlr_exact_degree_zero():
    assert ldlr_norm_exact(tiny_params(), 0).value == 1.0


def test_ldlr_exact_example_d1():
    res = ldlr_norm_exact(tiny_params(), 1)
    assert res.value == pytest.approx(1.06433, abs=1e-4)
    assert res.value == pytest.approx(1 + res.value_minus_one)
    assert [(t.ell, t.m) for t in res.per_class] == [(2, 1)]


def test_ldlr_value_nondecreasing_in_degree():
    pp = derive_params(6, 2, 0.3, 0.6, 0.5)
    vals = [ldlr_norm_exact(pp, D).value for D in range(5)]
    assert vals == sorted(vals)


def test_bruteforce_matches_exact():
    for r, n in ((2, 5), (3, 4)):
        pp = derive_params(n, r, 0.3, 0.6 if r == 2 else 1.2, 0.5)
        for D in (1, 2, 3):
            a = ldlr_norm_exact(pp, D).value
            b = ldlr_norm_bruteforce(pp, D).value
            assert abs(a - b) <= 1e-9 * abs(a)


def test_bruteforce_budget():
    pp = derive_params(40, 2, 0.3, 0.6, 0.5)
    with pytest.raises(BudgetExceededError):
        ldlr_norm_bruteforce(pp, 5)


def test_ldlr_large_n_fast():
    res = ldlr_norm_exact(derive_params(10 ** 9, 2, 0.48, 0.5, 0.6), 10)
    assert res.value > 1.0
    assert all(t.term >= 0 for t in res.per_class)


def test_ldlr_csv_schema():
    res = ldlr_norm_exact(tiny_params(), 2)
    lines = res.to_csv().splitlines()
    assert lines[0] == "ell,m,classCountLog10,termLog10"
    assert len(lines) == 1 + len(res.per_class)


def test_basis_orthonormality_against_enumerated_null():
    """E_Q[phi_S phi_S'] = 1{S = S'} over the fully enumerated null measure.

    Computed in rationals with sigma powers kept symbolic: the raw inner
    product must equal sigma^{|S|+|S'|} when S = S' (so the normalized value
    is exactly 1) and 0 otherwise.
    """
    rp = tiny_params().exact()
    universe = list(all_edges(4, 2))
    idx = {e: i for i, e in enumerate(universe)}
    subsets = [()] + [
        S for m in (1, 2) for S in itertools.combinations(universe, m)
    ]
    M = len(universe)
    configs = []
    for bits in itertools.product((0, 1), repeat=M):
        pr = math.prod(rp.q if b else 1 - rp.q for b in bits)
        configs.append((bits, pr))
    for S1, S2 in itertools.product(subsets, subsets):
        total = Fraction(0)
        for bits, pr in configs:
            val = math.prod(Fraction(bits[idx[e]]) - rp.q for e in S1)
            val *= math.prod(Fraction(bits[idx[e]]) - rp.q for e in S2)
            total += pr * val
        if set(S1) == set(S2):
            # normalized: total / sigma^{|S1| + |S2|} == 1 exactly
            assert total == rp.sigma_sq ** len(S1)
        else:
            assert total == 0


def test_conditioning_spec_m_table():
    pp = derive_params(100, 2, 0.4, 0.8, 0.6)
    spec = build_conditioning_spec(pp, 0.1, 10)
    assert spec.m_table[2] == 4
    assert spec.m_table[5] == 8
    # two vertices carry at most one edge, so (2, m) never enters I
    assert all(ell != 2 for ell, _ in spec.index_set)


def test_conditioning_spec_empty_index():
    pp = derive_params(100, 2, 0.4, 0.8, 0.6)
    spec = build_conditioning_spec(pp, 0.1, 3)
    assert spec.index_set == frozenset()


def test_m_table_strictly_increasing_when_rate_above_one():
    pp = derive_params(100, 2, 0.4, 0.8, 0.6)
    spec = build_conditioning_spec(pp, 0.1, 10)
    ms = [spec.m_table[ell] for ell in sorted(spec.m_table)]
    assert all(a < b for a, b in zip(ms, ms[1:]))


def test_event_trivial_cases():
    pp = derive_params(6, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 3)
    empty = Hypergraph(6, 2).to_tensor()
    assert event_holds(frozenset(), empty, pp, spec)
    spec_empty = build_conditioning_spec(pp, 0.1, 2)
    full = Hypergraph.complete(6, 2).to_tensor()
    assert event_holds(frozenset(range(1, 7)), full, pp, spec_empty)


def test_event_triangle_counterexample():
    # m_3 = 3 here, so a triangle inside C violates E
    pp = derive_params(6, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 3)
    assert (3, 3) in spec.index_set
    tri = Hypergraph(6, 2, frozenset({(1, 2), (1, 3), (2, 3)})).to_tensor()
    assert not event_holds(frozenset({1, 2, 3}), tri, pp, spec)
    # the same triangle outside Z is irrelevant
    assert event_holds(frozenset({4, 5, 6}), tri, pp, spec)


def test_event_matches_direct_subset_enumeration():
    """Vertex-subset implementation vs a literal edge-subset scan."""
    pp = derive_params(5, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 3)
    universe = list(all_edges(5, 2))
    Z = frozenset({1, 2, 3, 4})
    inside = [e for e in universe if set(e) <= Z]
    for mask in range(2 ** len(inside)):
        edges = frozenset(e for i, e in enumerate(inside) if mask >> i & 1)
        Y = Hypergraph(5, 2, edges).to_tensor()
        naive_bad = any(
            (len(induced_vertices(S)), m) in spec.index_set
            for m in range(1, spec.D + 1)
            for S in itertools.combinations(sorted(edges), m)
        )
        assert event_holds(Z, Y, pp, spec) == (not naive_bad)


def test_event_probability_i_empty_is_one():
    pp = derive_params(6, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 2)
    est = estimate_event_probability(pp, spec, 50, 3)
    assert est.value == 1.0


def test_conditional_equals_bruteforce_when_unconditioned():
    pp = derive_params(4, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 2)
    assert spec.index_set == frozenset()
    cond = conditional_ldlr_exact_tiny(pp, spec)
    brute = ldlr_norm_bruteforce(pp, 2, exact=True)
    assert cond.exact_value == brute.exact_value
    assert cond.p_event == 1


def test_conditional_p_event_matches_monte_carlo():
    pp = derive_params(4, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 3)
    cond = conditional_ldlr_exact_tiny(pp, spec)
    est = estimate_event_probability(pp, spec, 3000, 7)
    assert abs(float(cond.p_event) - est.value) <= 4 * max(est.std_error, 1e-9)


def test_conditional_good_bad_term_bounds():
    pp = derive_params(4, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 3)
    rp = pp.exact()
    nums = conditional_numerators_exact_tiny(pp, spec)
    assert nums, "expected nonempty numerator table"
    for S, val in nums.items():
        ell, m = len(induced_vertices(S)), len(S)
        bound = conditional_term_bound(pp, spec, ell, m)
        assert abs(val.to_float(rp)) <= bound * (1 + 1e-12)


def test_conditional_budget():
    pp = derive_params(6, 2, 0.45, 0.6, 0.3)
    spec = build_conditioning_spec(pp, 0.1, 3)
    with pytest.raises(BudgetExceededError):
        conditional_ldlr_exact_tiny(pp, spec)


def test_conditioning_requires_positive_delta():
    pp = derive_params(4, 2, 0.45, 0.6, 0.3)
    with pytest.raises(InvalidArgumentError):
        build_conditioning_spec(pp, 0.0, 3)
