"""Parameter derivation and samplers for the null, planted, and auxiliary models.

All samplers are pure functions of (params, seed); parallel callers must use
disjoint child streams (see rng.child_rng). Densities are evaluated as
exp(exponent * ln n) with the exponent formed in one expression, never via
floating subtraction chains.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceededError, InfeasibleError, InvalidArgumentError
from .hypergraph import AdjacencyTensor, Hypergraph, all_edges, rank_edge
from .rng import child_rng


@dataclass(frozen=True)
class ProblemParams:
    """The tuple (n, r, alpha, beta, gamma) with derived (p, q, rho, sigma, M).

    Exponents may be None when the instance was built via `explicit`, the
    internal hook that fixes (p, q, rho) directly (used by oracles and by
    degenerate-regime tests such as p = q).
    """

    n: int
    r: int
    alpha: Optional[float]
    beta: Optional[float]
    gamma: Optional[float]
    p: float = field(init=False)
    q: float = field(init=False)
    rho: float = field(init=False)
    sigma: float = field(init=False)
    M: int = field(init=False)
    enforce_alpha_lt_beta: bool = True

    def __post_init__(self) -> None:
        if self.r < 2:
            raise InvalidArgumentError("r >= 2 violated")
        if self.n < self.r:
            raise InvalidArgumentError("n >= r violated")
        if getattr(self, "_explicit", None):
            return
        a, b, g = self.alpha, self.beta, self.gamma
        if a is None or b is None or g is None:
            raise InvalidArgumentError("alpha, beta, gamma must all be given")
        if not a > 0:
            raise InvalidArgumentError("alpha > 0 violated")
        if self.enforce_alpha_lt_beta and not a < b:
            raise InvalidArgumentError("alpha < beta violated")
        if not 0 < b < self.r - 1:
            raise InvalidArgumentError("0 < beta < r - 1 violated")
        if not 0 < g < 1:
            raise InvalidArgumentError("0 < gamma < 1 violated")
        ln_n = math.log(self.n)
        object.__setattr__(self, "p", math.exp(-a * ln_n))
        object.__setattr__(self, "q", math.exp(-b * ln_n))
        object.__setattr__(self, "rho", math.exp((g - 1.0) * ln_n))
        self._finish()

    def _finish(self) -> None:
        if not 0 < self.q < 1 or not 0 < self.p < 1:
            raise InvalidArgumentError("0 < q, p < 1 violated")
        if self.enforce_alpha_lt_beta and not self.q < self.p:
            raise InvalidArgumentError("q < p violated")
        if not 0 < self.rho < 1:
            raise InvalidArgumentError("0 < rho < 1 violated")
        object.__setattr__(self, "sigma", math.sqrt(self.q * (1.0 - self.q)))
        object.__setattr__(self, "M", comb(self.n, self.r))

    @classmethod
    def explicit(
        cls, n: int, r: int, p: float, q: float, rho: float
    ) -> "ProblemParams":
        """Internal hook: build params from explicit densities (q <= p allowed)."""
        obj = cls.__new__(cls)
        object.__setattr__(obj, "_explicit", True)
        object.__setattr__(obj, "n", int(n))
        object.__setattr__(obj, "r", int(r))
        object.__setattr__(obj, "alpha", None)
        object.__setattr__(obj, "beta", None)
        object.__setattr__(obj, "gamma", None)
        object.__setattr__(obj, "enforce_alpha_lt_beta", False)
        object.__setattr__(obj, "p", float(p))
        object.__setattr__(obj, "q", float(q))
        object.__setattr__(obj, "rho", float(rho))
        if obj.r < 2 or obj.n < obj.r:
            raise InvalidArgumentError("n >= r >= 2 violated")
        if not obj.q <= obj.p:
            raise InvalidArgumentError("q <= p violated")
        obj._finish()
        return obj

    def exact(self) -> "RationalParams":
        """Rational view of the stored (binary) float densities."""
        return RationalParams(
            self.n, self.r, Fraction(self.p), Fraction(self.q), Fraction(self.rho)
        )


def derive_params(
    n: int,
    r: int,
    alpha: float,
    beta: float,
    gamma: float,
    enforce_alpha_lt_beta: bool = True,
) -> ProblemParams:
    return ProblemParams(
        n, r, alpha, beta, gamma, enforce_alpha_lt_beta=enforce_alpha_lt_beta
    )


@dataclass(frozen=True)
class RationalParams:
    """Exact rational densities for the tiny-scale enumerators."""

    n: int
    r: int
    p: Fraction
    q: Fraction
    rho: Fraction

    @property
    def sigma_sq(self) -> Fraction:
        return self.q * (1 - self.q)


@dataclass(frozen=True)
class PlantedSample:
    Z: FrozenSet[int]
    Y: AdjacencyTensor


@dataclass(frozen=True)
class AuxPlantedParams:
    """Spike parameters of the auxiliary rank-one planted model (r = 2)."""

    lambda_spike: float
    a: float
    b: float
    u: np.ndarray  # length-n vector of standardized memberships


def sample_null(
    params: ProblemParams, seed: int, key: Sequence[int] = ()
) -> Hypergraph:
    """One draw of the null model: each edge present independently w.p. q."""
    bits = sample_null_tensor(params, seed, key).bits
    return AdjacencyTensor(params.n, params.r, bits).to_hypergraph()


def sample_null_tensor(
    params: ProblemParams, seed: int, key: Sequence[int] = ()
) -> AdjacencyTensor:
    rng = child_rng(seed, *key)
    bits = rng.random(params.M) < params.q
    return AdjacencyTensor(params.n, params.r, bits)


def _ranks_within(Z: Sequence[int], n: int, r: int) -> List[int]:
    zs = sorted(Z)
    if len(zs) < r:
        return []
    return [rank_edge(e, n, r) for e in itertools.combinations(zs, r)]


def sample_planted(
    params: ProblemParams, seed: int, key: Sequence[int] = ()
) -> PlantedSample:
    """One draw of the planted model.

    Z has i.i.d. Ber(rho) memberships; given Z, edges inside Z are Ber(p) and
    all others Ber(q), coupled through a single uniform per edge.
    """
    rng = child_rng(seed, *key)
    z = rng.random(params.n) < params.rho
    Z = frozenset(int(i) + 1 for i in np.flatnonzero(z))
    u = rng.random(params.M)
    bits = u < params.q
    for idx in _ranks_within(Z, params.n, params.r):
        bits[idx] = u[idx] < params.p
    return PlantedSample(Z, AdjacencyTensor(params.n, params.r, bits))


def exact_spike(params: ProblemParams) -> float:
    """The unique spike scalar making the planted-planted edge probability p."""
    return params.rho * (params.p - params.q) / (params.sigma * (1.0 - params.rho))


def aux_edge_probabilities(params: ProblemParams, spike: float) -> Tuple[float, float, float]:
    """Edge probabilities (both planted, mixed, both unplanted) under the spike."""
    rho, q, sigma = params.rho, params.q, params.sigma
    uu_in = (1.0 - rho) / rho
    uu_out = rho / (1.0 - rho)
    return (
        q + sigma * spike * uu_in,
        q - sigma * spike,
        q + sigma * spike * uu_out,
    )


def validate_aux_feasible(params: ProblemParams, spike: float) -> None:
    if params.r != 2:
        raise InvalidArgumentError("auxiliary model is defined for r = 2 only")
    names = ("planted-planted", "mixed", "unplanted-unplanted")
    for name, prob in zip(names, aux_edge_probabilities(params, spike)):
        if not 0.0 <= prob <= 1.0:
            raise InfeasibleError(
                f"{name} edge probability {prob} outside [0, 1] for spike {spike}"
            )


def sample_aux(
    params: ProblemParams,
    seed: int,
    spike: Optional[float] = None,
    key: Sequence[int] = (),
) -> Tuple[AuxPlantedParams, AdjacencyTensor]:
    """One draw of the auxiliary distribution (r = 2).

    Edge (i, j) is present with probability q + sigma*lambda*u_i*u_j, where u
    is built from the same Ber(rho) memberships as the planted model.
    """
    lam = exact_spike(params) if spike is None else float(spike)
    validate_aux_feasible(params, lam)
    n, rho, q, sigma = params.n, params.rho, params.q, params.sigma
    rng = child_rng(seed, *key)
    z = rng.random(n) < rho
    a = math.sqrt((1.0 - rho) / rho)
    b = -math.sqrt(rho / (1.0 - rho))
    u = np.where(z, a, b)
    i_idx, j_idx = np.triu_indices(n, k=1)
    probs = q + sigma * lam * u[i_idx] * u[j_idx]
    bits = rng.random(params.M) < probs
    aux = AuxPlantedParams(lambda_spike=lam, a=a, b=b, u=u)
    return aux, AdjacencyTensor(n, 2, bits)


@dataclass(frozen=True)
class AuxBoundTerm:
    degree: int
    value: float
    std_error: float


@dataclass(frozen=True)
class AuxBoundResult:
    value: float
    terms: Tuple[AuxBoundTerm, ...]


def aux_ldlr_upper_bound(
    params: ProblemParams,
    D: int,
    trials: int,
    seed: int,
    spike: Optional[float] = None,
) -> AuxBoundResult:
    """Monte Carlo evaluation of sum_{d<=D} lambda^{2d}/d! * E<u,v>^{2d}.

    u and v are independent copies of the membership vector. The inner product
    only depends on the multinomial counts of the four joint membership
    states, which keeps the estimator exact and cheap.
    """
    if params.r != 2:
        raise InvalidArgumentError("auxiliary bound is defined for r = 2 only")
    if trials < 1:
        raise InvalidArgumentError("trials >= 1 required")
    if D < 0:
        raise InvalidArgumentError("D >= 0 required")
    lam = exact_spike(params) if spike is None else float(spike)
    rho = params.rho
    a = math.sqrt((1.0 - rho) / rho)
    b = -math.sqrt(rho / (1.0 - rho))
    rng = child_rng(seed)
    pvec = [rho * rho, rho * (1 - rho), (1 - rho) * rho, (1 - rho) * (1 - rho)]
    counts = rng.multinomial(params.n, pvec, size=trials)
    weights = np.array([a * a, a * b, a * b, b * b])
    dots = counts @ weights
    terms = [AuxBoundTerm(0, 1.0, 0.0)]
    total = 1.0
    for d in range(1, D + 1):
        if lam == 0.0:
            terms.append(AuxBoundTerm(d, 0.0, 0.0))
            continue
        moments = dots ** (2 * d)
        scale = lam ** (2 * d) / math.factorial(d)
        mean = float(moments.mean()) * scale
        se = float(moments.std(ddof=1)) / math.sqrt(trials) * scale if trials > 1 else 0.0
        terms.append(AuxBoundTerm(d, mean, se))
        total += mean
    return AuxBoundResult(value=total, terms=tuple(terms))


@dataclass(frozen=True)
class ExactDistribution:
    """Complete outcome list (Z, Y bits, probability) of the planted model."""

    n: int
    r: int
    outcomes: Tuple[Tuple[FrozenSet[int], Tuple[int, ...], Fraction], ...]

    def total_mass(self) -> Fraction:
        return sum((pr for _, _, pr in self.outcomes), Fraction(0))

    def edge_marginal(self, edge_index: int) -> Fraction:
        return sum(
            (pr for _, bits, pr in self.outcomes if bits[edge_index]), Fraction(0)
        )


ENUMERATION_BUDGET_BITS = 26


def enumerate_planted_exact(rp: RationalParams) -> ExactDistribution:
    """Exact outcome enumeration of the planted model with rational densities."""
    n, r = rp.n, rp.r
    M = comb(n, r)
    if n + M > ENUMERATION_BUDGET_BITS:
        raise BudgetExceededError(
            f"2^{n} * 2^{M} outcomes exceed the 2^{ENUMERATION_BUDGET_BITS} budget"
        )
    edges = list(all_edges(n, r))
    outcomes = []
    for z_mask in range(2 ** n):
        Z = frozenset(i + 1 for i in range(n) if z_mask >> i & 1)
        prob_z = rp.rho ** len(Z) * (1 - rp.rho) ** (n - len(Z))
        edge_probs = [
            rp.p if set(e) <= Z else rp.q for e in edges
        ]
        for bits in itertools.product((0, 1), repeat=M):
            pr = prob_z
            for b, pe in zip(bits, edge_probs):
                pr *= pe if b else (1 - pe)
            outcomes.append((Z, bits, pr))
    return ExactDistribution(n, r, tuple(outcomes))
