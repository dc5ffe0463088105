"""Detection statistics, moment formulas, threshold tests, and separation runs.

Two statistics are implemented: the signed hyperedge count (sum of
standardized edge indicators) and the unsigned balanced-motif count. Both come
with analytic moments under the null and bounds under the planted model, a
midpoint threshold test, and a Monte Carlo separation estimator.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .balanced import BalancedMotif
from .errors import InvalidArgumentError
from .hypergraph import AdjacencyTensor, Edge, Hypergraph
from .models import ProblemParams, sample_null_tensor, sample_planted

StatisticSpec = Union[str, BalancedMotif]  # "edge" or a motif

REGIME_TOLERANCE = 1e-12
BATCH_COUNT = 20


def standardized_edge_values(params: ProblemParams) -> Tuple[float, float]:
    """The two values (present, absent) taken by (Y_e - q)/sigma."""
    return (1.0 - params.q) / params.sigma, -params.q / params.sigma


def signed_edge_count(Y: AdjacencyTensor, params: ProblemParams) -> float:
    """T-tilde = sum_e (Y_e - q)/sigma, computed as (#present - Mq)/sigma."""
    if Y.n != params.n or Y.r != params.r:
        raise InvalidArgumentError(
            f"tensor shape (n={Y.n}, r={Y.r}) does not match params "
            f"(n={params.n}, r={params.r})"
        )
    return (Y.present_count - params.M * params.q) / params.sigma


@dataclass(frozen=True)
class EdgeStatMoments:
    eq: float
    var_q: float
    ep: float
    var_p_bound: float
    # which fields are exact values vs upper bounds
    bounds: Tuple[str, ...] = ("var_p_bound",)


def exact_moments_edge_stat(params: ProblemParams) -> EdgeStatMoments:
    n, r = params.n, params.r
    p, q, rho, sigma, M = params.p, params.q, params.rho, params.sigma, params.M
    ep = M * rho ** r * (p - q) / sigma
    var_p = (
        M
        + 2.0 * M * rho ** r * p / sigma ** 2
        + 2.0 * M * r * float(n) ** (r - 1) * rho ** (2 * r - 1) * p ** 2 / sigma ** 2
    )
    return EdgeStatMoments(eq=0.0, var_q=float(M), ep=ep, var_p_bound=var_p)


# --- motif counting ----------------------------------------------------------


def _connected_edge_order(edges: Sequence[Edge]) -> List[Edge]:
    """Reorder edges so each one shares a vertex with an earlier one when possible."""
    remaining = list(edges)
    ordered: List[Edge] = []
    seen: set = set()
    while remaining:
        pick = None
        for e in remaining:
            if not ordered or seen & set(e):
                pick = e
                break
        if pick is None:
            pick = remaining[0]  # disconnected component: start fresh
        ordered.append(pick)
        seen.update(pick)
        remaining.remove(pick)
    return ordered


def _count_embeddings(hg: Hypergraph, motif: Hypergraph) -> int:
    """Injective vertex maps sending every motif edge to an edge of hg."""
    motif_edges = _connected_edge_order(motif.sorted_edges())
    host_edges = hg.sorted_edges()
    by_vertex: Dict[int, List[Edge]] = {}
    for e in host_edges:
        for v in e:
            by_vertex.setdefault(v, []).append(e)

    count = 0

    def extend(idx: int, vmap: Dict[int, int], used: set) -> None:
        nonlocal count
        if idx == len(motif_edges):
            count += 1
            return
        me = motif_edges[idx]
        mapped = [v for v in me if v in vmap]
        if mapped:
            candidates = by_vertex.get(vmap[mapped[0]], [])
        else:
            candidates = host_edges
        for he in candidates:
            he_set = set(he)
            # every already-mapped motif vertex of this edge must land in he
            if any(vmap[v] not in he_set for v in mapped):
                continue
            free_motif = [v for v in me if v not in vmap]
            free_host = [w for w in he if w not in {vmap[v] for v in mapped}]
            if len(free_host) != len(free_motif):
                continue
            for assignment in itertools.permutations(free_host):
                if any(w in used for w in assignment):
                    continue
                for v, w in zip(free_motif, assignment):
                    vmap[v] = w
                    used.add(w)
                extend(idx + 1, vmap, used)
                for v, w in zip(free_motif, assignment):
                    del vmap[v]
                    used.discard(w)

    extend(0, {}, set())
    return count


def count_motif(hg: Hypergraph, motif: BalancedMotif) -> int:
    """Edge subsets of hg whose edge-induced subhypergraph is a copy of the motif."""
    if hg.r != motif.motif.r:
        raise InvalidArgumentError("rank mismatch between host and motif")
    return _count_embeddings(hg, motif.motif) // motif.aut_count


def is_isomorphic(h1: Hypergraph, h2: Hypergraph) -> bool:
    """Edge-induced isomorphism test by brute force over vertex bijections."""
    v1 = sorted({v for e in h1.edges for v in e})
    v2 = sorted({v for e in h2.edges for v in e})
    if len(v1) != len(v2) or len(h1.edges) != len(h2.edges) or h1.r != h2.r:
        return False
    for perm in itertools.permutations(v2):
        mp = dict(zip(v1, perm))
        if all(tuple(sorted(mp[v] for v in e)) in h2.edges for e in h1.edges):
            return True
    return False


def count_motif_by_subsets(hg: Hypergraph, motif: BalancedMotif) -> int:
    """Independent oracle: scan all m-edge subsets and test isomorphism."""
    m = motif.m
    total = 0
    for subset in itertools.combinations(hg.sorted_edges(), m):
        sub = Hypergraph(hg.n, hg.r, frozenset(subset))
        if is_isomorphic(sub, motif.motif):
            total += 1
    return total


def compute_N(motif: BalancedMotif, n: int) -> int:
    """Copies of the motif in the complete r-uniform hypergraph on n vertices."""
    if n < motif.ell:
        raise InvalidArgumentError(f"n={n} < motif size {motif.ell}")
    return comb(n, motif.ell) * factorial(motif.ell) // motif.aut_count


@dataclass(frozen=True)
class MotifStatMoments:
    eq: float
    lambda_lb: float
    var_q_bound: float
    var_p_bound: float
    N: int
    bounds: Tuple[str, ...] = ("lambda_lb", "var_q_bound", "var_p_bound")


def exact_moments_motif_stat(params: ProblemParams, motif: BalancedMotif) -> MotifStatMoments:
    """E_Q exactly, the planted-mean lower bound lambda, and log-space variance bounds."""
    n, r = params.n, params.r
    if r != motif.motif.r:
        raise InvalidArgumentError("rank mismatch between params and motif")
    ell, m = motif.ell, motif.m
    N = compute_N(motif, n)
    log_n, log_N = math.log(n), math.log(N)
    log_p, log_q = math.log(params.p), math.log(params.q)
    log_rho = math.log(params.rho)
    eq = math.exp(log_N + m * log_q)
    lam = math.exp(log_N + ell * log_rho + m * log_p)
    var_q_a = (
        2.0 * math.log(m)
        + log_N
        + ell * (1.0 - 1.0 / m) * log_n
        + r * (m - 1) * math.log(ell)
        + (2 * m - 1) * log_q
    )
    var_q_b = (m + 1) * math.log(m) + log_N + m * log_q
    var_q = math.exp(max(var_q_a, var_q_b))
    var_p = math.exp(
        ell * math.log(8.0)
        + log_N
        + (ell - 1) * log_n
        + (1 + r * m) * math.log(ell)
        + (2 * ell - 1) * log_rho
        + (2 * m - m / ell) * log_p
    )
    return MotifStatMoments(eq=eq, lambda_lb=lam, var_q_bound=var_q, var_p_bound=var_p, N=N)


# --- threshold test and separation -------------------------------------------


@dataclass(frozen=True)
class TestResult:
    decision: str  # "null" | "planted"
    statistic: float
    threshold: float


def _statistic_value(Y: AdjacencyTensor, params: ProblemParams, statistic: StatisticSpec) -> float:
    if statistic == "edge":
        return signed_edge_count(Y, params)
    if isinstance(statistic, BalancedMotif):
        return float(count_motif(Y.to_hypergraph(), statistic))
    raise InvalidArgumentError(f"unknown statistic {statistic!r}")


def _threshold(params: ProblemParams, statistic: StatisticSpec) -> float:
    if statistic == "edge":
        mom = exact_moments_edge_stat(params)
        return 0.5 * (mom.eq + mom.ep)
    if isinstance(statistic, BalancedMotif):
        mm = exact_moments_motif_stat(params, statistic)
        return 0.5 * (mm.eq + mm.lambda_lb)
    raise InvalidArgumentError(f"unknown statistic {statistic!r}")


def threshold_test(
    Y: Union[AdjacencyTensor, Hypergraph],
    params: ProblemParams,
    statistic: StatisticSpec = "edge",
) -> TestResult:
    """Midpoint-threshold decision: planted iff the statistic exceeds the midpoint."""
    tensor = Y.to_tensor() if isinstance(Y, Hypergraph) else Y
    value = _statistic_value(tensor, params, statistic)
    thr = _threshold(params, statistic)
    return TestResult(
        decision="planted" if value > thr else "null",
        statistic=value,
        threshold=thr,
    )


@dataclass(frozen=True)
class TrialRow:
    trial: int
    model: str  # "null" | "planted"
    statistic: float
    decision: str


@dataclass(frozen=True)
class SeparationReport:
    mean_null: float
    mean_null_se: float
    mean_planted: float
    mean_planted_se: float
    var_null: float
    var_null_se: float
    var_planted: float
    var_planted_se: float
    separation: float
    trials: int
    threshold: float
    type1_error: float
    type2_error: float
    rows: Tuple[TrialRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "meanNull": self.mean_null,
            "meanNullSE": self.mean_null_se,
            "meanPlanted": self.mean_planted,
            "meanPlantedSE": self.mean_planted_se,
            "varNull": self.var_null,
            "varNullSE": self.var_null_se,
            "varPlanted": self.var_planted,
            "varPlantedSE": self.var_planted_se,
            "separation": self.separation,
            "trials": self.trials,
            "threshold": self.threshold,
            "type1Error": self.type1_error,
            "type2Error": self.type2_error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", "model", "statistic", "decision"])
        for row in self.rows:
            writer.writerow([row.trial, row.model, repr(row.statistic), row.decision])
        return buf.getvalue()


def _run_trial(
    params: ProblemParams, statistic: StatisticSpec, seed: int, model: str, trial: int
) -> float:
    # stream key (seed, model-id, trial) makes results schedule independent
    model_id = 0 if model == "null" else 1
    if model == "null":
        Y = sample_null_tensor(params, seed, key=(model_id, trial))
    else:
        Y = sample_planted(params, seed, key=(model_id, trial)).Y
    return _statistic_value(Y, params, statistic)


def _trial_batch(args) -> List[Tuple[str, int, float]]:
    params, statistic, seed, jobs = args
    return [(model, t, _run_trial(params, statistic, seed, model, t)) for model, t in jobs]


def _batch_variance_se(values: np.ndarray) -> Tuple[float, float]:
    """Sample variance plus a batch-means standard error (up to 20 batches)."""
    n = values.shape[0]
    var = float(values.var(ddof=1)) if n > 1 else 0.0
    b = min(BATCH_COUNT, n // 2)
    if b < 2:
        return var, 0.0
    batches = np.array_split(values, b)
    bvars = np.array([batch.var(ddof=1) for batch in batches])
    return var, float(bvars.std(ddof=1)) / math.sqrt(b)


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("DENSELAB_WORKERS", "").strip()
    return max(1, int(env)) if env else 1


def estimate_separation(
    params: ProblemParams,
    statistic: StatisticSpec,
    trials: int,
    seed: int,
    workers: Optional[int] = None,
) -> SeparationReport:
    """Monte Carlo separation report over `trials` draws from each model.

    Per-trial randomness is keyed by (seed, model, trial), so the report is a
    pure function of its arguments regardless of the worker count.
    """
    if trials < 2:
        raise InvalidArgumentError("trials >= 2 required")
    nworkers = resolve_workers(workers)
    jobs = [(model, t) for model in ("null", "planted") for t in range(trials)]
    results: Dict[Tuple[str, int], float] = {}
    if nworkers == 1:
        for model, t in jobs:
            results[(model, t)] = _run_trial(params, statistic, seed, model, t)
    else:
        chunks = [jobs[i::nworkers] for i in range(nworkers)]
        packed = [(params, statistic, seed, chunk) for chunk in chunks if chunk]
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            for out in pool.map(_trial_batch, packed):
                for model, t, value in out:
                    results[(model, t)] = value

    thr = _threshold(params, statistic)
    null_vals = np.array([results[("null", t)] for t in range(trials)])
    plant_vals = np.array([results[("planted", t)] for t in range(trials)])
    var_n, var_n_se = _batch_variance_se(null_vals)
    var_p, var_p_se = _batch_variance_se(plant_vals)
    mean_n, mean_p = float(null_vals.mean()), float(plant_vals.mean())
    denom = math.sqrt(max(var_n, var_p))
    if denom > 0:
        sep = abs(mean_p - mean_n) / denom
    else:
        sep = 0.0 if mean_p == mean_n else math.inf
    rows = tuple(
        TrialRow(t, model, results[(model, t)],
                 "planted" if results[(model, t)] > thr else "null")
        for model in ("null", "planted")
        for t in range(trials)
    )
    return SeparationReport(
        mean_null=mean_n,
        mean_null_se=float(null_vals.std(ddof=1)) / math.sqrt(trials),
        mean_planted=mean_p,
        mean_planted_se=float(plant_vals.std(ddof=1)) / math.sqrt(trials),
        var_null=var_n,
        var_null_se=var_n_se,
        var_planted=var_p,
        var_planted_se=var_p_se,
        separation=sep,
        trials=trials,
        threshold=thr,
        type1_error=float(np.mean(null_vals > thr)),
        type2_error=float(np.mean(plant_vals <= thr)),
        rows=rows,
    )


def classify_regime(alpha: float, beta: float, gamma: float, r: int) -> str:
    """Easy/hard/boundary per the degree-O(1) detection threshold map."""
    if r < 2:
        raise InvalidArgumentError("r >= 2 violated")
    if not 0 < alpha < beta < r - 1:
        raise InvalidArgumentError("0 < alpha < beta < r - 1 violated")
    if not 0 < gamma < 1:
        raise InvalidArgumentError("0 < gamma < 1 violated")
    if gamma >= 0.5:
        threshold = beta / 2.0 + r * (gamma - 0.5)
    else:
        threshold = beta * gamma
    if abs(alpha - threshold) <= REGIME_TOLERANCE:
        return "boundary"
    return "easy" if alpha < threshold else "hard"
