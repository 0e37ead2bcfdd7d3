"""Best-subnetwork search: exhaustive oracle, sparse flows and the candidate-flow approximation."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import reduce
from itertools import combinations_with_replacement
from typing import Iterator

import numpy as np

from .errors import CapacityError, DomainError, InfeasibleError, SearchFailure
from .equilibrium import optimal_value, worst_nash_flow
from .game import Flow, Path, RoutingInstance, as_fraction, format_fraction, path_bottleneck
from .topology import PathSet, enumerate_paths

DEFAULT_MAX_EDGES = 16
DEFAULT_MAX_CANDIDATES = 2 * 10**7
LOG_BASES = ("natural", "base-2")


def k_of_eps(eps, m: int, log_base: str = "natural") -> int:
    """Sparsity bound ``floor(log(2m) / (2 eps^2)) + 1``."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if m < 1:
        raise DomainError("m must be a positive integer")
    if log_base not in LOG_BASES:
        raise DomainError(f"log base must be one of {LOG_BASES}")
    scale = 1 / (2 * eps * eps)
    two_m = 2 * m
    if log_base == "base-2" and two_m & (two_m - 1) == 0:
        return math.floor(scale * (two_m.bit_length() - 1)) + 1
    with localcontext() as ctx:
        ctx.prec = 80
        log = Decimal(two_m).ln()
        if log_base == "base-2":
            log /= Decimal(2).ln()
        value = log * scale.numerator / scale.denominator
    return int(value.to_integral_value(rounding="ROUND_FLOOR")) + 1


@dataclass(frozen=True)
class ApproxParams:
    eps: Fraction
    delta: Fraction
    xi: Fraction
    m: int
    log_base: str = "natural"

    def __post_init__(self):
        for name in ("eps", "delta", "xi"):
            v = as_fraction(getattr(self, name))
            if v <= 0:
                raise DomainError(f"{name} must be positive")
            object.__setattr__(self, name, v)

    @property
    def eps1(self) -> Fraction:
        return min(self.delta, self.eps / (4 * self.xi))

    @property
    def eps2(self) -> Fraction:
        return self.eps / 2

    @property
    def k(self) -> int:
        return k_of_eps(self.eps1, self.m, self.log_base)


@dataclass(frozen=True)
class CandidateFlow:
    """Flow induced by a multiset of paths: ``g_p = count_p / size``."""

    counts: dict[Path, int]
    instance: RoutingInstance = field(repr=False)

    @property
    def size(self) -> int:
        return sum(self.counts.values())

    @property
    def flow(self) -> Flow:
        n = self.size
        return Flow(self.instance, {p: Fraction(c, n) for p, c in self.counts.items()})


def edge_deviation(flow: Flow, approx: Flow) -> Fraction:
    """Largest ``|g_e - f_e|``; ``approx`` must leave every edge unused by ``flow`` empty."""
    f, g = flow.loads, approx.loads
    dev = Fraction(0)
    for e, fe in f.items():
        if fe == 0 and g[e] != 0:
            raise ValueError("approximation uses an edge the original flow leaves empty")
        dev = max(dev, abs(g[e] - fe))
    return dev


def _reduce(counts: dict[Path, int]) -> dict[Path, int]:
    d = reduce(math.gcd, counts.values())
    return {p: c // d for p, c in sorted(counts.items())}


def sparsify_flow(flow: Flow, eps, *, seed: int = 0, budget: int | None = None,
                  log_base: str = "natural") -> CandidateFlow:
    """Approximate a rate-1 flow by at most ``k(eps)`` sampled paths.

    Flows whose entries all have denominators dividing some ``K <= k`` are
    represented exactly. Otherwise ``k`` paths are drawn i.i.d. proportionally
    to ``f_p`` until every edge load is within ``eps`` (budget ``10*k*m``).
    """
    eps = as_fraction(eps)
    inst = flow.instance
    if inst.rate != 1:
        raise DomainError("sparsify_flow expects a rate-1 instance")
    k = k_of_eps(eps, inst.m, log_base)
    lcm = reduce(math.lcm, (v.denominator for v in flow.path_flows.values()), 1)
    if lcm <= k:
        return CandidateFlow(_reduce({p: int(v * lcm) for p, v in flow.path_flows.items()}), inst)
    paths = list(flow.path_flows)
    weights = [float(flow.path_flows[p]) for p in paths]
    rng = random.Random(seed)
    budget = 10 * k * inst.m if budget is None else budget
    best = None
    for _ in range(budget):
        counts: dict[Path, int] = {}
        for p in rng.choices(paths, weights, k=k):
            counts[p] = counts.get(p, 0) + 1
        cand = CandidateFlow(_reduce(counts), inst)
        dev = edge_deviation(flow, cand.flow)
        if dev <= eps:
            return cand
        best = dev if best is None else min(best, dev)
    raise SearchFailure(f"no {k}-path sample within {eps} after {budget} attempts", best)


def candidate_count(n_paths: int, k: int) -> int:
    """Number of nonempty multisets of size <= k over ``n_paths`` items."""
    return math.comb(n_paths + k, k) - 1


def enumerate_candidate_flows(instance: RoutingInstance, paths: PathSet, k: int,
                              max_candidates: int = DEFAULT_MAX_CANDIDATES) -> Iterator[CandidateFlow]:
    """Every multiset of 1..k paths, by size then lexicographically."""
    count = candidate_count(len(paths), k)
    if count > max_candidates:
        raise CapacityError("number of candidate flows", max_candidates, count)
    for size in range(1, k + 1):
        for combo in combinations_with_replacement(paths, size):
            counts: dict[Path, int] = {}
            for p in combo:
                counts[p] = counts.get(p, 0) + 1
            yield CandidateFlow(counts, instance)


# ---------------------------------------------------------------------------
# exhaustive search

@dataclass(frozen=True)
class SubnetworkReport:
    subnetwork: tuple[str, ...]
    worst_cost: Fraction
    witness: Flow
    classification: str | None = None
    improvement: Fraction | None = None
    optimal_cost: Fraction | None = None
    full_worst_cost: Fraction | None = None
    evaluated: int = 0
    exhaustive: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def fmt(x):
            return None if x is None else format_fraction(x)
        out = {
            "subnetwork": list(self.subnetwork),
            "worst_cost": fmt(self.worst_cost),
            "witness": {",".join(p): format_fraction(v) for p, v in self.witness.path_flows.items()},
            "classification": self.classification,
            "improvement": fmt(self.improvement),
            "optimal_cost": fmt(self.optimal_cost),
            "full_worst_cost": fmt(self.full_worst_cost),
            "evaluated": self.evaluated,
            "exhaustive": self.exhaustive,
        }
        out.update(self.extra)
        return out


def classify_values(best: Fraction, full_worst: Fraction, optimum: Fraction) -> str:
    if best == full_worst:
        return "paradox-free"
    if best == optimum:
        return "paradox-ridden"
    return "intermediate"


def _cores(instance: RoutingInstance, paths: PathSet) -> list[tuple[str, ...]]:
    """Distinct edge sets that are unions of s-t paths, each the core of some subnetwork.

    A subnetwork's worst Nash cost depends only on its core (edges on simple
    s-t paths), and the core is the smallest subnetwork with that cost.
    """
    ids = sorted({e for p in paths for e in p})
    bit = {e: 1 << i for i, e in enumerate(ids)}
    masks = sorted({sum(bit[e] for e in p) for p in paths})
    cores = set()
    for sub in range(1, 1 << len(ids)):
        core = 0
        for pm in masks:
            if pm & sub == pm:
                core |= pm
        if core:
            cores.add(core)
    out = [tuple(e for e in ids if c & bit[e]) for c in cores]
    out.sort(key=lambda c: (len(c), c))
    return out


def exhaustive_best_subnetwork(instance: RoutingInstance, max_edges: int = DEFAULT_MAX_EDGES,
                               threads: int | None = None) -> SubnetworkReport:
    """Exact minimizer of the worst Nash cost over all subnetworks (linear latencies).

    Ties go to the smallest edge set, then the lexicographically first.
    Subnetworks are visited by core in that order, so a later core has to be
    strictly better; a core is skipped when its optimal cost already exceeds
    the incumbent, and its worst-Nash search stops as soon as it certifies a
    Nash flow no cheaper than the incumbent.
    """
    if instance.m > max_edges:
        raise CapacityError("number of edges for exhaustive subnetwork search", max_edges, instance.m)
    paths = enumerate_paths(instance)
    full = worst_nash_flow(instance, paths=paths, threads=threads)
    optimum = optimal_value(instance)
    best_cost, best_core, best_flow = full.cost, None, full.flow
    cores = _cores(instance, paths)
    evaluated = 0
    for core in cores:
        if best_core is not None and best_cost == optimum:
            break
        sub = instance.subnetwork(core)
        if best_core is not None and optimal_value(sub) >= best_cost:
            continue
        evaluated += 1
        res = worst_nash_flow(sub, paths=paths.within(core), threads=threads,
                              stop_at=best_cost if best_core is not None else None)
        if best_core is None or res.cost < best_cost:
            best_cost, best_core, best_flow = res.cost, core, res.flow
    assert best_core is not None
    cls = classify_values(best_cost, full.cost, optimum)
    improvement = full.cost / best_cost if best_cost else Fraction(1)
    return SubnetworkReport(best_core, best_cost, best_flow, cls, improvement, optimum, full.cost,
                            evaluated, True, {"cores": len(cores), "subsets": 2 ** instance.m})


def classify_paradox(instance: RoutingInstance, **kw) -> SubnetworkReport:
    return exhaustive_best_subnetwork(instance, **kw)


# ---------------------------------------------------------------------------
# candidate-flow approximation

def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``, lexicographically descending."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total, -1, -1):
        rest = _compositions(total - first, parts - 1)
        blocks.append(np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def _lcd(values) -> int:
    return reduce(math.lcm, (Fraction(v).denominator for v in values), 1)


@dataclass(frozen=True)
class ApproxResult:
    subnetwork: tuple[str, ...]
    flow: Flow
    estimate: Fraction  # the candidate maximum B~(H)
    candidates: int
    subnetworks: int
    params: ApproxParams

    def report(self) -> SubnetworkReport:
        p = self.params
        return SubnetworkReport(self.subnetwork, self.estimate, self.flow, exhaustive=False,
                                evaluated=self.candidates,
                                extra={"candidate_subnetworks": self.subnetworks, "k": p.k,
                                       "eps1": format_fraction(p.eps1), "eps2": format_fraction(p.eps2),
                                       "log_base": p.log_base})


def _check_approx_input(instance: RoutingInstance) -> None:
    if instance.rate != 1:
        raise DomainError("approx_best_subnetwork expects a rate-1 instance; normalize first")
    if not instance.latency_kinds <= {"linear", "affine"}:
        raise DomainError("approx_best_subnetwork supports linear and affine latencies")


def _pick(instance, paths, by_subnet) -> tuple:
    if not by_subnet:
        raise InfeasibleError("no candidate solution; parameters are outside the guarantee's hypotheses")
    key = min(by_subnet, key=lambda h: (by_subnet[h][0], len(h), h))
    value, counts = by_subnet[key]
    sub = instance.subnetwork(key)
    return key, CandidateFlow(_reduce(counts), sub).flow, value


def approx_best_subnetwork(instance: RoutingInstance, params: ApproxParams,
                           max_candidates: int = DEFAULT_MAX_CANDIDATES) -> ApproxResult:
    """Best subnetwork among those spanned by sparse candidate flows.

    For every candidate flow ``g`` (at most ``k`` paths) and every candidate
    subnetwork ``H`` (edges used by some candidate) containing ``g``'s
    support, ``g`` is a candidate solution on ``H`` if it is an
    ``eps/2``-Nash flow in ``H``. ``B~(H)`` is the largest bottleneck among
    the candidate solutions on ``H``; the subnetwork minimizing ``B~`` is
    returned with its maximizing flow. Exact integer arithmetic throughout:
    a flow with ``K`` paths has loads ``c_e / K``, so latencies scale to
    integers by ``K * lcd``.
    """
    _check_approx_input(instance)
    paths = enumerate_paths(instance)
    n, k = len(paths), params.k
    # a multiset of size K induces the same flow as its doubling, so sizes in (k/2, k] suffice
    sizes = range(k // 2 + 1, k + 1)
    total = sum(math.comb(K + n - 1, n - 1) for K in sizes)
    if total > max_candidates:
        raise CapacityError("number of candidate flows", max_candidates, total)
    edges = sorted({e for p in paths for e in p})
    col = {e: i for i, e in enumerate(edges)}
    inc = np.zeros((n, len(edges)), dtype=np.int64)
    for i, p in enumerate(paths):
        for e in p:
            inc[i, col[e]] = 1
    lats = [instance.edge[e].latency for e in edges]
    lcd = _lcd([l.a for l in lats] + [l.b for l in lats] + [params.eps2])
    A = np.array([int(l.a * lcd) for l in lats], dtype=np.int64)
    Bc = np.array([int(l.b * lcd) for l in lats], dtype=np.int64)
    tol_unit = int(params.eps2 * lcd)
    # candidate subnetworks: edge unions of path subsets, with their path sets
    subsets = range(1, 1 << n)
    pmask = np.array([[(s >> i) & 1 for i in range(n)] for s in subsets], dtype=bool)
    union = (pmask.astype(np.int64) @ inc) > 0
    contained = (inc[None, :, :] <= union[:, None, :]).all(axis=2)  # paths inside each union
    keys = [tuple(e for e, used in zip(edges, row) if used) for row in union]
    subnet_rows: dict[tuple[str, ...], np.ndarray] = {}
    for key, row in zip(keys, contained):
        subnet_rows.setdefault(key, row)
    H_keys = sorted(subnet_rows, key=lambda h: (len(h), h))
    H_paths = np.array([subnet_rows[h] for h in H_keys])  # (nH, n)
    by_subnet: dict[tuple[str, ...], tuple[Fraction, dict]] = {}
    big = np.iinfo(np.int64).max
    # path edge lists for bottleneck evaluation
    path_cols = [[col[e] for e in p] for p in paths]
    for K in sizes:
        C = _compositions(K, n)
        loads = C @ inc
        lat = loads * A + Bc * K  # latency * K * lcd
        PB = np.stack([lat[:, cols].max(axis=1) for cols in path_cols], axis=1)
        used = C > 0
        U = np.where(used, PB, -1).max(axis=1)
        tol = tol_unit * K
        for h, hp in zip(H_keys, H_paths):
            ok = ~(used & ~hp).any(axis=1)
            if not ok.any():
                continue
            minH = np.where(hp, PB, big).min(axis=1)
            ok &= (U - minH) <= tol
            if not ok.any():
                continue
            idx = np.flatnonzero(ok)
            j = idx[np.argmax(U[idx])]
            value = Fraction(int(U[j]), K * lcd)
            cur = by_subnet.get(h)
            if cur is None or value > cur[0]:
                by_subnet[h] = (value, {paths[i]: int(c) for i, c in enumerate(C[j]) if c})
    key, flow, value = _pick(instance, paths, by_subnet)
    return ApproxResult(key, flow, value, total, len(H_keys), params)


def approx_best_subnetwork_reference(instance: RoutingInstance, params: ApproxParams,
                                     max_candidates: int = 10**5) -> ApproxResult:
    """Direct transcription of the candidate procedure over every multiset; slow, for cross-checks."""
    _check_approx_input(instance)
    paths = enumerate_paths(instance)
    cands = list(enumerate_candidate_flows(instance, paths, params.k, max_candidates))
    subnets = sorted({tuple(sorted({e for p in c.counts for e in p})) for c in cands},
                     key=lambda h: (len(h), h))
    by_subnet: dict[tuple[str, ...], tuple[Fraction, dict]] = {}
    for c in cands:
        g = c.flow
        lat = {e.id: e.latency(g.loads[e.id]) for e in instance.edges}
        Bg = max(path_bottleneck(p, lat) for p in c.counts)
        for h in subnets:
            hs = set(h)
            if not all(hs.issuperset(p) for p in c.counts):
                continue
            cheapest = min(path_bottleneck(p, lat) for p in paths.within(hs))
            if Bg > cheapest + params.eps2:
                continue
            cur = by_subnet.get(h)
            if cur is None or Bg > cur[0]:
                by_subnet[h] = (Bg, c.counts)
    key, flow, value = _pick(instance, paths, by_subnet)
    return ApproxResult(key, flow, value, len(cands), len(subnets), params)
