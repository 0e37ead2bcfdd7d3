"""Optimal flows, Nash verification, worst Nash flows and subpath-optimal flows."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .errors import DomainError, StructureError, UnsupportedModelError
from .game import (Flow, LatencyFunction, Path, RoutingInstance, bottleneck_cost,
                   edge_latencies, min_bottleneck_path, minimax_labels)
from .lp import linprog
from .topology import (DEFAULT_MAX_CUT_NODES, DEFAULT_MAX_PATHS, PathSet, decompose_edge_flow,
                       enumerate_paths, enumerate_st_cuts, max_flow, max_flow_detailed)

THREADS_ENV = "BRAESS_THREADS"


@dataclass(frozen=True)
class NashCertificate:
    verdict: bool
    blocking_cut: frozenset[str] | None = None
    violation: Path | None = None


@dataclass(frozen=True)
class WorstNashResult:
    flow: Flow
    cost: Fraction
    cut: frozenset[str]
    exhaustive: bool
    cuts_evaluated: int = 0


@dataclass(frozen=True)
class SubpathLabels:
    labels: dict[str, Fraction]


# ---------------------------------------------------------------------------
# parametric capacities: cap_e(lam) = min(c_e^{-1}(lam), bound), uncapped when bound is None

def _capacity(lat: LatencyFunction, lam: Fraction, bound: Fraction | None) -> Fraction | None:
    inv = lat.inverse(lam)
    if bound is None:
        return inv
    return bound if inv is None else min(inv, bound)


def _capacity_breakpoints(lat: LatencyFunction, bound: Fraction | None) -> list[Fraction]:
    pts = list(lat.inverse_breakpoints())
    if bound is None:
        return pts
    if lat.kind == "general":
        pts.append(lat(min(bound, lat.domain_end)))
    elif lat.a > 0:
        pts.append(lat.b + lat.a * bound)
    return pts


def _least_level(lats: Sequence[LatencyFunction], const: Fraction, demand: Fraction,
                 bound: Fraction | None) -> Fraction | None:
    """Least lam >= 0 with ``const + sum cap_e(lam) >= demand`` (None if never)."""
    def F(lam):
        return const + sum((_capacity(l, lam, bound) for l in lats), Fraction(0))

    grid = sorted({Fraction(0)} | {p for l in lats for p in _capacity_breakpoints(l, bound) if p >= 0})
    for i, lo in enumerate(grid):
        f_lo = F(lo)
        if f_lo >= demand:
            return lo
        hi = grid[i + 1] if i + 1 < len(grid) else None
        mid = lo + 1 if hi is None else (lo + hi) / 2
        slope = (F(mid) - f_lo) / (mid - lo)
        if slope > 0:
            lam = lo + (demand - f_lo) / slope
            if hi is None or lam < hi:
                return lam
    return None


_SINK = "\x00sink"


def _parametric_level(nodes: Iterable[str], arcs: Sequence[tuple], source: str, sink: str,
                      demand: Fraction, bound: Fraction | None):
    """Least latency level at which ``demand`` fits through the network.

    ``arcs`` are ``(key, tail, head, latency | None, fixed_capacity)``. Newton
    iteration over minimum cuts: each step jumps to the level at which the
    current minimum cut could carry the demand, which is a lower bound on the
    answer; cuts never repeat, so this terminates with the exact value.
    Returns ``(level, flows, source_side)`` from the max flow at that level.
    """
    nodes = list(nodes)
    lam = Fraction(0)
    while True:
        cap_arcs = [(k, u, v, _capacity(l, lam, bound) if l is not None else c)
                    for k, u, v, l, c in arcs]
        value, flows, side = max_flow_detailed(nodes, cap_arcs, source, sink)
        if value >= demand:
            return lam, flows, side
        cut = [(l, c) for _, u, v, l, c in arcs if u in side and v not in side]
        const = sum((c for l, c in cut if l is None), Fraction(0))
        nxt = _least_level([l for l, _ in cut if l is not None], const, demand, bound)
        if nxt is None:
            raise StructureError("demand cannot be routed at any latency level")
        assert nxt > lam
        lam = nxt


def optimal_bottleneck_cost(instance: RoutingInstance) -> tuple[Fraction, Flow]:
    """Minimum bottleneck cost ``B*`` over feasible flows, with a witness flow.

    Linear instances use ``B* = r / maxflow(1/a_e)``; other latency shapes use
    the exact parametric min-cut iteration.
    """
    r = instance.rate
    if r == 0:
        return Fraction(0), Flow(instance, {})
    if instance.latency_kinds == {"linear"}:
        mf = max_flow(instance, {e.id: 1 / e.latency.a for e in instance.edges})
        lam = r / mf
    else:
        arcs = [(e.id, e.tail, e.head, e.latency, None) for e in instance.edges]
        lam, _, _ = _parametric_level(instance.nodes, arcs, instance.source, instance.sink, r, r)
    cap_arcs = [(e.id, e.tail, e.head, _capacity(e.latency, lam, r)) for e in instance.edges]
    value, flows, _ = max_flow_detailed(instance.nodes, cap_arcs, instance.source, instance.sink, limit=r)
    assert value == r
    witness = Flow(instance, decompose_edge_flow(instance, flows))
    assert bottleneck_cost(witness).bottleneck == lam
    return lam, witness


def optimal_value(instance: RoutingInstance) -> Fraction:
    return optimal_bottleneck_cost(instance)[0]


def is_nash_flow(flow: Flow) -> NashCertificate:
    """Nash iff no s-t path is strictly cheaper (by bottleneck) than ``B(f)``.

    On success the certificate carries the forward edges of the set of nodes
    reachable from s through edges cheaper than ``B(f)``; on failure it
    carries a cheapest s-t path.
    """
    inst = flow.instance
    report = bottleneck_cost(flow)
    B = report.bottleneck
    lat = report.edge_latencies
    best = min_bottleneck_path(inst, lat)
    assert best is not None
    if best[0] < B:
        return NashCertificate(False, violation=best[1])
    low = {eid for eid, c in lat.items() if c < B}
    side, _ = minimax_labels(inst, lat, allowed=low)
    cut = frozenset(e.id for e in inst.edges if e.tail in side and e.head not in side)
    return NashCertificate(True, blocking_cut=cut)


# ---------------------------------------------------------------------------
# worst Nash flow (strictly increasing linear latencies)

def _require_linear(instance: RoutingInstance) -> None:
    if instance.latency_kinds != {"linear"}:
        raise UnsupportedModelError("the worst-Nash oracle supports strictly increasing linear latencies only")


def _cut_lp(instance: RoutingInstance, paths: PathSet, edges: Sequence[str], cut: frozenset[str]):
    """Largest ``B`` for which a flow saturates every cut edge at latency ``B``.

    With ``y = f / B`` the problem becomes: minimize the rate ``v = sum y_p``
    subject to ``y_e <= 1/a_e`` everywhere and equality on the cut; then
    ``B = r / v``. Returns ``(B, path_flows)`` or None when infeasible.
    """
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for eid in edges:
        row = [Fraction(1) if eid in p else Fraction(0) for p in paths]
        cap = 1 / instance.edge[eid].latency.a
        if eid in cut:
            A_eq.append(row)
            b_eq.append(cap)
        else:
            A_ub.append(row)
            b_ub.append(cap)
    res = linprog([Fraction(1)] * len(paths), A_ub, b_ub, A_eq, b_eq)
    if res.status != "optimal" or not res.fun:
        return None
    r = instance.rate
    B = r / res.fun
    return B, {p: r * y / res.fun for p, y in zip(paths, res.x) if y}


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def worst_nash_flow(instance: RoutingInstance, *, stop_at: Fraction | None = None,
                    max_paths: int = DEFAULT_MAX_PATHS, max_cut_nodes: int = DEFAULT_MAX_CUT_NODES,
                    threads: int | None = None, paths: PathSet | None = None) -> WorstNashResult:
    """Exact worst equilibrium bottleneck cost ``B(G, r)`` for linear latencies.

    A flow is Nash iff the edges at latency ``B(f)`` contain an s-t cut, so
    ``B(G, r)`` is the maximum over cuts of the per-cut LP in :func:`_cut_lp`.
    Only edges on simple s-t paths matter. If ``stop_at`` is given the search
    returns as soon as a Nash flow with cost >= ``stop_at`` is certified
    (``exhaustive`` is then False).
    """
    _require_linear(instance)
    if instance.rate == 0:
        return WorstNashResult(Flow(instance, {}), Fraction(0), frozenset(), True, 0)
    paths = enumerate_paths(instance, max_paths) if paths is None else paths
    edges = sorted({e for p in paths for e in p})
    core_nodes = {instance.source, instance.sink}
    for eid in edges:
        core_nodes.update((instance.edge[eid].tail, instance.edge[eid].head))
    cuts = enumerate_st_cuts(instance, max_cut_nodes, nodes=sorted(core_nodes), edge_ids=edges)
    cuts.sort(key=lambda c: tuple(sorted(c)))

    best: tuple[Fraction, tuple[str, ...], dict] | None = None
    evaluated = 0

    def consider(cut, out):
        nonlocal best
        if out is None:
            return
        B, pf = out
        key = tuple(sorted(cut))
        if best is not None and (B < best[0] or (B == best[0] and key >= best[1])):
            return
        flow = Flow(instance, pf)
        if not is_nash_flow(flow).verdict:
            return
        best = (B, key, pf)

    n_threads = _thread_count(threads)
    if n_threads > 1 and stop_at is None:
        with ThreadPoolExecutor(n_threads) as pool:
            outs = list(pool.map(lambda c: _cut_lp(instance, paths, edges, c), cuts))
        for cut, out in zip(cuts, outs):
            consider(cut, out)
        evaluated = len(cuts)
    else:
        for cut in cuts:
            evaluated += 1
            consider(cut, _cut_lp(instance, paths, edges, cut))
            if stop_at is not None and best is not None and best[0] >= stop_at:
                return WorstNashResult(Flow(instance, best[2]), best[0], frozenset(best[1]),
                                       evaluated == len(cuts), evaluated)
    if best is None:
        raise AssertionError("no Nash flow found; every bottleneck game has one")
    return WorstNashResult(Flow(instance, best[2]), best[0], frozenset(best[1]), True, evaluated)


def worst_nash_value(instance: RoutingInstance, **kw) -> Fraction:
    return worst_nash_flow(instance, **kw).cost


# ---------------------------------------------------------------------------
# subpath-optimal Nash flows

def subpath_labels(flow: Flow) -> SubpathLabels:
    labels, _ = minimax_labels(flow.instance, edge_latencies(flow))
    return SubpathLabels(labels)


def is_subpath_optimal(flow: Flow, labels: SubpathLabels | None = None) -> bool:
    """Every prefix of every used path attains the minimum bottleneck to its endpoint."""
    inst = flow.instance
    lat = edge_latencies(flow)
    labels = subpath_labels(flow) if labels is None else labels
    for p in flow.path_flows:
        cur = Fraction(0)
        for eid in p:
            cur = max(cur, lat[eid])
            if cur != labels.labels[inst.edge[eid].head]:
                return False
    return True


def subpath_optimal_nash_flow(instance: RoutingInstance) -> tuple[Flow, SubpathLabels]:
    """Construct a subpath-optimal Nash flow (its cost equals ``B*``).

    Peels the network level by level: find the least level at which the
    current demands fit, keep the max flow outside the minimal minimum cut
    (all cut edges sit exactly at that level), and recurse inside the cut with
    the flow entering each cut edge as a new demand at its tail. Requires
    strictly increasing latencies so the level is attained exactly.
    """
    if not all(e.latency.strictly_increasing for e in instance.edges):
        raise UnsupportedModelError("subpath-optimal construction needs strictly increasing latencies")
    r = instance.rate
    if r == 0:
        return Flow(instance, {}), SubpathLabels({instance.source: Fraction(0)})
    s = instance.source
    region = set(instance.nodes)
    demands: dict[str, Fraction] = {instance.sink: r}
    edge_flow: dict[str, Fraction] = {}
    while demands:
        arcs: list[tuple[Hashable, str, str, LatencyFunction | None, Fraction | None]] = [
            (e.id, e.tail, e.head, e.latency, None)
            for e in instance.edges if e.tail in region and e.head in region]
        arcs += [(("demand", x), x, _SINK, None, d) for x, d in sorted(demands.items())]
        total = sum(demands.values(), Fraction(0))
        # capacities stay uncapped: a cap at r would fake saturation below the level
        _, flows, side = _parametric_level(sorted(region) + [_SINK], arcs, s, _SINK, total, None)
        side.discard(_SINK)
        assert s in side and side < region
        new_demands: dict[str, Fraction] = {x: d for x, d in demands.items() if x in side}
        for k, u, v, lat, _ in arcs:
            if lat is None or (u in side and v in side):
                continue
            edge_flow[k] = flows[k]
            if u in side and flows[k]:
                new_demands[u] = new_demands.get(u, Fraction(0)) + flows[k]
        new_demands.pop(s, None)
        demands = new_demands
        region = side
    flow = Flow(instance, decompose_edge_flow(instance, edge_flow))
    labels = subpath_labels(flow)
    assert is_subpath_optimal(flow, labels)
    assert is_nash_flow(flow).verdict
    return flow, labels


def price_of_anarchy(instance: RoutingInstance, **kw) -> Fraction:
    opt = optimal_value(instance)
    if opt == 0:
        raise DomainError("optimal bottleneck cost is 0; the price of anarchy is undefined")
    return worst_nash_value(instance, **kw) / opt
