"""Structural graph algorithms on routing instances.

Paths are ordered edge-id tuples and every enumeration is deterministic
(lexicographic by edge id), so everything downstream is reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import CapacityError, FeasibilityError
from .game import Path, RoutingInstance, min_bottleneck_path, minimax_labels

__all__ = [
    "PathSet", "SPNode", "enumerate_paths", "enumerate_st_cuts", "max_flow",
    "max_flow_detailed", "min_cut_value_by_enumeration", "decompose_edge_flow",
    "useful_edges", "series_parallel_decompose", "minimax_labels", "min_bottleneck_path",
]

DEFAULT_MAX_PATHS = 10**6
DEFAULT_MAX_CUT_NODES = 24


@dataclass(frozen=True)
class PathSet:
    paths: tuple[Path, ...]

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def __getitem__(self, i: int) -> Path:
        return self.paths[i]

    def within(self, edge_ids: Iterable[str]) -> "PathSet":
        keep = set(edge_ids)
        return PathSet(tuple(p for p in self.paths if keep.issuperset(p)))


def enumerate_paths(instance: RoutingInstance, max_paths: int = DEFAULT_MAX_PATHS,
                    allowed: Iterable[str] | None = None) -> PathSet:
    """All simple s-t paths, sorted lexicographically by edge-id sequence."""
    allowed_set = None if allowed is None else set(allowed)
    out: list[Path] = []
    stack: list[str] = []
    on_path = {instance.source}

    def dfs(u: str) -> None:
        if u == instance.sink:
            out.append(tuple(stack))
            if len(out) > max_paths:
                raise CapacityError("number of simple s-t paths", max_paths)
            return
        for e in instance.out_edges[u]:
            if allowed_set is not None and e.id not in allowed_set:
                continue
            if e.head in on_path:
                continue
            on_path.add(e.head)
            stack.append(e.id)
            dfs(e.head)
            stack.pop()
            on_path.discard(e.head)

    dfs(instance.source)
    return PathSet(tuple(sorted(out)))


def useful_edges(instance: RoutingInstance, paths: PathSet | None = None) -> frozenset[str]:
    """Edges lying on at least one simple s-t path."""
    paths = enumerate_paths(instance) if paths is None else paths
    return frozenset(e for p in paths for e in p)


def enumerate_st_cuts(instance: RoutingInstance, max_nodes: int = DEFAULT_MAX_CUT_NODES,
                      nodes: Sequence[str] | None = None,
                      edge_ids: Iterable[str] | None = None) -> list[frozenset[str]]:
    """Forward-edge sets of every bipartition (S, V-S) with s in S and t not in S.

    ``nodes``/``edge_ids`` restrict the enumeration to a sub-structure (the
    remaining nodes are treated as absent). Duplicates are removed keeping the
    first occurrence in bipartition order.
    """
    nodes = list(instance.nodes if nodes is None else nodes)
    if len(nodes) > max_nodes:
        raise CapacityError("number of nodes for cut enumeration", max_nodes, len(nodes))
    edges = instance.edges if edge_ids is None else [instance.edge[i] for i in edge_ids]
    others = sorted(v for v in nodes if v not in (instance.source, instance.sink))
    seen: set[frozenset[str]] = set()
    cuts: list[frozenset[str]] = []
    for mask in range(1 << len(others)):
        side = {instance.source}
        side.update(v for i, v in enumerate(others) if mask >> i & 1)
        cut = frozenset(e.id for e in edges if e.tail in side and e.head not in side)
        if cut not in seen:
            seen.add(cut)
            cuts.append(cut)
    return cuts


Arc = tuple[Hashable, str, str, "Fraction | None"]


def max_flow_detailed(nodes: Iterable[str], arcs: Sequence[Arc], source: str, sink: str,
                      limit: Fraction | None = None):
    """Edmonds-Karp on exact rationals.

    ``arcs`` are ``(key, tail, head, capacity)`` with ``None`` for unbounded.
    Stops once ``limit`` units are routed. Returns ``(value, flow_by_key,
    source_side)`` where ``source_side`` is the set of nodes reachable from
    ``source`` in the final residual graph (the minimal minimum cut when no
    limit interrupted the search).
    """
    adj: dict[str, list[int]] = {v: [] for v in nodes}
    # residual arcs: [head, residual capacity (None = inf), twin index, arc index or -1]
    res: list[list] = []
    for idx, (_, u, v, cap) in enumerate(arcs):
        adj[u].append(len(res))
        res.append([v, cap, len(res) + 1, idx])
        adj[v].append(len(res))
        res.append([u, Fraction(0), len(res) - 1, -1])
    value = Fraction(0)

    def bfs():
        prev: dict[str, int] = {source: -1}
        q = deque([source])
        while q:
            u = q.popleft()
            for ri in adj[u]:
                head, cap = res[ri][0], res[ri][1]
                if head not in prev and (cap is None or cap > 0):
                    prev[head] = ri
                    if head == sink:
                        return prev
                    q.append(head)
        return prev

    while True:
        if limit is not None and value >= limit:
            break
        prev = bfs()
        if sink not in prev:
            break
        chain = []
        v = sink
        while v != source:
            ri = prev[v]
            chain.append(ri)
            v = res[res[ri][2]][0]
        caps = [res[ri][1] for ri in chain if res[ri][1] is not None]
        if limit is not None:
            caps.append(limit - value)
        if not caps:
            raise FeasibilityError("unbounded s-t capacity")
        delta = min(caps)
        for ri in chain:
            if res[ri][1] is not None:
                res[ri][1] -= delta
            twin = res[ri][2]
            if res[twin][1] is not None:
                res[twin][1] += delta
        value += delta

    flows: dict[Hashable, Fraction] = {}
    for ri in range(0, len(res), 2):
        idx = res[ri][3]
        flows[arcs[idx][0]] = res[ri + 1][1]
    side = set(bfs())
    return value, flows, side


def max_flow(instance: RoutingInstance, capacities: Mapping[str, Fraction]) -> Fraction:
    """Exact maximum s-t flow value under per-edge capacities."""
    for k, c in capacities.items():
        if c is not None and c < 0:
            raise ValueError(f"negative capacity on {k!r}")
    arcs = [(e.id, e.tail, e.head, Fraction(capacities[e.id])) for e in instance.edges]
    value, _, _ = max_flow_detailed(instance.nodes, arcs, instance.source, instance.sink)
    return value


def min_cut_value_by_enumeration(instance: RoutingInstance, capacities: Mapping[str, Fraction]) -> Fraction:
    """Brute-force minimum over all s-t cuts; the independent check for :func:`max_flow`."""
    return min(sum((Fraction(capacities[e]) for e in cut), Fraction(0))
               for cut in enumerate_st_cuts(instance))


def decompose_edge_flow(instance: RoutingInstance, edge_flow: Mapping[str, Fraction]) -> dict[Path, Fraction]:
    """Split a conserving s-t edge flow into simple path flows.

    Cycles met while walking are cancelled (their flow is dropped), which only
    lowers edge loads.
    """
    rem = {k: Fraction(v) for k, v in edge_flow.items() if v}
    paths: dict[Path, Fraction] = {}
    out = instance.out_edges

    def next_edge(u: str):
        for e in out[u]:
            if rem.get(e.id, 0) > 0:
                return e
        return None

    while True:
        e0 = next_edge(instance.source)
        if e0 is None:
            break
        walk: list[str] = []
        pos = {instance.source: 0}
        u = instance.source
        while u != instance.sink:
            e = next_edge(u)
            if e is None:
                raise FeasibilityError(f"edge flow does not conserve at node {u!r}")
            walk.append(e.id)
            u = e.head
            if u in pos:
                cyc = walk[pos[u]:]
                d = min(rem[i] for i in cyc)
                for i in cyc:
                    rem[i] -= d
                del walk[pos[u]:]
                for v in [k for k, p in pos.items() if p > pos[u]]:
                    del pos[v]
                continue
            pos[u] = len(walk)
        d = min(rem[i] for i in walk)
        for i in walk:
            rem[i] -= d
        p = tuple(walk)
        paths[p] = paths.get(p, Fraction(0)) + d
    return paths


@dataclass(frozen=True)
class SPNode:
    """Node of a series-parallel decomposition tree."""

    kind: str  # "edge" | "series" | "parallel"
    source: str
    sink: str
    children: tuple["SPNode", ...] = ()
    edge: str | None = None

    def leaves(self) -> list[str]:
        if self.kind == "edge":
            return [self.edge]  # type: ignore[list-item]
        return [x for c in self.children for x in c.leaves()]

    def realize(self) -> list[tuple[str, str, str]]:
        """Rebuild ``(edge, tail, head)`` triples from the composition rules."""
        if self.kind == "edge":
            return [(self.edge, self.source, self.sink)]  # type: ignore[list-item]
        a, b = self.children
        if self.kind == "series":
            assert a.sink == b.source and a.source == self.source and b.sink == self.sink
        else:
            assert (a.source, a.sink) == (b.source, b.sink) == (self.source, self.sink)
        return a.realize() + b.realize()


def series_parallel_decompose(instance: RoutingInstance,
                              edge_ids: Iterable[str] | None = None) -> SPNode | None:
    """Decomposition tree if the s-t network is series-parallel, else None.

    Works by repeated parallel merges and series contractions; isolated nodes
    are ignored, but any edge not on an s-t route blocks the reduction.
    """
    ids = sorted(instance.edge_ids if edge_ids is None else edge_ids)
    items: dict[int, tuple[str, str, SPNode]] = {}
    for k, eid in enumerate(ids):
        e = instance.edge[eid]
        items[k] = (e.tail, e.head, SPNode("edge", e.tail, e.head, edge=eid))
    next_key = len(items)
    s, t = instance.source, instance.sink

    changed = True
    while changed:
        changed = False
        groups: dict[tuple[str, str], list[int]] = {}
        for k, (u, v, _) in items.items():
            groups.setdefault((u, v), []).append(k)
        for (u, v), ks in groups.items():
            if len(ks) < 2:
                continue
            tree = items.pop(ks[0])[2]
            for k in ks[1:]:
                tree = SPNode("parallel", u, v, (tree, items.pop(k)[2]))
            items[next_key] = (u, v, tree)
            next_key += 1
            changed = True
        inc: dict[str, list[int]] = {}
        outg: dict[str, list[int]] = {}
        for k, (u, v, _) in items.items():
            outg.setdefault(u, []).append(k)
            inc.setdefault(v, []).append(k)
        for w in sorted(set(inc) | set(outg)):
            if w in (s, t):
                continue
            ins, outs = inc.get(w, []), outg.get(w, [])
            if len(ins) != 1 or len(outs) != 1:
                continue
            ki, ko = ins[0], outs[0]
            if ki not in items or ko not in items:
                continue
            u, _, left = items[ki]
            _, v, right = items[ko]
            if u == v:
                continue
            del items[ki], items[ko]
            items[next_key] = (u, v, SPNode("series", u, v, (left, right)))
            next_key += 1
            changed = True
            break
    if len(items) == 1:
        (u, v, tree), = items.values()
        if (u, v) == (s, t):
            return tree
    return None
