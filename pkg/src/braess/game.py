"""Game model: latency functions, routing instances, path flows, bottleneck costs.

All numbers are :class:`fractions.Fraction`. Latency functions are linear
(``a*x``), affine (``a*x + b``) or a tabulated nondecreasing piecewise-linear
curve, so every evaluation is exact.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, FeasibilityError, StructureError

Path = tuple[str, ...]

_RATIONAL = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def as_fraction(value) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are rejected: the whole library works in exact arithmetic and a
    float would silently smuggle in a binary approximation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL.match(value)
        if not m or (m.group(2) is not None and int(m.group(2)) == 0):
            raise ValueError(f"malformed rational {value!r}")
        return Fraction(int(m.group(1)), int(m.group(2) or 1))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_fraction(x: Fraction) -> str:
    """Render as ``p/q`` (``2/1`` for integers), never as a decimal."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class LatencyFunction:
    kind: str
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    xi: Fraction | None = None
    table: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "a", as_fraction(self.a))
        set_(self, "b", as_fraction(self.b))
        if self.kind == "linear":
            if self.a <= 0 or self.b != 0:
                raise DomainError("linear latency needs a > 0 and b = 0")
        elif self.kind == "affine":
            if self.a < 0 or self.b < 0:
                raise DomainError("affine latency needs a, b >= 0")
        elif self.kind == "general":
            pts = tuple((as_fraction(x), as_fraction(y)) for x, y in self.table)
            if len(pts) < 2 or pts[0][0] != 0:
                raise DomainError("tabulated latency needs >= 2 points starting at x = 0")
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                if x1 <= x0:
                    raise DomainError("table abscissae must be strictly increasing")
                if y1 < y0:
                    raise DomainError("tabulated latency must be nondecreasing")
            if pts[0][1] < 0:
                raise DomainError("latencies are nonnegative")
            set_(self, "table", pts)
        else:
            raise DomainError(f"unknown latency kind {self.kind!r}")

        slope = self.max_slope()
        if self.xi is None:
            set_(self, "xi", slope if slope > 0 else Fraction(1))
        else:
            set_(self, "xi", as_fraction(self.xi))
            if self.xi <= 0:
                raise DomainError("Lipschitz constant must be positive")
            if slope > self.xi:
                raise DomainError(f"Lipschitz constant {self.xi} below actual slope {slope}")

    @classmethod
    def linear(cls, a) -> "LatencyFunction":
        return cls("linear", a=a)

    @classmethod
    def affine(cls, a, b) -> "LatencyFunction":
        return cls("affine", a=a, b=b)

    @classmethod
    def tabulated(cls, points: Iterable[tuple], xi=None) -> "LatencyFunction":
        return cls("general", table=tuple(points), xi=xi)

    def max_slope(self) -> Fraction:
        if self.kind != "general":
            return self.a
        return max((y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(self.table, self.table[1:]))

    @property
    def domain_end(self) -> Fraction | None:
        """Largest admissible load, or None when unbounded."""
        return self.table[-1][0] if self.kind == "general" else None

    @property
    def strictly_increasing(self) -> bool:
        if self.kind != "general":
            return self.a > 0
        return all(y1 > y0 for (_, y0), (_, y1) in zip(self.table, self.table[1:]))

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        if x < 0:
            raise DomainError(f"negative load {x}")
        if self.kind != "general":
            return self.a * x + self.b
        if x > self.table[-1][0]:
            raise DomainError(f"load {x} outside tabulated domain [0, {self.table[-1][0]}]")
        for (x0, y0), (x1, y1) in zip(self.table, self.table[1:]):
            if x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        raise AssertionError("unreachable")

    def inverse(self, lam: Fraction) -> Fraction | None:
        """Largest load with latency <= lam; None means unbounded, 0 if c(0) > lam."""
        lam = as_fraction(lam)
        if self.kind != "general":
            if lam < self.b:
                return Fraction(0)
            if self.a == 0:
                return None
            return (lam - self.b) / self.a
        pts = self.table
        if lam < pts[0][1]:
            return Fraction(0)
        if lam >= pts[-1][1]:
            return pts[-1][0]
        best = Fraction(0)
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if y1 <= lam:
                best = x1
            elif y0 <= lam:
                best = x0 + (lam - y0) * (x1 - x0) / (y1 - y0)
                break
            else:
                break
        return best

    def inverse_breakpoints(self) -> list[Fraction]:
        """Latency levels at which :meth:`inverse` changes slope or jumps."""
        if self.kind != "general":
            return [self.b]
        return sorted({y for _, y in self.table})

    def scaled(self, alpha) -> "LatencyFunction":
        alpha = as_fraction(alpha)
        if self.kind == "general":
            return LatencyFunction.tabulated([(x, alpha * y) for x, y in self.table], xi=alpha * self.xi)
        return LatencyFunction(self.kind, a=alpha * self.a, b=alpha * self.b, xi=alpha * self.xi)

    def stretched(self, r) -> "LatencyFunction":
        """The function ``x -> c(r*x)``."""
        r = as_fraction(r)
        if self.kind == "general":
            return LatencyFunction.tabulated([(x / r, y) for x, y in self.table], xi=r * self.xi)
        return LatencyFunction(self.kind, a=r * self.a, b=self.b, xi=r * self.xi)

    def __str__(self) -> str:
        if self.kind == "linear":
            return f"{self.a}x"
        if self.kind == "affine":
            return f"{self.a}x+{self.b}"
        return "pwl[" + ", ".join(f"({x},{y})" for x, y in self.table) + "]"


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    latency: LatencyFunction


def _reaches(adj: Mapping[str, list[str]], src: str, dst: str) -> bool:
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


@dataclass(frozen=True)
class RoutingInstance:
    """A directed s-t network with one latency function per edge and a rate.

    Parallel edges are allowed; self-loops are not. A rate of 0 is accepted as
    the degenerate "no traffic" instance.
    """

    nodes: tuple[str, ...]
    source: str
    sink: str
    edges: tuple[Edge, ...]
    rate: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "rate", as_fraction(self.rate))
        if len(set(self.nodes)) != len(self.nodes):
            raise StructureError("duplicate node id")
        nodes = set(self.nodes)
        if self.source not in nodes or self.sink not in nodes:
            raise StructureError("source and sink must be nodes of the network")
        if self.source == self.sink:
            raise StructureError("source and sink must differ")
        if self.rate < 0:
            raise DomainError("rate must be nonnegative")
        ids = set()
        for e in self.edges:
            if e.id in ids:
                raise StructureError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            if e.tail not in nodes or e.head not in nodes:
                raise StructureError(f"edge {e.id!r} references an unknown node")
            if e.tail == e.head:
                raise StructureError(f"edge {e.id!r} is a self-loop")
            end = e.latency.domain_end
            if end is not None and end < self.rate:
                raise DomainError(f"latency of edge {e.id!r} is tabulated only up to {end} < rate")
        if not _reaches(self.successors, self.source, self.sink):
            raise StructureError("no s-t path")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.nodes}
        for e in sorted(self.edges, key=lambda e: e.id):
            out[e.tail].append(e)
        return out

    @cached_property
    def successors(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for e in self.edges:
            adj[e.tail].append(e.head)
        return adj

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    @property
    def latency_kinds(self) -> set[str]:
        return {e.latency.kind for e in self.edges}

    def subnetwork(self, edge_ids: Iterable[str]) -> "RoutingInstance":
        """Keep only ``edge_ids`` (same nodes, terminals, latencies and rate)."""
        keep = set(edge_ids)
        missing = keep - set(self.edge)
        if missing:
            raise StructureError(f"unknown edge ids {sorted(missing)}")
        return RoutingInstance(self.nodes, self.source, self.sink,
                               tuple(e for e in self.edges if e.id in keep), self.rate)

    def connects(self, edge_ids: Iterable[str]) -> bool:
        """Whether the given edge subset still contains an s-t path."""
        adj: dict[str, list[str]] = {}
        for i in edge_ids:
            e = self.edge[i]
            adj.setdefault(e.tail, []).append(e.head)
        return _reaches(adj, self.source, self.sink)

    def with_rate(self, rate) -> "RoutingInstance":
        return RoutingInstance(self.nodes, self.source, self.sink, self.edges, as_fraction(rate))

    def with_latencies(self, latencies: Mapping[str, LatencyFunction]) -> "RoutingInstance":
        edges = tuple(Edge(e.id, e.tail, e.head, latencies.get(e.id, e.latency)) for e in self.edges)
        return RoutingInstance(self.nodes, self.source, self.sink, edges, self.rate)

    def path_nodes(self, path: Sequence[str]) -> list[str]:
        """Vertex sequence of ``path``; raises FeasibilityError unless it is a simple s-t path."""
        if not path:
            raise FeasibilityError("empty path")
        cur = self.source
        seen = [cur]
        for eid in path:
            e = self.edge.get(eid)
            if e is None:
                raise FeasibilityError(f"path uses unknown edge {eid!r}")
            if e.tail != cur:
                raise FeasibilityError(f"path is not contiguous at edge {eid!r}")
            cur = e.head
            if cur in seen:
                raise FeasibilityError(f"path revisits node {cur!r}")
            seen.append(cur)
        if cur != self.sink:
            raise FeasibilityError("path does not end at the sink")
        return seen


@dataclass(frozen=True)
class Flow:
    """Path-indexed flow; zero entries are dropped, so keys are exactly the used paths."""

    instance: RoutingInstance = field(repr=False)
    path_flows: Mapping[Path, Fraction] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        flows: dict[Path, Fraction] = {}
        for p, v in self.path_flows.items():
            p = tuple(p)
            v = as_fraction(v)
            if v < 0:
                raise FeasibilityError(f"negative flow {v} on path {p}")
            self.instance.path_nodes(p)
            if v:
                flows[p] = flows.get(p, Fraction(0)) + v
        total = sum(flows.values(), Fraction(0))
        if total != self.instance.rate:
            raise FeasibilityError(f"flow routes {total}, rate is {self.instance.rate}")
        object.__setattr__(self, "path_flows", dict(sorted(flows.items())))

    @property
    def used_paths(self) -> list[Path]:
        return list(self.path_flows)

    @cached_property
    def loads(self) -> dict[str, Fraction]:
        loads = {e.id: Fraction(0) for e in self.instance.edges}
        for p, v in self.path_flows.items():
            for eid in p:
                loads[eid] += v
        return loads

    def on(self, instance: RoutingInstance) -> "Flow":
        """The same path flow viewed in another instance (e.g. a super- or subnetwork)."""
        return Flow(instance, self.path_flows)


@dataclass(frozen=True)
class CostReport:
    edge_latencies: dict[str, Fraction]
    path_bottlenecks: dict[Path, Fraction]
    bottleneck: Fraction


def _check_feasible(flow: Flow) -> None:
    total = sum(flow.path_flows.values(), Fraction(0))
    if total != flow.instance.rate:
        raise FeasibilityError(f"flow routes {total}, rate is {flow.instance.rate}")


def edge_loads(flow: Flow) -> dict[str, Fraction]:
    """Per-edge load ``f_e``; edges on no used path map to 0."""
    _check_feasible(flow)
    return dict(flow.loads)


def edge_latencies(flow: Flow) -> dict[str, Fraction]:
    inst = flow.instance
    return {e.id: e.latency(flow.loads[e.id]) for e in inst.edges}


def path_bottleneck(path: Sequence[str], latencies: Mapping[str, Fraction]) -> Fraction:
    return max(latencies[e] for e in path)


def bottleneck_cost(flow: Flow) -> CostReport:
    _check_feasible(flow)
    lat = edge_latencies(flow)
    per_path = {p: path_bottleneck(p, lat) for p in flow.path_flows}
    return CostReport(lat, per_path, max(per_path.values(), default=Fraction(0)))


def minimax_labels(instance: RoutingInstance, latencies: Mapping[str, Fraction],
                   allowed: set[str] | None = None) -> tuple[dict[str, Fraction], dict[str, str]]:
    """Minimum bottleneck over s-u walks for every reachable u (label of s is 0).

    Returns the labels and a predecessor-edge map describing one optimal path
    per node. Ties are broken by edge id, so the output is deterministic.
    """
    labels: dict[str, Fraction] = {instance.source: Fraction(0)}
    pred: dict[str, str] = {}
    heap = [(Fraction(0), instance.source)]
    done: set[str] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for e in instance.out_edges[u]:
            if allowed is not None and e.id not in allowed:
                continue
            nd = max(d, latencies[e.id])
            if e.head not in labels or nd < labels[e.head]:
                labels[e.head] = nd
                pred[e.head] = e.id
                heapq.heappush(heap, (nd, e.head))
    return labels, pred


def min_bottleneck_path(instance: RoutingInstance, latencies: Mapping[str, Fraction],
                        allowed: set[str] | None = None) -> tuple[Fraction, Path] | None:
    """Cheapest s-t path by bottleneck cost, or None if t is unreachable."""
    labels, pred = minimax_labels(instance, latencies, allowed)
    if instance.sink not in labels:
        return None
    path = []
    v = instance.sink
    while v != instance.source:
        eid = pred[v]
        path.append(eid)
        v = instance.edge[eid].tail
    return labels[instance.sink], tuple(reversed(path))


def is_eps_nash(flow: Flow, eps) -> bool:
    """Every used path is within ``eps`` of the cheapest s-t path's bottleneck."""
    eps = as_fraction(eps)
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    report = bottleneck_cost(flow)
    if not flow.path_flows:
        return True
    best = min_bottleneck_path(flow.instance, report.edge_latencies)
    assert best is not None
    return report.bottleneck <= best[0] + eps


def scale_latencies(instance: RoutingInstance, alpha) -> RoutingInstance:
    """Replace every ``c_e`` by ``alpha * c_e``; Nash and optimal flows are unchanged."""
    alpha = as_fraction(alpha)
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if alpha == 1:
        return instance
    return instance.with_latencies({e.id: e.latency.scaled(alpha) for e in instance.edges})


def normalize_rate(instance: RoutingInstance) -> RoutingInstance:
    """Equivalent rate-1 instance with latencies ``c_e(r x)``; flows map by ``f -> f / r``."""
    r = instance.rate
    if r <= 0:
        raise DomainError("rate must be positive to normalize")
    if r == 1:
        return instance
    stretched = instance.with_latencies({e.id: e.latency.stretched(r) for e in instance.edges})
    return stretched.with_rate(1)


def rescale_flow(flow: Flow, target: RoutingInstance) -> Flow:
    """Map a flow onto ``target`` (same graph, different rate) by proportional scaling."""
    src = flow.instance.rate
    if src == 0:
        raise DomainError("cannot rescale a zero-rate flow")
    k = target.rate / src
    return Flow(target, {p: v * k for p, v in flow.path_flows.items()})
