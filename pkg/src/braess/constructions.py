"""Gap gadgets built from 2-directed-disjoint-paths inputs, and their witness flows.

A level-0 gadget wraps a directed graph D with four extra nodes (s, t, u, v)
and nine external edges. The amplifier replaces every external edge except
e2 by a copy (an *edgework*) of the previous gadget, multiplying the two
bottleneck thresholds by 4 and 3. Ids are hierarchical: ``L0.e7`` is an
external edge, ``L1.G4.L0.e7`` the same edge inside edgework G4 at level 1,
``L1.D.x`` an edge of the fresh D copy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapacityError, DomainError, StructureError
from .game import Edge, Flow, LatencyFunction, Path, RoutingInstance, as_fraction
from .equilibrium import worst_nash_value

DEFAULT_MAX_DDP_NODES = 16
EXTERNAL = ("e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "e9")
_ENDPOINTS = {
    "e1": ("s", "u"), "e2": ("u", "v"), "e3": ("v", "t"), "e4": ("s", "v"), "e5": ("v", "s1"),
    "e6": ("s", "s2"), "e7": ("t1", "u"), "e8": ("u", "t"), "e9": ("t2", "t"),
}


@dataclass(frozen=True)
class TwoDDPInstance:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]  # (id, tail, head)
    s1: str
    s2: str
    t1: str
    t2: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        terms = (self.s1, self.s2, self.t1, self.t2)
        if len(set(terms)) != 4:
            raise StructureError("the four terminals must be distinct")
        nodes = set(self.nodes)
        if not nodes.issuperset(terms):
            raise StructureError("terminals must be nodes of D")
        ids = [e[0] for e in self.edges]
        if len(set(ids)) != len(ids):
            raise StructureError("duplicate edge id in D")
        for eid, u, v in self.edges:
            if u not in nodes or v not in nodes:
                raise StructureError(f"edge {eid!r} of D references an unknown node")
            if u == v:
                raise StructureError(f"edge {eid!r} of D is a self-loop")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], s1="s1", s2="s2", t1="t1", t2="t2"):
        """Build D from ``(tail, head)`` pairs; edge ids are ``tail-head`` (numbered if repeated)."""
        edges, seen = [], {}
        nodes = [s1, s2, t1, t2]
        for u, v in pairs:
            base = f"{u}-{v}"
            k = seen.get(base, 0)
            seen[base] = k + 1
            edges.append((base if k == 0 else f"{base}.{k}", u, v))
            for x in (u, v):
                if x not in nodes:
                    nodes.append(x)
        return cls(tuple(nodes), tuple(edges), s1, s2, t1, t2)

    @property
    def edge(self) -> dict[str, tuple[str, str, str]]:
        return {e[0]: e for e in self.edges}

    def restrict(self, edge_ids: Iterable[str]) -> "TwoDDPInstance":
        keep = set(edge_ids)
        return TwoDDPInstance(self.nodes, tuple(e for e in self.edges if e[0] in keep),
                              self.s1, self.s2, self.t1, self.t2)

    def paths(self, a: str, b: str, avoid_nodes: frozenset[str] = frozenset(),
              avoid_edges: frozenset[str] = frozenset()) -> list[tuple[str, ...]]:
        """Simple a-b paths as edge-id tuples, lexicographic."""
        out_edges: dict[str, list[tuple[str, str, str]]] = {}
        for e in sorted(self.edges):
            if e[0] not in avoid_edges:
                out_edges.setdefault(e[1], []).append(e)
        out: list[tuple[str, ...]] = []
        if a in avoid_nodes:
            return out
        stack: list[str] = []
        seen = {a}

        def dfs(x):
            if x == b:
                out.append(tuple(stack))
                return
            for eid, _, y in out_edges.get(x, ()):
                if y in seen or y in avoid_nodes:
                    continue
                seen.add(y)
                stack.append(eid)
                dfs(y)
                stack.pop()
                seen.discard(y)

        dfs(a)
        return sorted(out)

    def path_nodes(self, path: Sequence[str], start: str) -> list[str]:
        nodes = [start]
        for eid in path:
            nodes.append(self.edge[eid][2])
        return nodes

    def cross_paths(self) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
        """Edge-disjoint s1->t2 and s2->t1 paths (lexicographically first pair), or None."""
        for p in self.paths(self.s1, self.t2):
            qs = self.paths(self.s2, self.t1, avoid_edges=frozenset(p))
            if qs:
                return p, qs[0]
        return None


def _reach(edges: Iterable[tuple[str, str, str]], start: str) -> set[str]:
    adj: dict[str, list[str]] = {}
    for _, u, v in edges:
        adj.setdefault(u, []).append(v)
    seen = {start}
    q = deque([start])
    while q:
        x = q.popleft()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                q.append(y)
    return seen


def classify_2ddp(d: TwoDDPInstance, max_nodes: int = DEFAULT_MAX_DDP_NODES):
    """Brute-force 2DDP: vertex-disjoint s1->t1 and s2->t2 paths.

    Returns ``(True, (p1, p2))`` with the lexicographically first witness pair,
    or ``(False, None)``.
    """
    if len(d.nodes) > max_nodes:
        raise CapacityError("number of 2DDP nodes", max_nodes, len(d.nodes))
    for p1 in d.paths(d.s1, d.t1, avoid_nodes=frozenset({d.s2, d.t2})):
        used = frozenset(d.path_nodes(p1, d.s1))
        p2 = d.paths(d.s2, d.t2, avoid_nodes=used)
        if p2:
            return True, (p1, p2[0])
    return False, None


def is_good_subnetwork(d: TwoDDPInstance, edge_ids: Iterable[str]) -> bool:
    """Reachability test for a subgraph of D that certifies a YES answer.

    Each of s1, s2 must reach t1 or t2, each of t1, t2 must be reached from
    s1 or s2, and at least one of the cross connections s1->t2, s2->t1 must
    be missing.
    """
    edges = [e for e in d.edges if e[0] in set(edge_ids)]
    r1, r2 = _reach(edges, d.s1), _reach(edges, d.s2)
    targets = {d.t1, d.t2}
    if not (r1 & targets and r2 & targets):
        return False
    if d.t1 not in r1 | r2 or d.t2 not in r1 | r2:
        return False
    return d.t2 not in r1 or d.t1 not in r2


@dataclass(frozen=True)
class DCopy:
    """One embedded copy of D: where its nodes and edges live in the gadget."""

    prefix: str
    node_map: dict[str, str]
    edge_map: dict[str, str]

    def edges_in(self, edge_ids: Iterable[str]) -> list[str]:
        """D edge ids whose image lies in ``edge_ids``."""
        keep = set(edge_ids)
        return [k for k, v in self.edge_map.items() if v in keep]


@dataclass(frozen=True)
class GapNetwork:
    instance: RoutingInstance
    gamma1: Fraction
    gamma2: Fraction
    external_edges: dict[str, str]  # label -> edge id (e2, level 0) or edgework prefix
    d_copies: tuple[DCopy, ...]
    level: int
    eps: Fraction
    d: TwoDDPInstance
    prefix: str
    inner: "GapNetwork | None" = field(default=None, repr=False)

    @property
    def eps_schedule(self) -> tuple[Fraction, ...]:
        """The ε used at each level, from level 0 upward."""
        below = self.inner.eps_schedule if self.inner is not None else ()
        return below + (self.eps,)

    @property
    def terminal_nodes(self) -> dict[str, str]:
        p = self.prefix
        return {"s": self.instance.source, "t": self.instance.sink, "u": f"{p}.u", "v": f"{p}.v"}

    def metadata(self) -> dict:
        return {
            "gamma1": self.gamma1, "gamma2": self.gamma2, "level": self.level, "eps": self.eps,
            "eps_schedule": list(self.eps_schedule),
            "external_edges": dict(self.external_edges),
            "d_copies": [{"prefix": c.prefix, "node_map": c.node_map, "edge_map": c.edge_map}
                         for c in self.d_copies],
            "ddp": {"nodes": list(self.d.nodes), "edges": [list(e) for e in self.d.edges],
                    "s1": self.d.s1, "s2": self.d.s2, "t1": self.d.t1, "t2": self.d.t2},
        }


def _embed_d(d: TwoDDPInstance, prefix: str, eps: Fraction):
    node_map = {x: f"{prefix}.D.{x}" for x in d.nodes}
    edge_map = {eid: f"{prefix}.D.{eid}" for eid, _, _ in d.edges}
    lat = LatencyFunction.linear(eps)
    edges = [Edge(edge_map[eid], node_map[u], node_map[v], lat) for eid, u, v in d.edges]
    return DCopy(f"{prefix}.D", node_map, edge_map), edges


def _endpoint_nodes(prefix: str, copy: DCopy, d: TwoDDPInstance) -> dict[str, str]:
    return {"s": f"{prefix}.s", "t": f"{prefix}.t", "u": f"{prefix}.u", "v": f"{prefix}.v",
            "s1": copy.node_map[d.s1], "s2": copy.node_map[d.s2],
            "t1": copy.node_map[d.t1], "t2": copy.node_map[d.t2]}


def _check_ddp(d: TwoDDPInstance) -> None:
    if d.cross_paths() is None:
        raise StructureError("D must contain edge-disjoint s1->t2 and s2->t1 paths")


def build_gap_network(d: TwoDDPInstance, eps=Fraction(1, 8), rate=1) -> GapNetwork:
    """Level-0 gadget: ``B* = r/4``; YES inputs admit a subnetwork with worst Nash ``r/4``,
    NO inputs force worst Nash ``>= r/3`` in every subnetwork."""
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise DomainError("eps must lie in (0, 1/4)")
    _check_ddp(d)
    prefix = "L0"
    copy, d_edges = _embed_d(d, prefix, eps)
    ends = _endpoint_nodes(prefix, copy, d)
    half, one, small = LatencyFunction.linear(Fraction(1, 2)), LatencyFunction.linear(1), LatencyFunction.linear(eps)
    edges = []
    for label in EXTERNAL:
        lat = half if label in ("e1", "e3") else small if label == "e2" else one
        a, b = _ENDPOINTS[label]
        edges.append(Edge(f"{prefix}.{label}", ends[a], ends[b], lat))
    nodes = [ends["s"], ends["t"], ends["u"], ends["v"]] + [copy.node_map[x] for x in d.nodes]
    inst = RoutingInstance(tuple(nodes), ends["s"], ends["t"], tuple(edges + d_edges), rate)
    return GapNetwork(inst, Fraction(4), Fraction(3), {l: f"{prefix}.{l}" for l in EXTERNAL},
                      (copy,), 0, eps, d, prefix)


def amplify_gap(d: TwoDDPInstance, gap: GapNetwork, eps=None) -> GapNetwork:
    """Replace every external edge except e2 by an edgework copy of ``gap``.

    Edgeworks G1 and G3 have their latencies halved; the gadget's terminals
    are identified with the endpoints of the replaced edge. Thresholds grow
    to ``4*gamma1`` and ``3*gamma2``.
    """
    eps = Fraction(1, 8 * gap.gamma1) if eps is None else as_fraction(eps)
    if not 0 < eps < 1 / (4 * gap.gamma1):
        raise DomainError(f"eps must lie in (0, {1 / (4 * gap.gamma1)})")
    if d != gap.d:
        raise StructureError("amplification must reuse the gadget's own D")
    level = gap.level + 1
    prefix = f"L{level}"
    copy, d_edges = _embed_d(d, prefix, eps)
    ends = _endpoint_nodes(prefix, copy, d)
    base = gap.instance
    nodes = [ends["s"], ends["t"], ends["u"], ends["v"]] + [copy.node_map[x] for x in d.nodes]
    edges: list[Edge] = []
    externals: dict[str, str] = {}
    copies: list[DCopy] = []
    for label in EXTERNAL:
        a, b = _ENDPOINTS[label]
        if label == "e2":
            eid = f"{prefix}.e2"
            edges.append(Edge(eid, ends[a], ends[b], LatencyFunction.linear(eps)))
            externals[label] = eid
            continue
        work = f"{prefix}.G{label[1:]}"
        externals[label] = work
        rename = {base.source: ends[a], base.sink: ends[b]}
        for x in base.nodes:
            if x not in rename:
                rename[x] = f"{work}.{x}"
                nodes.append(rename[x])
        factor = Fraction(1, 2) if label in ("e1", "e3") else Fraction(1)
        for e in base.edges:
            lat = e.latency.scaled(factor) if factor != 1 else e.latency
            edges.append(Edge(f"{work}.{e.id}", rename[e.tail], rename[e.head], lat))
        for c in gap.d_copies:
            copies.append(DCopy(f"{work}.{c.prefix}", {k: rename[v] for k, v in c.node_map.items()},
                                {k: f"{work}.{v}" for k, v in c.edge_map.items()}))
    inst = RoutingInstance(tuple(nodes), ends["s"], ends["t"], tuple(edges + d_edges), base.rate)
    return GapNetwork(inst, 4 * gap.gamma1, 3 * gap.gamma2, externals, (copy, *copies), level,
                      eps, d, prefix, inner=gap)


def build_gap_tower(d: TwoDDPInstance, levels: int = 0, eps: Sequence | None = None, rate=1) -> GapNetwork:
    """Level-0 gadget amplified ``levels`` times; ``eps`` optionally gives ε per level."""
    if levels < 0:
        raise DomainError("levels must be nonnegative")
    if eps is not None and len(eps) != levels + 1:
        raise DomainError("need one eps per level")
    gap = build_gap_network(d, Fraction(1, 8) if eps is None else eps[0], rate)
    for i in range(1, levels + 1):
        gap = amplify_gap(d, gap, None if eps is None else eps[i])
    return gap


def saturation_rate(subedgework: RoutingInstance, target_cost) -> Fraction:
    """Rate at which the worst Nash cost reaches ``target_cost`` (linear homogeneity)."""
    target = as_fraction(target_cost)
    if target <= 0:
        raise DomainError("target cost must be positive")
    unit = worst_nash_value(subedgework.with_rate(1))
    if unit == 0:
        raise DomainError("worst Nash cost at rate 1 is 0; saturation rate undefined")
    return target / unit


# ---------------------------------------------------------------------------
# witness flows

@dataclass(frozen=True)
class WitnessFlow:
    role: str  # "optimal" | "good" | "bad"
    flow: Flow
    subnetwork: frozenset[str]
    expected_cost: Fraction


# Each route is a list of segments: ("ext", label), ("p",), ("q",) for a D path.
_ROUTES = {
    "optimal": [(Fraction(1, 4), ["e4", "e5", "P", "e9"]), (Fraction(1, 4), ["e6", "Q", "e7", "e8"]),
                (Fraction(1, 2), ["e1", "e2", "e3"])],
    "good": [(Fraction(1, 4), ["e4", "e5", "P", "e7", "e8"]), (Fraction(1, 4), ["e6", "Q", "e9"]),
             (Fraction(1, 2), ["e1", "e2", "e3"])],
    "bad": [(Fraction(1, 3), ["e1", "e2", "e3"]), (Fraction(1, 3), ["e1", "e2", "e5", "P", "e9"]),
            (Fraction(1, 3), ["e6", "Q", "e7", "e2", "e3"])],
}


def _merge(parts: list[list[tuple[Path, Fraction]]]) -> list[tuple[Path, Fraction]]:
    """North-west-corner merge of equally sized interval lists into concatenated paths."""
    idx = [0] * len(parts)
    left = [parts[i][0][1] if parts[i] else Fraction(0) for i in range(len(parts))]
    out = []
    while idx[0] < len(parts[0]):
        step = min(left)
        out.append((tuple(e for i, part in enumerate(parts) for e in part[idx[i]][0]), step))
        for i in range(len(parts)):
            left[i] -= step
            if left[i] == 0:
                idx[i] += 1
                if idx[i] < len(parts[i]):
                    left[i] = parts[i][idx[i]][1]
    return out


def _take(queue: deque, amount: Fraction) -> list[tuple[Path, Fraction]]:
    out = []
    while amount > 0:
        p, v = queue[0]
        t = min(v, amount)
        out.append((p, t))
        amount -= t
        if t == v:
            queue.popleft()
        else:
            queue[0] = (p, v - t)
    return out


def _role_paths(gap: GapNetwork, role: str, r: Fraction, d_paths) -> tuple[dict[Path, Fraction], set[str]]:
    """Path flow (edge ids of ``gap``) for ``role`` at rate ``r`` plus the certified subnetwork."""
    P, Q = d_paths
    copy = gap.d_copies[0]
    d_seg = {"P": tuple(copy.edge_map[e] for e in P), "Q": tuple(copy.edge_map[e] for e in Q)}
    sub: set[str] = set(d_seg["P"]) | set(d_seg["Q"])
    routes = [(r * share, segs) for share, segs in _ROUTES[role]]
    load: dict[str, Fraction] = {}
    for amount, segs in routes:
        for sg in segs:
            if sg.startswith("e"):
                load[sg] = load.get(sg, Fraction(0)) + amount
    queues: dict[str, deque] = {}
    for label in EXTERNAL:
        ref = gap.external_edges[label]
        if gap.inner is None or label == "e2":
            sub.add(ref)
            queues[label] = deque([((ref,), load[label])]) if load.get(label) else deque()
            continue
        inner_paths, inner_sub = _role_paths(gap.inner, role, load.get(label, Fraction(0)), d_paths)
        if role != "good":
            inner_sub = set(gap.inner.instance.edge_ids)
        sub.update(f"{ref}.{e}" for e in inner_sub)
        queues[label] = deque((tuple(f"{ref}.{e}" for e in p), v) for p, v in inner_paths.items())
    if role != "good":
        sub = set(gap.instance.edge_ids)
    flows: dict[Path, Fraction] = {}
    for amount, segs in routes:
        if amount == 0:
            continue
        parts = [[(d_seg[sg], amount)] if sg in d_seg else _take(queues[sg], amount) for sg in segs]
        for p, v in _merge(parts):
            flows[p] = flows.get(p, Fraction(0)) + v
    return flows, sub


def build_witness_flows(gap: GapNetwork, r) -> list[WitnessFlow]:
    """The explicit flows certifying the gadget's thresholds at rate ``r``.

    ``optimal``: cost ``r/gamma1`` on the full network. ``good``: cost
    ``r/gamma1`` on a subnetwork keeping only vertex-disjoint s1->t1 and
    s2->t2 paths of each D copy (YES inputs only; absent otherwise).
    ``bad``: cost ``r/gamma2`` on the full network, using three routes.
    """
    r = as_fraction(r)
    inst = gap.instance.with_rate(r)
    cross = gap.d.cross_paths()
    assert cross is not None
    verdict, pair = classify_2ddp(gap.d, max_nodes=max(DEFAULT_MAX_DDP_NODES, len(gap.d.nodes)))
    out = []
    for role in ("optimal", "good", "bad"):
        if role == "good" and not verdict:
            continue
        paths = pair if role == "good" else cross
        flows, sub = _role_paths(gap, role, r, paths)
        expected = r / (gap.gamma2 if role == "bad" else gap.gamma1)
        host = inst.subnetwork(sub) if role == "good" else inst
        out.append(WitnessFlow(role, Flow(host, flows), frozenset(sub), expected))
    return out


def good_copies(gap: GapNetwork, edge_ids: Iterable[str]) -> list[str]:
    """Prefixes of the embedded D copies whose restriction to ``edge_ids`` is good."""
    keep = set(edge_ids)
    return [c.prefix for c in gap.d_copies if is_good_subnetwork(gap.d, c.edges_in(keep))]
