"""Seeded random instances and flows for experiments and property tests."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .game import Edge, Flow, LatencyFunction, RoutingInstance
from .topology import PathSet, enumerate_paths

DEFAULT_SLOPES = tuple(Fraction(k, 4) for k in range(1, 9))


def _eid(i: int) -> str:
    return f"e{i:03d}"


def _latency(rng: random.Random, slopes: Sequence[Fraction], affine: bool) -> LatencyFunction:
    a = rng.choice(slopes)
    if affine and rng.random() < 0.5:
        return LatencyFunction.affine(a, Fraction(rng.randint(0, 4), 4))
    return LatencyFunction.linear(a)


def random_dag(rng: random.Random, n: int, m: int, *, slopes: Sequence[Fraction] = DEFAULT_SLOPES,
               affine: bool = False, rate=1) -> RoutingInstance:
    """DAG on ``v0 .. v{n-1}`` (s = v0, t = last) with a guaranteed s-t path and ``m`` edges."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    nodes = [f"v{i}" for i in range(n)]
    hops = sorted(rng.sample(range(1, n - 1), min(n - 2, rng.randint(0, max(0, min(n - 2, m - 1))))))
    spine = [0, *hops, n - 1]
    pairs = list(zip(spine, spine[1:]))[:m]
    while len(pairs) < m:
        i, j = sorted(rng.sample(range(n), 2))
        pairs.append((i, j))
    rng.shuffle(pairs)
    edges = tuple(Edge(_eid(k), nodes[i], nodes[j], _latency(rng, slopes, affine))
                  for k, (i, j) in enumerate(pairs))
    return RoutingInstance(tuple(nodes), nodes[0], nodes[-1], edges, rate)


def random_series_parallel(rng: random.Random, m: int, *, slopes: Sequence[Fraction] = DEFAULT_SLOPES,
                           affine: bool = False, rate=1) -> RoutingInstance:
    """Two-terminal series-parallel network with ``m`` edges, grown by random edge splits."""
    arcs = [("s", "t")]
    fresh = 0
    while len(arcs) < m:
        k = rng.randrange(len(arcs))
        u, v = arcs[k]
        if rng.random() < 0.5:
            w = f"w{fresh}"
            fresh += 1
            arcs[k:k + 1] = [(u, w), (w, v)]
        else:
            arcs.insert(k + 1, (u, v))
    nodes = ["s", *sorted({x for a in arcs for x in a} - {"s", "t"}), "t"]
    edges = tuple(Edge(_eid(i), u, v, _latency(rng, slopes, affine)) for i, (u, v) in enumerate(arcs))
    return RoutingInstance(tuple(nodes), "s", "t", edges, rate)


def random_flow(rng: random.Random, instance: RoutingInstance, paths: PathSet | None = None,
                max_support: int | None = None, max_weight: int = 12) -> Flow:
    """Random path flow with rational entries summing to the instance's rate."""
    paths = enumerate_paths(instance) if paths is None else paths
    if instance.rate == 0:
        return Flow(instance, {})
    size = rng.randint(1, len(paths) if max_support is None else min(max_support, len(paths)))
    chosen = rng.sample(list(paths), size)
    w = [rng.randint(1, max_weight) for _ in chosen]
    total = sum(w)
    return Flow(instance, {p: Fraction(x, total) * instance.rate for p, x in zip(chosen, w)})


def random_subnetwork(rng: random.Random, instance: RoutingInstance, keep: float = 0.7) -> RoutingInstance:
    """Random edge subset that still connects s to t (falls back to one path)."""
    ids = [e for e in instance.edge_ids if rng.random() < keep]
    if not instance.connects(ids):
        ids = sorted(set(ids) | set(rng.choice(list(enumerate_paths(instance)))))
    return instance.subnetwork(ids)
