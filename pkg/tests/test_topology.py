import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from braess.errors import CapacityError
from braess.game import Edge, Flow, LatencyFunction, RoutingInstance
from braess.generators import random_dag, random_flow, random_series_parallel
from braess.topology import (decompose_edge_flow, enumerate_paths, enumerate_st_cuts, max_flow,
                             max_flow_detailed, min_cut_value_by_enumeration, series_parallel_decompose,
                             useful_edges)

from instances import YES_D, gap, parallel, single_edge, theta

F = Fraction


def nx_path_count(inst: RoutingInstance) -> int:
    g = nx.MultiDiGraph()
    g.add_nodes_from(inst.nodes)
    for e in inst.edges:
        g.add_edge(e.tail, e.head, key=e.id)
    return sum(1 for _ in nx.all_simple_edge_paths(g, inst.source, inst.sink))


def test_paths_examples():
    assert list(enumerate_paths(theta())) == [("su", "ut"), ("su", "uv", "vt"), ("sv", "vt")]
    assert len(enumerate_paths(single_edge())) == 1


def test_gap_network_path_count_matches_independent_enumeration():
    inst = gap(YES_D).instance
    # frozen from networkx.all_simple_edge_paths
    assert nx_path_count(inst) == 10
    assert len(enumerate_paths(inst)) == 10


def test_path_cap_is_enforced():
    with pytest.raises(CapacityError, match="bound of 9"):
        enumerate_paths(gap(YES_D).instance, max_paths=9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_paths_match_networkx_and_are_sorted_simple(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 7), rng.randint(1, 12))
    ps = enumerate_paths(inst)
    assert len(ps) == nx_path_count(inst)
    assert list(ps) == sorted(set(ps))
    for p in ps:
        inst.path_nodes(p)


def test_cuts_examples():
    cuts = enumerate_st_cuts(theta())
    assert set(cuts) == {frozenset({"su", "sv"}), frozenset({"sv", "uv", "ut"}),
                         frozenset({"su", "vt"}), frozenset({"ut", "vt"})}
    assert len(cuts) == 4
    assert enumerate_st_cuts(single_edge()) == [frozenset({"e"})]
    assert enumerate_st_cuts(parallel(1, 1)) == [frozenset({"p0", "p1"})]
    with pytest.raises(CapacityError):
        enumerate_st_cuts(theta(), max_nodes=3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_every_cut_meets_every_path(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 7), rng.randint(1, 12))
    paths = enumerate_paths(inst)
    for cut in enumerate_st_cuts(inst):
        assert all(cut.intersection(p) for p in paths)


def test_max_flow_examples():
    assert max_flow(theta(), {e: 1 for e in theta().edge_ids}) == 2
    assert max_flow(single_edge(), {"e": 5}) == 5
    g = gap(YES_D).instance
    caps = {e.id: 1 / e.latency.a for e in g.edges}  # c_e^{-1}(1)
    assert max_flow(g, caps) == 4


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_max_flow_equals_min_cut_and_networkx(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 8), rng.randint(1, 14))
    caps = {e: F(rng.randint(0, 12), rng.randint(1, 4)) for e in inst.edge_ids}
    value = max_flow(inst, caps)
    assert value == min_cut_value_by_enumeration(inst, caps)
    g = nx.DiGraph()
    g.add_nodes_from(inst.nodes)
    for e in inst.edges:  # merge parallel arcs for networkx
        prev = g.get_edge_data(e.tail, e.head, {"capacity": 0})["capacity"]
        g.add_edge(e.tail, e.head, capacity=prev + float(caps[e.id]))
    assert float(value) == pytest.approx(nx.maximum_flow_value(g, inst.source, inst.sink))


def test_max_flow_limit_and_residual_side():
    inst = theta()
    arcs = [(e.id, e.tail, e.head, F(1)) for e in inst.edges]
    value, flows, side = max_flow_detailed(inst.nodes, arcs, "s", "t", limit=F(1, 2))
    assert value == F(1, 2)
    value, flows, side = max_flow_detailed(inst.nodes, arcs, "s", "t")
    assert value == 2 and side == {"s"}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_decomposition_reproduces_edge_loads(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 7), rng.randint(1, 12))
    f = random_flow(rng, inst)
    g = Flow(inst, decompose_edge_flow(inst, f.loads))
    assert g.loads == f.loads


def test_decomposition_cancels_cycles():
    L = LatencyFunction.linear(1)
    inst = RoutingInstance(("s", "a", "b", "t"), "s", "t",
                           (Edge("sa", "s", "a", L), Edge("ab", "a", "b", L), Edge("ba", "b", "a", L),
                            Edge("bt", "b", "t", L)))
    paths = decompose_edge_flow(inst, {"sa": 1, "ab": 2, "ba": 1, "bt": 1})
    assert paths == {("sa", "ab", "bt"): 1}


def test_useful_edges_skip_dead_ends():
    L = LatencyFunction.linear(1)
    inst = RoutingInstance(("s", "x", "t"), "s", "t", (Edge("st", "s", "t", L), Edge("sx", "s", "x", L)))
    assert useful_edges(inst) == {"st"}


def test_series_parallel_examples():
    tree = series_parallel_decompose(parallel(1, 2))
    assert tree.kind == "parallel" and sorted(tree.leaves()) == ["p0", "p1"]
    L = LatencyFunction.linear(1)
    path = RoutingInstance(("s", "u", "t"), "s", "t", (Edge("a", "s", "u", L), Edge("b", "u", "t", L)))
    tree = series_parallel_decompose(path)
    assert tree.kind == "series" and tree.leaves() == ["a", "b"]
    assert series_parallel_decompose(theta()) is None


def _realized_matches(inst, tree):
    triples = sorted(tree.realize())
    return triples == sorted((e.id, e.tail, e.head) for e in inst.edges)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 14))
def test_random_series_parallel_round_trip(seed, m):
    inst = random_series_parallel(random.Random(seed), m)
    tree = series_parallel_decompose(inst)
    assert tree is not None and _realized_matches(inst, tree)


def test_theta_inside_larger_network_is_rejected():
    L = LatencyFunction.linear(1)
    base = theta()
    inst = RoutingInstance(base.nodes + ("x",), "s", "t",
                           base.edges + (Edge("sx", "s", "x", L), Edge("xt", "x", "t", L)))
    assert series_parallel_decompose(inst) is None
