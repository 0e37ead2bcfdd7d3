import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from braess.constructions import build_witness_flows
from braess.equilibrium import (is_nash_flow, is_subpath_optimal, optimal_bottleneck_cost, optimal_value,
                                price_of_anarchy, subpath_optimal_nash_flow, worst_nash_flow)
from braess.errors import DomainError, UnsupportedModelError
from braess.game import Edge, Flow, LatencyFunction, RoutingInstance, bottleneck_cost
from braess.generators import random_dag, random_series_parallel, random_subnetwork
from braess.topology import enumerate_paths

from instances import NO_D, YES_D, chain, gap, parallel, theta
from oracles import optimal_by_bisection, optimal_by_edge_lp, worst_nash_by_edge_lp

F = Fraction


def test_optimal_examples():
    cost, witness = optimal_bottleneck_cost(theta())
    assert cost == F(1, 2) and bottleneck_cost(witness).bottleneck == F(1, 2)
    assert optimal_value(gap(YES_D).instance) == 3
    assert optimal_value(gap(NO_D).instance) == 3
    cost, witness = optimal_bottleneck_cost(parallel(1, 2))
    assert cost == F(2, 3)
    assert witness.loads == {"p0": F(2, 3), "p1": F(1, 3)}


def test_two_parallel_edges_against_grid():
    # brute force over x = k/600 on the first edge
    grid = min(max(F(k, 600), 2 * (1 - F(k, 600))) for k in range(601))
    assert grid == optimal_value(parallel(1, 2)) == F(2, 3)


def test_optimal_zero_rate():
    cost, witness = optimal_bottleneck_cost(theta(rate=0))
    assert cost == 0 and witness.path_flows == {}


def test_optimal_with_affine_and_tabulated_latencies():
    A = LatencyFunction.affine
    inst = RoutingInstance(("s", "t"), "s", "t", (Edge("a", "s", "t", A(1, 1)), Edge("b", "s", "t", A(2, 0))))
    assert optimal_value(inst) == F(4, 3)
    # an intercept above the optimum keeps that edge out entirely
    inst = RoutingInstance(("s", "t"), "s", "t", (Edge("a", "s", "t", A(1, 5)), Edge("b", "s", "t", A(1, 0))))
    assert optimal_value(inst) == 1
    T = LatencyFunction.tabulated([(0, 0), (F(1, 2), 1), (1, 1), (2, 4)])
    inst = RoutingInstance(("s", "t"), "s", "t", (Edge("a", "s", "t", T), Edge("b", "s", "t", LatencyFunction.linear(4))), 2)
    assert optimal_value(inst) == pytest.approx(optimal_by_bisection(inst), abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_optimal_matches_lp_oracle(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 7), rng.randint(1, 12), rate=F(rng.randint(1, 6), rng.randint(1, 3)))
    cost, witness = optimal_bottleneck_cost(inst)
    assert float(cost) == pytest.approx(optimal_by_edge_lp(inst), abs=1e-7)
    assert bottleneck_cost(witness).bottleneck == cost


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_optimal_matches_bisection_for_affine(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 6), rng.randint(1, 10), affine=True)
    assert float(optimal_value(inst)) == pytest.approx(optimal_by_bisection(inst), abs=1e-7)


def _disconnects(inst, cut):
    rest = [e for e in inst.edge_ids if e not in cut]
    return not inst.connects(rest)


def test_nash_examples():
    cert = is_nash_flow(Flow(theta(), {("su", "uv", "vt"): 1}))
    assert cert.verdict and cert.blocking_cut == {"su", "vt"}
    cert = is_nash_flow(Flow(theta(), {("su", "ut"): 1}))
    assert not cert.verdict and cert.violation == ("sv", "vt")
    sub = theta().subnetwork(["su", "ut", "sv", "vt"])
    cert = is_nash_flow(Flow(sub, {("su", "ut"): F(1, 2), ("sv", "vt"): F(1, 2)}))
    # every edge sits at the equilibrium level; the reported cut is the one leaving s
    assert cert.verdict and cert.blocking_cut == {"su", "sv"}
    assert _disconnects(sub, cert.blocking_cut)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_certificates_are_consistent(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 6), rng.randint(1, 10))
    paths = list(enumerate_paths(inst))
    chosen = rng.sample(paths, rng.randint(1, len(paths)))
    w = [rng.randint(1, 5) for _ in chosen]
    f = Flow(inst, {p: F(x, sum(w)) for p, x in zip(chosen, w)})
    cert = is_nash_flow(f)
    rep = bottleneck_cost(f)
    if cert.verdict:
        assert _disconnects(inst, cert.blocking_cut)
        assert all(rep.edge_latencies[e] >= rep.bottleneck for e in cert.blocking_cut)
        assert all(b == rep.bottleneck for b in rep.path_bottlenecks.values())
    else:
        lat = rep.edge_latencies
        assert max(lat[e] for e in cert.violation) < rep.bottleneck


def test_worst_nash_examples():
    res = worst_nash_flow(theta())
    assert res.cost == 1 and res.flow.path_flows == {("su", "uv", "vt"): 1} and res.exhaustive
    assert worst_nash_flow(gap(NO_D).instance).cost == 4
    assert worst_nash_flow(parallel(1, 1)).cost == F(1, 2)
    assert worst_nash_flow(theta(rate=0)).cost == 0


def test_worst_nash_rejects_nonlinear():
    inst = RoutingInstance(("s", "t"), "s", "t", (Edge("a", "s", "t", LatencyFunction.affine(1, 1)),))
    with pytest.raises(UnsupportedModelError):
        worst_nash_flow(inst)


def test_worst_nash_is_thread_count_independent():
    inst = gap(YES_D).instance
    one = worst_nash_flow(inst, threads=1)
    four = worst_nash_flow(inst, threads=4)
    assert (one.cost, one.cut, one.flow.path_flows) == (four.cost, four.cut, four.flow.path_flows)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_worst_nash_matches_edge_lp_oracle_on_dags(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 6), rng.randint(1, 10))
    res = worst_nash_flow(inst)
    assert is_nash_flow(res.flow).verdict
    assert bottleneck_cost(res.flow).bottleneck == res.cost
    assert float(res.cost) == pytest.approx(worst_nash_by_edge_lp(inst), abs=1e-7)


def _grid_worst_nash(inst, denom):
    paths = list(enumerate_paths(inst))
    best = None
    def rec(i, left, acc):
        nonlocal best
        if i == len(paths) - 1:
            acc[paths[i]] = F(left, denom) * inst.rate
            f = Flow(inst, acc)
            if is_nash_flow(f).verdict:
                b = bottleneck_cost(f).bottleneck
                best = b if best is None else max(best, b)
            return
        for k in range(left + 1):
            acc[paths[i]] = F(k, denom) * inst.rate
            rec(i + 1, left - k, dict(acc))
    rec(0, denom, {})
    return best


@pytest.mark.parametrize("seed", range(12))
def test_worst_nash_against_grid_search_with_cycles(seed):
    # instances with a back edge, so the acyclic LP oracle does not apply
    rng = random.Random(seed)
    L = LatencyFunction.linear
    s = [F(rng.randint(1, 4), 2) for _ in range(6)]
    inst = RoutingInstance(("s", "a", "b", "t"), "s", "t", (
        Edge("sa", "s", "a", L(s[0])), Edge("sb", "s", "b", L(s[1])), Edge("ab", "a", "b", L(s[2])),
        Edge("ba", "b", "a", L(s[3])), Edge("at", "a", "t", L(s[4])), Edge("bt", "b", "t", L(s[5]))))
    res = worst_nash_flow(inst)
    denom = 12
    for v in res.flow.path_flows.values():
        denom = math.lcm(denom, v.denominator)
    assert denom <= 120
    # the grid contains the returned flow, so it must find exactly the same worst cost
    assert _grid_worst_nash(inst, denom) == res.cost


def test_subpath_optimal_examples():
    f, labels = subpath_optimal_nash_flow(theta())
    assert f.path_flows == {("su", "ut"): F(1, 2), ("sv", "vt"): F(1, 2)}
    assert labels.labels == {"s": 0, "u": F(1, 2), "v": F(1, 2), "t": F(1, 2)}
    L = LatencyFunction.linear
    inst = chain(L(3), L(1), L(2), rate=2)
    f, labels = subpath_optimal_nash_flow(inst)
    assert f.path_flows == {("c0", "c1", "c2"): 2}
    assert [labels.labels[v] for v in inst.nodes] == [0, 6, 6, 6]
    f, _ = subpath_optimal_nash_flow(gap(YES_D).instance)
    assert bottleneck_cost(f).bottleneck == 3


def test_subpath_optimal_requires_strict_monotonicity():
    flat = LatencyFunction.tabulated([(0, 0), (1, 0), (2, 1)])
    inst = RoutingInstance(("s", "t"), "s", "t", (Edge("a", "s", "t", flat),))
    with pytest.raises(UnsupportedModelError):
        subpath_optimal_nash_flow(inst)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_subpath_optimal_flow_is_optimal_nash(seed, affine):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 7), rng.randint(1, 12), affine=affine,
                      rate=F(rng.randint(1, 5), rng.randint(1, 2)))
    f, labels = subpath_optimal_nash_flow(inst)
    assert bottleneck_cost(f).bottleneck == optimal_value(inst)
    assert is_nash_flow(f).verdict
    assert is_subpath_optimal(f, labels)


def test_poa_examples():
    assert price_of_anarchy(theta()) == 2
    assert price_of_anarchy(gap(YES_D).instance) == F(4, 3)
    with pytest.raises(DomainError):
        price_of_anarchy(theta(rate=0))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 10))
def test_series_parallel_networks_have_no_anarchy_cost(seed, m):
    inst = random_series_parallel(random.Random(seed), m)
    assert worst_nash_flow(inst).cost == optimal_value(inst)
    assert price_of_anarchy(inst) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_subnetworks_never_beat_the_optimum(seed):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 6), rng.randint(2, 10))
    opt = optimal_value(inst)
    sub = random_subnetwork(rng, inst)
    assert optimal_value(sub) >= opt
    assert worst_nash_flow(sub).cost >= opt
    assert price_of_anarchy(inst) >= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.fractions(F(1, 5), 5))
def test_worst_nash_is_rate_homogeneous(seed, lam):
    rng = random.Random(seed)
    inst = random_dag(rng, rng.randint(2, 6), rng.randint(1, 9))
    assert worst_nash_flow(inst.with_rate(lam)).cost == lam * worst_nash_flow(inst).cost


def test_gap_witnesses_are_nash():
    for w in build_witness_flows(gap(YES_D), 12):
        assert is_nash_flow(w.flow).verdict
