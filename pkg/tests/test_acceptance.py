"""End-to-end acceptance checks; each prints one PASS/FAIL line.

All comparisons are exact rational equalities or inequalities (tolerance 0)
unless a line states otherwise.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from braess.constructions import (amplify_gap, build_gap_network, build_witness_flows, classify_2ddp,
                                  good_copies)
from braess.equilibrium import (is_nash_flow, optimal_value, subpath_optimal_nash_flow,
                                worst_nash_value)
from braess.game import bottleneck_cost, is_eps_nash, normalize_rate, rescale_flow, scale_latencies
from braess.generators import random_dag, random_flow, random_series_parallel, random_subnetwork
from braess.search import (ApproxParams, approx_best_subnetwork, edge_deviation, exhaustive_best_subnetwork,
                           k_of_eps, sparsify_flow)
from braess.topology import enumerate_paths

from instances import NO_D, YES_D, theta

F = Fraction


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def test_criterion_1_theta(report):
    t0 = time.perf_counter()
    inst = theta()
    opt, worst = optimal_value(inst), worst_nash_value(inst)
    rep = exhaustive_best_subnetwork(inst)
    elapsed = time.perf_counter() - t0
    ok = (opt == F(1, 2) and worst == 1 and worst / opt == 2
          and rep.subnetwork == ("su", "sv", "ut", "vt") and rep.worst_cost == F(1, 2)
          and rep.classification == "paradox-ridden" and elapsed < 1)
    report(1, ok, f"B*={opt} B={worst} best={rep.subnetwork} cost={rep.worst_cost} "
                  f"{rep.classification} time={elapsed:.2f}s (exact; limit 1s)")


def test_criterion_2_gadget_yes(report):
    t0 = time.perf_counter()
    gap = build_gap_network(YES_D, F(1, 8), 12)
    rep = exhaustive_best_subnetwork(gap.instance)
    copies = good_copies(gap, rep.subnetwork)
    elapsed = time.perf_counter() - t0
    ok = (rep.optimal_cost == 3 and rep.worst_cost == 3 and copies == ["L0.D"]
          and rep.full_worst_cost == 4 and rep.full_worst_cost / rep.optimal_cost == F(4, 3) and elapsed < 300)
    report(2, ok, f"B*={rep.optimal_cost} best={rep.worst_cost} good={copies} B(G)={rep.full_worst_cost} "
                  f"time={elapsed:.1f}s (exact; limit 300s)")


def test_criterion_3_gadget_no(report):
    t0 = time.perf_counter()
    gap = build_gap_network(NO_D, F(1, 8), 12)
    rep = exhaustive_best_subnetwork(gap.instance)
    no_good = classify_2ddp(NO_D)[0] is False and good_copies(gap, gap.instance.edge_ids) == []
    elapsed = time.perf_counter() - t0
    ok = rep.worst_cost == 4 and rep.classification == "paradox-free" and no_good and elapsed < 300
    report(3, ok, f"min worst-Nash={rep.worst_cost} {rep.classification} no good copy={no_good} "
                  f"time={elapsed:.1f}s (exact; limit 300s)")


def test_criterion_4_amplifier(report):
    t0 = time.perf_counter()
    lines, ok = [], True
    for name, d in (("yes", YES_D), ("no", NO_D)):
        g0 = build_gap_network(d)
        g1 = amplify_gap(d, g0)
        opt = optimal_value(g1.instance.with_rate(16))
        grow = g1.instance.n <= 8 * g0.instance.n + len(d.nodes)
        wit = build_witness_flows(g1, 16)
        certified = all(is_nash_flow(w.flow).verdict and bottleneck_cost(w.flow).bottleneck == w.expected_cost
                        for w in wit)
        costs = {w.role: str(w.expected_cost) for w in wit}
        want = {"optimal": "1", "bad": "16/9"} | ({"good": "1"} if d is YES_D else {})
        ok &= opt == 1 and grow and certified and costs == want
        lines.append(f"{name}: B*={opt} n={g1.instance.n} growth_ok={grow} witnesses={costs} nash={certified}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(4, ok, "; ".join(lines) + f" time={elapsed:.1f}s (exact; limit 60s)")


def test_criterion_5_sparsification(report):
    t0 = time.perf_counter()
    rng = random.Random(55)
    failures = 0
    for i in range(100):
        inst = random_dag(rng, rng.randint(3, 10), rng.randint(2, 30))
        f = random_flow(rng, inst, max_support=8, max_weight=60)
        eps = rng.choice([F(1, 4), F(1, 2)])
        g = sparsify_flow(f, eps, seed=i)
        dev = edge_deviation(f, g.flow)   # raises if an unused edge gets flow
        failures += not (g.size <= k_of_eps(eps, inst.m) and set(g.counts) <= set(f.path_flows) and dev <= eps)
    elapsed = time.perf_counter() - t0
    report(5, failures == 0 and elapsed < 60,
           f"failures={failures}/100 time={elapsed:.1f}s (deviation <= eps exactly; limit 60s)")


MAX_CANDIDATES = 2 * 10**6


def _contract_instances(rng):
    """Random linear instances with 2..10 paths whose candidate enumeration fits the bound."""
    drawn = 0
    slopes = (F(1, 8), F(1, 4), F(3, 8), F(1, 2))
    while True:
        drawn += 1
        inst = random_dag(rng, rng.randint(3, 5), rng.randint(2, 8), slopes=slopes)
        n = len(enumerate_paths(inst))
        if not 2 <= n <= 10:
            continue
        best = exhaustive_best_subnetwork(inst)
        delta = min(x for x in best.witness.loads.values() if x > 0) / 2
        params = ApproxParams(F(1, 2), delta, max(e.latency.a for e in inst.edges), inst.m)
        k = params.k
        if sum(math.comb(K + n - 1, n - 1) for K in range(k // 2 + 1, k + 1)) > MAX_CANDIDATES:
            continue
        yield drawn, inst, params, best.worst_cost


def test_criterion_6_approximation(report):
    t0 = time.perf_counter()
    rng = random.Random(6)
    gen = _contract_instances(rng)
    violations, drawn = [], 0
    for i in range(30):
        drawn, inst, params, star = next(gen)
        res = approx_best_subnetwork(inst, params, max_candidates=MAX_CANDIDATES)
        eps, f = params.eps, res.flow
        Bf = bottleneck_cost(f).bottleneck
        BH = worst_nash_value(inst.subnetwork(res.subnetwork))
        checks = (is_eps_nash(f, eps / 2), Bf <= star + eps, BH <= Bf + eps / 4, Bf <= BH + eps / 2)
        violations += [(i, j + 1) for j, c in enumerate(checks) if not c]
    elapsed = time.perf_counter() - t0
    report(6, not violations and elapsed < 600,
           f"30 instances (from {drawn} draws), contract violations={violations} "
           f"time={elapsed:.1f}s (exact; limit 600s)")


def test_criterion_7_structural(report):
    t0 = time.perf_counter()
    rng = random.Random(7)
    bad = {"a": 0, "b": 0, "c": 0, "d": 0}
    for _ in range(50):
        sp = random_series_parallel(rng, rng.randint(1, 9))
        bad["a"] += worst_nash_value(sp) != optimal_value(sp)
    for _ in range(50):
        inst = random_dag(rng, rng.randint(2, 7), rng.randint(1, 12), rate=F(rng.randint(1, 9), rng.randint(1, 3)))
        flow, _ = subpath_optimal_nash_flow(inst)
        bad["b"] += not (is_nash_flow(flow).verdict and bottleneck_cost(flow).bottleneck == optimal_value(inst))
    for _ in range(50):
        inst = random_dag(rng, rng.randint(2, 6), rng.randint(1, 10), rate=F(rng.randint(1, 6), rng.randint(1, 4)))
        f = random_flow(rng, inst)
        alpha = F(rng.randint(1, 20), rng.randint(1, 20))
        scaled = scale_latencies(inst, alpha)
        g = rescale_flow(f, scaled)
        same_cost = bottleneck_cost(g).bottleneck == alpha * bottleneck_cost(f).bottleneck
        same_verdict = is_nash_flow(g).verdict == is_nash_flow(f).verdict
        wider = inst.with_rate(inst.rate * alpha)
        homogeneous = (worst_nash_value(wider) == alpha * worst_nash_value(inst)
                       and bottleneck_cost(rescale_flow(f, wider)).bottleneck == alpha * bottleneck_cost(f).bottleneck)
        norm = normalize_rate(inst)
        normalized = optimal_value(norm) == optimal_value(inst)
        bad["c"] += not (same_cost and same_verdict and homogeneous and normalized)
    for _ in range(50):
        inst = random_dag(rng, rng.randint(2, 6), rng.randint(1, 10), rate=rng.randint(1, 5))
        sub = random_subnetwork(rng, inst)
        opt = optimal_value(inst)
        bad["d"] += not (optimal_value(sub) >= opt and worst_nash_value(sub) >= opt)
    elapsed = time.perf_counter() - t0
    report(7, not any(bad.values()) and elapsed < 300,
           f"failures per suite {bad} (50 cases each) time={elapsed:.1f}s (exact; limit 300s)")


def test_criterion_8_documented_only(report):
    # the asymptotic hardness statements are not experiments; criteria 2-4 carry their finite certificates
    report(8, True, "not an experiment; covered by the finite certificates of criteria 2-4")
