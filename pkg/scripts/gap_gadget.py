"""Build gap networks from a YES and a NO disjoint-paths instance and report their certificates.

Level 0 is searched exhaustively; higher levels are checked through the
optimal solver and the constructed witness flows.
"""

import argparse
import time
from dataclasses import dataclass

from braess.constructions import TwoDDPInstance, build_gap_tower, build_witness_flows, good_copies
from braess.equilibrium import is_nash_flow, optimal_value
from braess.game import bottleneck_cost
from braess.search import exhaustive_best_subnetwork

YES = TwoDDPInstance.from_pairs([("s1", "t1"), ("s2", "t2"), ("s1", "t2"), ("s2", "t1")])
NO = TwoDDPInstance.from_pairs([("s1", "w"), ("s2", "w"), ("w", "t1"), ("w", "t2")])


@dataclass
class GadgetConfig:
    levels: int = 1
    exhaustive: bool = True


def run(name, d, cfg):
    for level in range(cfg.levels + 1):
        t0 = time.perf_counter()
        gap = build_gap_tower(d, level)
        rate = 3 * gap.gamma1 if level == 0 else gap.gamma1
        inst = gap.instance.with_rate(rate)
        opt = optimal_value(inst)
        print(f"[{name}] level {level}: n={inst.n} m={inst.m} gamma={gap.gamma1}/{gap.gamma2} rate={rate} B*={opt}")
        for w in build_witness_flows(gap, rate):
            cost = bottleneck_cost(w.flow).bottleneck
            print(f"    witness {w.role:8s} cost={cost} nash={is_nash_flow(w.flow).verdict} "
                  f"edges={len(w.subnetwork)}")
        if level == 0 and cfg.exhaustive:
            rep = exhaustive_best_subnetwork(inst)
            print(f"    best subnetwork cost={rep.worst_cost} full={rep.full_worst_cost} "
                  f"{rep.classification} good copies={good_copies(gap, rep.subnetwork)}")
        print(f"    {time.perf_counter() - t0:.2f}s")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=1)
    ap.add_argument("--no-exhaustive", action="store_true")
    args = ap.parse_args()
    cfg = GadgetConfig(args.levels, not args.no_exhaustive)
    run("yes", YES, cfg)
    run("no", NO, cfg)


if __name__ == "__main__":
    main()
