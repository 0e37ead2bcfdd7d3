"""Worst equilibrium vs. optimum on the four-node network with a shortcut edge.

Prints the optimal cost, the worst Nash cost, the price of anarchy and the
best subnetwork, and optionally writes the worst Nash flow as DOT.
"""

import argparse
from fractions import Fraction

from braess.equilibrium import optimal_bottleneck_cost, worst_nash_flow
from braess.game import Edge, LatencyFunction, RoutingInstance
from braess.io import export_dot
from braess.search import exhaustive_best_subnetwork


def theta(rate=1, slope=1) -> RoutingInstance:
    arcs = [("su", "s", "u"), ("ut", "u", "t"), ("sv", "s", "v"), ("vt", "v", "t"), ("uv", "u", "v")]
    lat = LatencyFunction.linear(slope)
    return RoutingInstance(("s", "u", "v", "t"), "s", "t", tuple(Edge(i, a, b, lat) for i, a, b in arcs), rate)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rate", type=Fraction, default=Fraction(1))
    ap.add_argument("--dot", help="write the worst Nash flow here")
    args = ap.parse_args()

    inst = theta(args.rate)
    opt, _ = optimal_bottleneck_cost(inst)
    worst = worst_nash_flow(inst)
    best = exhaustive_best_subnetwork(inst)
    print(f"optimal cost      {opt}")
    print(f"worst Nash cost   {worst.cost}  (cut {sorted(worst.cut)})")
    print(f"price of anarchy  {worst.cost / opt}")
    print(f"best subnetwork   {list(best.subnetwork)} at {best.worst_cost}: {best.classification}")
    for p, v in worst.flow.path_flows.items():
        print(f"  {'->'.join(p):12s} {v}")
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(export_dot(inst, worst.flow))


if __name__ == "__main__":
    main()
