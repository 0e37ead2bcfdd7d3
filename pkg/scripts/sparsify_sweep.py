"""Sparse approximation of random flows: support size and edge deviation against the bound k(eps)."""

import argparse
import random
from dataclasses import dataclass
from fractions import Fraction

from braess.generators import random_dag, random_flow
from braess.search import edge_deviation, k_of_eps, sparsify_flow


@dataclass
class SweepConfig:
    trials: int = 100
    seed: int = 0
    max_nodes: int = 10
    max_edges: int = 30
    eps: tuple = (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2))
    log_base: str = "natural"


def sweep(cfg: SweepConfig):
    rng = random.Random(cfg.seed)
    cases = []
    for _ in range(cfg.trials):
        inst = random_dag(rng, rng.randint(3, cfg.max_nodes), rng.randint(2, cfg.max_edges))
        cases.append(random_flow(rng, inst, max_support=8, max_weight=60))
    rows = []
    for eps in cfg.eps:
        sizes, devs, ks = [], [], []
        for i, f in enumerate(cases):
            g = sparsify_flow(f, eps, seed=cfg.seed + i, log_base=cfg.log_base)
            sizes.append(g.size)
            devs.append(edge_deviation(f, g.flow))
            ks.append(k_of_eps(eps, f.instance.m, cfg.log_base))
        rows.append((eps, max(ks), sum(sizes) / len(sizes), max(devs)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--log-base", choices=("natural", "base-2"), default="natural")
    args = ap.parse_args()
    cfg = SweepConfig(trials=args.trials, seed=args.seed, log_base=args.log_base)
    print("| eps | max k | mean paths | max deviation |")
    print("| --- | --- | --- | --- |")
    for eps, k, mean, dev in sweep(cfg):
        print(f"| {eps} | {k} | {mean:.1f} | {float(dev):.4f} |")


if __name__ == "__main__":
    main()
