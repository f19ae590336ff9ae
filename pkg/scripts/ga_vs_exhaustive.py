"""How often does the GA find the brute-force optimum on small graphs?

Draws random connected graphs with few enough links to enumerate every
weight vector, then counts seeds whose evolved fitness equals the optimum.
"""

import argparse
import random
import time

from manetga.gaopt import GaParams, Network, evolve, exhaustive_optimum
from manetga.netmodel import Commodity


def instance(rng, n_nodes, n_links):
    caps = {}
    for v in range(2, n_nodes + 1):
        caps[(rng.randint(1, v - 1), v)] = rng.randint(2, 9)
    while len(caps) < n_links:
        a, b = sorted(rng.sample(range(1, n_nodes + 1), 2))
        caps.setdefault((a, b), rng.randint(2, 9))
    coms = [Commodity(g, *rng.sample(range(1, n_nodes + 1), 2), rng.randint(1, 6)) for g in (1, 2, 3)]
    return Network.from_links(caps), coms


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graphs", type=int, default=10)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--nodes", type=int, default=5)
    ap.add_argument("--links", type=int, default=6)
    ap.add_argument("--max-weight", type=int, default=3)
    ap.add_argument("--pop", type=int, default=40)
    ap.add_argument("--generations", type=int, default=30)
    args = ap.parse_args()
    rng = random.Random(2024)
    print("graph  optimum     matched  seconds")
    for k in range(args.graphs):
        net, coms = instance(rng, args.nodes, args.links)
        params = GaParams(pop_size=args.pop, generations=args.generations, max_weight=args.max_weight)
        optimum, _ = exhaustive_optimum(net, coms, params)
        t = time.perf_counter()
        hits = sum(evolve(net, coms, GaParams(**{**params.__dict__, "seed": s})).breakdown.fitness == optimum
                   for s in range(args.seeds))
        print(f"{k:>5}  {optimum:<10.6f}  {hits:>3}/{args.seeds}  {time.perf_counter() - t:7.2f}")


if __name__ == "__main__":
    main()
