"""Genetic optimisation of per-link routing weights.

A chromosome is one integer weight per link (canonical order: sorted
endpoint pairs).  Every commodity is routed on its minimum-weight path and
the resulting link loads are scored as ``c / (a*L1 + b*L2)`` where L1 is the
total routed load and L2 the bandwidth in excess of capacity on overloaded
links.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .netmodel import Commodity, Pair, pair

EPS = 1e-9

Path = Tuple[int, ...]


@dataclass(frozen=True)
class GaParams:
    pop_size: int = 100
    max_weight: int = 64
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    k_c: float = 0.05
    k_m: float = 0.02
    generations: int = 200
    elite: int = 1
    seed: int = 1
    stagnation: int = 0  # 0 disables the early stop

    def __post_init__(self):
        if self.pop_size < 2 or self.pop_size % 2:
            raise ValueError("pop_size must be even and >= 2")
        if not 1 <= self.elite < self.pop_size:
            raise ValueError("elite must satisfy 1 <= elite < pop_size")
        if self.max_weight < 1:
            raise ValueError("max_weight must be >= 1")
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("fitness coefficients must be > 0")
        for name in ("k_c", "k_m"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")


@dataclass(frozen=True)
class Network:
    """Capacitated undirected links in canonical order."""

    links: Tuple[Pair, ...]
    capacity: Tuple[float, ...]

    @classmethod
    def from_links(cls, caps: Dict[Pair, float]) -> "Network":
        keys = sorted(pair(a, b) for a, b in caps)
        return cls(tuple(keys), tuple(caps[k] if k in caps else caps[(k[1], k[0])] for k in keys))

    @property
    def n(self) -> int:
        return len(self.links)

    def index(self) -> Dict[Pair, int]:
        return {k: i for i, k in enumerate(self.links)}


@dataclass(frozen=True)
class FitnessBreakdown:
    L1: float
    L2: float
    overloaded_links: FrozenSet[Pair]
    fitness: float


@dataclass
class RoutingOutcome:
    primary: Dict[int, Optional[Path]]
    backup: Dict[int, Optional[Path]] = field(default_factory=dict)
    load: Dict[Pair, float] = field(default_factory=dict)

    @property
    def routable(self) -> bool:
        return all(p is not None for p in self.primary.values())


def path_links(path: Sequence[int]) -> List[Pair]:
    return [pair(u, v) for u, v in zip(path, path[1:])]


def shortest_path(net: Network, weights: Sequence[float], src: int, dst: int,
                  banned: FrozenSet[Pair] = frozenset()) -> Optional[Path]:
    """Dijkstra on (total weight, hop count, node sequence).

    The composite label is prefix-monotone, so the lexicographic tie-break
    on the node sequence stays exact.
    """
    adj: Dict[int, List[Tuple[int, float]]] = {}
    for (u, v), w in zip(net.links, weights):
        if (u, v) in banned:
            continue
        adj.setdefault(u, []).append((v, w))
        adj.setdefault(v, []).append((u, w))
    best: Dict[int, Tuple[float, int, Path]] = {}
    heap = [(0.0, 0, (src,))]
    while heap:
        cost, hops, path = heapq.heappop(heap)
        u = path[-1]
        if u in best:
            continue
        best[u] = (cost, hops, path)
        if u == dst:
            return path
        for v, w in adj.get(u, ()):
            if v not in best:
                heapq.heappush(heap, (cost + w, hops + 1, path + (v,)))
    return None


def route_demands(net: Network, weights: Sequence[float], commodities: Sequence[Commodity]) -> RoutingOutcome:
    outcome = RoutingOutcome({}, {}, {k: 0.0 for k in net.links})
    for com in commodities:
        path = shortest_path(net, weights, com.src, com.dst)
        outcome.primary[com.g] = path
        if path is None:
            continue
        for k in path_links(path):
            outcome.load[k] += com.demand
    return outcome


def score(net: Network, outcome: RoutingOutcome, params: GaParams) -> FitnessBreakdown:
    l1 = sum(outcome.load.values())
    over = frozenset(k for k, cap in zip(net.links, net.capacity) if outcome.load[k] > cap)
    l2 = sum(outcome.load[k] - cap for k, cap in zip(net.links, net.capacity) if k in over)
    if not outcome.routable:
        return FitnessBreakdown(l1, l2, over, 0.0)
    return FitnessBreakdown(l1, l2, over, params.c / max(params.a * l1 + params.b * l2, EPS))


def evaluate(net: Network, weights: Sequence[float], commodities: Sequence[Commodity],
             params: GaParams) -> FitnessBreakdown:
    return score(net, route_demands(net, weights, commodities), params)


def init_population(params: GaParams, n: int, rng: random.Random) -> List[List[int]]:
    if n < 1:
        raise ValueError("need at least one link")
    return [[rng.randint(1, params.max_weight) for _ in range(n)] for _ in range(params.pop_size)]


def rank_and_partition(fitness: Sequence[float]) -> Tuple[List[int], List[int]]:
    """Indices sorted by descending fitness (stable), split into upper/lower halves."""
    order = sorted(range(len(fitness)), key=lambda i: -fitness[i])
    half = len(order) // 2
    return order[:half], order[half:]


def crossover(parent_uc: Sequence[int], parent_lc: Sequence[int], k_c: float, rng: random.Random) -> List[int]:
    if len(parent_uc) != len(parent_lc):
        raise ValueError("parents differ in length")
    return [lc if rng.random() < k_c else uc for uc, lc in zip(parent_uc, parent_lc)]


def mutate(chrom: Sequence[int], k_m: float, max_weight: int, rng: random.Random) -> List[int]:
    return [rng.randint(1, max_weight) if rng.random() < k_m else g for g in chrom]


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    L1_best: float
    L2_best: float


@dataclass
class EvolveResult:
    best: List[int]
    breakdown: FitnessBreakdown
    history: List[GenerationStats]


def evolve(net: Network, commodities: Sequence[Commodity], params: GaParams) -> EvolveResult:
    rng = random.Random(params.seed)
    cache: Dict[Tuple[int, ...], FitnessBreakdown] = {}

    def fit(chrom: List[int]) -> FitnessBreakdown:
        key = tuple(chrom)
        if key not in cache:
            cache[key] = evaluate(net, chrom, commodities, params)
        return cache[key]

    pop = init_population(params, net.n, rng)
    history: List[GenerationStats] = []
    best: Optional[List[int]] = None
    best_fb: Optional[FitnessBreakdown] = None
    stale = 0
    gen = 0
    while True:
        scored = [fit(c) for c in pop]
        fitness = [s.fitness for s in scored]
        uc, lc = rank_and_partition(fitness)
        top = uc[0]
        improved = best_fb is None or fitness[top] > best_fb.fitness
        if improved:
            best, best_fb = list(pop[top]), scored[top]
            stale = 0
        else:
            stale += 1
        history.append(GenerationStats(gen, fitness[top], sum(fitness) / len(fitness),
                                       scored[top].L1, scored[top].L2))
        if gen == params.generations or (params.stagnation and stale >= params.stagnation):
            break
        children = [list(pop[i]) for i in (uc + lc)[:params.elite]]
        while len(children) < params.pop_size:
            mom = pop[rng.choice(uc)]
            dad = pop[rng.choice(lc)]
            children.append(mutate(crossover(mom, dad, params.k_c, rng), params.k_m, params.max_weight, rng))
        pop = children
        gen += 1
    return EvolveResult(best, best_fb, history)


def backup_paths(net: Network, weights: Sequence[float], commodities: Sequence[Commodity],
                 outcome: RoutingOutcome) -> RoutingOutcome:
    """Fill in a link-disjoint alternative for every routed commodity."""
    for com in commodities:
        primary = outcome.primary.get(com.g)
        if primary is None:
            outcome.backup[com.g] = None
            continue
        banned = frozenset(path_links(primary))
        outcome.backup[com.g] = shortest_path(net, weights, com.src, com.dst, banned)
    return outcome


def exhaustive_optimum(net: Network, commodities: Sequence[Commodity], params: GaParams) -> Tuple[float, List[int]]:
    """Best fitness over every weight vector in [1, max_weight]^n (small n only)."""
    import itertools

    best, arg = -1.0, None
    for w in itertools.product(range(1, params.max_weight + 1), repeat=net.n):
        f = evaluate(net, w, commodities, params).fitness
        if f > best:
            best, arg = f, list(w)
    return best, arg
