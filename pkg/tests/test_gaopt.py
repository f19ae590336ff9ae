import random
import time

import pytest
from hypothesis import given, settings, strategies as st

from manetga.gaopt import (
    EPS, GaParams, Network, backup_paths, crossover, evaluate, evolve, init_population,
    mutate, rank_and_partition, route_demands, shortest_path,
)
from manetga.netmodel import Commodity

from oracles import best_path, exhaustive_best, loads_and_fitness


def test_square_fitness(square, square_demands):
    fb = evaluate(square, [1] * 4, square_demands, GaParams())
    assert (fb.L1, fb.L2) == (24, 4)
    assert fb.fitness == pytest.approx(1 / 28, abs=1e-12)
    assert fb.overloaded_links == {(1, 2), (2, 4)}


def test_no_commodities_sentinel(square):
    fb = evaluate(square, [1] * 4, [], GaParams(c=2.0))
    assert (fb.L1, fb.L2, fb.fitness) == (0, 0, 2.0 / EPS)


def test_load_at_capacity_is_not_overload(square):
    fb = evaluate(square, [1] * 4, [Commodity(1, 1, 4, 10)], GaParams())
    assert fb.L2 == 0 and fb.overloaded_links == frozenset()


def test_unroutable_scores_zero():
    net = Network.from_links({(1, 2): 5, (3, 4): 5})
    assert evaluate(net, [1, 1], [Commodity(1, 1, 4, 1)], GaParams()).fitness == 0.0


def test_two_node_route():
    net = Network.from_links({(2, 1): 3})
    out = route_demands(net, [1], [Commodity(1, 1, 2, 5)])
    assert out.primary[1] == (1, 2) and out.load[(1, 2)] == 5
    backup_paths(net, [1], [Commodity(1, 1, 2, 5)], out)
    assert out.backup[1] is None


def test_square_paths(square, square_demands):
    out = route_demands(square, [1] * 4, square_demands[:1])
    assert out.primary[1] == (1, 2, 4)
    backup_paths(square, [1] * 4, square_demands[:1], out)
    assert out.backup[1] == (1, 3, 4)


def test_canonical_link_order():
    net = Network.from_links({(4, 2): 1, (3, 1): 2, (2, 1): 3})
    assert net.links == ((1, 2), (1, 3), (2, 4))
    assert net.capacity == (3, 2, 1)


graphs = st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6)).filter(lambda e: e[0] < e[1]),
                  min_size=1, max_size=10, unique=True)


@given(graphs, st.data())
def test_shortest_path_matches_enumeration(edges, data):
    net = Network.from_links({e: 10 for e in edges})
    w = data.draw(st.lists(st.integers(1, 5), min_size=net.n, max_size=net.n))
    nodes = sorted({n for e in edges for n in e})
    s = data.draw(st.sampled_from(nodes))
    d = data.draw(st.sampled_from(nodes).filter(lambda x: x != s)) if len(nodes) > 1 else None
    if d is None:
        return
    got = shortest_path(net, w, s, d)
    assert got == best_path(list(net.links), w, s, d)
    if got is not None:
        k = data.draw(st.integers(2, 4))
        assert shortest_path(net, [x * k for x in w], s, d) == got


@given(graphs, st.data())
def test_fitness_matches_oracle(edges, data):
    net = Network.from_links({e: data.draw(st.integers(1, 12)) for e in edges})
    w = data.draw(st.lists(st.integers(1, 4), min_size=net.n, max_size=net.n))
    nodes = sorted({n for e in edges for n in e})
    if len(nodes) < 2:
        return
    coms = []
    for g in range(data.draw(st.integers(1, 3))):
        s, d = data.draw(st.lists(st.sampled_from(nodes), min_size=2, max_size=2, unique=True))
        coms.append(Commodity(g + 1, s, d, data.draw(st.integers(1, 9))))
    fb = evaluate(net, w, coms, GaParams())
    ref = loads_and_fitness(list(net.links), list(net.capacity), w, coms)
    if ref is None:
        assert fb.fitness == 0.0
    else:
        assert (fb.L1, fb.L2) == pytest.approx(ref[:2])
        assert fb.fitness == pytest.approx(ref[2], rel=1e-12)
        assert fb.L1 >= 0 and fb.L2 >= 0


def test_backup_is_link_disjoint_or_absent():
    net = Network.from_links({(1, 2): 1, (2, 3): 1, (1, 3): 1, (3, 4): 1})
    com = [Commodity(1, 1, 4, 1)]
    out = backup_paths(net, [1] * 4, com, route_demands(net, [1] * 4, com))
    assert out.primary[1] == (1, 3, 4)
    assert out.backup[1] is None


def test_init_population():
    rng = random.Random(5)
    assert init_population(GaParams(max_weight=1), 3, rng) == [[1, 1, 1]] * 100
    pop = init_population(GaParams(), 7, random.Random(2))
    assert len(pop) == 100 and all(len(c) == 7 and all(1 <= g <= 64 for g in c) for c in pop)
    assert pop == init_population(GaParams(), 7, random.Random(2))


def test_rank_examples():
    assert rank_and_partition([.1, .4, .2, .3]) == ([1, 3], [2, 0])
    uc, _ = rank_and_partition([0.5] * 100)
    assert uc == list(range(50))
    fit = random.Random(0).sample(range(1000), 100)
    uc, lc = rank_and_partition(fit)
    assert {fit[i] for i in uc} == set(sorted(fit)[50:])


def test_crossover_bounds_and_rate():
    rng = random.Random(11)
    uc, lc = [1] * 1000, [2] * 1000
    assert crossover(uc, lc, 0.0, rng) == uc
    assert crossover(uc, lc, 1.0, rng) == lc
    assert 20 <= crossover(uc, lc, 0.05, rng).count(2) <= 90


def test_mutate():
    rng = random.Random(3)
    c = [5] * 50
    assert mutate(c, 0.0, 8, rng) == c
    assert all(1 <= g <= 8 for g in mutate(c, 1.0, 8, rng))


@given(st.lists(st.integers(1, 64), min_size=1, max_size=40), st.floats(0, 1), st.integers(1, 64),
       st.integers(0, 999))
def test_operators_keep_gene_range(chrom, k, mw, seed):
    rng = random.Random(seed)
    child = mutate(crossover(chrom, chrom[::-1], k, rng), k, mw, rng)
    assert len(child) == len(chrom)
    assert all(1 <= g <= max(mw, max(chrom)) for g in child)


def test_params_validation():
    for bad in ({"pop_size": 3}, {"elite": 0}, {"elite": 100}, {"k_c": 1.5}, {"max_weight": 0}, {"a": 0}):
        with pytest.raises(ValueError):
            GaParams(**bad)


def test_generation_zero_returns_initial_best(square, square_demands):
    p = GaParams(pop_size=10, generations=0, seed=4)
    res = evolve(square, square_demands, p)
    pop = init_population(p, square.n, random.Random(4))
    best = max(evaluate(square, c, square_demands, p).fitness for c in pop)
    assert len(res.history) == 1 and res.breakdown.fitness == best


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_best_fitness_non_decreasing(seed):
    net = Network.from_links({(1, 2): 4, (2, 4): 4, (1, 3): 4, (3, 4): 4, (2, 3): 4})
    coms = [Commodity(1, 1, 4, 3), Commodity(2, 2, 3, 2), Commodity(3, 1, 4, 3)]
    res = evolve(net, coms, GaParams(pop_size=12, generations=15, max_weight=6, seed=seed))
    best = [h.best_fitness for h in res.history]
    assert best == sorted(best)
    assert res.breakdown.fitness == best[-1]


def test_evolve_deterministic(square, square_demands):
    p = GaParams(pop_size=20, generations=10, seed=9)
    assert evolve(square, square_demands, p) == evolve(square, square_demands, p)


def test_stagnation_stops_early(square, square_demands):
    res = evolve(square, square_demands, GaParams(pop_size=20, generations=500, stagnation=5, seed=2))
    assert len(res.history) < 501


def test_evolve_reaches_square_optimum(square, square_demands):
    # equal-endpoint commodities always share a path, so 1/28 is already optimal
    res = evolve(square, square_demands, GaParams(pop_size=20, generations=20, max_weight=4, seed=1))
    best = exhaustive_best(list(square.links), list(square.capacity), square_demands, 4)
    assert res.breakdown.fitness == pytest.approx(best)
    assert res.breakdown.fitness == pytest.approx(1 / 28)
