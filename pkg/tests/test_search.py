import math
from dataclasses import replace

import numpy as np
import pytest

from oracles import brute_dominates, brute_fronts
from wpgen.domain import WaypointSet, decode, flatten, make_bounds, validate_waypoint_set
from wpgen.fitness import EvaluationContext, ObjectiveVector
from wpgen.search import (
    SearchConfig,
    closeness_mutation,
    crowding_distance,
    environmental_selection,
    fast_nondominated_sort,
    init_population,
    make_rng,
    nondominated,
    nsga2_run,
    polynomial_mutation,
    random_search_run,
    sbx_crossover,
    seed_individual,
)

SMALL = SearchConfig(population_size=10, max_generations=8)


@pytest.fixture
def ctx(mariner):
    return EvaluationContext(mariner.original, make_bounds(mariner.original, mariner.delta), mariner.vessel)


def differing_waypoints(x, original):
    diff = np.abs(decode(x, original).array - original.array).max(axis=1)
    return set(np.nonzero(diff > 0)[0] + 1)


def test_closeness_mutation_picks_and_bounds(mariner):
    bounds = make_bounds(mariner.original, mariner.delta)
    rng = make_rng(1)
    for _ in range(200):
        x, picks = closeness_mutation(mariner.original, bounds, rng)
        assert picks and all(2 <= p <= mariner.original.n for p in picks)
        assert differing_waypoints(x, mariner.original) == set(picks)
        assert bounds.contains(x)


def test_single_iteration_changes_one_waypoint(mariner):
    bounds = make_bounds(mariner.original, mariner.delta)
    rng = make_rng(2)
    singles = 0
    for _ in range(100):
        x, picks = closeness_mutation(mariner.original, bounds, rng)
        if len(picks) == 1:
            singles += 1
            assert len(differing_waypoints(x, mariner.original)) == 1
    assert singles > 0


def test_seed_individual_is_deterministic(mariner):
    bounds = make_bounds(mariner.original, mariner.delta)
    a = seed_individual(mariner.original, bounds, make_rng(5))
    b = seed_individual(mariner.original, bounds, make_rng(5))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("strategy,seeded,random", [("seed", 9, 0), ("comb", 5, 4), ("rnd", 0, 9)])
def test_init_population_composition(mariner, strategy, seeded, random):
    original = mariner.original
    bounds = make_bounds(original, mariner.delta)
    pop = init_population(strategy, 10, original, bounds, make_rng(3))
    centre = flatten(original)
    assert len(pop) == 10
    assert np.array_equal(pop.members[0], centre)
    assert sum(np.array_equal(m, centre) for m in pop.members) == 1
    # seeded members keep some original coordinates; uniform random ones keep none
    keeps = [bool(np.any(m == centre)) for m in pop.members[1:]]
    assert keeps == [True] * seeded + [False] * random
    assert all(bounds.contains(m) for m in pop.members)


def test_init_population_size_two(mariner):
    bounds = make_bounds(mariner.original, mariner.delta)
    pop = init_population("seed", 2, mariner.original, bounds, make_rng(0))
    assert len(pop) == 2
    with pytest.raises(ValueError):
        init_population("seed", 1, mariner.original, bounds, make_rng(0))


def test_sort_trivial_cases():
    assert fast_nondominated_sort([ObjectiveVector(1, 1)]) == [[0]]
    assert fast_nondominated_sort([(0, 5), (1, 1)]) == [[0], [1]]
    assert fast_nondominated_sort([(1, 1), None, (0, 0)]) == [[0, 2], [1]]


def test_sort_matches_brute_force_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        objs = [tuple(map(float, rng.integers(0, 6, 2))) for _ in range(n)]
        objs = [None if rng.random() < 0.1 else o for o in objs]
        got = [sorted(f) for f in fast_nondominated_sort(objs)]
        assert got == [sorted(f) for f in brute_fronts(objs)]


def test_crowding_distance_cases():
    assert np.all(np.isinf(crowding_distance([(0, 0), (1, 1)])))
    d = crowding_distance([(0, 0), (1, 1), (2, 2)])
    assert np.isinf(d[0]) and np.isinf(d[2]) and d[1] == pytest.approx(2.0)
    front = [(0, 9), (1, 7), (3, 4), (6, 2), (9, 0)]
    base = sorted(crowding_distance(front))
    perm = [front[i] for i in (3, 0, 4, 1, 2)]
    assert sorted(crowding_distance(perm)) == pytest.approx(base)


def test_environmental_selection_prefers_rank_then_spread():
    objs = [(0, 0), (5, 5), (1, 1), None, (2, 2), (3, 3), (4, 1)]
    chosen = environmental_selection(objs, 3)
    assert len(chosen) == 3 and 3 not in chosen
    assert {1, 0} <= set(chosen)  # the two front-0 extremes


def test_sbx_respects_waypoint_blocks(mariner):
    original = mariner.original
    bounds = make_bounds(original, 10_000)
    rng = make_rng(4)
    dim = original.dim
    for _ in range(50):
        a = flatten(original) + rng.uniform(-300, 300, bounds.n_var)
        b = flatten(original) + rng.uniform(-300, 300, bounds.n_var)
        ca, cb = sbx_crossover(a, b, bounds, SMALL, rng)
        # each waypoint block blends the same index of both parents
        np.testing.assert_allclose(ca + cb, a + b, atol=1e-9)
        spread = ((ca - cb) / (a - b)).reshape(-1, dim)
        np.testing.assert_allclose(np.abs(spread), np.abs(spread[:, :1]).repeat(dim, axis=1), rtol=1e-9)


def test_sbx_edge_cases(mariner):
    bounds = make_bounds(mariner.original, mariner.delta)
    rng = make_rng(0)
    a = flatten(mariner.original)
    b = a + 100
    ca, cb = sbx_crossover(a, b, bounds, replace(SMALL, crossover_probability=0.0), rng)
    assert np.array_equal(ca, a) and np.array_equal(cb, b)
    ca, cb = sbx_crossover(a, a, bounds, SMALL, rng)
    assert np.array_equal(ca, a) and np.array_equal(cb, a)
    far = bounds.upper.copy()
    ca, cb = sbx_crossover(bounds.lower, far, bounds, SMALL, rng)
    assert bounds.contains(ca) and bounds.contains(cb)


def test_mutation_identity_and_bounds(mariner):
    original = mariner.original
    bounds = make_bounds(original, mariner.delta)
    rng = make_rng(0)
    x = flatten(original)
    off = replace(SMALL, expected_mutated_variables=0)
    assert np.array_equal(polynomial_mutation(x, bounds, 400, original, off, rng), x)
    heavy = replace(SMALL, expected_mutated_variables=bounds.n_var)
    for _ in range(100):
        assert bounds.contains(polynomial_mutation(x, bounds, 400, original, heavy, rng))


def test_mutation_rolls_back_on_violation():
    original = WaypointSet([[0, 0], [1000, 0], [1400, 0], [2400, 0]])
    bounds = make_bounds(original, 400)
    x = flatten(original)  # legs 1000, 400, 1000: the middle leg sits on the limit
    every = SearchConfig(expected_mutated_variables=bounds.n_var)
    rng = make_rng(0)
    rolled = 0
    for _ in range(200):
        y = polynomial_mutation(x, bounds, 400, original, every, rng)
        if np.array_equal(y, x):
            rolled += 1  # every variable mutates, so equality means rollback
        else:
            assert validate_waypoint_set(decode(y, original), 400)
    assert rolled > 0


def test_nsga2_budget_determinism_and_front(mariner):
    runs = []
    for _ in range(2):
        ctx = EvaluationContext(mariner.original, make_bounds(mariner.original, mariner.delta), mariner.vessel)
        runs.append(nsga2_run(ctx, replace(SMALL, rng_seed=11)))
    rec = runs[0]
    assert rec.evaluations == SMALL.budget == len(rec.log)
    assert [x.tobytes() for x, _ in rec.front] == [x.tobytes() for x, _ in runs[1].front]
    objs = rec.front_objectives()
    assert objs and not any(brute_dominates(a, b) for a in objs for b in objs)
    bounds = make_bounds(mariner.original, mariner.delta)
    assert all(bounds.contains(np.array(e["individual"])) for e in rec.log)
    assert all(validate_waypoint_set(decode(x, mariner.original), 400) for x, _ in rec.front)


def test_nsga2_elitism(mariner):
    ctx = EvaluationContext(mariner.original, make_bounds(mariner.original, mariner.delta), mariner.vessel)
    rec = nsga2_run(ctx, replace(SMALL, max_generations=15, seeding="rnd", rng_seed=3))
    dists = [h[0] for h in rec.history]
    unst = [h[1] for h in rec.history]
    assert all(b <= a for a, b in zip(dists, dists[1:]))
    assert all(b >= a for a, b in zip(unst, unst[1:]))


def test_random_search_budget_and_front(ctx):
    rec = random_search_run(ctx, replace(SMALL, rng_seed=4))
    assert rec.evaluations == SMALL.budget == len(rec.log)
    assert rec.log[0]["individual"] == list(flatten(ctx.original))
    feasible = [(e["dist_wps"], e["unstable"]) for e in rec.log if e["feasible"]]
    oracle = {feasible[i] for i in brute_fronts(feasible)[0]}
    assert set(map(tuple, rec.front_objectives())) == oracle


def test_random_search_minimal_budget(ctx):
    rec = random_search_run(ctx, SearchConfig(population_size=2, max_generations=1, rng_seed=0))
    assert rec.evaluations == 2
    assert any(np.array_equal(x, flatten(ctx.original)) for x, _ in rec.front)


def test_nondominated_drops_duplicates_and_infeasible():
    x = np.zeros(2)
    members = [(x, ObjectiveVector(0, 1)), (x.copy(), ObjectiveVector(0, 1)), (x + 1, None)]
    assert len(nondominated(members)) == 1


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(population_size=1)
    with pytest.raises(ValueError):
        SearchConfig(seeding="other")
    with pytest.raises(ValueError):
        SearchConfig(crossover_probability=1.5)
    assert SearchConfig(population_size=10, max_generations=1000).budget == 10_000
