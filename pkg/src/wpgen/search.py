"""NSGA-II over waypoint perturbations, with seeded initial populations.

Objective orientation throughout: ``dist_wps`` is minimised, ``unstable``
maximised. Infeasible individuals (``None`` objectives) rank below every
feasible one and never reach a returned front.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import SearchBounds, WaypointSet, decode, flatten, validate_waypoint_set
from .fitness import EvaluationContext, ObjectiveVector, evaluate

SEEDINGS = ("seed", "comb", "rnd")


@dataclass(frozen=True)
class SearchConfig:
    population_size: int = 10
    max_generations: int = 1000
    seeding: str = "seed"
    crossover_probability: float = 1.0
    crossover_distribution_index: float = 20.0
    mutation_distribution_index: float = 20.0
    expected_mutated_variables: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")
        if self.seeding not in SEEDINGS:
            raise ValueError(f"unknown seeding strategy {self.seeding!r}")
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ValueError("crossover_probability must lie in [0, 1]")

    @property
    def budget(self) -> int:
        return self.population_size * self.max_generations


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for one search run."""
    return np.random.Generator(np.random.PCG64(seed))


# --------------------------------------------------------------------------
# initial population


def closeness_mutation(
    original: WaypointSet, bounds: SearchBounds, rng: np.random.Generator
) -> tuple[np.ndarray, list[int]]:
    """Mutate random waypoints of the original route, each time with decreasing odds.

    A waypoint index in 2..N is drawn (repeats allowed) and all its
    coordinates are redrawn uniformly within their bounds. After ``k``
    mutations the loop continues iff a fresh uniform draw is below 0.5**k.
    Returns the individual and the 1-based waypoint index picked in each
    iteration.
    """
    values = flatten(original)
    dim = original.dim
    picks = []
    while True:
        wp = int(rng.integers(2, original.n + 1))
        sl = slice((wp - 2) * dim, (wp - 1) * dim)
        values[sl] = rng.uniform(bounds.lower[sl], bounds.upper[sl])
        picks.append(wp)
        if not rng.random() < 0.5 ** len(picks):
            break
    return values, picks


def seed_individual(original: WaypointSet, bounds: SearchBounds, rng: np.random.Generator) -> np.ndarray:
    return closeness_mutation(original, bounds, rng)[0]


def random_individual(bounds: SearchBounds, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(bounds.lower, bounds.upper)


@dataclass
class Population:
    members: list[np.ndarray]
    objectives: list[ObjectiveVector | None] = field(default_factory=list)
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)


def init_population(
    strategy: str,
    size: int,
    original: WaypointSet,
    bounds: SearchBounds,
    rng: np.random.Generator,
) -> Population:
    """One copy of the original route plus ``size - 1`` generated members.

    ``seed``: all closeness mutants. ``comb``: ceil((size-1)/2) mutants, the
    rest uniform random. ``rnd``: all uniform random.
    """
    if size < 2:
        raise ValueError("population size must be at least 2")
    if strategy not in SEEDINGS:
        raise ValueError(f"unknown seeding strategy {strategy!r}")
    rest = size - 1
    n_seeded = {"seed": rest, "comb": math.ceil(rest / 2), "rnd": 0}[strategy]
    members = [flatten(original)]
    members += [seed_individual(original, bounds, rng) for _ in range(n_seeded)]
    members += [random_individual(bounds, rng) for _ in range(rest - n_seeded)]
    return Population(members)


# --------------------------------------------------------------------------
# ranking


def dominates(a: ObjectiveVector | None, b: ObjectiveVector | None) -> bool:
    """Pareto dominance with dist_wps minimised and unstable maximised."""
    if a is None:
        return False
    if b is None:
        return True
    no_worse = a[0] <= b[0] and a[1] >= b[1]
    better = a[0] < b[0] or a[1] > b[1]
    return no_worse and better


def fast_nondominated_sort(objectives: Sequence[ObjectiveVector | None]) -> list[list[int]]:
    """Partition indices into successive nondominated fronts.

    Infeasible members (``None``) form one final front of their own.
    """
    feasible = [i for i, o in enumerate(objectives) if o is not None]
    infeasible = [i for i, o in enumerate(objectives) if o is None]
    dominated_by = {i: [] for i in feasible}
    counts = {i: 0 for i in feasible}
    for ii, p in enumerate(feasible):
        for q in feasible[ii + 1 :]:
            if dominates(objectives[p], objectives[q]):
                dominated_by[p].append(q)
                counts[q] += 1
            elif dominates(objectives[q], objectives[p]):
                dominated_by[q].append(p)
                counts[p] += 1
    fronts = []
    current = [i for i in feasible if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for p in current:
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        current = sorted(nxt)
    if infeasible:
        fronts.append(infeasible)
    return fronts


def crowding_distance(front: Sequence[ObjectiveVector]) -> np.ndarray:
    """Normalised cuboid perimeter for each member; extremes get +inf."""
    n = len(front)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    objs = np.asarray(front, dtype=float)
    for m in range(objs.shape[1]):
        order = np.argsort(objs[:, m], kind="stable")
        lo, hi = objs[order[0], m], objs[order[-1], m]
        dist[order[0]] = dist[order[-1]] = np.inf
        if hi == lo:
            continue
        gaps = (objs[order[2:], m] - objs[order[:-2], m]) / (hi - lo)
        dist[order[1:-1]] += gaps
    return dist


def rank_and_crowding(objectives: Sequence[ObjectiveVector | None]) -> tuple[np.ndarray, np.ndarray]:
    n = len(objectives)
    rank = np.empty(n, dtype=int)
    crowd = np.zeros(n)
    for r, front in enumerate(fast_nondominated_sort(objectives)):
        rank[front] = r
        if objectives[front[0]] is not None:
            crowd[front] = crowding_distance([objectives[i] for i in front])
    return rank, crowd


def environmental_selection(objectives: Sequence[ObjectiveVector | None], size: int) -> list[int]:
    """Indices of the ``size`` survivors, by rank then crowding distance."""
    chosen: list[int] = []
    for front in fast_nondominated_sort(objectives):
        if len(chosen) + len(front) <= size:
            chosen += front
            continue
        room = size - len(chosen)
        if objectives[front[0]] is None:
            chosen += front[:room]
        else:
            crowd = crowding_distance([objectives[i] for i in front])
            order = np.argsort(-crowd, kind="stable")
            chosen += [front[k] for k in order[:room]]
        break
    return chosen


def binary_tournament(rank: np.ndarray, crowd: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    picks = rng.integers(0, len(rank), size=(k, 2))
    winners = []
    for a, b in picks:
        if rank[a] != rank[b]:
            winners.append(int(a if rank[a] < rank[b] else b))
        elif crowd[a] != crowd[b]:
            winners.append(int(a if crowd[a] > crowd[b] else b))
        else:
            winners.append(int(a))
    return winners


# --------------------------------------------------------------------------
# variation


def sbx_crossover(
    parent_a: np.ndarray,
    parent_b: np.ndarray,
    bounds: SearchBounds,
    config: SearchConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover that never splits a waypoint.

    One spread factor is drawn per waypoint and shared by its coordinates.
    A random cut between waypoints decides which parent each child stays
    close to: child A follows parent A before the cut and parent B after
    it, child B the opposite.
    """
    a = np.asarray(parent_a, dtype=float)
    b = np.asarray(parent_b, dtype=float)
    if rng.random() >= config.crossover_probability:
        return a.copy(), b.copy()
    dim = bounds.dim
    n_wp = a.shape[0] // dim
    eta = config.crossover_distribution_index
    mu = rng.random(n_wp)
    beta = np.where(
        mu <= 0.5,
        (2.0 * mu) ** (1.0 / (eta + 1.0)),
        (2.0 - 2.0 * mu) ** (-1.0 / (eta + 1.0)),
    )
    beta = np.repeat(beta, dim)
    cut = int(rng.integers(1, n_wp)) if n_wp > 1 else 0
    mean, half = 0.5 * (a + b), 0.5 * (a - b)
    near_a = mean + beta * half
    near_b = mean - beta * half
    split = cut * dim
    child_a = np.concatenate([near_a[:split], near_b[split:]])
    child_b = np.concatenate([near_b[:split], near_a[split:]])
    return bounds.clip(child_a), bounds.clip(child_b)


def polynomial_mutation(
    individual: np.ndarray,
    bounds: SearchBounds,
    min_wp_dist: float,
    original: WaypointSet,
    config: SearchConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Bounded polynomial mutation, rolled back entirely if it breaks minWPdist."""
    x = np.asarray(individual, dtype=float)
    n = x.shape[0]
    rate = config.expected_mutated_variables / n
    mask = rng.random(n) < rate
    mu = rng.random(n)
    if not mask.any():
        return x.copy()
    lo, hi = bounds.lower, bounds.upper
    span = hi - lo
    eta = config.mutation_distribution_index
    d1 = (x - lo) / span
    d2 = (hi - x) / span
    power = 1.0 / (eta + 1.0)
    low_side = (2.0 * mu + (1.0 - 2.0 * mu) * (1.0 - d1) ** (eta + 1.0)) ** power - 1.0
    high_side = 1.0 - (2.0 * (1.0 - mu) + 2.0 * (mu - 0.5) * (1.0 - d2) ** (eta + 1.0)) ** power
    deltaq = np.where(mu <= 0.5, low_side, high_side)
    y = bounds.clip(np.where(mask, x + deltaq * span, x))
    if not validate_waypoint_set(decode(y, original), min_wp_dist):
        return x.copy()
    return y


# --------------------------------------------------------------------------
# runs


@dataclass
class RunRecord:
    """Outcome of one search run: final front plus the full evaluation log."""

    approach: str
    front: list[tuple[np.ndarray, ObjectiveVector]]
    log: list[dict]
    evaluations: int
    rng_seed: int
    repetition: int = 0
    wall_clock: float = 0.0
    history: list[tuple[float, float]] = field(default_factory=list)
    # one SimulationResult per front member, filled in by the harness
    traces: list = field(default_factory=list, repr=False)
    # persisted metadata (config, seeds), present on records loaded from disk
    meta: dict = field(default_factory=dict, repr=False)

    def front_objectives(self) -> list[ObjectiveVector]:
        return [o for _, o in self.front]


def nondominated(members: Sequence[tuple[np.ndarray, ObjectiveVector | None]]) -> list:
    """Front 0 of feasible members, with exact duplicate individuals removed."""
    feasible = [(x, o) for x, o in members if o is not None]
    if not feasible:
        return []
    front0 = fast_nondominated_sort([o for _, o in feasible])[0]
    seen, out = set(), []
    for i in front0:
        key = feasible[i][0].tobytes()
        if key not in seen:
            seen.add(key)
            out.append(feasible[i])
    return out


def _best(objectives) -> tuple[float, float]:
    feas = [o for o in objectives if o is not None]
    if not feas:
        return (math.inf, -math.inf)
    return (min(o[0] for o in feas), max(o[1] for o in feas))


def _evaluate_all(members, ctx: EvaluationContext, gen: int):
    ctx.generation = gen
    return [evaluate(m, ctx) for m in members]


def nsga2_run(ctx: EvaluationContext, config: SearchConfig, approach: str | None = None) -> RunRecord:
    """NSGA-II with (mu + lambda) survival; uses exactly ``population_size * max_generations`` evaluations."""
    t0 = time.perf_counter()
    start_evals = ctx.evaluations
    if ctx.log is None:
        ctx.log = []
    log_start = len(ctx.log)
    rng = make_rng(config.rng_seed)
    size = config.population_size
    pop = init_population(config.seeding, size, ctx.original, ctx.bounds, rng)
    members = pop.members
    objectives = _evaluate_all(members, ctx, 0)
    history = [_best(objectives)]

    for gen in range(1, config.max_generations):
        rank, crowd = rank_and_crowding(objectives)
        parents = binary_tournament(rank, crowd, size + (size % 2), rng)
        offspring = []
        for i in range(0, len(parents), 2):
            ca, cb = sbx_crossover(members[parents[i]], members[parents[i + 1]], ctx.bounds, config, rng)
            for child in (ca, cb):
                offspring.append(
                    polynomial_mutation(
                        child, ctx.bounds, ctx.vessel.min_wp_dist, ctx.original, config, rng
                    )
                )
        offspring = offspring[:size]
        off_obj = _evaluate_all(offspring, ctx, gen)
        pool, pool_obj = members + offspring, objectives + off_obj
        keep = environmental_selection(pool_obj, size)
        members = [pool[i] for i in keep]
        objectives = [pool_obj[i] for i in keep]
        history.append(_best(objectives))

    return RunRecord(
        approach=approach or f"WPgen_{config.seeding}",
        front=nondominated(list(zip(members, objectives))),
        log=ctx.log[log_start:],
        evaluations=ctx.evaluations - start_evals,
        rng_seed=config.rng_seed,
        wall_clock=time.perf_counter() - t0,
        history=history,
    )


def random_search_run(ctx: EvaluationContext, config: SearchConfig, approach: str = "RS") -> RunRecord:
    """Uniform sampling with the same budget as NSGA-II; front over all evaluations."""
    t0 = time.perf_counter()
    start_evals = ctx.evaluations
    if ctx.log is None:
        ctx.log = []
    log_start = len(ctx.log)
    rng = make_rng(config.rng_seed)
    size = config.population_size
    evaluated = []
    history = []
    for k in range(config.budget):
        x = flatten(ctx.original) if k == 0 else random_individual(ctx.bounds, rng)
        ctx.generation = k // size
        evaluated.append((x, evaluate(x, ctx)))
        if (k + 1) % size == 0 or k + 1 == config.budget:
            history.append(_best([o for _, o in evaluated]))
    return RunRecord(
        approach=approach,
        front=nondominated(evaluated),
        log=ctx.log[log_start:],
        evaluations=ctx.evaluations - start_evals,
        rng_seed=config.rng_seed,
        wall_clock=time.perf_counter() - t0,
        history=history,
    )
