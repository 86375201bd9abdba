"""One NSGA-II run against the surface preset at a small budget.

Run with ``python demos/02_single_search.py``.
"""
# %% Set up the evaluation context: original route, search box and vessel.
from wpgen import EvaluationContext, SearchConfig, builtin_case_studies, categorize_path, make_bounds, nsga2_run
from wpgen.domain import decode

case = builtin_case_studies()["mariner"]
ctx = EvaluationContext(case.original, make_bounds(case.original, case.delta), case.vessel, keep_results=True)

# %% 10 individuals for 30 generations, seeded with mutants of the original route.
config = SearchConfig(population_size=10, max_generations=30, seeding="seed", rng_seed=7)
run = nsga2_run(ctx, config)
print(f"{run.evaluations} evaluations, {ctx.simulations} simulations, {run.wall_clock:.1f}s")

# %% The final front trades waypoint displacement against path length.
for x, obj in sorted(run.front, key=lambda m: m[1].dist_wps):
    result = ctx.results[x.tobytes()]
    cats = "".join(str(c)[0] for c in categorize_path(result))
    print(f"dist {obj.dist_wps:8.1f} m  unstable {obj.unstable:6.3f}  legs {cats}")

# %% Best value of each objective per generation never gets worse.
first, last = run.history[0], run.history[-1]
print(f"best dist {first[0]:.1f} -> {last[0]:.1f}, best unstable {first[1]:.3f} -> {last[1]:.3f}")

# %% Decode the most disruptive route found.
worst = max(run.front, key=lambda m: m[1].unstable)[0]
print(decode(worst, case.original).to_csv())
