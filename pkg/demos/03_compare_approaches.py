"""Compare the three seeding strategies and random search on the surface preset.

Uses a reduced budget so it finishes in about a minute. Results land in
``demo_runs/`` and can be fed to the command line tools afterwards, e.g.
``wpgen report --runs demo_runs``.
"""
# %% Four approaches, five repetitions, 300 evaluations per run.
from dataclasses import replace
from pathlib import Path

from wpgen import SearchConfig, builtin_case_studies, report, run_experiment

case = builtin_case_studies()["mariner"]
cfg = replace(
    case,
    repetitions=5,
    search=SearchConfig(population_size=10, max_generations=30),
    out=Path("demo_runs"),
)
records = run_experiment(cfg, progress=lambda a, r, skipped: print(a, r, "cached" if skipped else "done"))

# %% Pairwise hypervolume comparison.
rep = report(records, cfg.out / "report")
for row in rep.comparison:
    print(f"{row['approach_a']:>10} vs {row['approach_b']:<10} p={row['p_value']:.3f} "
          f"A12={row['a12']:.2f} {row['verdict']} {row['strength']}")

# %% Share of stable, unstable and missing legs among front solutions.
for row in rep.subpaths:
    print(f"{row['approach']:>10} {row['class']:<8} {row['mariner']:6.2f}%")

# %% Distinct full-path categories as a share of all possible ones.
for row in rep.unique_paths:
    print(f"{row['approach']:>10} unique paths {row['mariner']:.2f}%")
