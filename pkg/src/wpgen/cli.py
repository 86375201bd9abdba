"""Command-line entry point: run, compare, classify, hv, report."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .classify import categorize_path, summarize
from .harness import (
    APPROACHES,
    COMPARISON_COLUMNS,
    builtin_case_studies,
    category_rows,
    comparison_table,
    group_runs,
    hypervolume_table,
    load_config,
    load_runs,
    report,
    run_experiment,
    write_csv,
)


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path(args.runs[0])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _records(args):
    records = load_runs(args.runs)
    if not records:
        sys.exit(f"no run directories found under {', '.join(args.runs)}")
    return records


def cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = builtin_case_studies()[args.preset]
    changes = {}
    if args.approach:
        changes["approaches"] = tuple(args.approach)
    if args.reps is not None:
        changes["repetitions"] = args.reps
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out:
        changes["out"] = Path(args.out)
    if args.generations is not None:
        changes["search"] = replace(cfg.search, max_generations=args.generations)
    cfg = replace(cfg, **changes)
    if cfg.out is None:
        sys.exit("no output directory: set 'out' in the config or pass --out")

    def progress(approach, rep, skipped):
        state = "skipped (already done)" if skipped else "done"
        print(f"{approach} rep {rep}: {state}", file=sys.stderr)

    records = run_experiment(cfg, workers=args.workers, progress=progress)
    print(f"{len(records)} runs in {cfg.out}")
    return 0


def cmd_compare(args) -> int:
    rows = comparison_table(_records(args), alpha=args.alpha)
    path = write_csv(_out_dir(args) / "comparison.csv", rows, COMPARISON_COLUMNS)
    print(path)
    return 0


def cmd_classify(args) -> int:
    records = _records(args)
    out = _out_dir(args)
    write_csv(out / "categories.csv", category_rows(records), ["run", "solution", "leg", "class"])
    summary = {}
    for vessel, by_approach in group_runs(records).items():
        for approach, recs in by_approach.items():
            n = len(recs[0].meta["config"]["waypoints"])
            s = summarize([categorize_path(t) for r in recs for t in r.traces], n)
            summary.setdefault(vessel, {})[approach] = {
                "percentages": {c.value: p for c, p in s.percentages.items()},
                "counts": {c.value: k for c, k in s.counts.items()},
                "unique_paths": s.unique_count,
                "unique_percentage": s.unique_percentage,
                "max_categories": s.max_categories,
            }
    (out / "classification_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(out / "categories.csv")
    return 0


def cmd_hv(args) -> int:
    rows = hypervolume_table(_records(args))
    path = write_csv(_out_dir(args) / "hv.csv", rows)
    for r in rows:
        if r["empty_front"]:
            print(f"warning: empty front in {r['vessel']}/{r['approach']} rep {r['repetition']}", file=sys.stderr)
    print(path)
    return 0


def cmd_report(args) -> int:
    rep = report(_records(args), _out_dir(args))
    for r in rep.empty_fronts:
        print(f"warning: empty front in {r['vessel']}/{r['approach']} rep {r['repetition']}", file=sys.stderr)
    for row in rep.unique_paths:
        cells = ", ".join(f"{k}={v:.2f}%" for k, v in row.items() if k != "approach")
        print(f"unique paths {row['approach']}: {cells}")
    for row in rep.comparison:
        print(
            f"{row['vessel']}: {row['approach_a']} vs {row['approach_b']} "
            f"p={row['p_value']:.4g} A12={row['a12']:.3f} {row['verdict']} {row['strength']}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpgen", description="Search for waypoint perturbations that destabilise vessel paths."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment JSON file")
    src.add_argument("--preset", choices=sorted(builtin_case_studies()), help="built-in case study")
    run.add_argument("--approach", action="append", choices=APPROACHES, help="repeatable; default all")
    run.add_argument("--reps", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--generations", type=int)
    run.add_argument("--out")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    for name, func, text in [
        ("compare", cmd_compare, "pairwise HV comparison -> comparison.csv"),
        ("classify", cmd_classify, "classify front traces -> categories.csv + summary"),
        ("hv", cmd_hv, "per-run hypervolume -> hv.csv"),
        ("report", cmd_report, "all tables and HV lists"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--runs", nargs="+", required=True, help="experiment or run directories")
        p.add_argument("--out", help="output directory (default: first --runs directory)")
        if name == "compare":
            p.add_argument("--alpha", type=float, default=0.05)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
