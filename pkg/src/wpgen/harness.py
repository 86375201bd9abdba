"""Experiment orchestration: presets, repeated runs, persistence and reports.

A run directory holds ``front.csv``, ``evals.jsonl``, ``meta.json`` and one
trace CSV per front member under ``traces/``. Runs are written to a
temporary directory and renamed into place, so a directory that exists is
complete.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib.resources import files
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .classify import SubPathClass, categorize_path, summarize
from .domain import VesselConfig, WaypointSet, decode, make_bounds, validate_waypoint_set
from .fitness import EvaluationContext, ObjectiveVector
from .search import RunRecord, SearchConfig, nsga2_run, random_search_run
from .simulator import SimulationResult
from .stats import ComparisonResult, compare_values, run_hypervolumes

APPROACHES = ("WPgen_seed", "WPgen_comb", "WPgen_rnd", "RS")
DESK_SEARCH = SearchConfig(population_size=10, max_generations=100)


# --------------------------------------------------------------------------
# registry and configuration


def load_registry() -> dict:
    return json.loads(files("wpgen").joinpath("data/vessels.json").read_text())


def vessel_profile(name: str) -> VesselConfig:
    vessels = load_registry()["vessels"]
    if name not in vessels:
        raise KeyError(f"unknown vessel profile {name!r}; known: {sorted(vessels)}")
    return VesselConfig.from_dict(vessels[name])


@dataclass(frozen=True)
class ExperimentConfig:
    vessel: VesselConfig
    original: WaypointSet
    delta: float
    approaches: tuple[str, ...] = APPROACHES
    repetitions: int = 10
    search: SearchConfig = DESK_SEARCH
    seed: int = 0
    out: Path | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        unknown = set(self.approaches) - set(APPROACHES)
        if unknown:
            raise ValueError(f"unknown approaches {sorted(unknown)}")
        if not self.approaches:
            raise ValueError("no approaches selected")
        if self.original.dim != self.vessel.dim:
            raise ValueError(
                f"{self.vessel.kind} vessel needs {self.vessel.dim}D waypoints, got {self.original.dim}D"
            )
        if not validate_waypoint_set(self.original, self.vessel.min_wp_dist):
            raise ValueError("original route violates the minimum waypoint distance")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        """Build from the JSON layout; ``vessel`` is a registry name or an inline profile.

        An inline profile may name a registry entry under ``base`` and
        override some of its fields.
        """
        v = d["vessel"]
        if isinstance(v, str):
            vessel = vessel_profile(v)
        else:
            v = dict(v)
            base = v.pop("base", None)
            merged = dict(load_registry()["vessels"][base]) if base else {}
            merged.update(v)
            vessel = VesselConfig.from_dict(merged)
        search = SearchConfig(**{**asdict(DESK_SEARCH), **d.get("search", {})})
        out = d.get("out")
        if out is not None:
            out = Path(out)
            if base_dir is not None and not out.is_absolute():
                out = base_dir / out
        return cls(
            vessel=vessel,
            original=WaypointSet(d["waypoints"]),
            delta=float(d["delta"]),
            approaches=tuple(d.get("approaches", APPROACHES)),
            repetitions=int(d.get("repetitions", 10)),
            search=search,
            seed=int(d.get("seed", 0)),
            out=out,
        )

    def to_dict(self) -> dict:
        return {
            "vessel": self.vessel.to_dict(),
            "waypoints": self.original.array.tolist(),
            "delta": self.delta,
            "search": asdict(self.search),
            "approaches": list(self.approaches),
            "repetitions": self.repetitions,
            "seed": self.seed,
            "out": None if self.out is None else str(self.out),
        }


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    return ExperimentConfig.from_dict(json.loads(path.read_text()), base_dir=path.parent)


def builtin_case_studies() -> dict[str, ExperimentConfig]:
    """Surface preset (N=6, delta 400) and two underwater presets (N=7, delta 150)."""
    reg = load_registry()
    return {
        name: ExperimentConfig(
            vessel=VesselConfig.from_dict(reg["vessels"][cs["vessel"]]),
            original=WaypointSet(cs["waypoints"]),
            delta=float(cs["delta"]),
        )
        for name, cs in reg["case_studies"].items()
    }


# --------------------------------------------------------------------------
# running


def derive_seed(base_seed: int, approach: str, repetition: int) -> int:
    """64-bit run seed: BLAKE2b-64 of ``"<base>:<approach>:<rep>"``, little-endian."""
    digest = hashlib.blake2b(f"{base_seed}:{approach}:{repetition}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def make_context(cfg: ExperimentConfig) -> EvaluationContext:
    return EvaluationContext(cfg.original, make_bounds(cfg.original, cfg.delta), cfg.vessel)


def run_single(cfg: ExperimentConfig, approach: str, repetition: int) -> RunRecord:
    """One search run, with a simulation trace attached to every front member."""
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}")
    ctx = make_context(cfg)
    seed = derive_seed(cfg.seed, approach, repetition)
    if approach == "RS":
        record = random_search_run(ctx, replace(cfg.search, rng_seed=seed), approach)
    else:
        seeding = approach.split("_", 1)[1]
        record = nsga2_run(ctx, replace(cfg.search, seeding=seeding, rng_seed=seed), approach)
    record.repetition = repetition
    record.traces = [ctx.run(decode(x, cfg.original)) for x, _ in record.front]
    return record


def run_dir(out: Path, approach: str, repetition: int) -> Path:
    return Path(out) / approach / f"rep_{repetition:03d}"


def _check_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc


def _run_and_save(cfg: ExperimentConfig, approach: str, repetition: int) -> Path:
    record = run_single(cfg, approach, repetition)
    return save_run(record, cfg, run_dir(cfg.out, approach, repetition))


def run_experiment(
    cfg: ExperimentConfig,
    workers: int = 1,
    progress: Callable[[str, int, bool], None] | None = None,
) -> list[RunRecord]:
    """Run every (approach, repetition) pair not already persisted under ``cfg.out``.

    ``progress(approach, repetition, skipped)`` is called after each pair.
    Returns all records, freshly computed or loaded, in approach-major order.
    """
    if cfg.out is None:
        raise ValueError("experiment config has no output directory")
    out = Path(cfg.out)
    _check_writable(out)
    (out / "experiment.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    pairs = [(a, r) for a in cfg.approaches for r in range(cfg.repetitions)]
    todo = [(a, r) for a, r in pairs if not (run_dir(out, a, r) / "meta.json").exists()]
    if progress:
        for a, r in pairs:
            if (a, r) not in todo:
                progress(a, r, True)
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_and_save, cfg, a, r): (a, r) for a, r in todo}
            for fut, (a, r) in futures.items():
                fut.result()
                if progress:
                    progress(a, r, False)
    else:
        for a, r in todo:
            _run_and_save(cfg, a, r)
            if progress:
                progress(a, r, False)
    return [load_run(run_dir(out, a, r)) for a, r in pairs]


# --------------------------------------------------------------------------
# persistence


def front_csv(record: RunRecord, dim: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n_var = len(record.front[0][0]) if record.front else 0
    axes = "xyz"[:dim]
    coords = [f"wp{2 + i // dim}_{axes[i % dim]}" for i in range(n_var)]
    w.writerow(["solution", *coords, "dist_wps", "unstable"])
    for k, (x, obj) in enumerate(record.front):
        w.writerow([k, *(repr(float(v)) for v in x), repr(float(obj[0])), repr(float(obj[1]))])
    return buf.getvalue()


def parse_front_csv(text: str) -> list[tuple[np.ndarray, ObjectiveVector]]:
    rows = list(csv.reader(io.StringIO(text)))
    front = []
    for row in rows[1:]:
        vals = [float(v) for v in row[1:]]
        front.append((np.array(vals[:-2]), ObjectiveVector(vals[-2], vals[-1])))
    return front


def save_run(record: RunRecord, cfg: ExperimentConfig, target: Path) -> Path:
    """Persist atomically: build in a sibling temp directory, then rename."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        (tmp / "front.csv").write_text(front_csv(record, cfg.original.dim))
        with open(tmp / "evals.jsonl", "w") as fh:
            for entry in record.log:
                fh.write(json.dumps(entry) + "\n")
        traces = tmp / "traces"
        traces.mkdir()
        for k, result in enumerate(record.traces):
            (traces / f"solution_{k:03d}.csv").write_text(result.to_csv())
        meta = {
            "approach": record.approach,
            "repetition": record.repetition,
            "rng_seed": record.rng_seed,
            "evaluations": record.evaluations,
            "wall_clock": record.wall_clock,
            "front_size": len(record.front),
            "empty_front": not record.front,
            "history": record.history,
            "config": cfg.to_dict(),
        }
        (tmp / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        if target.exists():
            shutil.rmtree(target)
        os.rename(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return target


def load_run(path: str | os.PathLike, with_log: bool = True) -> RunRecord:
    path = Path(path)
    meta = json.loads((path / "meta.json").read_text())
    log = []
    if with_log and (path / "evals.jsonl").exists():
        with open(path / "evals.jsonl") as fh:
            log = [json.loads(line) for line in fh if line.strip()]
    traces = [
        SimulationResult.from_csv(p.read_text())
        for p in sorted((path / "traces").glob("solution_*.csv"))
    ]
    return RunRecord(
        approach=meta["approach"],
        front=parse_front_csv((path / "front.csv").read_text()),
        log=log,
        evaluations=meta["evaluations"],
        rng_seed=meta["rng_seed"],
        repetition=meta["repetition"],
        wall_clock=meta["wall_clock"],
        history=[tuple(h) for h in meta.get("history", [])],
        traces=traces,
        meta=meta,
    )


def find_runs(roots: Iterable[str | os.PathLike]) -> list[Path]:
    """Every persisted run directory below the given roots, sorted."""
    found = set()
    for root in roots:
        root = Path(root)
        if (root / "meta.json").exists():
            found.add(root)
        found.update(p.parent for p in root.rglob("meta.json") if not p.parent.name.startswith("."))
    return sorted(found)


def load_runs(roots: Iterable[str | os.PathLike], with_log: bool = False) -> list[RunRecord]:
    return [load_run(p, with_log=with_log) for p in find_runs(roots)]


def vessel_of(record: RunRecord) -> str:
    return record.meta["config"]["vessel"]["name"]


# --------------------------------------------------------------------------
# reporting


def group_runs(records: Sequence[RunRecord]) -> dict[str, dict[str, list[RunRecord]]]:
    """vessel -> approach -> records sorted by repetition (approaches in canonical order)."""
    out: dict[str, dict[str, list[RunRecord]]] = {}
    for rec in records:
        out.setdefault(vessel_of(rec), {}).setdefault(rec.approach, []).append(rec)
    for by_approach in out.values():
        for recs in by_approach.values():
            recs.sort(key=lambda r: r.repetition)
    order = {a: i for i, a in enumerate(APPROACHES)}
    return {
        v: dict(sorted(g.items(), key=lambda kv: order.get(kv[0], len(order))))
        for v, g in sorted(out.items())
    }


def hypervolume_table(records: Sequence[RunRecord]) -> list[dict]:
    """One row per run: vessel, approach, repetition, hv, empty_front."""
    rows = []
    for vessel, by_approach in group_runs(records).items():
        hv = run_hypervolumes(
            {a: [r.front_objectives() for r in recs] for a, recs in by_approach.items()}
        )
        for a, recs in by_approach.items():
            for rec, value in zip(recs, hv[a]):
                rows.append({
                    "vessel": vessel,
                    "approach": a,
                    "repetition": rec.repetition,
                    "hv": value,
                    "empty_front": not rec.front,
                })
    return rows


def comparison_table(records: Sequence[RunRecord], alpha: float = 0.05) -> list[dict]:
    rows = []
    hv = hypervolume_table(records)
    for vessel in dict.fromkeys(r["vessel"] for r in hv):
        values: dict[str, list[float]] = {}
        for r in hv:
            if r["vessel"] == vessel:
                values.setdefault(r["approach"], []).append(r["hv"])
        # significance needs at least two approaches with two runs each
        if len(values) < 2 or min(len(v) for v in values.values()) < 2:
            continue
        for c in compare_values(values, alpha):
            rows.append({"vessel": vessel, **comparison_row(c)})
    return rows


def comparison_row(c: ComparisonResult) -> dict:
    return {
        "approach_a": c.approach_a,
        "approach_b": c.approach_b,
        "p_value": c.p_value,
        "a12": c.a12,
        "verdict": c.verdict,
        "strength": c.strength,
    }


def category_rows(records: Sequence[RunRecord]) -> list[dict]:
    """One row per classified leg: run, solution, leg, class."""
    rows = []
    for rec in records:
        run = f"{vessel_of(rec)}/{rec.approach}/rep_{rec.repetition:03d}"
        for k, trace in enumerate(rec.traces):
            for sp, cls in zip(trace.subpaths, categorize_path(trace)):
                rows.append({"run": run, "solution": k, "leg": sp.leg_index, "class": cls.value})
    return rows


def subpath_table(records: Sequence[RunRecord]) -> list[dict]:
    """Sub-path class percentages: rows approach x class, one column per vessel."""
    cells: dict[tuple[str, str], dict[str, float]] = {}
    for vessel, by_approach in group_runs(records).items():
        for a, recs in by_approach.items():
            cats = [categorize_path(t) for r in recs for t in r.traces]
            n = len(recs[0].meta["config"]["waypoints"])
            pct = summarize(cats, n).percentages
            for cls in SubPathClass:
                cells.setdefault((a, cls.value), {})[vessel] = pct[cls]
    return [{"approach": a, "class": c, **v} for (a, c), v in cells.items()]


def unique_path_table(records: Sequence[RunRecord]) -> list[dict]:
    """Mean over runs of the percentage of distinct full-path categories, per approach and vessel."""
    cells: dict[str, dict[str, float]] = {}
    for vessel, by_approach in group_runs(records).items():
        for a, recs in by_approach.items():
            cells.setdefault(a, {})[vessel] = float(np.mean([unique_path_percentage(r) for r in recs]))
    return [{"approach": a, **v} for a, v in cells.items()]


def unique_path_percentage(record: RunRecord) -> float:
    if not record.meta:
        raise ValueError("record carries no configuration")
    n = len(record.meta["config"]["waypoints"])
    return summarize([categorize_path(t) for t in record.traces], n).unique_percentage


def write_csv(path: Path, rows: Sequence[dict], columns: Sequence[str] | None = None) -> Path:
    if columns is None:
        columns = list(dict.fromkeys(k for row in rows for k in row))
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    return path


@dataclass
class Report:
    comparison: list[dict] = field(default_factory=list)
    subpaths: list[dict] = field(default_factory=list)
    unique_paths: list[dict] = field(default_factory=list)
    hypervolumes: list[dict] = field(default_factory=list)

    @property
    def empty_fronts(self) -> list[dict]:
        return [r for r in self.hypervolumes if r["empty_front"]]


COMPARISON_COLUMNS = ["vessel", "approach_a", "approach_b", "p_value", "a12", "verdict", "strength"]


def report(records: Sequence[RunRecord], out: str | os.PathLike | None = None) -> Report:
    """Comparison, sub-path and unique-path tables plus per-run HV values.

    With ``out`` set, writes comparison.csv, subpaths.csv, unique_paths.csv
    and one hv_<vessel>_<approach>.csv per group.
    """
    if not records:
        raise ValueError("no run records to report on")
    rep = Report(
        comparison=comparison_table(records),
        subpaths=subpath_table(records),
        unique_paths=unique_path_table(records),
        hypervolumes=hypervolume_table(records),
    )
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "comparison.csv", rep.comparison, COMPARISON_COLUMNS)
        write_csv(out / "subpaths.csv", rep.subpaths)
        write_csv(out / "unique_paths.csv", rep.unique_paths)
        groups: dict[tuple[str, str], list[dict]] = {}
        for row in rep.hypervolumes:
            groups.setdefault((row["vessel"], row["approach"]), []).append(row)
        for (vessel, approach), rows in groups.items():
            write_csv(out / f"hv_{vessel}_{approach}.csv", rows, ["repetition", "hv", "empty_front"])
    return rep
