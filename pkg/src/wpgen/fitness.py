"""The two search objectives and the evaluation bridge to the simulator.

``dist_wps`` (minimised) measures how far a candidate route moved away from
the original one. ``unstable`` (maximised) sums, over simulated legs, the
leg's sample count divided by the length of the corresponding ORIGINAL leg.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .domain import SearchBounds, VesselConfig, WaypointSet, decode, validate_waypoint_set
from .simulator import SimulationResult, initial_state, leg_sample_caps, simulate


class ObjectiveVector(NamedTuple):
    dist_wps: float
    unstable: float


# Death-penalty marker: compares as worse than any feasible objective vector.
INFEASIBLE = None


def fit_dist_wps(candidate: WaypointSet, original: WaypointSet) -> float:
    if candidate.array.shape != original.array.shape:
        raise ValueError("candidate and original routes differ in shape")
    diff = candidate.array - original.array
    return math.sqrt(float(np.sum(diff * diff)))


def fit_unstable(result: SimulationResult, original: WaypointSet) -> float:
    legs = original.leg_lengths()
    if np.any(legs == 0.0):
        raise ValueError("original route has a zero-length leg")
    total = 0.0
    for sp in result.subpaths:
        total += len(sp) / float(legs[sp.leg_index - 1])
    return total


@dataclass
class EvaluationContext:
    """Everything needed to score an individual against one original route.

    The vessel always starts from the ORIGINAL route's initial state, and
    every candidate shares the per-leg sample caps derived from the original.
    """

    original: WaypointSet
    bounds: SearchBounds
    vessel: VesselConfig
    log: list[dict] | None = None
    keep_results: bool = False
    evaluations: int = 0
    simulations: int = 0
    generation: int = 0
    results: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.start = initial_state(self.vessel, self.original)
        self.leg_caps = leg_sample_caps(self.vessel, self.original)

    def run(self, wps: WaypointSet) -> SimulationResult:
        with self._lock:
            self.simulations += 1
        return simulate(self.vessel, wps, self.start, self.leg_caps)


def evaluate(individual: np.ndarray, ctx: EvaluationContext) -> ObjectiveVector | None:
    """Score one individual; returns ``INFEASIBLE`` for routes violating minWPdist.

    Infeasible routes are never simulated. A simulator failure is also
    treated as infeasible.
    """
    individual = np.asarray(individual, dtype=float)
    with ctx._lock:
        ctx.evaluations += 1
    wps = decode(individual, ctx.original)
    objectives = INFEASIBLE
    if validate_waypoint_set(wps, ctx.vessel.min_wp_dist):
        try:
            result = ctx.run(wps)
        except (ArithmeticError, RuntimeError, ValueError):
            result = None
        if result is not None:
            objectives = ObjectiveVector(
                fit_dist_wps(wps, ctx.original), fit_unstable(result, ctx.original)
            )
            if ctx.keep_results:
                ctx.results[individual.tobytes()] = result
    if ctx.log is not None:
        ctx.log.append(log_entry(ctx.generation, individual, objectives))
    return objectives


def log_entry(gen: int, individual: np.ndarray, objectives: ObjectiveVector | None) -> dict:
    feasible = objectives is not None
    return {
        "gen": gen,
        "individual": [float(v) for v in individual],
        "feasible": feasible,
        "dist_wps": objectives.dist_wps if feasible else None,
        "unstable": objectives.unstable if feasible else None,
    }
