"""Waypoint perturbation search for testing vessel navigation software."""
from .classify import SubPathClass, categorize_path, classify_angle, classify_subpath, summarize
from .domain import VesselConfig, Waypoint, WaypointSet, make_bounds, validate_waypoint_set
from .fitness import EvaluationContext, ObjectiveVector, evaluate
from .harness import ExperimentConfig, builtin_case_studies, load_config, report, run_experiment
from .search import RunRecord, SearchConfig, nsga2_run, random_search_run
from .simulator import SimulationResult, simulate
from .stats import compare, hypervolume_2d, mann_whitney_u, strength_of, vargha_delaney_a12

__all__ = [
    "EvaluationContext",
    "ExperimentConfig",
    "ObjectiveVector",
    "RunRecord",
    "SearchConfig",
    "SimulationResult",
    "SubPathClass",
    "VesselConfig",
    "Waypoint",
    "WaypointSet",
    "builtin_case_studies",
    "categorize_path",
    "classify_angle",
    "classify_subpath",
    "compare",
    "evaluate",
    "hypervolume_2d",
    "load_config",
    "make_bounds",
    "mann_whitney_u",
    "nsga2_run",
    "random_search_run",
    "report",
    "run_experiment",
    "simulate",
    "strength_of",
    "summarize",
    "validate_waypoint_set",
    "vargha_delaney_a12",
]
