"""Hypervolume and pairwise statistical comparison of search approaches."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import mannwhitneyu

ALPHA = 0.05
REFERENCE = (1.01, 1.01)
REFERENCE_MARGIN = 0.01
EXACT_LIMIT = 20


def hypervolume_2d(front: Sequence[Sequence[float]], reference: Sequence[float]) -> float:
    """Area dominated by ``front`` and bounded by ``reference`` (both objectives minimised)."""
    pts = np.asarray(front, dtype=float).reshape(-1, 2)
    ref = np.asarray(reference, dtype=float)
    if pts.shape[0] == 0:
        return 0.0
    if np.any(pts > ref):
        raise ValueError("front point does not dominate the reference point")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    volume = 0.0
    best_y = ref[1]
    for x, y in pts[order]:
        if y < best_y:
            volume += (ref[0] - x) * (best_y - y)
            best_y = y
    return float(volume)


def to_minimization(front: Sequence[Sequence[float]]) -> np.ndarray:
    """(dist_wps, unstable) pairs -> (dist_wps, -unstable)."""
    pts = np.asarray(front, dtype=float).reshape(-1, 2).copy()
    pts[:, 1] *= -1.0
    return pts


def normalize(fronts: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Min-max scale every front with the extremes observed across all of them."""
    nonempty = [f for f in fronts if len(f)]
    if not nonempty:
        return [np.empty((0, 2)) for _ in fronts]
    stacked = np.vstack(nonempty)
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return [(np.asarray(f, dtype=float).reshape(-1, 2) - lo) / span for f in fronts]


def choose_reference(fronts: Sequence[Sequence[Sequence[float]]]) -> tuple[float, float]:
    """Coordinate-wise worst value over all fronts, pushed out by a 1% margin."""
    pts = [np.asarray(f, dtype=float).reshape(-1, 2) for f in fronts]
    pts = [p for p in pts if len(p)]
    if not pts:
        raise ValueError("no points to derive a reference from")
    worst = np.vstack(pts).max(axis=0)
    ref = worst + REFERENCE_MARGIN * np.abs(worst)
    return float(ref[0]), float(ref[1])


def run_hypervolumes(fronts_by_approach: Mapping[str, Sequence[Sequence]]) -> dict[str, list[float]]:
    """HV of every run's front after shared normalisation; empty fronts score 0.

    ``fronts_by_approach`` maps an approach id to one front per run, each a
    sequence of (dist_wps, unstable) pairs.
    """
    keys, flat = [], []
    for approach, fronts in fronts_by_approach.items():
        for i, f in enumerate(fronts):
            keys.append((approach, i))
            flat.append(to_minimization(f))
    scaled = normalize(flat)
    out: dict[str, list[float]] = {a: [] for a in fronts_by_approach}
    for (approach, _), f in zip(keys, scaled):
        out[approach].append(hypervolume_2d(f, REFERENCE))
    return out


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Two-sided p-value.

    Exact when the combined size is at most 20 and there are no ties,
    otherwise the normal approximation with tie and continuity correction.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be nonempty")
    combined = np.concatenate([a, b])
    ties = np.unique(combined).size < combined.size
    method = "exact" if combined.size <= EXACT_LIMIT and not ties else "asymptotic"
    res = mannwhitneyu(a, b, alternative="two-sided", method=method, use_continuity=True)
    return float(min(1.0, res.pvalue))


def vargha_delaney_a12(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Probability that a draw from ``a`` exceeds one from ``b``, ties counting half."""
    a = np.asarray(sample_a, dtype=float)[:, None]
    b = np.asarray(sample_b, dtype=float)[None, :]
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be nonempty")
    wins = np.count_nonzero(a > b)
    ties = np.count_nonzero(a == b)
    return (wins + 0.5 * ties) / (a.size * b.size)


def strength_of(a12: float) -> str:
    if not 0.0 <= a12 <= 1.0 or math.isnan(a12):
        raise ValueError(f"A12 must lie in [0, 1], got {a12}")
    if 0.44 < a12 < 0.56:
        return "negligible"
    if 0.34 < a12 <= 0.44 or 0.56 <= a12 < 0.64:
        return "small"
    if 0.29 < a12 <= 0.34 or 0.64 <= a12 < 0.71:
        return "medium"
    return "large"


@dataclass(frozen=True)
class ComparisonResult:
    approach_a: str
    approach_b: str
    p_value: float
    a12: float
    verdict: str  # "ND" | "A-better" | "B-better"
    strength: str  # strength bucket, or "ND"

    @property
    def winner(self) -> str | None:
        return {"A-better": self.approach_a, "B-better": self.approach_b}.get(self.verdict)


def compare_values(
    values_by_approach: Mapping[str, Sequence[float]], alpha: float = ALPHA
) -> list[ComparisonResult]:
    """One result per unordered approach pair; higher values are better."""
    if len(values_by_approach) < 2:
        raise ValueError("need at least two approaches")
    for name, vals in values_by_approach.items():
        if len(vals) < 2:
            raise ValueError(f"approach {name!r} has fewer than 2 runs")
    results = []
    for a, b in itertools.combinations(values_by_approach, 2):
        va, vb = values_by_approach[a], values_by_approach[b]
        p = mann_whitney_u(va, vb)
        a12 = vargha_delaney_a12(va, vb)
        if p >= alpha:
            verdict, strength = "ND", "ND"
        else:
            verdict = "A-better" if a12 > 0.5 else "B-better"
            strength = strength_of(a12)
        results.append(ComparisonResult(a, b, p, a12, verdict, strength))
    return results


def compare(
    fronts_by_approach: Mapping[str, Sequence[Sequence]], alpha: float = ALPHA
) -> list[ComparisonResult]:
    """Compare approaches by the hypervolume of their per-run fronts."""
    return compare_values(run_hypervolumes(fronts_by_approach), alpha)
