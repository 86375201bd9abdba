"""Stable / unstable / missing classification of simulated sub-paths.

An attitude signal is unstable when its autocorrelation shows more than one
local peak above 0.1 at positive lags. A sub-path is missing when its target
waypoint was never reached, unstable when any of roll, pitch or yaw is
unstable, and stable otherwise.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .simulator import MISSING, SimulationResult, SubPath

PEAK_THRESHOLD = 0.1
# attitude resolution: spreads below this are indistinguishable from a constant (rad)
ANGLE_RESOLUTION = 1e-3


class SubPathClass(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MISSING = "Missing"

    def __str__(self) -> str:
        return self.value


PathCategory = tuple  # tuple[SubPathClass, ...], one entry per attempted leg


def autocorrelation(signal: Sequence[float], max_lag: int | None = None) -> np.ndarray:
    """Mean-removed, variance-normalised sample autocorrelation over lags 0..L.

    L defaults to ``min(n - 1, n // 2)``. A zero-variance signal gives 1 at
    lag 0 and zeros elsewhere.
    """
    x = np.asarray(signal, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise ValueError("autocorrelation needs at least 2 samples")
    if max_lag is None:
        max_lag = min(n - 1, n // 2)
    acf = np.zeros(max_lag + 1)
    acf[0] = 1.0
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        return acf
    full = np.correlate(d, d, mode="full")[n - 1 : n + max_lag]
    return full / denom


def count_threshold_peaks(acf: Sequence[float], threshold: float = PEAK_THRESHOLD) -> int:
    """Strict local maxima of ``acf`` at lags >= 1 whose value exceeds ``threshold``.

    A plateau counts once. The final lag cannot be a peak since its right
    neighbour is unknown.
    """
    a = np.asarray(acf, dtype=float)
    count = 0
    i = 1
    n = a.shape[0]
    while i < n - 1:
        if a[i] > a[i - 1]:
            j = i
            while j + 1 < n and a[j + 1] == a[i]:
                j += 1
            if j + 1 < n and a[j + 1] < a[i] and a[i] > threshold:
                count += 1
            i = j + 1
        else:
            i += 1
    return count


def classify_angle(
    signal: Sequence[float], unwrap: bool = False, resolution: float = ANGLE_RESOLUTION
) -> str:
    """'unstable' iff the autocorrelation has more than one peak above 0.1.

    Signals shorter than 2 samples, or whose peak-to-peak spread does not
    exceed ``resolution``, are treated as constant and hence stable.
    """
    x = np.asarray(signal, dtype=float)
    if unwrap:
        x = np.unwrap(x)
    if x.shape[0] < 2 or np.ptp(x) <= resolution:
        return "stable"
    peaks = count_threshold_peaks(autocorrelation(x), PEAK_THRESHOLD)
    return "unstable" if peaks > 1 else "stable"


def classify_subpath(sp: SubPath) -> SubPathClass:
    if sp.status == MISSING:
        return SubPathClass.MISSING
    channels = [(sp.roll, False), (sp.pitch, False), (sp.yaw, True)]
    if any(classify_angle(sig, unwrap=u) == "unstable" for sig, u in channels):
        return SubPathClass.UNSTABLE
    return SubPathClass.STABLE


def categorize_path(result: SimulationResult) -> PathCategory:
    return tuple(classify_subpath(sp) for sp in result.subpaths)


def max_categories(n_waypoints: int) -> int:
    """Number of distinct full-path categorisations: 2^(N-1) + 2(N-2)."""
    if n_waypoints < 2:
        raise ValueError("need at least 2 waypoints")
    return 2 ** (n_waypoints - 1) + 2 * (n_waypoints - 2)


@dataclass
class CategorySummary:
    percentages: dict[SubPathClass, float]
    counts: dict[SubPathClass, int]
    unique_count: int
    unique_percentage: float
    max_categories: int


def summarize(categories: Iterable[PathCategory], n_waypoints: int) -> CategorySummary:
    """Per-class share of all sub-path slots and share of distinct full paths."""
    limit = max_categories(n_waypoints)
    categories = [tuple(SubPathClass(c) for c in cat) for cat in categories]
    counts = Counter(c for cat in categories for c in cat)
    total = sum(counts.values())
    pct = {
        cls: (100.0 * counts.get(cls, 0) / total if total else 0.0) for cls in SubPathClass
    }
    unique = len(set(categories))
    return CategorySummary(
        percentages=pct,
        counts={cls: counts.get(cls, 0) for cls in SubPathClass},
        unique_count=unique,
        unique_percentage=100.0 * unique / limit,
        max_categories=limit,
    )
