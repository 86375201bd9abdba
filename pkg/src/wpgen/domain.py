"""Waypoint geometry, route validation and genotype encoding.

Coordinates are metres in a North-East(-Down) frame. Surface routes are 2D,
underwater routes 3D. A search individual is the flat vector of the
coordinates of waypoints 2..N; waypoint 1 is the vessel's start and is
never searched.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    z: float | None = None

    def __post_init__(self):
        for v in self.coords:
            if not math.isfinite(v):
                raise ValueError(f"non-finite waypoint coordinate in {self!r}")

    @property
    def coords(self) -> tuple[float, ...]:
        if self.z is None:
            return (float(self.x), float(self.y))
        return (float(self.x), float(self.y), float(self.z))

    @property
    def dim(self) -> int:
        return 2 if self.z is None else 3


def euclidean_distance(a: Waypoint, b: Waypoint) -> float:
    if a.dim != b.dim:
        raise ValueError(f"dimensionality mismatch: {a.dim}D vs {b.dim}D")
    return math.sqrt(sum((p - q) ** 2 for p, q in zip(a.coords, b.coords)))


class WaypointSet:
    """Immutable ordered route of N >= 2 waypoints, all of one dimensionality."""

    __slots__ = ("_array",)

    def __init__(self, points: Iterable[Waypoint | Sequence[float]] | np.ndarray):
        if isinstance(points, np.ndarray):
            arr = np.array(points, dtype=float)
        else:
            rows = [p.coords if isinstance(p, Waypoint) else tuple(p) for p in points]
            dims = {len(r) for r in rows}
            if len(dims) > 1:
                raise ValueError("mixed 2D/3D waypoints in one set")
            arr = np.array(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise ValueError(f"waypoints must have shape (N, 2) or (N, 3), got {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError("a waypoint set needs at least 2 waypoints")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite waypoint coordinates")
        arr.setflags(write=False)
        self._array = arr

    @property
    def array(self) -> np.ndarray:
        """Read-only (N, dim) coordinate array."""
        return self._array

    @property
    def n(self) -> int:
        return self._array.shape[0]

    @property
    def dim(self) -> int:
        return self._array.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Waypoint:
        return Waypoint(*self._array[i])

    def __iter__(self) -> Iterator[Waypoint]:
        return (Waypoint(*row) for row in self._array)

    def __eq__(self, other) -> bool:
        return isinstance(other, WaypointSet) and np.array_equal(self._array, other._array)

    def __hash__(self):
        return hash(self._array.tobytes())

    def __repr__(self) -> str:
        return f"WaypointSet({self._array.tolist()!r})"

    def leg_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self._array, axis=0), axis=1)

    def translated(self, offset: Sequence[float]) -> "WaypointSet":
        return WaypointSet(self._array + np.asarray(offset, dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["idx", "x", "y", "z"][: 1 + self.dim])
        for i, row in enumerate(self._array, start=1):
            w.writerow([i, *(repr(float(v)) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WaypointSet":
        rows = list(csv.DictReader(io.StringIO(text)))
        keys = ["x", "y", "z"] if rows and "z" in rows[0] else ["x", "y"]
        rows.sort(key=lambda r: int(r["idx"]))
        return cls([[float(r[k]) for k in keys] for r in rows])


def validate_waypoint_set(ws: WaypointSet, min_wp_dist: float) -> bool:
    """True iff every consecutive pair of waypoints is at least `min_wp_dist` apart."""
    return bool(np.all(ws.leg_lengths() >= min_wp_dist))


@dataclass(frozen=True)
class SearchBounds:
    """Per-variable closed intervals for waypoints 2..N, centred on the original route."""

    lower: np.ndarray
    upper: np.ndarray
    delta: float
    dim: int

    @property
    def n_var(self) -> int:
        return self.lower.shape[0]

    def contains(self, values: np.ndarray) -> bool:
        values = np.asarray(values)
        return values.shape == self.lower.shape and bool(
            np.all(values >= self.lower) and np.all(values <= self.upper)
        )

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.lower, self.upper)


def flatten(ws: WaypointSet) -> np.ndarray:
    """Individual encoding of a route: coordinates of waypoints 2..N, row-major."""
    return ws.array[1:].ravel().copy()


def decode(individual: np.ndarray, original: WaypointSet) -> WaypointSet:
    individual = np.asarray(individual, dtype=float)
    expected = (original.n - 1) * original.dim
    if individual.shape != (expected,):
        raise ValueError(f"individual has shape {individual.shape}, expected ({expected},)")
    arr = np.empty_like(original.array)
    arr[0] = original.array[0]
    arr[1:] = individual.reshape(original.n - 1, original.dim)
    return WaypointSet(arr)


def make_bounds(original: WaypointSet, delta: float) -> SearchBounds:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    centre = flatten(original)
    lower, upper = centre - delta, centre + delta
    lower.setflags(write=False)
    upper.setflags(write=False)
    return SearchBounds(lower, upper, float(delta), original.dim)


@dataclass(frozen=True)
class VesselConfig:
    """Vessel profile: route constraints, waypoint switching and dynamics.

    Yaw follows a first-order Nomoto model under a PD heading autopilot;
    underwater profiles add an analogous pitch channel driven by the stern
    plane. Angles are radians, rates rad/s, lengths metres.
    """

    name: str
    kind: str  # "surface" | "underwater"
    min_wp_dist: float
    acceptance_radius: float
    dt: float
    speed: float
    length: float = 1.0
    # None -> per-leg cap derived from the original route (see simulator.leg_sample_caps)
    max_leg_samples: int | None = None
    leg_cap_factor: float = 4.0
    # steering
    nomoto_k: float = 0.1
    nomoto_t: float = 10.0
    rudder_max: float = math.radians(35.0)
    rudder_rate: float = math.radians(5.0)
    heading_kp: float = 1.0
    heading_kd: float = 10.0
    lookahead: float = 100.0
    # roll, a damped oscillator driven by yaw rate and yaw acceleration
    roll_period: float = 20.0
    roll_damping: float = 0.1
    roll_gain: float = 1.0
    roll_accel_gain: float = 0.0
    # pitch / depth (underwater only)
    pitch_k: float = 0.1
    pitch_t: float = 5.0
    plane_max: float = math.radians(25.0)
    plane_rate: float = math.radians(10.0)
    pitch_kp: float = 1.0
    pitch_kd: float = 5.0
    pitch_max: float = math.radians(30.0)
    depth_lookahead: float = 10.0

    def __post_init__(self):
        if self.kind not in ("surface", "underwater"):
            raise ValueError(f"unknown vessel kind {self.kind!r}")
        for field in ("min_wp_dist", "acceptance_radius", "dt", "speed"):
            if not getattr(self, field) > 0:
                raise ValueError(f"{field} must be positive")
        if self.max_leg_samples is not None and self.max_leg_samples <= 0:
            raise ValueError("max_leg_samples must be positive")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "surface" else 3

    @classmethod
    def from_dict(cls, d: dict) -> "VesselConfig":
        d = dict(d)
        for key in list(d):
            if key.endswith("_deg"):
                d[key[:-4]] = math.radians(d.pop(key))
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)
