"""Deterministic waypoint-following vessel simulator.

Stands in for a full hydrodynamic model with the pieces that shape a
waypoint-following path:

* lookahead line-of-sight guidance on the active leg,
* a PD heading autopilot with rudder saturation and rate limit,
* first-order Nomoto yaw dynamics at constant surge speed,
* roll as a damped oscillator excited by yaw rate,
* for underwater vessels an analogous pitch channel with depth rate -U sin(theta).

Waypoints are switched with a circle of acceptance. A leg that is not
completed within its sample cap is marked missing and guidance moves on to
the next leg.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .domain import VesselConfig, Waypoint, WaypointSet, validate_waypoint_set

COMPLETED = "completed"
MISSING = "missing"


class DynamicsDiverged(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, msg="dynamics diverged"):
        super().__init__(msg)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return a - 2.0 * math.pi * math.ceil((a - math.pi) / (2.0 * math.pi))


@dataclass(frozen=True)
class VesselState:
    x: float
    y: float
    z: float = 0.0
    heading: float = 0.0
    yaw_rate: float = 0.0
    speed: float = 0.0
    pitch: float = 0.0
    pitch_rate: float = 0.0
    roll: float = 0.0
    roll_rate: float = 0.0
    rudder: float = 0.0
    plane: float = 0.0

    @property
    def position(self) -> tuple[float, ...]:
        return (self.x, self.y, self.z)


@dataclass
class SubPath:
    """Samples of one leg. Arrays are (k,) except positions, which is (k, dim)."""

    leg_index: int  # 1-based
    status: str
    positions: np.ndarray
    roll: np.ndarray
    pitch: np.ndarray
    yaw: np.ndarray

    def __len__(self) -> int:
        return self.positions.shape[0]


@dataclass
class SimulationResult:
    subpaths: list[SubPath]
    dt: float = 1.0
    final_state: VesselState | None = field(default=None, repr=False)

    @property
    def reached_all(self) -> bool:
        return bool(self.subpaths) and all(sp.status == COMPLETED for sp in self.subpaths)

    @property
    def full_path(self) -> np.ndarray:
        return np.concatenate([sp.positions for sp in self.subpaths], axis=0)

    def sample_counts(self) -> list[int]:
        return [len(sp) for sp in self.subpaths]

    def to_csv(self) -> str:
        """Trace export: ``leg,t,x,y[,z],roll,pitch,yaw,status``."""
        dim = self.subpaths[0].positions.shape[1] if self.subpaths else 2
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["leg", "t", *"xyz"[:dim], "roll", "pitch", "yaw", "status"])
        k = 0
        for sp in self.subpaths:
            for j in range(len(sp)):
                k += 1
                w.writerow(
                    [sp.leg_index, repr(k * self.dt)]
                    + [repr(float(v)) for v in sp.positions[j]]
                    + [repr(float(sp.roll[j])), repr(float(sp.pitch[j])), repr(float(sp.yaw[j]))]
                    + [sp.status]
                )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SimulationResult":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            return cls([])
        keys = ["x", "y", "z"] if "z" in rows[0] else ["x", "y"]
        dt = float(rows[0]["t"])
        subpaths, current = [], []

        def close(group):
            subpaths.append(
                SubPath(
                    leg_index=int(group[0]["leg"]),
                    status=group[0]["status"],
                    positions=np.array([[float(r[c]) for c in keys] for r in group]),
                    roll=np.array([float(r["roll"]) for r in group]),
                    pitch=np.array([float(r["pitch"]) for r in group]),
                    yaw=np.array([float(r["yaw"]) for r in group]),
                )
            )

        for r in rows:
            if current and r["leg"] != current[-1]["leg"]:
                close(current)
                current = []
            current.append(r)
        close(current)
        return cls(subpaths, dt=dt)


def los_guidance(
    state: VesselState, start: Waypoint, end: Waypoint, lookahead: float
) -> tuple[float, float]:
    """Lookahead line-of-sight course toward the leg ``start -> end``.

    Returns ``(desired_heading, desired_pitch)``; pitch is 0 for 2D legs.
    The heading is the leg bearing plus ``atan(-e / lookahead)`` where ``e``
    is the signed cross-track error (positive to starboard of the leg).
    """
    if start.coords == end.coords:
        raise ValueError("coincident leg endpoints")
    return _los(state.x, state.y, state.z, start.coords, end.coords, lookahead, lookahead)


def _los(x, y, z, a, b, lookahead, depth_lookahead):
    dx, dy = b[0] - a[0], b[1] - a[1]
    horiz = math.hypot(dx, dy)
    if horiz > 0.0:
        bearing = math.atan2(dy, dx)
        ex, ey = x - a[0], y - a[1]
        cross = -ex * math.sin(bearing) + ey * math.cos(bearing)
        chi = wrap_angle(bearing + math.atan(-cross / lookahead))
        along = ex * math.cos(bearing) + ey * math.sin(bearing)
        frac = min(max(along / horiz, 0.0), 1.0)
    else:
        # purely vertical leg: keep pointing at the target
        chi = math.atan2(b[1] - y, b[0] - x)
        frac = 1.0
    theta = 0.0
    if len(a) == 3:
        z_ref = a[2] + frac * (b[2] - a[2])
        theta = math.atan((z - z_ref) / depth_lookahead)
        if frac < 1.0:
            # feed forward the leg's flight-path angle (positive climbs)
            theta += math.atan2(a[2] - b[2], horiz)
    return chi, theta


def _rate_limited(current, command, limit, rate, dt):
    command = min(max(command, -limit), limit)
    step = rate * dt
    return current + min(max(command - current, -step), step)


def step_surface(state: VesselState, rudder_command: float, cfg: VesselConfig, dt: float) -> VesselState:
    """Advance a surface vessel by one step (semi-implicit Euler)."""
    s = _step(_as_tuple(state), rudder_command, 0.0, cfg, dt, False)
    return _from_tuple(s)


def step_underwater(
    state: VesselState, rudder_command: float, plane_command: float, cfg: VesselConfig, dt: float
) -> VesselState:
    s = _step(_as_tuple(state), rudder_command, plane_command, cfg, dt, True)
    return _from_tuple(s)


def _as_tuple(s: VesselState):
    return (s.x, s.y, s.z, s.heading, s.yaw_rate, s.speed, s.pitch, s.pitch_rate,
            s.roll, s.roll_rate, s.rudder, s.plane)


def _from_tuple(t) -> VesselState:
    return VesselState(*t)


def _step(s, rudder_cmd, plane_cmd, cfg, dt, underwater):
    x, y, z, psi, r, u, theta, q, phi, p, delta, delta_s = s
    delta = _rate_limited(delta, rudder_cmd, cfg.rudder_max, cfg.rudder_rate, dt)
    r_dot = (cfg.nomoto_k * delta - r) / cfg.nomoto_t
    r += dt * r_dot
    psi = wrap_angle(psi + dt * r)

    wn = 2.0 * math.pi / cfg.roll_period
    heel = cfg.roll_gain * r + cfg.roll_accel_gain * r_dot
    p += dt * (-2.0 * cfg.roll_damping * wn * p - wn * wn * (phi - heel))
    phi = wrap_angle(phi + dt * p)

    if underwater:
        delta_s = _rate_limited(delta_s, plane_cmd, cfg.plane_max, cfg.plane_rate, dt)
        q += dt * (cfg.pitch_k * delta_s - q) / cfg.pitch_t
        theta = wrap_angle(theta + dt * q)
        horiz = u * math.cos(theta)
        z -= dt * u * math.sin(theta)
    else:
        horiz = u
    x += dt * horiz * math.cos(psi)
    y += dt * horiz * math.sin(psi)
    return (x, y, z, psi, r, u, theta, q, phi, p, delta, delta_s)


def leg_sample_caps(cfg: VesselConfig, route: WaypointSet) -> list[int]:
    """Per-leg sample caps: ``leg_cap_factor`` times the straight-line transit samples.

    A fixed ``cfg.max_leg_samples`` overrides the derived caps.
    """
    if cfg.max_leg_samples is not None:
        return [int(cfg.max_leg_samples)] * (route.n - 1)
    transit = route.leg_lengths() / (cfg.speed * cfg.dt)
    return [max(1, math.ceil(cfg.leg_cap_factor * t)) for t in transit]


def initial_state(cfg: VesselConfig, route: WaypointSet) -> VesselState:
    """Start on waypoint 1 at cruise speed, heading along the first leg."""
    a, b = route.array[0], route.array[1]
    z = float(a[2]) if route.dim == 3 else 0.0
    return VesselState(
        x=float(a[0]), y=float(a[1]), z=z,
        heading=math.atan2(b[1] - a[1], b[0] - a[0]), speed=cfg.speed,
    )


def _params(cfg: VesselConfig) -> np.ndarray:
    return np.array([
        cfg.rudder_max, cfg.rudder_rate, cfg.nomoto_k, cfg.nomoto_t,
        cfg.heading_kp, cfg.heading_kd, cfg.lookahead,
        cfg.roll_period, cfg.roll_damping, cfg.roll_gain,
        cfg.plane_max, cfg.plane_rate, cfg.pitch_k, cfg.pitch_t,
        cfg.pitch_kp, cfg.pitch_kd, cfg.pitch_max, cfg.depth_lookahead,
        cfg.acceptance_radius, cfg.dt, cfg.roll_accel_gain,
    ], dtype=np.float64)


@njit(cache=True)
def _wrap(a):
    return a - 2.0 * math.pi * math.ceil((a - math.pi) / (2.0 * math.pi))


@njit(cache=True)
def _clamp(v, lo, hi):
    return min(max(v, lo), hi)


@njit(cache=True)
def _fly(pts, caps, prm, underwater, state, out, counts, completed):
    """Integrate every leg in turn; fills ``out`` rows (x, y, z, roll, pitch, yaw)."""
    rudder_max, rudder_rate, nk, nt, kp, kd, look = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6]
    roll_period, roll_zeta, roll_gain = prm[7], prm[8], prm[9]
    plane_max, plane_rate, pk, pt, pkp, pkd, pitch_max, zlook = (
        prm[10], prm[11], prm[12], prm[13], prm[14], prm[15], prm[16], prm[17])
    radius2 = prm[18] * prm[18]
    dt = prm[19]
    roll_accel_gain = prm[20]
    wn = 2.0 * math.pi / roll_period
    x, y, z, psi, r, u, theta, q, phi, p, delta, delta_s = (
        state[0], state[1], state[2], state[3], state[4], state[5],
        state[6], state[7], state[8], state[9], state[10], state[11])
    row = 0
    for leg in range(pts.shape[0] - 1):
        ax, ay, az = pts[leg, 0], pts[leg, 1], pts[leg, 2]
        bx, by, bz = pts[leg + 1, 0], pts[leg + 1, 1], pts[leg + 1, 2]
        dx, dy = bx - ax, by - ay
        horiz_len = math.hypot(dx, dy)
        bearing = math.atan2(dy, dx)
        cb, sb = math.cos(bearing), math.sin(bearing)
        gamma = math.atan2(az - bz, horiz_len)
        n = 0
        completed[leg] = False
        for _ in range(caps[leg]):
            # guidance
            if horiz_len > 0.0:
                ex, ey = x - ax, y - ay
                cross = -ex * sb + ey * cb
                chi = _wrap(bearing + math.atan(-cross / look))
                frac = _clamp((ex * cb + ey * sb) / horiz_len, 0.0, 1.0)
            else:
                chi = math.atan2(by - y, bx - x)
                frac = 1.0
            # control
            rudder_cmd = kp * _wrap(chi - psi) - kd * r
            # dynamics
            step = rudder_rate * dt
            delta = delta + _clamp(_clamp(rudder_cmd, -rudder_max, rudder_max) - delta, -step, step)
            r_dot = (nk * delta - r) / nt
            r += dt * r_dot
            psi = _wrap(psi + dt * r)
            heel = roll_gain * r + roll_accel_gain * r_dot
            p += dt * (-2.0 * roll_zeta * wn * p - wn * wn * (phi - heel))
            phi = _wrap(phi + dt * p)
            if underwater:
                z_ref = az + frac * (bz - az)
                theta_d = math.atan((z - z_ref) / zlook)
                if frac < 1.0:
                    theta_d += gamma
                theta_d = _clamp(theta_d, -pitch_max, pitch_max)
                plane_cmd = pkp * (theta_d - theta) - pkd * q
                step = plane_rate * dt
                delta_s = delta_s + _clamp(
                    _clamp(plane_cmd, -plane_max, plane_max) - delta_s, -step, step)
                q += dt * (pk * delta_s - q) / pt
                theta = _wrap(theta + dt * q)
                horiz = u * math.cos(theta)
                z -= dt * u * math.sin(theta)
            else:
                horiz = u
            x += dt * horiz * math.cos(psi)
            y += dt * horiz * math.sin(psi)
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)
                    and math.isfinite(psi) and math.isfinite(r) and math.isfinite(phi)
                    and math.isfinite(p) and math.isfinite(theta) and math.isfinite(q)):
                return -1
            out[row, 0] = x
            out[row, 1] = y
            out[row, 2] = z
            out[row, 3] = phi
            out[row, 4] = theta
            out[row, 5] = psi
            row += 1
            n += 1
            d2 = (x - bx) ** 2 + (y - by) ** 2
            if underwater:
                d2 += (z - bz) ** 2
            if d2 <= radius2:
                completed[leg] = True
                break
        counts[leg] = n
    state[0], state[1], state[2], state[3], state[4], state[5] = x, y, z, psi, r, u
    state[6], state[7], state[8], state[9], state[10], state[11] = theta, q, phi, p, delta, delta_s
    return row


def simulate(
    cfg: VesselConfig,
    wps: WaypointSet,
    initial: VesselState | None = None,
    leg_caps: Sequence[int] | None = None,
) -> SimulationResult:
    """Fly the route and return one sub-path per leg.

    ``leg_caps`` bounds the samples of each leg; by default it is derived
    from ``wps`` itself via :func:`leg_sample_caps`. Search code passes
    caps computed from the original route so every candidate shares them.
    """
    if wps.dim != cfg.dim:
        raise ValueError(f"{cfg.kind} vessel needs {cfg.dim}D waypoints, got {wps.dim}D")
    if not validate_waypoint_set(wps, cfg.min_wp_dist):
        raise ValueError("waypoint set violates the minimum waypoint distance")
    if initial is None:
        initial = initial_state(cfg, wps)
    if leg_caps is None:
        leg_caps = leg_sample_caps(cfg, wps)
    if len(leg_caps) != wps.n - 1:
        raise ValueError("need one sample cap per leg")

    underwater = cfg.kind == "underwater"
    pts = np.zeros((wps.n, 3))
    pts[:, : wps.dim] = wps.array
    caps = np.asarray(leg_caps, dtype=np.int64)
    state = np.array(_as_tuple(initial), dtype=np.float64)
    out = np.empty((int(caps.sum()), 6))
    counts = np.zeros(wps.n - 1, dtype=np.int64)
    completed = np.zeros(wps.n - 1, dtype=np.bool_)
    rows = _fly(pts, caps, _params(cfg), underwater, state, out, counts, completed)
    if rows < 0:
        raise DynamicsDiverged()

    subpaths = []
    start = 0
    for leg, n in enumerate(counts):
        chunk = out[start : start + n]
        start += n
        subpaths.append(
            SubPath(
                leg_index=leg + 1,
                status=COMPLETED if completed[leg] else MISSING,
                positions=chunk[:, : wps.dim].copy(),
                roll=chunk[:, 3].copy(),
                pitch=chunk[:, 4].copy(),
                yaw=chunk[:, 5].copy(),
            )
        )
    return SimulationResult(subpaths, dt=cfg.dt, final_state=_from_tuple(tuple(state)))
