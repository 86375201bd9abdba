"""Independent reference implementations used to cross-check the library."""
from __future__ import annotations

import itertools
import math

import numpy as np

from wpgen.simulator import (
    COMPLETED,
    MISSING,
    SimulationResult,
    SubPath,
    _los,
    los_guidance,
    step_surface,
    step_underwater,
    wrap_angle,
)


def brute_dominates(a, b):
    """dist minimised, unstable maximised; None is dominated by everything feasible."""
    if a is None:
        return False
    if b is None:
        return True
    return (a[0] <= b[0] and a[1] >= b[1]) and (a[0] < b[0] or a[1] > b[1])


def brute_fronts(objs):
    """Peel nondominated layers with an O(n^2) scan per layer."""
    remaining = [i for i, o in enumerate(objs) if o is not None]
    fronts = []
    while remaining:
        layer = [i for i in remaining if not any(brute_dominates(objs[j], objs[i]) for j in remaining)]
        fronts.append(layer)
        remaining = [i for i in remaining if i not in layer]
    infeasible = [i for i, o in enumerate(objs) if o is None]
    if infeasible:
        fronts.append(infeasible)
    return fronts


def monte_carlo_hv(front, reference, samples=1_000_000, seed=0, stratified=False):
    """Fraction of the box [0, ref] dominated by some front point, times the box area.

    With ``stratified`` the box is cut into a sqrt(samples)^2 grid and one
    jittered sample is drawn per cell, which keeps small dominated areas
    resolvable at the same sample count.
    """
    pts = np.asarray(front, dtype=float)
    ref = np.asarray(reference, dtype=float)
    rng = np.random.default_rng(seed)
    if stratified:
        side = int(round(math.sqrt(samples)))
        grid = np.stack(np.meshgrid(np.arange(side), np.arange(side), indexing="ij"), axis=-1).reshape(-1, 2)
        batches = [(grid[i : i + 200_000] + rng.random((min(200_000, len(grid) - i), 2))) / side * ref
                   for i in range(0, len(grid), 200_000)]
        total = side * side
    else:
        batches = [rng.random((min(200_000, samples - i), 2)) * ref for i in range(0, samples, 200_000)]
        total = samples
    hits = 0
    for u in batches:
        dominated = np.zeros(u.shape[0], dtype=bool)
        for p in pts:
            dominated |= (u[:, 0] >= p[0]) & (u[:, 1] >= p[1])
        hits += int(dominated.sum())
    return hits / total * float(ref[0] * ref[1])


def pairwise_a12(a, b):
    total = 0.0
    for x in a:
        for y in b:
            total += 1.0 if x > y else 0.5 if x == y else 0.0
    return total / (len(a) * len(b))


def exact_mw_pvalue(a, b):
    """Two-sided exact p by enumerating every assignment of ranks to sample a."""
    m, n = len(a), len(b)
    combined = sorted(list(a) + list(b))
    ranks = {v: i + 1 for i, v in enumerate(combined)}
    u_obs = sum(ranks[v] for v in a) - m * (m + 1) / 2
    us = [sum(c) - m * (m + 1) / 2 for c in itertools.combinations(range(1, m + n + 1), m)]
    lo = sum(u <= u_obs for u in us) / len(us)
    hi = sum(u >= u_obs for u in us) / len(us)
    return min(1.0, 2 * min(lo, hi))


def reference_simulate(cfg, wps, initial, caps):
    """Plain-Python flight loop built from the public step and guidance functions."""
    underwater = cfg.kind == "underwater"
    state = initial
    subpaths = []
    for leg in range(wps.n - 1):
        a, b = wps[leg], wps[leg + 1]
        rows, status = [], MISSING
        for _ in range(caps[leg]):
            if underwater:
                chi, theta_d = _los(state.x, state.y, state.z, a.coords, b.coords, cfg.lookahead, cfg.depth_lookahead)
            else:
                chi, theta_d = los_guidance(state, a, b, cfg.lookahead)
            rudder = cfg.heading_kp * wrap_angle(chi - state.heading) - cfg.heading_kd * state.yaw_rate
            if underwater:
                theta_d = min(max(theta_d, -cfg.pitch_max), cfg.pitch_max)
                plane = cfg.pitch_kp * (theta_d - state.pitch) - cfg.pitch_kd * state.pitch_rate
                state = step_underwater(state, rudder, plane, cfg, cfg.dt)
            else:
                state = step_surface(state, rudder, cfg, cfg.dt)
            pos = (state.x, state.y, state.z)[: wps.dim]
            rows.append((*pos, state.roll, state.pitch, state.heading))
            if math.dist(pos, b.coords) <= cfg.acceptance_radius:
                status = COMPLETED
                break
        arr = np.array(rows).reshape(-1, wps.dim + 3)
        subpaths.append(SubPath(leg + 1, status, arr[:, : wps.dim], arr[:, -3], arr[:, -2], arr[:, -1]))
    return SimulationResult(subpaths, dt=cfg.dt)


def sinusoid(periods=5, samples_per_period=40, amplitude=0.1):
    t = np.arange(periods * samples_per_period)
    return amplitude * np.sin(2 * np.pi * t / samples_per_period)
