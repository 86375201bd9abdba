"""Fly the surface preset's route, then a perturbed copy, and classify every leg.

Run with ``python demos/01_simulate_and_classify.py``.
"""
# %% The preset route: six waypoints on a straight northbound line.
import numpy as np

from wpgen import builtin_case_studies, categorize_path, simulate
from wpgen.domain import WaypointSet

case = builtin_case_studies()["mariner"]
vessel, route = case.vessel, case.original
print(f"{vessel.name}: {route.n} waypoints, legs {route.leg_lengths().round(0)} m")

result = simulate(vessel, route)
print("original route:", [str(c) for c in categorize_path(result)])
print("samples per leg:", result.sample_counts())

# %% Push waypoints 3 and 5 sideways. The autopilot now has to swing hard,
# and the roll response rings long enough to show up in the autocorrelation.
moved = route.array.copy()
moved[2, 1] += 390.0
moved[4, 1] -= 390.0
perturbed = WaypointSet(moved)
result = simulate(vessel, perturbed)
print("perturbed route:", [str(c) for c in categorize_path(result)])

# %% Attitude extremes per leg, in degrees.
for sp in result.subpaths:
    roll = np.degrees(np.ptp(sp.roll))
    yaw = np.degrees(np.ptp(np.unwrap(sp.yaw)))
    print(f"leg {sp.leg_index}: {len(sp):4d} samples, roll span {roll:5.2f} deg, yaw span {yaw:6.2f} deg, {sp.status}")

# %% Traces export to CSV for plotting elsewhere.
print(result.to_csv().splitlines()[0])
