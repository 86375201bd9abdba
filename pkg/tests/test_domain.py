import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wpgen.domain import (
    SearchBounds,
    VesselConfig,
    Waypoint,
    WaypointSet,
    decode,
    euclidean_distance,
    flatten,
    make_bounds,
    validate_waypoint_set,
)

coord = st.floats(-1e4, 1e4, allow_nan=False)


def test_distance_3_4_5():
    assert euclidean_distance(Waypoint(0, 0), Waypoint(3, 4)) == 5.0


def test_distance_rejects_mixed_dimensions():
    with pytest.raises(ValueError):
        euclidean_distance(Waypoint(0, 0), Waypoint(0, 0, 1))


@given(st.lists(st.tuples(coord, coord, coord), min_size=3, max_size=3))
def test_triangle_inequality(pts):
    a, b, c = (Waypoint(*p) for p in pts)
    assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-6


def test_waypoint_rejects_nan():
    with pytest.raises(ValueError):
        Waypoint(float("nan"), 0)


@pytest.mark.parametrize(
    "points",
    [[[0, 0]], [[0, 0], [1, 1, 1]], [[0, 0], [math.inf, 0]], np.zeros((3, 4))],
)
def test_waypoint_set_rejects_bad_input(points):
    with pytest.raises(ValueError):
        WaypointSet(points)


def test_waypoint_set_is_read_only():
    ws = WaypointSet([[0, 0], [10, 0]])
    with pytest.raises(ValueError):
        ws.array[0, 0] = 1.0


def test_validate_is_inclusive():
    ws = WaypointSet([[0, 0], [400, 0], [400, 399.9]])
    assert validate_waypoint_set(WaypointSet([[0, 0], [400, 0]]), 400)
    assert not validate_waypoint_set(ws, 400)


def test_csv_round_trip_2d_and_3d():
    for pts in ([[0, 0], [1.1, 2.2]], [[0, 0, 5], [1 / 3, 2, 7]]):
        ws = WaypointSet(pts)
        text = ws.to_csv()
        assert text.splitlines()[0] == "idx," + ",".join("xyz"[: ws.dim])
        assert WaypointSet.from_csv(text) == ws


def test_encoding_round_trip(mariner):
    original = mariner.original
    x = flatten(original)
    assert x.shape == ((original.n - 1) * original.dim,)
    assert decode(x, original) == original


def test_decode_keeps_start_and_checks_shape(mariner):
    original = mariner.original
    x = flatten(original) + 7.0
    decoded = decode(x, original)
    assert np.array_equal(decoded.array[0], original.array[0])
    with pytest.raises(ValueError):
        decode(x[:-1], original)


def test_bounds_are_centred_on_original(mariner):
    b = make_bounds(mariner.original, 400)
    centre = flatten(mariner.original)
    assert np.allclose(b.upper - centre, 400) and np.allclose(centre - b.lower, 400)
    assert b.contains(centre) and not b.contains(centre + 401)
    assert np.array_equal(b.clip(centre + 1000), b.upper)
    with pytest.raises(ValueError):
        make_bounds(mariner.original, 0)


def test_vessel_config_degrees_and_validation():
    cfg = VesselConfig.from_dict(
        {"name": "t", "kind": "surface", "min_wp_dist": 1, "acceptance_radius": 1,
         "dt": 0.1, "speed": 1, "rudder_max_deg": 30}
    )
    assert cfg.rudder_max == pytest.approx(math.radians(30))
    assert VesselConfig(**cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        VesselConfig("t", "airborne", 1, 1, 0.1, 1)
    with pytest.raises(ValueError):
        VesselConfig("t", "surface", 1, 1, 0.0, 1)
