import json
import math
from fractions import Fraction

import numpy as np
import pytest

from pedalcurve.emit import emit, fmt, svg, trajectory_path
from pedalcurve.errors import EmptyPath
from pedalcurve.expr import PowerSum
from pedalcurve.mechanics import ForceSpec, allowed_region, integrate_orbit
from pedalcurve.parser import parse_pedal_equation
from pedalcurve.paths import PolarPath


def three_points():
    return PolarPath(np.array([1.0, 2.0, 1.0]), np.array([0.0, math.pi / 2, math.pi]), [], False,
                     np.array([1.0, 1.0, 1.0]))


def test_csv_three_points():
    rows = emit(three_points(), "csv").decode().splitlines()
    assert rows[0] == "r,phi,x,y"
    assert len(rows) == 4
    r, phi, x, y = map(float, rows[2].split(","))
    assert (r, phi) == (2.0, math.pi / 2)
    assert x == pytest.approx(0, abs=1e-15) and y == 2.0


def test_numbers_round_trip():
    for v in (math.pi, 1 / 3, -2.5e-17, 1e300):
        assert float(fmt(v)) == v
    assert len(fmt(1 / 3).replace("0.", "")) == 17


def test_closed_path_is_svg_polygon():
    phi = np.linspace(0, 2 * math.pi, 50)
    path = PolarPath(np.ones_like(phi), phi, [], True, np.ones_like(phi))
    text = svg(path).decode()
    assert text.startswith("<?xml") and text.rstrip().endswith("</svg>")
    assert text.count("<polygon") == 1 and "<polyline" not in text


def test_open_path_is_polyline():
    text = emit(three_points(), "svg").decode()
    assert "<polyline" in text


def test_region_json():
    rep = allowed_region(parse_pedal_equation("1/p^2 = 2/r - 1/2"))
    doc = json.loads(emit(rep, "json"))
    assert doc["kind"] == "region" and doc["N"] == 2
    lo, hi = doc["intervals"][0]
    assert lo == pytest.approx(2 - math.sqrt(2)) and hi == pytest.approx(2 + math.sqrt(2))


def test_unbounded_interval_is_null():
    doc = json.loads(emit(allowed_region(parse_pedal_equation("1/p^2 = 2/r + 1")), "json"))
    assert doc["intervals"][-1][1] is None


def test_path_json_has_coordinates():
    doc = json.loads(emit(three_points(), "json"))
    assert doc["schema"] == "pedalcurve/1"
    assert doc["x"][0] == 1.0 and len(doc["y"]) == 3


def test_empty_path_raises():
    with pytest.raises(EmptyPath):
        emit(PolarPath(np.array([]), np.array([]), [], False, np.array([])), "csv")


def test_trajectory_emits_unwrapped_phase():
    tr = integrate_orbit(ForceSpec(PowerSum({Fraction(-1, 2): 2})), (1, 0), (0, 1.2), 30.0)
    path = trajectory_path(tr)
    assert np.all(np.abs(np.diff(path.phi)) < math.pi)
    rows = emit(tr, "csv").decode().splitlines()
    assert len(rows) == len(tr.t) + 1


def test_region_report_needs_json():
    with pytest.raises(ValueError):
        emit(allowed_region(parse_pedal_equation("p = 1")), "csv")
