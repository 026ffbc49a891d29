import json
from pathlib import Path

import numpy as np
import pytest

from equidist import output
from equidist.tracer import CurveTrace, Marker, MarkerKind, sample_equidistant, umbrella_section
from conftest import patch

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def loop():
    return umbrella_section(0.5, grid=41).trace


def test_fmt():
    assert output.fmt(-0.0) == "0"
    assert output.fmt(float("nan")) == "nan"
    assert output.fmt(1 / 3) == "0.333333333333"
    assert output.fmt(2.0) == "2"


def test_svg_golden(loop):
    assert output.trace_svg(loop, "umbrella") == (GOLDEN / "umbrella_loop.svg").read_text()


def test_markers_golden(loop):
    assert output.markers_csv(loop) == (GOLDEN / "umbrella_loop_markers.csv").read_text()


def test_marker_shapes():
    tr = CurveTrace([], [Marker((0.0, 0.0), MarkerKind.ISOLATED, (), 1.0, 1.0),
                         Marker((0.5, 0.5), MarkerKind.CUSP, ((1.0, 0.0),), 0.0, 0.0),
                         Marker((-0.5, 0.5), MarkerKind.CROSSING, ((1, 0), (0, 1)), -1.0, -1.0)],
                    None, None, (8, 8), (-1.0, 1.0, -1.0, 1.0))
    svg = output.trace_svg(tr)
    assert svg.count("<circle") == 1 and svg.count("<polygon") == 1 and svg.count("<path") == 1
    rows = output.markers_csv(tr).splitlines()
    assert rows[1] == "0,0,Isolated,nan,nan,nan,nan,1"
    assert rows[2] == "0.5,0.5,Cusp,1,0,nan,nan,0"


def test_trace_csv_separates_polylines():
    polys = [np.array([[0.0, 0.0], [0.1, 0.1]]), np.array([[0.5, 0.5], [0.6, 0.7]])]
    tr = CurveTrace(polys, [], None, None, (8, 8), (-1.0, 1.0, -1.0, 1.0), "f",
                    patch("x", "y", "0", "x*y"))
    lines = output.trace_csv(tr).splitlines()
    assert lines[0] == "u,v,x1,x2,x3,x4"
    assert lines[3] == ""
    assert lines[5] == "0.6,0.7,0.6,0.7,0,0.42"


def test_write_trace_is_deterministic(loop, tmp_path):
    a = output.write_trace(loop, tmp_path / "a", "t", ("csv", "svg", "json"))
    b = output.write_trace(umbrella_section(0.5, grid=41).trace, tmp_path / "b", "t",
                           ("csv", "svg", "json"))
    assert [p.name for p in a] == ["t.csv", "t_markers.csv", "t.svg", "t.json"]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    with pytest.raises(TypeError):
        output.atomic_write(tmp_path / "x.txt", 123)
    assert list(tmp_path.iterdir()) == []


def test_cloud_json_round_trips(tmp_path):
    flat = patch("x", "y", "0", "0")
    c1 = output.cloud_json(sample_equidistant(flat, 0.5, grid4=8))
    c2 = output.cloud_json(sample_equidistant(flat, 0.5, grid4=8))
    assert c1 == c2
    doc = json.loads(c1)
    assert doc["count"] == len(doc["records"]) > 0
    assert doc["records"][0]["label"]["label"] == "Degenerate(DeltaZero)"
