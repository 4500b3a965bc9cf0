import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import closed_form_toy2
from rankone.analysis import classify_outlier
from rankone.domains import DomainParams
from rankone.io import dumps, read_bundle_csv, run_metadata, write_bundle_csv
from rankone.plotting import PlotSpec, render_svg
from rankone.rmt import RNG_NAME, ResolventInput, RunConfig, draw_spectral
from rankone.trajectory import TimeGrid, TrajectoryBundle, trace_trajectories

SVG = "{http://www.w3.org/2000/svg}"
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def polylines(svg):
    return ET.fromstring(svg).findall(f"{SVG}polyline")


@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=6), st.integers(1, 4))
def test_csv_round_trip_exact(tmp_path_factory, pairs, steps):
    n = len(pairs)
    rows = [[complex(a + k, b) for a, b in pairs] for k in range(steps)]
    b = TrajectoryBundle(np.arange(steps) / 3, np.array(rows), "continuation")
    path = tmp_path_factory.mktemp("rt") / "b.csv"
    write_bundle_csv(b, path)
    back = read_bundle_csv(path)
    assert np.array_equal(back.times, b.times)
    assert np.array_equal(back.lambdas, b.lambdas)
    assert back.method == "continuation" and back.n == n


def test_csv_layout(tmp_path):
    d = draw_spectral(RunConfig(3, seed=1))
    b = trace_trajectories(d.rin, TimeGrid.uniform(1.0, 2))
    write_bundle_csv(b, tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "t,j,re,im,method"
    assert len(lines) == 1 + 3 * 3
    assert lines[1].startswith("0.0,1,") and lines[1].endswith(",0.0,continuation")


def test_metadata():
    meta = run_metadata(RunConfig(5, seed=2), extra=1)
    assert meta["rng"] == RNG_NAME and meta["seed"] == 2 and meta["extra"] == 1
    assert meta["tolerances"]["collision"] == 1e-10
    text = dumps({"a": np.float64(0.1), "b": np.arange(2), "c": 1j, "d": float("inf"), "e": float("nan")})
    assert json.loads(text) == {"a": 0.1, "b": [0, 1], "c": [0.0, 1.0], "d": "inf", "e": None}


def test_svg_n1_vertical():
    rin = ResolventInput(np.array([0.3]), np.array([1.0]))
    b = trace_trajectories(rin, TimeGrid.uniform(1.0, 5))
    lines = polylines(render_svg(b))
    assert len(lines) == 1
    xs = {p.split(",")[0] for p in lines[0].get("points").split()}
    assert len(xs) == 1


def test_svg_toy2_arcs_meet():
    times = np.linspace(0, 1.999, 50)
    b = TrajectoryBundle(times, np.array([closed_form_toy2(t) for t in times]), "closed-form")
    svg = render_svg(b, PlotSpec(x_range=(-1.2, 1.2), y_range=(-0.1, 1.1)))
    ends = [pl.get("points").split()[-1] for pl in polylines(svg)]
    (x0, y0), (x1, y1) = [tuple(map(float, e.split(","))) for e in ends]
    assert abs(x0 - x1) < 20 and abs(y0 - y1) < 1


def test_svg_disk_matches_report():
    d = draw_spectral(RunConfig(40, seed=3))
    b = trace_trajectories(d.rin, TimeGrid.uniform(2.0, 40))
    rep = classify_outlier(b.lambdas[-1], 2.0, DomainParams(n=40))
    spec = PlotSpec(x_range=(-2.5, 2.5), y_range=(-0.1, 2.0), t_marker=2.0, disk=(1j * rep.t_star, rep.disk_radius))
    root = ET.fromstring(render_svg(b, spec))
    disk = root.find(f"{SVG}ellipse")
    sx = (spec.width - 2 * spec.margin) / 5.0
    assert disk.get("rx") == f"{rep.disk_radius * sx:.2f}"
    assert root.find(f"{SVG}circle").get("class") == "t-star"
    assert len(root.findall(f"{SVG}polyline")) == 40
    assert root.find(f"{SVG}line").get("class") == "real-axis"


def test_svg_errors():
    with pytest.raises(ValueError):
        render_svg(TrajectoryBundle(np.array([]), np.zeros((0, 0)), "x"))
    with pytest.raises(ValueError):
        PlotSpec(width=0)
    with pytest.raises(ValueError):
        PlotSpec(x_range=(1.0, float("inf")))


def test_svg_deterministic():
    d = draw_spectral(RunConfig(10, seed=4))
    b = trace_trajectories(d.rin, TimeGrid.uniform(1.0, 10))
    assert render_svg(b) == render_svg(b)
