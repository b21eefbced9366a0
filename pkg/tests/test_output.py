import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from stefan_control.diagnostics import CSV_COLUMNS, FLAG_NAMES
from stefan_control.output import csv_text, line_plot, read_csv, trajectory_panels, write_csv, write_svgs


@pytest.fixture(scope="module")
def traj():
    from _runs import dirichlet_sf

    return dirichlet_sf(100)


def test_csv_header_and_shape(traj, tmp_path):
    path = write_csv(traj.records, tmp_path / "a" / "run.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[-1] == ""
    assert len(lines) == len(traj.records) + 2
    assert sum(l.startswith("t,") for l in lines) == 1


def test_csv_number_format(traj):
    body = csv_text(traj.records).splitlines()[1:]
    n_flags = len(FLAG_NAMES)
    for line in body[:50]:
        cells = line.split(",")
        for cell in cells[:-n_flags]:
            if cell in ("nan", "inf", "-inf"):
                continue
            digits = re.sub(r"e.*$", "", cell).lstrip("-").replace(".", "").lstrip("0")
            assert len(digits) <= 9
        assert set(cells[-n_flags:]) <= {"0", "1"}


def test_csv_round_trip(traj, tmp_path):
    path = write_csv(traj.records, tmp_path / "run.csv")
    cols = read_csv(path)
    assert list(cols) == list(CSV_COLUMNS)
    assert np.allclose(cols["s"], traj.s, rtol=1e-8, atol=0)
    assert np.allclose(cols["input"], traj.input, rtol=1e-8, atol=0)
    for name in FLAG_NAMES:
        assert cols[name].dtype == bool
        assert np.array_equal(cols[name], traj.flags[name])


def test_csv_flags_written_as_zero_one():
    from stefan_control import DiagnosticsRecord

    rec = DiagnosticsRecord(0.0, 0.1, -1.0, 0.0, 1.0, 1.0, float("nan"), 0.5, 0.5, 0.0,
                            False, True, True, True, True)
    row = csv_text([rec]).splitlines()[1].split(",")
    assert row[-5:] == ["0", "1", "1", "1", "1"]
    assert row[2] == "-1"
    assert row[6] == "nan"


def test_svg_canvas_and_polylines():
    t = np.linspace(0, 10, 50)
    svg = line_plot({"a": (t, np.sin(t)), "b": (t, np.cos(t))}, "title & <x>", "t", "y")
    root = ET.fromstring(svg)
    assert root.get("width") == "800" and root.get("height") == "500"
    polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
    assert len(polylines) == 2


def test_svg_handles_constant_and_nonfinite_series():
    t = np.linspace(0, 1, 5)
    ET.fromstring(line_plot({"c": (t, np.full(5, 3.0))}))
    ET.fromstring(line_plot({"n": (t, np.full(5, np.nan))}))


def test_trajectory_panels(traj, tmp_path):
    panels = trajectory_panels(traj)
    assert set(panels) == {"s", "input", "T_s0"}
    paths = write_svgs(traj, tmp_path, "run")
    assert sorted(p.name for p in paths) == ["run_T_s0.svg", "run_input.svg", "run_s.svg"]
    for p in paths:
        ET.parse(p)


def test_observer_run_has_error_panel():
    from _runs import of_scenario
    from stefan_control import run_scenario

    tr = run_scenario(of_scenario(2e4, t_end=50.0, sample_every=5.0, n=100))
    assert "err" in trajectory_panels(tr)
