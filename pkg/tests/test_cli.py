import csv
import io
import json
import math
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from flatstrip.cli import run
from flatstrip.export import angle_defects, interior_vertices, read_obj

SCENES = Path(__file__).resolve().parents[1] / "demos" / "scenes"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def equator_build(tmp_path_factory):
    d = tmp_path_factory.mktemp("equator")
    code, out, _ = call("build", SCENES / "sphere_equator.json", "-o", d)
    return code, out, d


def test_build_writes_mesh_and_report(equator_build):
    code, out, d = equator_build
    assert code == 0
    assert {"mesh.obj", "curve.obj", "report.json"} <= {p.name for p in d.iterdir()}
    rep = json.loads((d / "report.json").read_text())
    assert rep["passed"] is True
    assert rep["meta"]["command"] == "build"
    assert all(line.startswith("PASS ") for line in out.strip().splitlines())
    verts, faces = read_obj(d / "mesh.obj")
    assert len(verts) == 257 * 33
    defects = angle_defects(verts, faces)[interior_vertices(257, 33)]
    assert np.max(np.abs(defects)) <= 1e-9


def test_build_is_deterministic(equator_build, tmp_path):
    _, _, first = equator_build
    code, _, _ = call("build", SCENES / "sphere_equator.json", "-o", tmp_path)
    assert code == 0
    for name in ("mesh.obj", "curve.obj", "report.json"):
        assert (first / name).read_bytes() == (tmp_path / name).read_bytes()


def test_build_higher_dimension_writes_csv(tmp_path):
    code, _, _ = call("build", SCENES / "s3_great_circle.json", "-o", tmp_path, "--samples", "128")
    assert code == 0
    with open(tmp_path / "curve.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x1", "x2", "x3", "x4"]
    assert len(rows) == 129 + 1
    assert (tmp_path / "curve.csv").read_bytes().count(b"\r\n") == len(rows)
    with open(tmp_path / "mesh.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "u1", "u2", "x1", "x2", "x3", "x4"]


def test_develop_equator_strip_length(tmp_path):
    code, _, _ = call("develop", SCENES / "sphere_equator.json", "-o", tmp_path)
    assert code == 0
    svg = (tmp_path / "strip.svg").read_text()
    d = re.search(r'id="curve" d="([^"]+)"', svg).group(1)
    pts = np.array([[float(v) for v in p.split(",")] for p in re.findall(r"-?[\d.]+,-?[\d.]+", d)])
    length = np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=-1))
    assert length == pytest.approx(2 * math.pi * 100, abs=1e-3)
    with open(tmp_path / "strip.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "t", "x", "y", "heading", "ruling_angle", "geodesic_curvature"]


def test_verify_exit_codes(tmp_path):
    assert call("verify", SCENES / "plane_line.json", "-o", tmp_path)[0] == 2
    code, _, err = call("verify", SCENES / "cylinder_axis.json", "-o", tmp_path)
    assert code == 2 and "t=0" in err
    assert call("develop", SCENES / "s3_great_circle.json", "-o", tmp_path)[0] == 5


@pytest.mark.parametrize(
    "doc",
    [
        "{not json",
        {"schema": 1, "surface": {"kind": "sphere"}, "curve": {"coords": ["t", "0"], "alpha": 1}, "colour": 3},
        {"schema": 1, "surface": {"kind": "sphere"}, "curve": {"coords": ["t"], "alpha": 1}},
        {"schema": 1, "surface": {"kind": "sphere"}, "curve": {"coords": ["t", "0"], "alpha": -1}},
        {"schema": 1, "surface": {"kind": "blob"}, "curve": {"coords": ["t", "0"], "alpha": 1}},
        {"schema": 1, "surface": {"kind": "sphere"}, "curve": {"coords": ["t", "q"], "alpha": 1}},
    ],
)
def test_bad_scene_exits_3(tmp_path, doc):
    path = tmp_path / "scene.json"
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    code, _, err = call("verify", path, "-o", tmp_path)
    assert code == 3
    assert err.startswith("error:")


def test_bad_flags_exit_3(tmp_path):
    assert call("verify", SCENES / "sphere_equator.json", "--samples", "4")[0] == 3
    assert call("verify", SCENES / "sphere_equator.json", "--safety", "1.5")[0] == 3
    assert call("verify", SCENES / "sphere_equator.json", "--frame-rotation", "0.1,0.2")[0] == 3


def test_ruling_override_fails_flatness(tmp_path):
    code, out, _ = call("verify", SCENES / "ellipsoid_wave.json", "-o", tmp_path, "--ruling-override", "e2")
    assert code == 4
    assert re.search(r"^FAIL flatness", out, re.M)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["meta"]["ruling_override"] == "e2"


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "flatstrip.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "build" in res.stdout and "develop" in res.stdout
