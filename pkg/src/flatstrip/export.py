"""Mesh, polyline, CSV and SVG writers."""
from __future__ import annotations

import csv
import itertools

import numpy as np

MESH_STRIPS = 256  # intervals along the curve
MESH_RULING_SAMPLES = 33  # points across each ruling (m = 2)
GRID_RULING_SAMPLES = 9  # points per ruling axis (m >= 3)
PX_PER_UNIT = 100.0


def _g(x):
    return "%.17g" % x


def patch_grid(patch, strips=MESH_STRIPS, across=None):
    """Sample ``sigma`` on a regular ``(s, u)`` grid.

    Returns ``(s, t, U, P)`` where ``U`` lists the ruling parameters and
    ``P[i, j]`` is the point at ``s[i]`` and ``U[j]``.
    """
    m = patch.m
    across = across or (MESH_RULING_SAMPLES if m == 2 else GRID_RULING_SAMPLES)
    s = np.linspace(0.0, patch.length, strips + 1)
    axes = [np.linspace(-w, w, across) for w in patch.half_widths]
    U = np.array(list(itertools.product(*axes)))
    sec = patch.local(s)
    P = sec.gamma[:, None, :] + np.einsum("uj,kja->kua", U, sec.X)
    return s, sec.t, U, P


def grid_faces(rows, cols):
    """Two counter-clockwise triangles per quad of a ``rows x cols`` vertex grid (0-based)."""
    idx = np.arange(rows * cols).reshape(rows, cols)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    return np.concatenate([np.stack([a, b, c], -1), np.stack([a, c, d], -1)])


def write_obj_mesh(path, P, header=()):
    rows, cols = P.shape[:2]
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for p in P.reshape(-1, P.shape[-1]):
            fh.write("v " + " ".join(_g(x) for x in p) + "\n")
        for f in grid_faces(rows, cols) + 1:
            fh.write(f"f {f[0]} {f[1]} {f[2]}\n")


def write_obj_polyline(path, points, header=()):
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for p in points:
            fh.write("v " + " ".join(_g(x) for x in p) + "\n")
        fh.write("l " + " ".join(str(i + 1) for i in range(len(points))) + "\n")


def read_obj(path):
    """Vertices and triangle faces (0-based) of an OBJ file written here."""
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:]])
            elif parts[0] == "f":
                faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=int)


def angle_defects(verts, faces):
    """``2 pi`` minus the sum of incident triangle angles, for every vertex."""
    total = np.zeros(len(verts))
    for i in range(3):
        p = verts[faces[:, i]]
        a = verts[faces[:, (i + 1) % 3]] - p
        b = verts[faces[:, (i + 2) % 3]] - p
        cosang = np.sum(a * b, -1) / (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1))
        np.add.at(total, faces[:, i], np.arccos(np.clip(cosang, -1.0, 1.0)))
    return 2 * np.pi - total


def interior_vertices(rows, cols):
    idx = np.arange(rows * cols).reshape(rows, cols)
    return idx[1:-1, 1:-1].ravel()


def write_grid_csv(path, t, U, P):
    m1 = U.shape[1]
    n = P.shape[-1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["t"] + [f"u{j + 1}" for j in range(m1)] + [f"x{a + 1}" for a in range(n)])
        for i, ti in enumerate(t):
            for j, u in enumerate(U):
                w.writerow([_g(ti)] + [_g(x) for x in u] + [_g(x) for x in P[i, j]])


def write_curve_csv(path, t, points):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["t"] + [f"x{a + 1}" for a in range(points.shape[-1])])
        for ti, p in zip(t, points):
            w.writerow([_g(ti)] + [_g(x) for x in p])


def write_strip_csv(path, strip):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["s", "t", "x", "y", "heading", "ruling_angle", "geodesic_curvature"])
        t = strip.patch.framed.t
        for k in range(len(strip.s)):
            x, y = strip.position[k]
            w.writerow([_g(v) for v in (strip.s[k], t[k], x, y, strip.heading[k], strip.angle[k], strip.kappa[k])])


def write_strip_svg(path, strip, rulings=32):
    """Developed strip outline, centre curve and a selection of rulings."""
    v = strip.half_width
    pos, r = strip.position, strip.ruling
    left, right = pos + v * r, pos - v * r

    def px(p):
        return np.column_stack([PX_PER_UNIT * p[:, 0], -PX_PER_UNIT * p[:, 1]])

    outline = px(np.concatenate([left, right[::-1]]))
    centre = px(pos)
    every = max(1, (len(pos) - 1) // rulings)
    ruling_idx = list(range(0, len(pos), every))
    if ruling_idx[-1] != len(pos) - 1:
        ruling_idx.append(len(pos) - 1)
    allpts = np.concatenate([outline, centre])
    lo, hi = allpts.min(0) - 10.0, allpts.max(0) + 10.0
    w, h = hi - lo

    def path_d(pts, close=False):
        d = "M " + " L ".join(f"{x:.6f},{y:.6f}" for x, y in pts)
        return d + (" Z" if close else "")

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3f}" height="{h:.3f}" '
        f'viewBox="{lo[0]:.6f} {lo[1]:.6f} {w:.6f} {h:.6f}">',
        f'<path id="outline" d="{path_d(outline, True)}" fill="#f4efe1" stroke="#333" stroke-width="1"/>',
    ]
    for k in ruling_idx:
        a, b = px(left[k:k + 1])[0], px(right[k:k + 1])[0]
        lines.append(
            f'<line class="ruling" x1="{a[0]:.6f}" y1="{a[1]:.6f}" x2="{b[0]:.6f}" y2="{b[1]:.6f}" '
            'stroke="#7a7a7a" stroke-width="0.5"/>'
        )
    lines.append(f'<path id="curve" d="{path_d(centre)}" fill="none" stroke="#b02020" stroke-width="1.5"/>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
