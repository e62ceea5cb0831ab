"""OFF / OBJ reading and writing (vertex and face records only)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MeshError
from .mesh import TriMesh, build_mesh

__all__ = [
    "read_mesh",
    "write_mesh",
    "read_off",
    "write_off",
    "read_obj",
    "write_obj",
    "read_provenance",
]

SOURCE_TAG = "# source "
PERIOD_TAG = "# period "


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _header_comments(mesh: TriMesh, provenance) -> list:
    out = []
    if provenance is not None:
        out.append(SOURCE_TAG + json.dumps(provenance, sort_keys=True))
    if mesh.period is not None:
        out.append(PERIOD_TAG + " ".join(_fmt(p) for p in mesh.period))
    return out


def write_off(mesh: TriMesh, path, provenance: dict | None = None) -> None:
    """Write OFF; ``provenance`` and a periodic lattice go into header comments."""
    lines = ["OFF"] + _header_comments(mesh, provenance)
    lines.append(f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}")
    lines += [" ".join(_fmt(c) for c in v) for v in mesh.vertices.tolist()]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def _read_comments(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if line.startswith(SOURCE_TAG):
            out["source"] = json.loads(line[len(SOURCE_TAG) :])
        elif line.startswith(PERIOD_TAG):
            out["period"] = [float(t) for t in line[len(PERIOD_TAG) :].split()]
    return out


def read_provenance(path) -> dict | None:
    """Generator record stored by :func:`write_mesh`, or None."""
    return _read_comments(Path(path).read_text()).get("source")


def read_off(path) -> TriMesh:
    text = Path(path).read_text()
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    if not tokens or not tokens[0][0].endswith("OFF"):
        raise MeshError(f"{path}: missing OFF header")
    head = tokens[0][1:] if len(tokens[0]) > 1 else None
    rows = tokens[1:]
    if head is None:
        head, rows = rows[0], rows[1:]
    nv, nf = int(head[0]), int(head[1])
    verts = np.array([[float(t) for t in r[:3]] for r in rows[:nv]])
    faces = []
    for r in rows[nv : nv + nf]:
        if int(r[0]) != 3:
            raise MeshError("only triangle faces are supported")
        faces.append([int(t) for t in r[1:4]])
    return build_mesh(verts, faces, period=_read_comments(text).get("period"))


def write_obj(mesh: TriMesh, path, provenance: dict | None = None) -> None:
    lines = _header_comments(mesh, provenance)
    lines += ["v " + " ".join(_fmt(c) for c in v) for v in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path) -> TriMesh:
    text = Path(path).read_text()
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(t) for t in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) for p in parts[1:]]
            if len(idx) != 3:
                raise MeshError("only triangle faces are supported")
            faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    return build_mesh(np.array(verts), faces, period=_read_comments(text).get("period"))


def read_mesh(path) -> TriMesh:
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        return read_off(path)
    if suffix == ".obj":
        return read_obj(path)
    raise MeshError(f"unsupported mesh format: {suffix}")


def write_mesh(mesh: TriMesh, path, provenance: dict | None = None) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        write_off(mesh, path, provenance)
    elif suffix == ".obj":
        write_obj(mesh, path, provenance)
    else:
        raise MeshError(f"unsupported mesh format: {suffix}")
