"""Named mesh families with resolution parameters, used by the CLI and the harness.

A family knows how to build a mesh from parameters, which per-vertex weight
goes with it, and how to produce the next coarser member so refinement
trends can be measured from a single production mesh.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import shrinkers
from .mesh import TriMesh


@dataclass(frozen=True)
class Family:
    name: str
    build: Callable[..., TriMesh]
    defaults: dict
    coarsen: Callable[[dict], dict | None]
    closed: bool
    shrinker: bool


def _halve(*keys, minimum=4):
    def f(p):
        q = dict(p)
        for k in keys:
            q[k] = int(p[k]) // 2
            if q[k] < minimum:
                return None
        return q

    return f


def _sphere_coarsen(p):
    return None if int(p["level"]) <= 1 else {**p, "level": int(p["level"]) - 1}


def _flat(m, n, amplitude=0.0):
    mesh, _ = shrinkers.flat_torus(int(m), int(n))
    return mesh


FAMILIES = {
    "sphere": Family("sphere", lambda level: shrinkers.sphere_mesh(int(level)), {"level": 4}, _sphere_coarsen, True, True),
    "disk": Family("disk", lambda R, n: shrinkers.disk_mesh(float(R), int(n)), {"R": 6.0, "n": 24}, _halve("n"), False, True),
    "cylinder": Family(
        "cylinder",
        lambda half_length, n: shrinkers.cylinder_mesh(float(half_length), int(n)),
        {"half_length": 4.0, "n": 64},
        _halve("n", minimum=16),
        False,
        True,
    ),
    "angenent": Family(
        "angenent",
        lambda n_angular: shrinkers.angenent_torus(int(n_angular)),
        {"n_angular": 128},
        _halve("n_angular", minimum=16),
        True,
        True,
    ),
    "flat-torus": Family("flat-torus", _flat, {"m": 32, "n": 32, "amplitude": 0.0}, _halve("m", "n"), True, False),
}


def family_weight(name: str | None, params: dict, mesh: TriMesh):
    """Weight belonging to a family member; None means the Gaussian default."""
    if name == "flat-torus":
        a = float(params.get("amplitude", 0.0))
        return 1.0 + a * np.sin(2 * np.pi * mesh.vertices[:, 0])
    return None


def resolve(name: str, **params) -> dict:
    if name not in FAMILIES:
        raise KeyError(f"unknown mesh family {name!r}")
    fam = FAMILIES[name]
    unknown = set(params) - set(fam.defaults)
    if unknown:
        raise KeyError(f"unknown parameters for {name}: {sorted(unknown)}")
    return {**fam.defaults, **{k: v for k, v in params.items() if v is not None}}


def generate(name: str, **params):
    """Build a family member; returns ``(mesh, provenance)``."""
    p = resolve(name, **params)
    mesh = FAMILIES[name].build(**p)
    return mesh, {"generator": name, "params": p}


def coarser(provenance: dict | None, levels: int = 1) -> list:
    """Provenance records of up to ``levels`` successively coarser members."""
    out = []
    if not provenance or provenance.get("generator") not in FAMILIES:
        return out
    fam = FAMILIES[provenance["generator"]]
    p = dict(provenance["params"])
    for _ in range(levels):
        p = fam.coarsen(p)
        if p is None:
            break
        out.append({"generator": fam.name, "params": p})
    return out
