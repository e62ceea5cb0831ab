"""Canonical self-shrinker meshes and oracle meshes.

Every embedded shrinker here satisfies ``H = <x, n> / 2`` in the convention
where the round sphere of radius 2 has positive mean curvature:

* sphere of radius 2,
* plane through the origin (a disk, truncated),
* cylinder of radius sqrt(2) about the first axis (truncated),
* the Angenent torus, found by shooting on the profile ODE of a surface of
  revolution about the first axis.

The flat torus and round tori are not shrinkers; they are oracles for the
intrinsic and topological code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial import Delaunay

from .errors import NoSignChange, SelfIntersection, StepFailure
from .mesh import TriMesh, build_mesh, subdivide_midpoint

__all__ = [
    "ProfileCurve",
    "icosahedron",
    "sphere_mesh",
    "disk_mesh",
    "cylinder_mesh",
    "profile_rhs",
    "shoot_profile",
    "angenent_profile",
    "revolve_profile",
    "angenent_torus",
    "equilateral_profile_count",
    "circle_profile",
    "torus_mesh",
    "flat_torus",
    "double_torus",
]

SPHERE_RADIUS = 2.0
CYLINDER_RADIUS = math.sqrt(2.0)


def icosahedron(radius: float = 1.0) -> TriMesh:
    p = (1.0 + 5.0**0.5) / 2.0
    v = np.array(
        [
            [-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
            [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
            [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1],
        ],
        dtype=float,
    )
    v *= radius / np.linalg.norm(v, axis=1, keepdims=True)
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    return build_mesh(v, f)


def _project_to_sphere(radius: float):
    def proj(x):
        return radius * x / np.linalg.norm(x, axis=1, keepdims=True)

    return proj


def sphere_mesh(level: int = 4, radius: float = SPHERE_RADIUS) -> TriMesh:
    """Icosphere with ``level`` midpoint subdivisions, vertices on ``|x| = radius``."""
    if level < 0:
        raise ValueError("level must be >= 0")
    mesh = icosahedron(radius)
    proj = _project_to_sphere(radius)
    for _ in range(level):
        mesh = subdivide_midpoint(mesh, proj)
    return mesh


def disk_mesh(R: float = 6.0, n: int = 24) -> TriMesh:
    """Disk of radius ``R`` in the plane ``x3 = 0`` from ``n`` concentric rings."""
    if R <= 0:
        raise ValueError("R must be positive")
    pts = [np.zeros(2)]
    for k in range(1, n + 1):
        m = 6 * k
        phi = 2 * np.pi * np.arange(m) / m + (np.pi / m) * (k % 2)
        pts.append(np.column_stack([np.cos(phi), np.sin(phi)]) * (R * k / n))
    xy = np.vstack(pts)
    tri = Delaunay(xy).simplices
    return build_mesh(np.column_stack([xy, np.zeros(len(xy))]), tri)


def _ring_faces(n_rings: int, n_angular: int, closed: bool, stagger: bool) -> np.ndarray:
    """Triangulate a stack of rings with ``n_angular`` vertices each."""
    faces = []
    i = np.arange(n_angular)
    ip = (i + 1) % n_angular
    last = n_rings if closed else n_rings - 1
    for k in range(last):
        a = k * n_angular
        b = ((k + 1) % n_rings) * n_angular
        if stagger and k % 2 == 1:
            # ring k is offset by half a step relative to ring k + 1
            faces.append(np.stack([b + i, a + i, b + ip], axis=1))
            faces.append(np.stack([a + i, a + ip, b + ip], axis=1))
        else:
            faces.append(np.stack([a + i, a + ip, b + i], axis=1))
            faces.append(np.stack([a + ip, b + ip, b + i], axis=1))
    return np.vstack(faces)


def _revolve(xs, rs, n_angular: int, closed: bool) -> TriMesh:
    xs = np.asarray(xs, dtype=float)
    rs = np.asarray(rs, dtype=float)
    stagger = (len(xs) % 2 == 0) or not closed
    k = np.arange(len(xs))[:, None]
    phi = 2 * np.pi * (np.arange(n_angular)[None, :] + (0.5 * (k % 2) if stagger else 0.0)) / n_angular
    X = np.broadcast_to(xs[:, None], phi.shape)
    Y = rs[:, None] * np.cos(phi)
    Z = rs[:, None] * np.sin(phi)
    V = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
    return build_mesh(V, _ring_faces(len(xs), n_angular, closed, stagger))


def cylinder_mesh(half_length: float = 4.0, n: int = 64) -> TriMesh:
    """Cylinder of radius sqrt(2) about the first axis, ``|x1| <= half_length``."""
    if half_length <= 0:
        raise ValueError("half_length must be positive")
    dx = (2 * np.pi * CYLINDER_RADIUS / n) * math.sqrt(3) / 2
    rings = int(math.ceil(2 * half_length / dx)) + 1
    xs = np.linspace(-half_length, half_length, rings)
    return _revolve(xs, np.full(rings, CYLINDER_RADIUS), n, closed=False)


# ---------------------------------------------------------------------- #
# rotational shrinkers
# ---------------------------------------------------------------------- #
def profile_rhs(x: float, r: float, theta: float):
    """Arclength ODE of a profile curve whose surface of revolution shrinks.

    The curve ``(x(s), r(s))`` has tangent angle ``theta``; the surface is
    swept about the first axis.  Fixed points: the line ``r = sqrt(2)`` with
    ``theta = 0`` and the circle of radius 2 about the origin.
    """
    c, s = math.cos(theta), math.sin(theta)
    return c, s, 0.5 * (x * s - r * c) + c / r


def _rk4(y, h):
    x, r, t = y
    k1 = profile_rhs(x, r, t)
    k2 = profile_rhs(x + 0.5 * h * k1[0], r + 0.5 * h * k1[1], t + 0.5 * h * k1[2])
    k3 = profile_rhs(x + 0.5 * h * k2[0], r + 0.5 * h * k2[1], t + 0.5 * h * k2[2])
    k4 = profile_rhs(x + h * k3[0], r + h * k3[1], t + h * k3[2])
    return (
        x + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        r + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        t + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
    )


@dataclass
class _Shot:
    s: np.ndarray
    y: np.ndarray  # (n, 3) columns x, r, theta

    @property
    def end(self):
        return self.y[-1]


def shoot_profile(r0: float, step: float = 1e-3, s_max: float = 40.0) -> _Shot:
    """Integrate from ``(0, r0)`` with horizontal tangent to the next ``x = 0`` crossing.

    Raises
    ------
    StepFailure
        If the curve reaches the axis or never returns to ``x = 0``.
    """
    y = (0.0, float(r0), 0.0)
    ss, ys = [0.0], [y]
    s = 0.0
    while s < s_max:
        yn = _rk4(y, step)
        if yn[1] <= 1e-6 or not math.isfinite(yn[2]):
            raise StepFailure(f"profile from r0={r0} hit the axis at s={s:.4f}")
        if yn[0] <= 0.0 < y[0]:
            # Newton on the partial step length so that x = 0 exactly
            t = step * y[0] / (y[0] - yn[0])
            for _ in range(8):
                yt = _rk4(y, t)
                dt = -yt[0] / math.cos(yt[2])
                t += dt
                if abs(dt) < 1e-15:
                    break
            yt = _rk4(y, t)
            ss.append(s + t)
            ys.append((0.0, yt[1], yt[2]))
            return _Shot(np.array(ss), np.array(ys))
        y = yn
        s += step
        ss.append(s)
        ys.append(y)
    raise StepFailure(f"profile from r0={r0} did not return to x = 0")


def _density(shot: _Shot, spacing: str) -> np.ndarray:
    x, r, th = shot.y.T
    if spacing == "conformal":
        return 1.0 / r
    dth = np.array([profile_rhs(*row)[2] for row in shot.y])
    return np.sqrt(1.0 / r**2 + dth**2)


def _closure(r0: float, step: float) -> float:
    return shoot_profile(r0, step).end[2] - math.pi


@dataclass
class ProfileCurve:
    """Closed profile polyline in the ``(x, r)`` half plane.

    ``points`` is ordered along the curve and does not repeat the first point.
    """

    points: np.ndarray
    closure_error: float
    shooting_parameter: float
    length: float
    meta: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def r(self) -> np.ndarray:
        return self.points[:, 1]

    def save(self, path) -> None:
        np.savetxt(path, self.points, fmt="%.17g", header="x r")

    @classmethod
    def load(cls, path) -> "ProfileCurve":
        pts = np.loadtxt(Path(path), ndmin=2)
        seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        return cls(pts, float("nan"), float("nan"), float(seg.sum()))


def angenent_profile(
    r0_bracket=(0.2, 0.7),
    tol: float = 1e-10,
    n_points: int = 136,
    step: float = 1e-3,
    spacing: str = "conformal",
) -> ProfileCurve:
    """Shoot for the profile curve of the Angenent torus.

    Starting at the inner point ``(0, r0)`` with horizontal tangent, the
    curve is integrated to its next crossing of ``x = 0``; ``r0`` is bisected
    until the curve crosses that line perpendicularly (``theta = pi``).  The
    half curve is then mirrored in ``x``.

    Parameters
    ----------
    r0_bracket : (float, float)
        Interval on which the closure functional changes sign.
    tol : float
        Target for ``|theta_cross - pi|`` and for the bracket width.
    n_points : int
        Even number of profile samples.
    spacing : {"conformal", "arclength"}
        "conformal" spaces samples uniformly in ``int ds / r`` so that a
        surface of revolution built from them has near-isotropic triangles;
        "arclength" spaces them uniformly in arclength.
    """
    if n_points % 2:
        raise ValueError("n_points must be even")
    lo, hi = map(float, r0_bracket)
    glo, ghi = _closure(lo, step), _closure(hi, step)
    if glo * ghi > 0:
        raise NoSignChange(f"closure has the same sign at r0={lo} and r0={hi}")
    mid, gmid = lo, glo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gmid = _closure(mid, step)
        if abs(gmid) < tol and hi - lo < tol:
            break
        if gmid * glo > 0:
            lo, glo = mid, gmid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    shot = shoot_profile(mid, step)
    c = np.cos(shot.y[:, 2])
    s = np.sin(shot.y[:, 2])
    sx = CubicHermiteSpline(shot.s, shot.y[:, 0], c)
    sr = CubicHermiteSpline(shot.s, shot.y[:, 1], s)
    half = n_points // 2
    if spacing == "arclength":
        t = np.linspace(0.0, shot.s[-1], half + 1)
    elif spacing in ("conformal", "curvature"):
        sigma = cumulative_trapezoid(_density(shot, spacing), shot.s, initial=0.0)
        t = np.interp(np.linspace(0.0, sigma[-1], half + 1), sigma, shot.s)
        t[-1] = shot.s[-1]
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    xa, ra = sx(t), sr(t)
    xa[0] = xa[-1] = 0.0
    xs = np.concatenate([xa, -xa[-2:0:-1]])
    rs = np.concatenate([ra, ra[-2:0:-1]])
    return ProfileCurve(
        np.column_stack([xs, rs]),
        closure_error=abs(float(gmid)),
        shooting_parameter=mid,
        length=2.0 * float(shot.s[-1]),
        meta={
            "outer_radius": float(shot.end[1]),
            "step": step,
            "spacing": spacing,
            "conformal_length": 2.0 * float(np.trapezoid(_density(shot, "conformal"), shot.s)),
            "curvature_length": 2.0 * float(np.trapezoid(_density(shot, "curvature"), shot.s)),
        },
    )


def revolve_profile(profile: ProfileCurve, n_angular: int = 128) -> TriMesh:
    """Sweep a closed profile about the first axis into a torus of revolution."""
    if np.any(profile.r <= 0):
        raise SelfIntersection("profile touches or crosses the axis")
    return _revolve(profile.x, profile.r, n_angular, closed=True)


# integral of ds / r over the closed Angenent profile, for sizing meshes
_ANGENENT_CONFORMAL_LENGTH = 5.7983


def equilateral_profile_count(n_angular: int) -> int:
    """Even number of conformal profile rows giving near-equilateral triangles."""
    rows = _ANGENENT_CONFORMAL_LENGTH * n_angular / (2 * np.pi) / (math.sqrt(3) / 2)
    return 2 * max(2, int(round(rows / 2)))


def angenent_torus(n_angular: int = 128, n_profile: int | None = None, **kw) -> TriMesh:
    """Revolved Angenent torus; ``n_profile`` defaults to near-equilateral rows."""
    if n_profile is None:
        n_profile = equilateral_profile_count(n_angular)
    return revolve_profile(angenent_profile(n_points=n_profile, **kw), n_angular)


def circle_profile(center_r: float = 2.0, radius: float = 1.0, n: int = 16) -> ProfileCurve:
    t = 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([radius * np.sin(t), center_r - radius * np.cos(t)])
    return ProfileCurve(pts, 0.0, center_r - radius, 2 * np.pi * radius)


def torus_mesh(R: float = 2.0, r: float = 1.0, m: int = 16, n: int = 16) -> TriMesh:
    """Round torus about the first axis with ``m`` profile and ``n`` angular samples."""
    return revolve_profile(circle_profile(R, r, m), n)


def flat_torus(m: int = 16, n: int = 16, weight=None):
    """Regular triangulation of the unit square torus.

    Returns ``(mesh, weight)``.  ``weight`` may be None (all ones), an array
    of per-vertex values or a callable ``f(u, v)``.
    """
    if m < 3 or n < 3:
        raise ValueError("m, n must be >= 3")
    i, j = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    V = np.column_stack([i.ravel() / m, j.ravel() / n, np.zeros(m * n)])

    def vid(a, b):
        return (a % m) * n + (b % n)

    a, b = i.ravel(), j.ravel()
    v00, v10, v11, v01 = vid(a, b), vid(a + 1, b), vid(a + 1, b + 1), vid(a, b + 1)
    faces = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    mesh = build_mesh(V, faces, period=(1.0, 1.0, 0.0))
    if weight is None:
        w = np.ones(mesh.n_vertices)
    elif callable(weight):
        w = np.asarray(weight(V[:, 0], V[:, 1]), dtype=float)
    else:
        w = np.asarray(weight, dtype=float)
    return mesh, w


def double_torus(m: int = 12, n: int = 12) -> TriMesh:
    """Genus-2 oracle mesh: two round tori joined by a triangular tube."""
    t1 = torus_mesh(2.0, 1.0, m, n)
    off = np.array([0.0, 0.0, 7.0])
    V1 = t1.vertices
    V2 = V1 + off
    F1 = t1.faces
    F2 = t1.faces + len(V1)
    # faces closest to each other across the gap
    c1 = V1[F1].mean(axis=1)
    c2 = V2[F1].mean(axis=1)
    f1 = int(np.argmax(c1[:, 2]))
    f2 = int(np.argmin(c2[:, 2]))
    a = F1[f1]
    b = F2[f2]
    V = np.vstack([V1, V2])
    keep1 = np.delete(F1, f1, axis=0)
    keep2 = np.delete(F2, f2, axis=0)
    last_err = None
    for bb in (b, b[::-1]):
        for shift in range(3):
            q = np.roll(bb, shift)
            tube = []
            for k in range(3):
                k1 = (k + 1) % 3
                tube.append([a[k], a[k1], q[k1]])
                tube.append([a[k], q[k1], q[k]])
            try:
                return build_mesh(V, np.vstack([keep1, keep2, tube]))
            except Exception as err:  # try the next gluing
                last_err = err
    raise last_err
