"""Pointwise extrinsic geometry of codimension-one meshes.

The shape operator is estimated per vertex by a least-squares height-function
fit in a tangent frame that is re-centred on the fitted normal a few times.
The default fit is a quartic polynomial over the 2-ring; the lighter
quadric over the 1.5-ring is available as ``order=2``.  Vertices whose
neighbourhood cannot carry the quartic fall back to the quadric.  The convention is ``A(X, Y) = <D_X n, Y>``, so the outward
normal of the radius-2 sphere gives ``kappa_1 = kappa_2 = 1/2`` and
``H = kappa_1 + kappa_2 = 1 = <x, n>/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import FrameDegenerate
from .mesh import TriMesh

__all__ = [
    "GeometryCache",
    "gaussian_weight",
    "tangent_frames",
    "fit_neighborhood",
    "curvature_data",
    "shrinker_residual",
    "position_split",
    "angle_defect_curvature",
    "collar_mask",
]


def gaussian_weight(mesh: TriMesh) -> np.ndarray:
    """Per-vertex Gaussian density ``exp(-|x|^2 / 4)``."""
    return np.exp(-0.25 * np.einsum("ij,ij->i", mesh.vertices, mesh.vertices))


def tangent_frames(normals: np.ndarray) -> np.ndarray:
    """(V, 2, 3) orthonormal tangent frames; ``t1 x t2 = n``.

    ``t1`` is Gram-Schmidt of the coordinate axis least aligned with ``n``.
    """
    n = np.asarray(normals)
    axis = np.argmin(np.abs(n), axis=1)
    a = np.zeros_like(n)
    a[np.arange(len(n)), axis] = 1.0
    t1 = a - np.einsum("ij,ij->i", a, n)[:, None] * n
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(n, t1)
    return np.stack([t1, t2], axis=1)


def fit_neighborhood(mesh: TriMesh) -> sparse.csr_matrix:
    """Vertices within the 1.5-ring (one ring plus the far corners of its border faces)."""
    if "nbr15" in mesh._cache:
        return mesh._cache["nbr15"]
    VF = mesh.vertex_face_incidence().astype(bool).astype(np.int64)
    ef = mesh.edge_faces[mesh.edge_faces[:, 1] >= 0]
    nf = mesh.n_faces
    FA = sparse.coo_matrix(
        (np.ones(2 * len(ef), dtype=np.int64), (np.r_[ef[:, 0], ef[:, 1]], np.r_[ef[:, 1], ef[:, 0]])),
        shape=(nf, nf),
    ).tocsr()
    ext = (VF @ (FA + sparse.identity(nf, dtype=np.int64, format="csr"))).astype(bool).astype(np.int64)
    N = (ext @ VF.T).astype(bool).tolil()
    N.setdiag(False)
    N = N.tocsr()
    N.eliminate_zeros()
    mesh._cache["nbr15"] = N
    return N


def padded_neighbors(nbr: sparse.csr_matrix):
    """Neighbour lists padded to a rectangle; returns (idx, mask)."""
    counts = np.diff(nbr.indptr)
    K = int(counts.max())
    n = nbr.shape[0]
    idx = np.repeat(np.arange(n)[:, None], K, axis=1)
    mask = np.arange(K)[None, :] < counts[:, None]
    idx[mask] = nbr.indices
    return idx, mask


def local_coords(mesh, frames, normals, idx, mask):
    D = mesh.displacement(np.arange(mesh.n_vertices)[:, None], idx)  # (V, K, 3)
    u = np.einsum("vkc,vc->vk", D, frames[:, 0])
    v = np.einsum("vkc,vc->vk", D, frames[:, 1])
    w = np.einsum("vkc,vc->vk", D, normals)
    h = np.sqrt((np.where(mask, u * u + v * v, 0.0)).sum(1) / mask.sum(1))
    return u, v, w, h


def lstsq_batched(A, b, mask, what="fit", return_bad=False):
    """Per-vertex least squares: ``A`` (V, K, p), ``b`` (V, K) or (V, K, m).

    Rows with ``mask == False`` are ignored.  Returns (V, p) or (V, p, m);
    with ``return_bad`` also the mask of rank-deficient vertices instead of
    raising.
    """
    squeeze = b.ndim == 2
    if squeeze:
        b = b[..., None]
    A = A * mask[..., None]
    b = b * mask[..., None]
    AtA = np.einsum("vki,vkj->vij", A, A)
    Atb = np.einsum("vki,vkm->vim", A, b)
    ev = np.linalg.eigvalsh(AtA)
    bad = ev[:, 0] <= 1e-10 * ev[:, -1]
    if np.any(bad) and not return_bad:
        raise FrameDegenerate(f"{what}: {int(bad.sum())} vertex neighbourhoods are too flat or small")
    if np.any(bad):
        AtA = AtA.copy()
        AtA[bad] = np.eye(AtA.shape[1])
    x = np.linalg.solve(AtA, Atb)
    x = x[..., 0] if squeeze else x
    return (x, bad) if return_bad else x


def poly_columns(us, vs, degree: int, constant: bool = False, linear: bool = True):
    """Monomials in the scaled local coordinates, ordered by degree.

    The degree-2 block is ``(u^2/2, u v, v^2/2)`` so that its coefficients
    are the Hessian entries.
    """
    cols = [np.ones_like(us)] if constant else []
    if linear:
        cols += [us, vs]
    if degree >= 2:
        cols += [0.5 * us * us, us * vs, 0.5 * vs * vs]
    for d in range(3, degree + 1):
        cols += [us ** (d - k) * vs**k for k in range(d + 1)]
    return np.stack(cols, axis=-1)


def fit_support(mesh: TriMesh, order: int):
    """Neighbour index/mask for the fits: 2-ring for quartic, 1.5-ring for quadric."""
    nbr = mesh.ring(2) if order >= 3 else fit_neighborhood(mesh)
    return padded_neighbors(nbr)


def collar_mask(mesh: TriMesh, rings: int = 2) -> np.ndarray:
    """Vertices within ``rings`` edges of the boundary."""
    m = mesh.boundary_vertices().astype(float)
    if not m.any():
        return m.astype(bool)
    A = mesh.adjacency()
    for _ in range(rings):
        m = m + A @ m
    return m > 0


@dataclass(frozen=True)
class GeometryCache:
    """Per-vertex extrinsic quantities.

    ``shape`` holds the shape operator in the frame ``frames``;
    ``trusted`` is False within a 2-ring collar of the boundary.  For
    intrinsic (periodic) meshes there is no embedding: ``x``, ``xT``, ``xN``
    are zero and ``embedded`` is False.
    """

    weight: np.ndarray
    normals: np.ndarray
    frames: np.ndarray
    shape: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    H: np.ndarray
    K: np.ndarray
    A2: np.ndarray
    x: np.ndarray
    xT: np.ndarray
    xN: np.ndarray
    trusted: np.ndarray
    embedded: bool = True

    def to_json_dict(self) -> dict:
        out = {}
        for name in ("weight", "normals", "k1", "k2", "H", "K", "A2", "xT", "xN", "trusted"):
            out[name] = np.asarray(getattr(self, name)).tolist()
        out["shape_operator"] = self.shape.tolist()
        return out


def _orientation_sign(mesh: TriMesh, normals: np.ndarray) -> float:
    area = mesh.vertex_face_incidence() @ mesh.face_areas()
    m = float(np.sum(area * np.einsum("ij,ij->i", mesh.vertices, normals)))
    scale = float(np.sum(area) * (np.abs(mesh.vertices).max() + 1.0))
    if abs(m) <= 1e-12 * scale:
        return 1.0
    return 1.0 if m > 0 else -1.0


def _height_fit(u, v, w, h, mask, order):
    """Fit ``w(u, v)``; returns Hessian (a, b, c) and gradient (d, e) at the origin."""
    us, vs = u / h[:, None], v / h[:, None]
    A = poly_columns(us, vs, order)
    coef, bad = lstsq_batched(A, w / h[:, None], mask, "height fit", return_bad=True)
    if order > 2 and np.any(bad):
        low = lstsq_batched(A[bad][..., :5], (w / h[:, None])[bad], mask[bad], "quadric fit")
        coef[bad] = 0.0
        coef[bad, :5] = low
    elif np.any(bad):
        raise FrameDegenerate(f"quadric fit: {int(bad.sum())} vertex neighbourhoods are too flat or small")
    d, e = coef[:, 0], coef[:, 1]
    a, b, c = coef[:, 2] / h, coef[:, 3] / h, coef[:, 4] / h
    return a, b, c, d, e


def curvature_data(mesh: TriMesh, iterations: int = 3, weight=None, order: int = 4) -> GeometryCache:
    """Estimate normals, shape operators and derived curvatures.

    The global normal orientation makes the area-weighted mean of
    ``<x, n>`` non-negative (outward on the sphere).  Each vertex fits the
    height ``w = d u + e v + (a u^2 + 2 b u v + c v^2)/2 + ...`` (terms up to
    ``order``); the normal is tilted by ``(d, e)`` and the fit repeated.  The
    shape operator is ``-[[a, b], [b, c]]`` in the final frame.

    Raises
    ------
    FrameDegenerate
        If some neighbourhood cannot support the fit.
    """
    n = mesh.vertex_normals()
    embedded = not mesh.is_intrinsic
    if embedded:
        n = n * _orientation_sign(mesh, n)
    idx, mask = fit_support(mesh, order)
    if np.any(mask.sum(1) < 5):
        raise FrameDegenerate("vertex with fewer than 5 fit neighbours")
    for it in range(iterations + 1):
        frames = tangent_frames(n)
        u, v, w, h = local_coords(mesh, frames, n, idx, mask)
        a, b, c, d, e = _height_fit(u, v, w, h, mask, order)
        if it == iterations:
            break
        n = n - d[:, None] * frames[:, 0] - e[:, None] * frames[:, 1]
        n /= np.linalg.norm(n, axis=1, keepdims=True)

    S = -np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], axis=-2)
    ev = np.linalg.eigvalsh(S)
    k1, k2 = ev[:, 1], ev[:, 0]
    if embedded:
        x = mesh.vertices.copy()
        xn = np.einsum("ij,ij->i", x, n)[:, None] * n
        xt = x - xn
        lam2 = gaussian_weight(mesh) if weight is None else np.asarray(weight, float)
    else:
        x = np.zeros_like(mesh.vertices)
        xn = np.zeros_like(x)
        xt = np.zeros_like(x)
        lam2 = np.ones(mesh.n_vertices) if weight is None else np.asarray(weight, float)
    return GeometryCache(
        weight=lam2,
        normals=n,
        frames=frames,
        shape=S,
        k1=k1,
        k2=k2,
        H=k1 + k2,
        K=k1 * k2,
        A2=k1 * k1 + k2 * k2,
        x=x,
        xT=xt,
        xN=xn,
        trusted=~collar_mask(mesh, 2),
        embedded=embedded,
    )


def shrinker_residual(mesh: TriMesh, cache: GeometryCache) -> np.ndarray:
    """Relative residual ``|H n - xN/2| / max(|H|, |xN|/2, 0.1)``; NaN off the trusted set."""
    Hn = cache.H[:, None] * cache.normals
    num = np.linalg.norm(Hn - 0.5 * cache.xN, axis=1)
    den = np.maximum.reduce([np.abs(cache.H), 0.5 * np.linalg.norm(cache.xN, axis=1), np.full(len(num), 0.1)])
    out = num / den
    return np.where(cache.trusted, out, np.nan)


def position_split(mesh: TriMesh, cache: GeometryCache):
    """Tangential and normal parts of the position vector: ``x = xT + xN``."""
    return cache.xT, cache.xN


def angle_defect_curvature(mesh: TriMesh) -> np.ndarray:
    """Gauss curvature from angle defect over the barycentric area (interior vertices)."""
    c = mesh.corners()
    e1 = np.roll(c, -1, axis=1) - c
    e2 = np.roll(c, 1, axis=1) - c
    cosang = np.einsum("fkc,fkc->fk", e1, e2) / (
        np.linalg.norm(e1, axis=2) * np.linalg.norm(e2, axis=2)
    )
    ang = np.arccos(np.clip(cosang, -1, 1))
    total = np.bincount(mesh.faces.ravel(), weights=ang.ravel(), minlength=mesh.n_vertices)
    area = mesh.vertex_face_incidence() @ mesh.face_areas() / 3.0
    full = np.where(mesh.boundary_vertices(), np.pi, 2 * np.pi)
    return (full - total) / area
