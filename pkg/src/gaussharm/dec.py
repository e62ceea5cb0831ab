"""Weighted discrete exterior calculus on triangle meshes.

Cochains are plain numpy arrays indexed by vertices, edges (stored as
``i < j``) and faces.  The Hodge stars carry the Gaussian density:

* ``M0[i] = lambda2[i] * A[i]`` with ``A[i]`` the barycentric dual area,
* ``star1[e] = (cot alpha + cot beta) / 2 * (lambda2[i] + lambda2[j]) / 2``.

With ``lambda2 = 1`` everything reduces to the usual cotangent DEC.  Only
edge lengths (through :meth:`TriMesh.corners`) and the weight enter, so the
same code runs on periodic meshes with no embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import NonPositiveWeight
from .geometry import fit_support, local_coords, lstsq_batched, poly_columns
from .mesh import TriMesh

__all__ = [
    "WeightedStars",
    "exterior_derivatives",
    "cotangents",
    "weighted_stars",
    "weighted_codifferential",
    "weighted_stiffness",
    "one_form_to_vertex_field",
    "face_vectors",
    "covariant_gradient_field",
    "export_coo",
]


def exterior_derivatives(mesh: TriMesh):
    """Signed incidence matrices ``d0`` (E x V) and ``d1`` (F x E), integer valued."""
    E, V, F = mesh.n_edges, mesh.n_vertices, mesh.n_faces
    i, j = mesh.edges.T
    rows = np.repeat(np.arange(E), 2)
    cols = np.column_stack([i, j]).ravel()
    vals = np.tile([-1, 1], E)
    d0 = sparse.csr_matrix((vals, (rows, cols)), shape=(E, V), dtype=np.int64)
    d1 = sparse.csr_matrix(
        (mesh.face_edge_signs.ravel(), (np.repeat(np.arange(F), 3), mesh.face_edges.ravel())),
        shape=(F, E),
        dtype=np.int64,
    )
    return d0, d1


def cotangents(mesh: TriMesh) -> np.ndarray:
    """(F, 3) cotangent of the angle at corner ``k``, from edge lengths only.

    Corner ``k`` is opposite the halfedge ``k+1 -> k+2``.
    """
    c = mesh.corners()
    sq = np.sum((np.roll(c, -1, axis=1) - c) ** 2, axis=2)  # |p_{k+1} - p_k|^2
    l2 = np.roll(sq, -1, axis=1)  # squared length opposite corner k
    a, b, cc = l2[:, 0], l2[:, 1], l2[:, 2]
    # Heron in squared lengths
    area4 = np.sqrt(np.maximum(2 * (a * b + b * cc + cc * a) - (a * a + b * b + cc * cc), 0.0))
    # cot at corner k = (l_{k+1}^2 + l_{k+2}^2 - l_k^2) / (4 area)
    num = np.roll(l2, -1, axis=1) + np.roll(l2, -2, axis=1) - l2
    return num / area4[:, None]


@dataclass(frozen=True)
class WeightedStars:
    """Diagonal weighted Hodge stars.

    ``m0`` and ``w1`` are the diagonals of ``M0`` and ``star1``;
    ``cot_weight`` is the unweighted ``(cot alpha + cot beta)/2`` per edge.
    """

    m0: np.ndarray
    w1: np.ndarray
    area: np.ndarray
    cot_weight: np.ndarray
    edge_weight: np.ndarray
    weight: np.ndarray

    @property
    def M0(self) -> sparse.dia_matrix:
        return sparse.diags(self.m0)

    @property
    def star1(self) -> sparse.dia_matrix:
        return sparse.diags(self.w1)


def weighted_stars(mesh: TriMesh, lambda2) -> WeightedStars:
    """Assemble the weighted stars for per-vertex density ``lambda2``.

    Raises
    ------
    NonPositiveWeight
        If any entry of ``lambda2`` is not strictly positive.
    """
    lam = np.asarray(lambda2, dtype=float)
    if lam.shape != (mesh.n_vertices,):
        raise ValueError("lambda2 must have one entry per vertex")
    if not np.all(lam > 0):
        raise NonPositiveWeight("weight must be strictly positive")
    cot = cotangents(mesh)
    # halfedge k of face f is opposite corner k+2
    opp = np.roll(cot, -2, axis=1)
    cw = 0.5 * np.bincount(mesh.face_edges.ravel(), weights=opp.ravel(), minlength=mesh.n_edges)
    area = mesh.face_areas()
    A = np.bincount(mesh.faces.ravel(), weights=np.repeat(area / 3.0, 3), minlength=mesh.n_vertices)
    i, j = mesh.edges.T
    ew = 0.5 * (lam[i] + lam[j])
    return WeightedStars(m0=lam * A, w1=cw * ew, area=A, cot_weight=cw, edge_weight=ew, weight=lam)


def weighted_codifferential(omega, stars: WeightedStars, d0) -> np.ndarray:
    """``delta_lambda omega = -M0^{-1} d0^T star1 omega``."""
    return -(d0.T @ (stars.w1 * np.asarray(omega, dtype=float))) / stars.m0


def weighted_stiffness(stars: WeightedStars, d0) -> sparse.csr_matrix:
    """``S = d0^T star1 d0``: the weighted Dirichlet form ``f^T S f = int lambda2 |grad f|^2``."""
    d0f = d0.astype(float)
    return (d0f.T @ sparse.diags(stars.w1) @ d0f).tocsr()


def _barycentric_gradients(mesh: TriMesh) -> np.ndarray:
    """(F, 3, 3) gradient of the hat function of corner ``k`` on each face."""
    c = mesh.corners()
    n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    dbl = np.linalg.norm(n, axis=1)
    nu = n / dbl[:, None]
    # grad phi_k = n x (p_{k+2} - p_{k+1}) / (2 area)
    e = np.roll(c, -2, axis=1) - np.roll(c, -1, axis=1)
    return np.cross(nu[:, None, :], e) / dbl[:, None, None]


def face_vectors(mesh: TriMesh, omega) -> np.ndarray:
    """Whitney reconstruction of a 1-cochain evaluated at face barycentres, (F, 3)."""
    g = _barycentric_gradients(mesh)
    w = np.asarray(omega, dtype=float)[mesh.face_edges] * mesh.face_edge_signs  # (F, 3) halfedge values
    # halfedge k runs from corner k to corner k+1
    diff = np.roll(g, -1, axis=1) - g
    return np.einsum("fk,fkc->fc", w, diff) / 3.0


def one_form_to_vertex_field(mesh: TriMesh, omega, normals=None) -> np.ndarray:
    """Dual vector field of a 1-cochain at the vertices, (V, 3).

    Whitney vectors at face barycentres are averaged to the vertices with
    face-area weights and projected onto the tangent plane of ``normals``
    (area-weighted vertex normals when omitted).
    """
    Wf = face_vectors(mesh, omega)
    area = mesh.face_areas()
    VF = mesh.vertex_face_incidence()
    W = (VF @ (area[:, None] * Wf)) / (VF @ area)[:, None]
    n = mesh.vertex_normals() if normals is None else normals
    return W - np.einsum("ij,ij->i", W, n)[:, None] * n


def covariant_gradient_field(mesh: TriMesh, cache, W, degree: int = 2) -> np.ndarray:
    """Covariant derivative of a tangent field in the vertex frames, (V, 2, 2).

    ``G[v, a, b] = <D_{t_a} W, t_b>`` at vertex ``v``.  Each ambient component
    of ``W`` is fitted by a polynomial of ``degree`` in the tangent
    coordinates over the fit neighbourhood; the tangential projection of the
    ambient derivative is the Levi-Civita derivative of a tangent field.
    """
    W = np.asarray(W, dtype=float)
    idx, mask = fit_support(mesh, 4 if degree >= 3 else 2)
    frames = cache.frames
    u, v, _, h = local_coords(mesh, frames, cache.normals, idx, mask)
    A = poly_columns(u / h[:, None], v / h[:, None], degree)
    # centred on the vertex value, so the fit passes through it
    coef = lstsq_batched(A, W[idx] - W[:, None, :], mask, "gradient fit")  # (V, p, 3)
    dW = coef[:, 0:2, :] / h[:, None, None]
    return np.einsum("vac,vbc->vab", dW, frames)


def export_coo(matrix, path) -> None:
    """Write a sparse matrix as ``row col value`` lines."""
    M = sparse.coo_matrix(matrix)
    with open(path, "w") as fh:
        for r, c, x in zip(M.row.tolist(), M.col.tolist(), M.data.tolist()):
            fh.write(f"{r} {c} {x:.17g}\n")
