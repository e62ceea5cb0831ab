"""Gaussian harmonic one-forms: weighted-energy minimizers in cohomology classes."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import linalg as spla

from .dec import (
    covariant_gradient_field,
    exterior_derivatives,
    one_form_to_vertex_field,
    weighted_codifferential,
    weighted_stars,
    weighted_stiffness,
)
from .errors import NotClosed, SolverDivergence
from .homology import GeneratorSet, periods
from .mesh import TriMesh

__all__ = ["GhfBasis", "minimize_in_class", "ghf_basis", "ghf_diagnostics", "deflated_cg"]

SOLVER_RTOL = 1e-12


def deflated_cg(S, b, rtol: float = SOLVER_RTOL, maxiter: int | None = None) -> np.ndarray:
    """Solve ``S f = b`` for a PSD ``S`` whose kernel is the constants.

    Conjugate gradients with a Jacobi preconditioner, both projected onto the
    mean-zero subspace.  The returned ``f`` has zero mean.

    Raises
    ------
    SolverDivergence
        If CG stops without reaching ``rtol``.
    """
    n = S.shape[0]
    b = np.asarray(b, dtype=float)
    b = b - b.mean()
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros(n)
    dinv = 1.0 / S.diagonal()

    def prec(r):
        z = dinv * r
        return z - z.mean()

    P = spla.LinearOperator((n, n), matvec=prec, dtype=float)
    f, info = spla.cg(S, b, rtol=rtol, atol=0.0, M=P, maxiter=maxiter or 20 * n)
    if info != 0 or not np.all(np.isfinite(f)):
        raise SolverDivergence(f"CG did not converge (info={info})")
    f = f - f.mean()
    res = np.linalg.norm(b - S @ f) / nb
    if res > 100 * rtol:
        raise SolverDivergence(f"CG residual {res:.3e} above tolerance")
    return f


def _closed_check(d1, w) -> None:
    r = d1 @ w
    scale = max(1.0, float(np.max(np.abs(w)))) if len(w) else 1.0
    if len(r) and np.max(np.abs(r)) > 1e-10 * scale:
        raise NotClosed(f"d1 omega has max {np.max(np.abs(r)):.3e}")


def minimize_in_class(mesh: TriMesh, stars, omega0, rtol: float = SOLVER_RTOL) -> np.ndarray:
    """Minimizer of ``omega^T star1 omega`` over ``omega0 + d0 f``.

    Raises
    ------
    NotClosed
        If ``d1 omega0`` is not zero.
    SolverDivergence
    """
    d0, d1 = exterior_derivatives(mesh)
    w0 = np.asarray(omega0, dtype=float)
    _closed_check(d1, w0)
    S = weighted_stiffness(stars, d0)
    f = deflated_cg(S, -(d0.T @ (stars.w1 * w0)), rtol=rtol)
    return w0 + d0 @ f


@dataclass
class GhfBasis:
    """One minimizer per generator class, with energies and diagnostics."""

    forms: list
    energies: np.ndarray
    gram: np.ndarray
    period_matrix: np.ndarray
    diagnostics: list = field(default_factory=list)
    mesh_hash: str = ""

    def __len__(self) -> int:
        return len(self.forms)

    def to_json_dict(self) -> dict:
        return {
            "mesh_hash": self.mesh_hash,
            "forms": [np.asarray(w).tolist() for w in self.forms],
            "energies": np.asarray(self.energies).tolist(),
            "gram": np.asarray(self.gram).tolist(),
            "period_matrix": np.asarray(self.period_matrix).tolist(),
            "diagnostics": self.diagnostics,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)


def ghf_basis(mesh: TriMesh, stars, gens: GeneratorSet, cache=None) -> GhfBasis:
    """Gaussian harmonic representatives of every generator class.

    ``cache`` (a :class:`~gaussharm.geometry.GeometryCache`) is only needed
    for the pointwise diagnostics; without it those entries are omitted.
    """
    forms = [minimize_in_class(mesh, stars, w) for w in gens.cocycles]
    k = len(forms)
    gram = np.array([[float(a @ (stars.w1 * b)) for b in forms] for a in forms]).reshape(k, k)
    P = np.array([periods(mesh, w, gens.cycles) for w in forms]).T.reshape(len(gens.cycles), k)
    diags = [ghf_diagnostics(mesh, cache, w, stars) for w in forms]
    return GhfBasis(forms, np.diag(gram).copy(), gram, P, diags, mesh.hash())


def ghf_diagnostics(mesh: TriMesh, cache, omega, stars=None) -> dict:
    """Closedness, weighted co-closedness and the pointwise divergence residual.

    * ``closedness_residual``: ``max |d1 omega|``;
    * ``coclosedness_residual``: ``|delta omega|_{M0} / |omega|_{star1}``;
    * ``pointwise_EL_residual``: ``|div W - <W, xT>/2|_{L2(lambda2)} / |omega|_{star1}``
      with ``W`` the reconstructed vector field, over trusted vertices.
      Needs ``cache``; a discretization diagnostic, not a solver check.
    """
    w = np.asarray(omega, dtype=float)
    d0, d1 = exterior_derivatives(mesh)
    if stars is None:
        if cache is None:
            raise ValueError("need stars or a geometry cache")
        stars = weighted_stars(mesh, cache.weight)
    norm = float(np.sqrt(max(w @ (stars.w1 * w), 0.0)))
    delta = weighted_codifferential(w, stars, d0)
    out = {
        "closedness_residual": float(np.max(np.abs(d1 @ w))) if mesh.n_faces else 0.0,
        "coclosedness_residual": float(np.sqrt(delta @ (stars.m0 * delta)) / norm) if norm > 0 else 0.0,
        "energy": norm**2,
    }
    if cache is not None:
        W = one_form_to_vertex_field(mesh, w, cache.normals)
        G = covariant_gradient_field(mesh, cache, W)
        el = G[:, 0, 0] + G[:, 1, 1] - 0.5 * np.einsum("ij,ij->i", W, cache.xT)
        t = cache.trusted
        num = float(np.sqrt(np.sum(stars.m0[t] * el[t] ** 2)))
        out["pointwise_EL_residual"] = num / norm if norm > 0 else 0.0
    return out


def form_digest(omega) -> str:
    return hashlib.sha256(np.ascontiguousarray(omega, dtype=float).tobytes()).hexdigest()[:16]
