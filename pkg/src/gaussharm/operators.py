"""Drift Laplacian, stability pencil, lowest eigenpairs and Morse index.

Convention: eigenvalues ``eta`` are Rayleigh quotients
``phi^T S phi / phi^T M phi`` of the pencil.  For the stability operator
``L u = drift(u) + (1/2 + |A|^2) u`` an operator eigenvalue ``L u = mu u``
corresponds to ``eta = -mu``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.sparse import linalg as spla

from .dec import exterior_derivatives, weighted_stiffness
from .errors import EigensolverStall, FactorizationFailure
from .mesh import TriMesh

__all__ = [
    "SymmetricPencil",
    "SpectrumResult",
    "build_pencil",
    "build_L_pencil",
    "lowest_eigenpairs",
    "morse_index",
    "drift_apply",
    "stability_apply",
    "apply_LE_to_field",
]

RESIDUAL_GATE = 1e-8
NEGATIVE_THRESHOLD = -1e-9
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class SymmetricPencil:
    """Generalized symmetric problem ``S v = eta M v`` on the free vertices.

    ``S`` and ``m`` (diagonal of ``M``) are already restricted to ``free``.
    """

    S: sparse.csr_matrix
    m: np.ndarray
    free: np.ndarray
    n_total: int

    @property
    def M(self) -> sparse.dia_matrix:
        return sparse.diags(self.m)

    @property
    def size(self) -> int:
        return len(self.m)

    def rayleigh(self, phi) -> float:
        phi = np.asarray(phi, dtype=float)
        if len(phi) == self.n_total and self.size != self.n_total:
            phi = phi[self.free]
        return float(phi @ (self.S @ phi)) / float(phi @ (self.m * phi))

    def expand(self, vecs) -> np.ndarray:
        """Lift free-vertex vectors to all vertices, zero on eliminated ones."""
        vecs = np.asarray(vecs)
        out = np.zeros((self.n_total,) + vecs.shape[1:])
        out[self.free] = vecs
        return out


@dataclass
class SpectrumResult:
    """Ascending eigenvalues, ``M``-orthonormal eigenvectors (all vertices) and residuals."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    convention: str = "rayleigh"

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues": np.asarray(self.eigenvalues).tolist(),
            "residuals": np.asarray(self.residuals).tolist(),
            "convention": self.convention,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)


def build_pencil(mesh: TriMesh, stars, potential=None, dirichlet: bool | None = None) -> SymmetricPencil:
    """Pencil ``S = S_lambda - M0 diag(potential)``, ``M = M0``.

    ``dirichlet`` (default: whether the mesh has a boundary) eliminates the
    boundary vertices.
    """
    d0, _ = exterior_derivatives(mesh)
    S = weighted_stiffness(stars, d0)
    if potential is not None:
        S = (S - sparse.diags(stars.m0 * np.asarray(potential, dtype=float))).tocsr()
    if dirichlet is None:
        dirichlet = not mesh.is_closed()
    free = np.flatnonzero(~mesh.boundary_vertices()) if dirichlet else np.arange(mesh.n_vertices)
    if len(free) < mesh.n_vertices:
        S = S[free][:, free].tocsr()
    S = (0.5 * (S + S.T)).tocsr()
    return SymmetricPencil(S, stars.m0[free].copy(), free, mesh.n_vertices)


def build_L_pencil(mesh: TriMesh, stars, cache, dirichlet: bool | None = None) -> SymmetricPencil:
    """Stability pencil: potential ``|A|^2 + 1/2``."""
    return build_pencil(mesh, stars, cache.A2 + 0.5, dirichlet)


def _gershgorin_lower(pencil: SymmetricPencil) -> float:
    s = 1.0 / np.sqrt(pencil.m)
    B = sparse.diags(s) @ pencil.S @ sparse.diags(s)
    B = B.tocsr()
    diag = B.diagonal()
    off = np.asarray(abs(B).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - off))


def _start_vector(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(n)


def _eigsh_buffered(pencil: SymmetricPencil, k: int, seed: int, tol: float, vectors: bool):
    """Shift-invert Lanczos for ``k`` plus spare pairs.

    Lanczos can return only part of a degenerate cluster that straddles the
    requested count; solving for extra pairs and keeping the lowest ``k``
    avoids truncating such clusters.
    """
    n = pencil.size
    kk = min(n - 2, k + 6 + k // 2)
    g = _gershgorin_lower(pencil)
    sigma = g - 0.05 * (1.0 + abs(g))
    return spla.eigsh(
        pencil.S.tocsc(), k=kk, M=pencil.M.tocsc(), sigma=sigma, which="LM",
        v0=_start_vector(n, seed), tol=tol, ncv=min(n, max(2 * kk + 1, 20)),
        return_eigenvectors=vectors,
    )


def lowest_eigenpairs(pencil: SymmetricPencil, k: int = 1, seed: int = 0, tol: float = 1e-12) -> SpectrumResult:
    """The ``k`` smallest eigenvalues of the pencil.

    Shift-invert Lanczos (ARPACK) about a shift below the Gershgorin bound;
    small problems fall back to a dense solve.  Every pair must satisfy
    ``|S v - eta M v| / |v| < 1e-8``.

    Raises
    ------
    EigensolverStall
        If the residual gate fails.
    """
    n = pencil.size
    if k < 1 or k > max(1, n // 10):
        raise ValueError(f"k must lie in [1, {max(1, n // 10)}] for a pencil of size {n}")
    if n <= 200:
        vals, vecs = sla.eigh(pencil.S.toarray(), np.diag(pencil.m), subset_by_index=[0, k - 1])
    else:
        try:
            vals, vecs = _eigsh_buffered(pencil, k, seed, tol, True)
        except spla.ArpackNoConvergence as exc:
            raise EigensolverStall(str(exc)) from exc
    order = np.argsort(vals)[:k]
    vals, vecs = vals[order], vecs[:, order]
    # fix sign for reproducibility: largest-magnitude entry positive
    piv = np.argmax(np.abs(vecs), axis=0)
    vecs = vecs * np.sign(vecs[piv, np.arange(vecs.shape[1])])
    vecs = vecs / np.sqrt(np.einsum("ik,i,ik->k", vecs, pencil.m, vecs))
    R = pencil.S @ vecs - vals * (pencil.m[:, None] * vecs)
    res = np.linalg.norm(R, axis=0) / np.linalg.norm(vecs, axis=0)
    if np.any(res >= RESIDUAL_GATE):
        raise EigensolverStall(f"eigenpair residuals {res} above {RESIDUAL_GATE}")
    return SpectrumResult(vals, pencil.expand(vecs), res)


def _dense_inertia(A: np.ndarray) -> int:
    _, D, _ = sla.ldl(A)
    neg = 0
    i = 0
    n = len(D)
    while i < n:
        if i + 1 < n and D[i + 1, i] != 0.0:
            neg += int(np.sum(np.linalg.eigvalsh(D[i : i + 2, i : i + 2]) < 0))
            i += 2
        else:
            neg += int(D[i, i] < 0)
            i += 1
    return neg


def _sparse_inertia(A: sparse.csc_matrix) -> int:
    try:
        lu = spla.splu(
            A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise FactorizationFailure(str(exc)) from exc
    if not (np.array_equal(lu.perm_r, lu.perm_c)):
        raise FactorizationFailure("factorization pivoted off the diagonal")
    d = lu.U.diagonal()
    if np.any(d == 0) or not np.all(np.isfinite(d)):
        raise FactorizationFailure("zero pivot in symmetric factorization")
    return int(np.sum(d < 0))


def _count_below(pencil: SymmetricPencil, threshold: float, seed: int = 0) -> int:
    n = pencil.size
    if n <= DENSE_LIMIT:
        vals = sla.eigh(pencil.S.toarray(), np.diag(pencil.m), eigvals_only=True)
        return int(np.sum(vals < threshold))
    k = 8
    while True:
        k = min(k, n - 2)
        spec = lowest_eigenpairs_unchecked(pencil, k, seed)
        if spec[-1] >= threshold or k >= n - 2:
            return int(np.sum(spec < threshold))
        k *= 2


def lowest_eigenpairs_unchecked(pencil: SymmetricPencil, k: int, seed: int = 0) -> np.ndarray:
    """The ``k`` smallest eigenvalues without the residual gate."""
    return np.sort(_eigsh_buffered(pencil, k, seed, 1e-12, False))[:k]


def morse_index(pencil: SymmetricPencil, threshold: float = NEGATIVE_THRESHOLD, cross_check: bool = True) -> int:
    """Number of pencil eigenvalues below ``threshold`` (default ``-1e-9``).

    Sylvester inertia of ``S - threshold M``: dense Bunch-Kaufman for small
    problems, otherwise a sparse factorization with diagonal pivots.  When
    the pencil has at most 2000 rows the count is also checked against a
    dense eigensolve.

    Raises
    ------
    FactorizationFailure
        If the factorization breaks down or disagrees with the eigen count.
    """
    A = (pencil.S - threshold * pencil.M).tocsc()
    n = pencil.size
    if n <= DENSE_LIMIT:
        count = _dense_inertia(A.toarray())
        if cross_check:
            alt = _count_below(pencil, threshold)
            if alt != count:
                raise FactorizationFailure(f"inertia {count} disagrees with eigen count {alt}")
        return count
    try:
        return _sparse_inertia(A)
    except FactorizationFailure:
        if not cross_check:
            raise
        return _count_below(pencil, threshold)


def drift_apply(mesh: TriMesh, stars, f) -> np.ndarray:
    """Weighted drift Laplacian ``-M0^{-1} S_lambda f``."""
    d0, _ = exterior_derivatives(mesh)
    d0f = d0.astype(float)
    f = np.asarray(f, dtype=float)
    return -(d0f.T @ (stars.w1[:, None] * (d0f @ f.reshape(len(f), -1)))).reshape(f.shape) / (
        stars.m0.reshape((-1,) + (1,) * (f.ndim - 1))
    )


def stability_apply(mesh: TriMesh, stars, cache, f) -> np.ndarray:
    """Operator form ``L f = drift(f) + (1/2 + |A|^2) f``."""
    f = np.asarray(f, dtype=float)
    return drift_apply(mesh, stars, f) + (0.5 + cache.A2) * f


def apply_LE_to_field(mesh: TriMesh, stars, W) -> np.ndarray:
    """Componentwise drift Laplacian of an ambient vector field, (V, 3)."""
    return drift_apply(mesh, stars, np.asarray(W, dtype=float))
