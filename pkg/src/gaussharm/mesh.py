"""Oriented manifold triangle meshes.

A :class:`TriMesh` stores vertex positions, consistently oriented faces and
the derived edge / halfedge connectivity.  Edges are always stored as
``(i, j)`` with ``i < j``; every 1-cochain in the package refers to that
orientation.

Meshes that are only known intrinsically (the flat torus) carry a
*period*: vertex positions live in a plane modulo a lattice, and every
displacement is wrapped to its shortest representative.  All per-face
geometry (areas, edge lengths, cotangents, Whitney vectors) is read from
:meth:`TriMesh.corners` and neighbour offsets from
:meth:`TriMesh.displacement`, so periodic and embedded meshes go through the
same code paths.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import DegenerateFace, MeshError, NonManifold, NonOrientable

__all__ = [
    "TriMesh",
    "TopologySummary",
    "build_mesh",
    "topology_invariants",
    "subdivide_midpoint",
]


def _wrap(d: np.ndarray, period: np.ndarray) -> np.ndarray:
    safe = np.where(period > 0, period, 1.0)
    return np.where(period > 0, d - np.round(d / safe) * safe, d)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TopologySummary:
    V: int
    E: int
    F: int
    chi: int
    genus: int
    boundary_loops: int
    components: int = 1

    def as_dict(self) -> dict:
        return {
            "V": self.V,
            "E": self.E,
            "F": self.F,
            "chi": self.chi,
            "genus": self.genus,
            "boundary_loops": self.boundary_loops,
            "components": self.components,
        }


class TriMesh:
    """Immutable oriented triangle mesh.

    Use :func:`build_mesh` to construct one; the constructor assumes the
    faces are already validated and consistently oriented.

    Attributes
    ----------
    vertices : (V, 3) float array
    faces : (F, 3) int array, consistently oriented
    edges : (E, 2) int array, rows ``(i, j)`` with ``i < j``, sorted
    face_edges : (F, 3) int array
        Edge index of the halfedge ``faces[f, k] -> faces[f, k+1]``.
    face_edge_signs : (F, 3) int array
        +1 when that halfedge runs along the stored edge orientation.
    edge_faces : (E, 2) int array
        Incident faces, second entry -1 on boundary edges.
    he_twin : (3F,) int array
        Opposite halfedge of ``h = 3 f + k`` or -1 on the boundary.
    """

    def __init__(self, vertices, faces, period=None):
        self.vertices = _frozen(np.asarray(vertices, dtype=float))
        self.faces = _frozen(np.asarray(faces, dtype=np.int64))
        self.period = None if period is None else _frozen(np.asarray(period, dtype=float))
        self._build_connectivity()
        self._cache: dict = {}

    # ------------------------------------------------------------------ #
    # connectivity
    # ------------------------------------------------------------------ #
    def _build_connectivity(self):
        F = self.faces
        nv = len(self.vertices)
        tail = F.reshape(-1)
        head = np.roll(F, -1, axis=1).reshape(-1)
        lo = np.minimum(tail, head)
        hi = np.maximum(tail, head)
        keys = lo * nv + hi
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.edges = _frozen(np.stack([uniq // nv, uniq % nv], axis=1))
        self.face_edges = _frozen(inverse.reshape(-1, 3))
        self.face_edge_signs = _frozen(np.where(tail < head, 1, -1).reshape(-1, 3))

        counts = np.bincount(inverse, minlength=len(uniq))
        if np.any(counts > 2):
            raise NonManifold(f"{int(np.sum(counts > 2))} edges have 3 or more faces")

        order = np.argsort(inverse, kind="stable")
        first = np.full(len(uniq), -1, dtype=np.int64)
        second = np.full(len(uniq), -1, dtype=np.int64)
        sorted_edges = inverse[order]
        starts = np.searchsorted(sorted_edges, np.arange(len(uniq)))
        first[:] = order[starts]
        has2 = counts == 2
        second[has2] = order[starts[has2] + 1]
        twin = np.full(3 * len(F), -1, dtype=np.int64)
        twin[first[has2]] = second[has2]
        twin[second[has2]] = first[has2]
        self.he_twin = _frozen(twin)
        ef = np.stack([first // 3, np.where(second >= 0, second // 3, -1)], axis=1)
        self.edge_faces = _frozen(ef)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def is_intrinsic(self) -> bool:
        return self.period is not None

    def wrap(self, d: np.ndarray) -> np.ndarray:
        """Shortest representative of displacement(s) ``d`` modulo the period."""
        return d if self.period is None else _wrap(d, self.period)

    def displacement(self, i, j) -> np.ndarray:
        """Vector from vertex ``i`` to vertex ``j`` (broadcasts)."""
        return self.wrap(self.vertices[j] - self.vertices[i])

    def he_next(self, h):
        h = np.asarray(h)
        return 3 * (h // 3) + (h % 3 + 1) % 3

    def he_tail(self, h):
        h = np.asarray(h)
        return self.faces.reshape(-1)[h]

    def he_head(self, h):
        return self.he_tail(self.he_next(h))

    def boundary_edges(self) -> np.ndarray:
        return self.edge_faces[:, 1] < 0

    def is_closed(self) -> bool:
        return not bool(np.any(self.boundary_edges()))

    def boundary_vertices(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edges()].ravel()] = True
        return mask

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric vertex adjacency (1 on every edge)."""
        if "adj" not in self._cache:
            i, j = self.edges.T
            n = self.n_vertices
            A = sparse.coo_matrix(
                (np.ones(2 * len(i)), (np.r_[i, j], np.r_[j, i])), shape=(n, n)
            ).tocsr()
            self._cache["adj"] = A
        return self._cache["adj"]

    def vertex_face_incidence(self) -> sparse.csr_matrix:
        """(V, F) incidence with 1 where the vertex is a corner of the face."""
        if "vf" not in self._cache:
            F = self.faces
            rows = F.ravel()
            cols = np.repeat(np.arange(len(F)), 3)
            self._cache["vf"] = sparse.coo_matrix(
                (np.ones(len(rows)), (rows, cols)), shape=(self.n_vertices, len(F))
            ).tocsr()
        return self._cache["vf"]

    def ring(self, k: int = 1) -> sparse.csr_matrix:
        """Boolean (V, V) matrix of the k-ring neighbourhoods (excluding self)."""
        key = ("ring", k)
        if key not in self._cache:
            A = self.adjacency().astype(bool).astype(np.int64)
            R = A.copy()
            for _ in range(k - 1):
                R = (R + R @ A).astype(bool).astype(np.int64)
            R = R.tolil()
            R.setdiag(0)
            R = R.tocsr()
            R.eliminate_zeros()
            self._cache[key] = R
        return self._cache[key]

    # ------------------------------------------------------------------ #
    # geometry
    # ------------------------------------------------------------------ #
    def corners(self) -> np.ndarray:
        """(F, 3, 3) corner positions of every face, unwrapped per face."""
        if "corners" not in self._cache:
            c = self.vertices[self.faces]
            if self.period is not None:
                c = c.copy()
                c[:, 1:] = c[:, :1] + self.wrap(c[:, 1:] - c[:, :1])
            c.setflags(write=False)
            self._cache["corners"] = c
        return self._cache["corners"]

    def face_normals(self, unit: bool = True) -> np.ndarray:
        c = self.corners()
        n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        if unit:
            n = n / np.linalg.norm(n, axis=1, keepdims=True)
        return n

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(unit=False), axis=1)

    def edge_lengths(self) -> np.ndarray:
        """Per-edge length from face corners."""
        if "elen" not in self._cache:
            c = self.corners()
            d = np.linalg.norm(np.roll(c, -1, axis=1) - c, axis=2)  # (F, 3)
            lengths = np.empty(self.n_edges)
            lengths[self.face_edges.ravel()] = d.ravel()
            self._cache["elen"] = lengths
        return self._cache["elen"]

    def bbox_diagonal(self) -> float:
        pts = self.corners().reshape(-1, 3)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted unit vertex normals."""
        n = self.vertex_face_incidence() @ self.face_normals(unit=False)
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def signed_volume(self) -> float:
        c = self.vertices[self.faces]
        return float(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0)

    def hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.faces).tobytes())
        if self.period is not None:
            h.update(self.period.tobytes())
        return h.hexdigest()[:16]

    def with_vertices(self, vertices) -> "TriMesh":
        return TriMesh(vertices, self.faces, self.period)

    def flipped(self) -> "TriMesh":
        return TriMesh(self.vertices, self.faces[:, ::-1], self.period)

    def __repr__(self):
        return f"TriMesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces})"


def _orient(faces: np.ndarray, n_vertices: int) -> np.ndarray:
    """Flip faces so that every interior edge is traversed in opposite directions."""
    F = len(faces)
    tail = faces.reshape(-1)
    head = np.roll(faces, -1, axis=1).reshape(-1)
    keys = np.minimum(tail, head) * n_vertices + np.maximum(tail, head)
    _, inv = np.unique(keys, return_inverse=True)
    counts = np.bincount(inv)
    if np.any(counts > 2):
        raise NonManifold(f"{int(np.sum(counts > 2))} edges have 3 or more faces")
    direction = tail < head
    order = np.argsort(inv, kind="stable")
    starts = np.searchsorted(inv[order], np.arange(len(counts)))
    shared = np.flatnonzero(counts == 2)
    h1 = order[starts[shared]]
    h2 = order[starts[shared] + 1]
    f1, f2 = h1 // 3, h2 // 3
    # relative flip needed between f1 and f2
    rel = (direction[h1] == direction[h2]).astype(np.int8)
    if np.any(f1 == f2):
        raise NonOrientable("a face is glued to itself along an edge")
    G = sparse.coo_matrix(
        (np.ones(2 * len(f1)), (np.r_[f1, f2], np.r_[f2, f1])), shape=(F, F)
    ).tocsr()
    flip = np.zeros(F, dtype=np.int8)
    seen = np.zeros(F, dtype=bool)
    relmap = {}
    for a, b, r in zip(f1.tolist(), f2.tolist(), rel.tolist()):
        relmap[(a, b)] = r
        relmap[(b, a)] = r
    for root in range(F):
        if seen[root]:
            continue
        nodes, preds = csgraph.breadth_first_order(G, root, directed=False)
        seen[nodes] = True
        for node in nodes[1:]:
            flip[node] = flip[preds[node]] ^ relmap[(preds[node], node)]
    bad = (flip[f1] ^ flip[f2]) != rel
    if np.any(bad):
        raise NonOrientable("no consistent face orientation exists")
    out = faces.copy()
    out[flip == 1] = out[flip == 1][:, ::-1]
    return out


def build_mesh(positions, faces, period=None, area_tol: float = 1e-12) -> TriMesh:
    """Validate connectivity, repair orientation and build a :class:`TriMesh`.

    Parameters
    ----------
    positions : (V, 3) array_like
    faces : (F, 3) array_like of int
    period : 3-vector, optional
        Lattice periods for intrinsic (periodic planar) meshes; zero entries
        mean "not periodic along this axis".
    area_tol : float
        Faces with area below ``area_tol * bbox_diagonal**2`` are rejected.

    Raises
    ------
    NonManifold, NonOrientable, DegenerateFace, MeshError
    """
    V = np.asarray(positions, dtype=float)
    T = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if V.ndim != 2 or V.shape[1] not in (2, 3):
        raise MeshError("positions must be (V, 3)")
    if V.shape[1] == 2:
        V = np.column_stack([V, np.zeros(len(V))])
    if len(T) == 0:
        raise MeshError("mesh has no faces")
    if T.min() < 0 or T.max() >= len(V):
        raise MeshError("face index out of range")
    rep = (T[:, 0] == T[:, 1]) | (T[:, 1] == T[:, 2]) | (T[:, 0] == T[:, 2])
    if np.any(rep):
        raise DegenerateFace(f"face {int(np.flatnonzero(rep)[0])} repeats a vertex")

    C = V[T]
    if period is not None:
        C = C[:, :1] + _wrap(C - C[:, :1], np.asarray(period, dtype=float))
    area = 0.5 * np.linalg.norm(np.cross(C[:, 1] - C[:, 0], C[:, 2] - C[:, 0]), axis=1)
    pts = C.reshape(-1, 3)
    diag = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
    small = area <= area_tol * diag**2
    if np.any(small):
        raise DegenerateFace(f"face {int(np.flatnonzero(small)[0])} has (near) zero area")

    oriented = _orient(T, len(V))
    return TriMesh(V, oriented, period)


def topology_invariants(mesh: TriMesh) -> TopologySummary:
    """Counts, Euler characteristic, genus and number of boundary loops."""
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[mesh.faces.ravel()] = True
    V = int(used.sum())
    E, F = mesh.n_edges, mesh.n_faces
    chi = V - E + F
    ncomp, labels = csgraph.connected_components(mesh.adjacency(), directed=False)
    ncomp -= int(np.sum(~used))  # isolated vertices are not components
    bmask = mesh.boundary_edges()
    loops = 0
    if np.any(bmask):
        be = mesh.edges[bmask]
        n = mesh.n_vertices
        B = sparse.coo_matrix(
            (np.ones(2 * len(be)), (np.r_[be[:, 0], be[:, 1]], np.r_[be[:, 1], be[:, 0]])),
            shape=(n, n),
        )
        nb, lab = csgraph.connected_components(B, directed=False)
        loops = len(np.unique(lab[be[:, 0]]))
    genus = (2 * ncomp - chi - loops) // 2
    return TopologySummary(V, E, F, chi, int(genus), loops, ncomp)


def subdivide_midpoint(
    mesh: TriMesh, projector: Callable[[np.ndarray], np.ndarray] | None = None
) -> TriMesh:
    """Split every triangle into four at its edge midpoints.

    ``projector`` maps an (n, 3) array of new midpoint positions onto the
    target surface.
    """
    V, E = mesh.n_vertices, mesh.edges
    mids = mesh.vertices[E[:, 0]] + 0.5 * mesh.displacement(E[:, 0], E[:, 1])
    if mesh.period is not None:
        p = mesh.period
        mids = np.where(p > 0, np.mod(mids, np.where(p > 0, p, 1.0)), mids)
    if projector is not None:
        mids = np.asarray(projector(mids), dtype=float)
    positions = np.vstack([mesh.vertices, mids])
    fe = mesh.face_edges + V  # midpoint of halfedge k
    a, b, c = mesh.faces.T
    ab, bc, ca = fe.T
    faces = np.concatenate(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([b, bc, ab], axis=1),
            np.stack([c, ca, bc], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]
    )
    return TriMesh(positions, faces, mesh.period)
