"""First cohomology generators by tree-cotree decomposition, and periods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import Disconnected, NotClosed, OpenLoop
from .mesh import TriMesh, topology_invariants

__all__ = ["GeneratorSet", "tree_cotree_generators", "periods", "edge_lookup"]


def edge_lookup(mesh: TriMesh) -> sparse.csr_matrix:
    """(V, V) matrix holding ``edge index + 1`` at ``(i, j)`` and ``(j, i)``."""
    if "elookup" not in mesh._cache:
        i, j = mesh.edges.T
        ids = np.arange(1, mesh.n_edges + 1)
        n = mesh.n_vertices
        mesh._cache["elookup"] = sparse.csr_matrix(
            (np.r_[ids, ids], (np.r_[i, j], np.r_[j, i])), shape=(n, n)
        )
    return mesh._cache["elookup"]


@dataclass
class GeneratorSet:
    """Integer cocycles and primal cycles from one tree-cotree split.

    ``cocycles[k]`` is dual to the loop through ``leftover[k]``; the period
    matrix ``P[k, l] = periods(cocycles[l], [cycles[k]])`` is diagonal with
    entries +-1.
    """

    cocycles: list
    cycles: list
    leftover: np.ndarray
    tree_edges: np.ndarray
    cotree_edges: np.ndarray

    @property
    def count(self) -> int:
        return len(self.cocycles)

    def period_matrix(self, mesh: TriMesh, forms=None) -> np.ndarray:
        forms = self.cocycles if forms is None else forms
        return np.array([periods(mesh, w, self.cycles) for w in forms]).T.reshape(len(self.cycles), len(forms))

    def to_json_dict(self) -> dict:
        out = []
        for w in self.cocycles:
            nz = np.flatnonzero(w)
            out.append({"edges": nz.tolist(), "values": w[nz].astype(int).tolist()})
        return {"cocycles": out, "cycles": [list(map(int, c)) for c in self.cycles]}


def _tree_path(pred: np.ndarray, node: int) -> list:
    path = [node]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    return path


def _join(pa: list, pb: list):
    """Paths to the root from a and b, trimmed to their lowest common ancestor."""
    sa, sb = list(pa), list(pb)
    while len(sa) > 1 and len(sb) > 1 and sa[-2] == sb[-2]:
        sa.pop()
        sb.pop()
    return sa, sb


def tree_cotree_generators(mesh: TriMesh) -> GeneratorSet:
    """Cohomology generators of a closed connected mesh.

    A breadth-first spanning tree of the vertices (root 0) and a
    breadth-first spanning tree of the faces (root 0) across the remaining
    edges leave ``2 g`` edges.  Each leftover edge closes a dual loop of
    faces; the cocycle takes the value ``+-1`` on every edge that loop
    crosses, so ``d1 cocycle = 0`` exactly.

    Raises
    ------
    NotClosed, Disconnected
    """
    if not mesh.is_closed():
        raise NotClosed("tree-cotree generators need a closed mesh")
    topo = topology_invariants(mesh)
    if topo.components != 1:
        raise Disconnected(f"mesh has {topo.components} components")
    E = mesh.n_edges
    lookup = edge_lookup(mesh)

    _, vpred = csgraph.breadth_first_order(mesh.adjacency(), 0, directed=False)
    child = np.flatnonzero(vpred >= 0)
    tree = np.asarray(lookup[vpred[child], child]).ravel() - 1
    in_tree = np.zeros(E, dtype=bool)
    in_tree[tree] = True

    ef = mesh.edge_faces
    dual = np.flatnonzero(~in_tree)
    F = mesh.n_faces
    Dg = sparse.coo_matrix(
        (np.ones(2 * len(dual)), (np.r_[ef[dual, 0], ef[dual, 1]], np.r_[ef[dual, 1], ef[dual, 0]])),
        shape=(F, F),
    ).tocsr()
    _, fpred = csgraph.breadth_first_order(Dg, 0, directed=False)

    # primal edge crossed by each dual tree step (child face -> parent face)
    hmap = {}
    for e in dual.tolist():
        a, b = int(ef[e, 0]), int(ef[e, 1])
        hmap[(a, b)] = e
        hmap[(b, a)] = e
    fchild = np.flatnonzero(fpred >= 0)
    cotree = np.array([hmap[(int(c), int(fpred[c]))] for c in fchild], dtype=np.int64)
    in_cotree = np.zeros(E, dtype=bool)
    in_cotree[cotree] = True
    leftover = np.flatnonzero(~in_tree & ~in_cotree)

    # orientation of edge e as seen from face f: +1 if f runs along i -> j
    def orient(f: int, e: int) -> int:
        k = int(np.flatnonzero(mesh.face_edges[f] == e)[0])
        return int(mesh.face_edge_signs[f, k])

    cocycles, cycles = [], []
    for e in leftover.tolist():
        fa, fb = int(ef[e, 0]), int(ef[e, 1])
        pa, pb = _join(_tree_path(fpred, fa), _tree_path(fpred, fb))
        faces = pa + pb[-2::-1]  # fa ... lca ... fb
        w = np.zeros(E, dtype=np.int64)
        for p, q in zip(faces[:-1], faces[1:]):
            ed = hmap[(p, q)]
            w[ed] += orient(p, ed)
        w[e] += orient(fb, e)  # close the loop fb -> fa across e
        cocycles.append(w)

        i, j = (int(v) for v in mesh.edges[e])
        qa, qb = _join(_tree_path(vpred, i), _tree_path(vpred, j))
        loop = qa[::-1] + qb  # lca ... i, j ... lca
        cycles.append(np.array(loop, dtype=np.int64))
    return GeneratorSet(cocycles, cycles, leftover, tree, cotree)


def periods(mesh: TriMesh, omega, cycles) -> np.ndarray:
    """Signed sums of ``omega`` around closed vertex loops.

    Each loop lists vertices ``v0, v1, ..., vk`` with ``vk == v0``.

    Raises
    ------
    OpenLoop
        If a loop does not return to its start or steps along a non-edge.
    """
    lookup = edge_lookup(mesh)
    w = np.asarray(omega, dtype=float)
    out = []
    for loop in cycles:
        loop = np.asarray(loop, dtype=np.int64)
        if len(loop) < 2 or loop[0] != loop[-1]:
            raise OpenLoop("cycle does not return to its first vertex")
        a, b = loop[:-1], loop[1:]
        ids = np.asarray(lookup[a, b]).ravel() - 1
        if np.any(ids < 0):
            raise OpenLoop("cycle steps between non-adjacent vertices")
        sign = np.where(a < b, 1.0, -1.0)
        out.append(float(np.sum(sign * w[ids])))
    return np.array(out)
