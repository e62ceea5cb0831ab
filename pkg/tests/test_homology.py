import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussharm.dec import exterior_derivatives
from gaussharm.errors import Disconnected, NotClosed, OpenLoop
from gaussharm.homology import periods, tree_cotree_generators
from gaussharm.mesh import build_mesh
from gaussharm.shrinkers import disk_mesh, double_torus, flat_torus, sphere_mesh, torus_mesh

MESHES = {
    "sphere": (lambda: sphere_mesh(2), 0),
    "torus": (lambda: torus_mesh(m=8, n=10), 2),
    "flat": (lambda: flat_torus(6, 7)[0], 2),
    "double": (lambda: double_torus(), 4),
}


@pytest.mark.parametrize("key", sorted(MESHES))
def test_generator_count_and_closedness(key):
    build, count = MESHES[key]
    m = build()
    g = tree_cotree_generators(m)
    assert g.count == count
    _, d1 = exterior_derivatives(m)
    for w in g.cocycles:
        assert np.all(d1 @ w == 0)
        assert set(np.unique(w)) <= {-1, 0, 1}
    if count:
        P = g.period_matrix(m)
        assert np.allclose(np.abs(P), np.eye(count))


def test_disk_and_disconnected_rejected():
    with pytest.raises(NotClosed):
        tree_cotree_generators(disk_mesh(6, 6))
    a = sphere_mesh(0)
    V = np.vstack([a.vertices, a.vertices + 10])
    F = np.vstack([a.faces, a.faces + a.n_vertices])
    with pytest.raises(Disconnected):
        tree_cotree_generators(build_mesh(V, F))


def test_open_loop_rejected():
    m = torus_mesh(m=6, n=6)
    w = np.zeros(m.n_edges)
    with pytest.raises(OpenLoop):
        periods(m, w, [[0, 1, 2]])
    i, j = m.edges[0]
    far = int(np.setdiff1d(np.arange(m.n_vertices), m.adjacency()[i].indices)[1])
    with pytest.raises(OpenLoop):
        periods(m, w, [[i, far, i]])


def test_json_export():
    m = torus_mesh(m=6, n=6)
    g = tree_cotree_generators(m)
    d = json.loads(json.dumps(g.to_json_dict()))
    assert len(d["cocycles"]) == 2 and d["cycles"][0][0] == d["cycles"][0][-1]


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_periods_invariant_under_exact_forms(seed):
    m = double_torus()
    g = tree_cotree_generators(m)
    d0, _ = exterior_derivatives(m)
    f = np.random.default_rng(seed).standard_normal(m.n_vertices)
    for w in g.cocycles:
        a = periods(m, w, g.cycles)
        b = periods(m, w + d0 @ f, g.cycles)
        assert np.max(np.abs(a - b)) < 1e-12
