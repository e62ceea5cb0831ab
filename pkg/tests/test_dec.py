import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from gaussharm.dec import (
    cotangents, export_coo, exterior_derivatives, face_vectors, one_form_to_vertex_field,
    weighted_codifferential, weighted_stars, weighted_stiffness,
)
from gaussharm.errors import NonPositiveWeight
from gaussharm.mesh import build_mesh
from gaussharm.operators import drift_apply
from gaussharm.shrinkers import flat_torus, sphere_mesh, torus_mesh


def _angle_cotan_stiffness(mesh):
    """Reference cotan stiffness assembled from corner angles."""
    V = mesh.n_vertices
    S = np.zeros((V, V))
    for f in range(mesh.n_faces):
        c = mesh.corners()[f]
        for k in range(3):
            a, b = (k + 1) % 3, (k + 2) % 3
            u, v = c[a] - c[k], c[b] - c[k]
            ang = np.arccos(np.dot(u, v) / np.linalg.norm(u) / np.linalg.norm(v))
            w = 0.5 / np.tan(ang)
            i, j = mesh.faces[f, a], mesh.faces[f, b]
            S[i, j] -= w
            S[j, i] -= w
            S[i, i] += w
            S[j, j] += w
    return S


@pytest.mark.parametrize("mesh", [sphere_mesh(1), torus_mesh(m=6, n=7), flat_torus(5, 6)[0]])
def test_d1_d0_vanishes(mesh):
    d0, d1 = exterior_derivatives(mesh)
    assert (d1 @ d0).count_nonzero() == 0


@pytest.mark.parametrize("mesh", [sphere_mesh(1), flat_torus(5, 6)[0]])
def test_unit_weight_reduces_to_cotan(mesh):
    st_ = weighted_stars(mesh, np.ones(mesh.n_vertices))
    d0, _ = exterior_derivatives(mesh)
    S = weighted_stiffness(st_, d0).toarray()
    assert np.max(np.abs(S - _angle_cotan_stiffness(mesh))) < 1e-12


def test_flat_torus_mass_is_area(flat20):
    assert abs(flat20.stars.m0.sum() - 1.0) < 1e-12


def test_sphere_weighted_area(sphere4):
    assert sphere4.stars.m0.sum() == pytest.approx(np.exp(-1) * 16 * np.pi, rel=0.01)


def test_nonpositive_weight_rejected():
    m = sphere_mesh(0)
    w = np.ones(m.n_vertices)
    w[3] = 0.0
    with pytest.raises(NonPositiveWeight):
        weighted_stars(m, w)


def test_obtuse_triangle_gives_negative_star():
    V = np.array([[0, 0, 0], [2, 0, 0], [1, 0.1, 0], [1, -1, 0]], float)
    m = build_mesh(V, [[0, 1, 2], [0, 3, 1]])
    st_ = weighted_stars(m, np.ones(4))
    assert st_.w1.min() < 0


def test_stiffness_kernel_contains_constants(sphere4):
    d0, _ = exterior_derivatives(sphere4.mesh)
    S = weighted_stiffness(sphere4.stars, d0)
    assert np.abs(S @ np.ones(sphere4.mesh.n_vertices)).max() < 1e-14 * abs(S).max()
    assert abs(S - S.T).max() == 0


def test_codifferential_of_exact_form_is_drift(sphere3):
    rng = np.random.default_rng(1)
    f = rng.standard_normal(sphere3.mesh.n_vertices)
    d0, _ = exterior_derivatives(sphere3.mesh)
    lhs = weighted_codifferential(d0 @ f, sphere3.stars, d0)
    assert np.allclose(lhs, drift_apply(sphere3.mesh, sphere3.stars, f), rtol=1e-12, atol=1e-12)
    assert np.all(weighted_codifferential(np.zeros(sphere3.mesh.n_edges), sphere3.stars, d0) == 0)


def test_flat_torus_coordinate_cochain(flat20):
    m = flat20.mesh
    d0, d1 = exterior_derivatives(m)
    du = np.array([m.displacement(i, j)[0] for i, j in m.edges])
    assert np.abs(d1 @ du).max() < 1e-15
    assert np.abs(weighted_codifferential(du, flat20.stars, d0)).max() < 1e-10
    W = one_form_to_vertex_field(m, du, np.tile([0, 0, 1.0], (m.n_vertices, 1)))
    assert np.allclose(W, [1, 0, 0], atol=1e-12)


def test_whitney_reconstruction_of_linear_field(sphere4):
    m, c = sphere4.mesh, sphere4.cache
    a = np.array([0.3, -0.2, 1.0])
    w = (m.vertices @ a)
    d0, _ = exterior_derivatives(m)
    W = one_form_to_vertex_field(m, d0 @ w, c.normals)
    ref = a - np.einsum("ij,j->i", c.normals, a)[:, None] * c.normals
    err = np.linalg.norm(W - ref, axis=1) / np.linalg.norm(a)
    assert err.max() < 0.01
    assert face_vectors(m, d0 @ w).shape == (m.n_faces, 3)


def test_cotangents_of_equilateral():
    V = np.array([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0]])
    m = build_mesh(V, [[0, 1, 2]])
    assert np.allclose(cotangents(m), 1 / np.sqrt(3))


def test_export_coo(tmp_path):
    p = tmp_path / "m.txt"
    export_coo(sparse.eye(3) * 2.5, p)
    rows = np.loadtxt(p)
    assert rows.shape == (3, 3) and np.all(rows[:, 2] == 2.5)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_weighted_adjointness(seed, sphere3):
    rng = np.random.default_rng(seed)
    m, s = sphere3.mesh, sphere3.stars
    f, g = rng.standard_normal((2, m.n_vertices))
    d0, _ = exterior_derivatives(m)
    a = f @ (s.m0 * drift_apply(m, s, g))
    b = g @ (s.m0 * drift_apply(m, s, f))
    c = -(d0 @ f) @ (s.w1 * (d0 @ g))
    scale = abs(c) + 1e-300
    assert abs(a - c) <= 1e-12 * scale and abs(a - b) <= 1e-12 * scale


@settings(max_examples=25, deadline=None)
@given(lam=st.lists(st.floats(0.1, 10.0), min_size=12, max_size=12))
def test_stiffness_psd_for_positive_stars(lam):
    m = sphere_mesh(0)
    s = weighted_stars(m, np.array(lam))
    d0, _ = exterior_derivatives(m)
    S = weighted_stiffness(s, d0).toarray()
    assert np.linalg.eigvalsh(S).min() >= -1e-10 * np.abs(S).max()
