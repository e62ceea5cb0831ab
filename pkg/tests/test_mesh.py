import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussharm.errors import DegenerateFace, MeshError, NonManifold, NonOrientable
from gaussharm.mesh import build_mesh, subdivide_midpoint, topology_invariants
from gaussharm.meshio import read_mesh, read_provenance, write_mesh
from gaussharm.shrinkers import (
    cylinder_mesh, disk_mesh, double_torus, flat_torus, icosahedron, sphere_mesh, torus_mesh,
)

TETRA_V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], float)
TETRA_F = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]


def test_tetrahedron_euler_characteristic():
    t = topology_invariants(build_mesh(TETRA_V, TETRA_F))
    assert (t.V, t.E, t.F, t.chi, t.genus, t.boundary_loops) == (4, 6, 4, 2, 0, 0)


def test_inconsistent_orientation_is_repaired():
    faces = [[0, 2, 1], [0, 3, 1], [0, 3, 2], [1, 2, 3]]
    m = build_mesh(TETRA_V, faces)
    assert m.signed_volume() != 0
    # every interior edge is traversed once in each direction
    assert np.all(m.face_edge_signs.sum() == 0)


@pytest.mark.parametrize(
    "faces, err",
    [
        ([[0, 1, 1]], DegenerateFace),
        ([[0, 1, 9]], MeshError),
        ([[0, 1, 2], [0, 1, 3], [0, 1, 4]], NonManifold),
    ],
)
def test_invalid_meshes_rejected(faces, err):
    V = np.random.default_rng(0).standard_normal((6, 3))
    with pytest.raises(err):
        build_mesh(V, faces)


def test_zero_area_face_rejected():
    V = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], float)
    with pytest.raises(DegenerateFace):
        build_mesh(V, [[0, 1, 2]])


def test_moebius_strip_is_non_orientable():
    n = 8
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    V = []
    for a in ang:
        for s in (-0.3, 0.3):
            V.append([(1 + s * np.cos(a / 2)) * np.cos(a), (1 + s * np.cos(a / 2)) * np.sin(a), s * np.sin(a / 2)])
    V = np.array(V)
    F = []
    for k in range(n):
        a0, a1 = 2 * k, 2 * k + 1
        if k < n - 1:
            b0, b1 = 2 * k + 2, 2 * k + 3
        else:
            b0, b1 = 1, 0  # half twist
        F += [[a0, b0, a1], [a1, b0, b1]]
    with pytest.raises(NonOrientable):
        build_mesh(V, F)


@pytest.mark.parametrize(
    "builder, chi, genus, loops",
    [
        (lambda: icosahedron(), 2, 0, 0),
        (lambda: sphere_mesh(2), 2, 0, 0),
        (lambda: disk_mesh(6.0, 8), 1, 0, 1),
        (lambda: cylinder_mesh(4.0, 16), 0, 0, 2),
        (lambda: torus_mesh(), 0, 1, 0),
        (lambda: flat_torus(5, 7)[0], 0, 1, 0),
        (lambda: double_torus(), -2, 2, 0),
    ],
)
def test_topology_of_generated_meshes(builder, chi, genus, loops):
    t = topology_invariants(builder())
    assert (t.chi, t.genus, t.boundary_loops, t.components) == (chi, genus, loops, 1)


def test_sphere_vertex_counts():
    assert sphere_mesh(0).n_vertices == 12
    assert sphere_mesh(4).n_vertices == 2562
    assert np.allclose(np.linalg.norm(sphere_mesh(0).vertices, axis=1), 2.0)


def test_subdivision_quadruples_faces_and_keeps_topology():
    m = torus_mesh(m=6, n=6)
    s = subdivide_midpoint(m)
    assert s.n_faces == 4 * m.n_faces
    assert topology_invariants(s).genus == 1


def test_periodic_subdivision_wraps():
    m, _ = flat_torus(4, 4)
    s = subdivide_midpoint(m)
    assert s.n_vertices == 4 * 16
    assert np.all((s.vertices[:, :2] >= 0) & (s.vertices[:, :2] < 1))
    assert np.isclose(s.face_areas().sum(), 1.0)


def test_hash_is_deterministic_and_sensitive():
    a, b = sphere_mesh(2), sphere_mesh(2)
    assert a.hash() == b.hash()
    assert a.hash() != a.with_vertices(a.vertices * 1.0000001).hash()


@pytest.mark.parametrize("suffix", [".off", ".obj"])
def test_io_roundtrip_preserves_hash_and_provenance(tmp_path, suffix):
    m, _ = flat_torus(6, 5)
    path = tmp_path / f"m{suffix}"
    prov = {"generator": "flat-torus", "params": {"m": 6, "n": 5}}
    write_mesh(m, path, prov)
    back = read_mesh(path)
    assert back.hash() == m.hash()
    assert read_provenance(path) == prov


def test_unknown_format(tmp_path):
    with pytest.raises(MeshError):
        read_mesh(tmp_path / "x.stl")


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_topology_invariant_under_relabelling(seed):
    rng = np.random.default_rng(seed)
    m = torus_mesh(m=6, n=7)
    perm = rng.permutation(m.n_vertices)
    inv = np.argsort(perm)
    faces = inv[m.faces][rng.permutation(m.n_faces)]
    r = build_mesh(m.vertices[perm], faces)
    t0, t1 = topology_invariants(m), topology_invariants(r)
    assert t0.as_dict() == t1.as_dict()
    assert np.isclose(r.face_areas().sum(), m.face_areas().sum())
