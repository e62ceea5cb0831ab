import numpy as np
import pytest

from gaussharm.errors import FrameDegenerate
from gaussharm.geometry import (
    angle_defect_curvature, collar_mask, curvature_data, gaussian_weight, lstsq_batched,
    shrinker_residual, tangent_frames,
)
from gaussharm.shrinkers import disk_mesh, sphere_mesh


def test_sphere_principal_curvatures(sphere4):
    c = sphere4.cache
    assert np.max(np.abs(c.k1 - 0.5)) < 1e-4
    assert np.max(np.abs(c.k2 - 0.5)) < 1e-4
    assert np.allclose(c.A2, 0.5, atol=1e-4)
    assert np.allclose(c.H, 1.0, atol=2e-4)


def test_sphere_normals_point_outward(sphere4):
    n = sphere4.cache.normals
    assert np.all(np.einsum("ij,ij->i", n, sphere4.mesh.vertices) > 0)


def test_orientation_flip_invariance(sphere3):
    flipped = curvature_data(sphere3.mesh.flipped())
    assert np.allclose(flipped.H, sphere3.cache.H, atol=1e-12)


def test_gauss_equation_matches_angle_defect(sphere4):
    K = sphere4.cache.K
    Kd = angle_defect_curvature(sphere4.mesh)
    assert np.allclose(K, 0.25, atol=1e-4)
    assert np.mean(np.abs(Kd - 0.25)) < 5e-3


def test_disk_is_exact_shrinker(disk6):
    r = shrinker_residual(disk6.mesh, disk6.cache)
    assert np.nanmax(r) < 1e-8
    assert not disk6.cache.trusted[disk6.mesh.boundary_vertices()].any()


def test_unit_sphere_is_not_a_shrinker():
    m = sphere_mesh(3, radius=1.0)
    assert np.nanmax(shrinker_residual(m, curvature_data(m))) > 0.5


def test_position_split(sphere3):
    c = sphere3.cache
    assert np.allclose(c.xT + c.xN, sphere3.mesh.vertices)
    assert np.allclose(np.linalg.norm(c.xT, axis=1), 0, atol=1e-3)


def test_angenent_gate(angenent128, angenent64):
    s128 = np.nanmax(shrinker_residual(angenent128.mesh, angenent128.cache))
    s64 = np.nanmax(shrinker_residual(angenent64.mesh, angenent64.cache))
    assert s128 < 1e-2
    assert s128 < 0.8 * s64


def test_weight_and_frames(sphere3):
    assert np.allclose(gaussian_weight(sphere3.mesh), np.exp(-1.0))
    n = sphere3.cache.normals
    F = tangent_frames(n)
    G = np.einsum("vac,vbc->vab", F, F)
    assert np.allclose(G, np.eye(2), atol=1e-12)
    assert np.allclose(np.einsum("vac,vc->va", F, n), 0, atol=1e-12)


def test_collar_mask():
    m = disk_mesh(6, 8)
    c1, c2 = collar_mask(m, 1), collar_mask(m, 2)
    assert c1[m.boundary_vertices()].all()
    assert c2.sum() > c1.sum()


def test_rank_deficient_fit_raises():
    A = np.zeros((1, 4, 3))
    A[0, :, 0] = 1.0
    with pytest.raises(FrameDegenerate):
        lstsq_batched(A, np.ones((1, 4)), np.ones((1, 4), bool), "test")


def test_json_export(sphere3):
    d = sphere3.cache.to_json_dict()
    assert len(d["k1"]) == sphere3.mesh.n_vertices
    assert np.asarray(d["shape_operator"]).shape == (sphere3.mesh.n_vertices, 2, 2)
