import numpy as np
import pytest

from gaussharm.errors import NoSignChange, SelfIntersection, StepFailure
from gaussharm.geometry import curvature_data, shrinker_residual
from gaussharm.mesh import topology_invariants
from gaussharm.shrinkers import (
    ProfileCurve, angenent_profile, angenent_torus, circle_profile, cylinder_mesh, disk_mesh,
    flat_torus, profile_rhs, revolve_profile, shoot_profile, sphere_mesh,
)

# shooting parameter recorded by the bisection oracle (RK4, step 1e-3, tol 1e-10)
ANGENENT_R0 = 0.4371239671192597


@pytest.fixture(scope="module")
def profile():
    return angenent_profile()


def test_profile_converges(profile):
    assert abs(profile.closure_error) < 1e-8
    assert 0 < profile.shooting_parameter < 2
    assert profile.shooting_parameter == pytest.approx(ANGENENT_R0, abs=1e-8)


def test_profile_positive_and_symmetric(profile):
    assert np.all(profile.r > 0)
    pts = profile.points
    mirrored = np.column_stack([-pts[:, 0], pts[:, 1]])
    d = np.min(np.linalg.norm(mirrored[:, None] - pts[None], axis=2), axis=1)
    assert d.max() < 1e-6


def test_profile_save_load(tmp_path, profile):
    p = tmp_path / "profile.txt"
    profile.save(p)
    back = ProfileCurve.load(p)
    assert np.allclose(back.points, profile.points, atol=0, rtol=1e-15)


@pytest.mark.parametrize("x", [-1.0, 0.0, 2.5])
def test_cylinder_profile_is_a_fixed_line(x):
    dx, dr, dth = profile_rhs(x, np.sqrt(2.0), 0.0)
    assert (dx, dr) == (1.0, 0.0)
    assert abs(dth) < 1e-15


def test_shooting_failures():
    with pytest.raises(NoSignChange):
        angenent_profile(r0_bracket=(0.6, 0.7))
    with pytest.raises(StepFailure):
        shoot_profile(1e-7)


def test_revolve_rejects_axis_crossing():
    bad = ProfileCurve(np.array([[0.0, 1.0], [1.0, -0.1], [0.0, 2.0]]), 0.0, 0.0, 4.0)
    with pytest.raises(SelfIntersection):
        revolve_profile(bad, 8)


def test_revolved_torus_topology(profile):
    m = revolve_profile(profile, 32)
    t = topology_invariants(m)
    assert (t.chi, t.genus) == (0, 1)
    assert m.n_vertices == len(profile.points) * 32


def test_circle_profile_gives_torus():
    assert topology_invariants(revolve_profile(circle_profile(), 12)).genus == 1


def test_generators_deterministic():
    assert angenent_torus(32).hash() == angenent_torus(32).hash()
    assert disk_mesh(6, 8).hash() == disk_mesh(6, 8).hash()


def test_disk_boundary_weight():
    m = disk_mesh(6.0, 24)
    r = np.linalg.norm(m.vertices[m.boundary_vertices()], axis=1)
    assert np.allclose(r, 6.0)
    assert np.exp(-36 / 4) == pytest.approx(1.234e-4, rel=1e-3)


def _sup(mesh):
    return float(np.nanmax(shrinker_residual(mesh, curvature_data(mesh))))


def test_shrinker_residual_decreases_with_refinement():
    s = [_sup(sphere_mesh(k)) for k in (2, 3, 4)]
    assert s[2] < 1e-2 and s[1] < 0.8 * s[0] and s[2] < 0.8 * s[1]
    c = [_sup(cylinder_mesh(4.0, n)) for n in (16, 32, 64)]
    assert c[2] < 1e-2 and c[1] < 0.8 * c[0] and c[2] < 0.8 * c[1]


def test_cylinder_curvatures():
    m = cylinder_mesh(4.0, 64)
    c = curvature_data(m)
    t = c.trusted
    assert np.allclose(c.k1[t], 1 / np.sqrt(2), atol=1e-3)
    assert np.allclose(c.k2[t], 0.0, atol=1e-3)


def test_flat_torus_weight_options():
    _, w = flat_torus(4, 4)
    assert np.all(w == 1)
    _, w = flat_torus(4, 4, weight=np.arange(16.0) + 1)
    assert w[3] == 4
    with pytest.raises(ValueError):
        flat_torus(2, 4)
