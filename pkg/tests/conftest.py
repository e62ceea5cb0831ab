import numpy as np
import pytest

from gaussharm.families import generate
from gaussharm.harness import HarnessConfig, Level, run_checks
from gaussharm.shrinkers import angenent_torus, disk_mesh, flat_torus, sphere_mesh

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, note = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {note}")


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE


@pytest.fixture(scope="session")
def sphere4():
    return Level(sphere_mesh(4))


@pytest.fixture(scope="session")
def sphere3():
    return Level(sphere_mesh(3))


@pytest.fixture(scope="session")
def disk6():
    return Level(disk_mesh(6.0, 24))


@pytest.fixture(scope="session")
def flat20():
    mesh, w = flat_torus(20, 20)
    return Level(mesh, w)


@pytest.fixture(scope="session")
def flat20_weighted():
    mesh, w = flat_torus(20, 20, weight=lambda u, v: 1 + 0.5 * np.sin(2 * np.pi * u))
    return Level(mesh, w)


@pytest.fixture(scope="session")
def angenent64():
    return Level(angenent_torus(64))


@pytest.fixture(scope="session")
def angenent128():
    return Level(angenent_torus(128))


@pytest.fixture(scope="session")
def angenent_report(angenent128, angenent64):
    mesh, prov = generate("angenent")
    assert mesh.hash() == angenent128.mesh.hash()
    return run_checks(mesh, HarnessConfig(seed=7), prov,
                      coarse_meshes=[(angenent64.mesh, None)])


@pytest.fixture(scope="session")
def sphere_report():
    mesh, prov = generate("sphere", level=4)
    return run_checks(mesh, HarnessConfig(seed=7), prov)
