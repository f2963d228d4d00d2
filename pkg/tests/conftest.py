import numpy as np
import pytest

from pmelab import DensityField, Potential, SolverConfig, build_mesh, run
from pmelab.spectral import estimate_poincare


def gaussian_bump_field(mesh, center=1.0, width=0.25, mass=1.0, floor=0.0):
    shape = np.exp(-0.5 * ((mesh.centers - center) / width) ** 2)
    values = floor + shape * (mass - floor) / mesh.integrate(shape)
    return DensityField(values)


@pytest.fixture(scope="session")
def gauss_mesh_256():
    return build_mesh(Potential("gaussian"), 8.0, 256)


@pytest.fixture(scope="session")
def gauss_mesh_512():
    return build_mesh(Potential("gaussian"), 8.0, 512)


@pytest.fixture(scope="session")
def flat_mesh_4():
    return build_mesh(Potential("flat"), 1.0, 4)


@pytest.fixture(scope="session")
def gauss_lambda_512(gauss_mesh_512):
    return estimate_poincare(gauss_mesh_512).lam


@pytest.fixture(scope="session")
def reference_run_512(gauss_mesh_512):
    """Unit-mass bump under the default normalization, T = 20, 41 snapshots."""
    mesh = gauss_mesh_512
    cfg = SolverConfig(beta=1.0)
    init = gaussian_bump_field(mesh)
    return run(init, mesh, cfg, T=20.0, output_times=np.linspace(0, 20, 41), p=2.0)
