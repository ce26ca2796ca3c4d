import json

import numpy as np
import pytest

from conformal_eit.dtn import Conductivities, concentric_dtn, dtn_perturbed_disk
from conformal_eit.errors import InvalidArgument
from conformal_eit.fourier import FourierSeries, sobolev_norm
from conformal_eit.geometry import DiskSpec, PerturbedDiskSpec
from conformal_eit.oracle import compare, fd_solve, interpolate


@pytest.fixture(scope="module")
def disk_solution():
    return fd_solve(DiskSpec(0, 0.5), Conductivities(1, 2), FourierSeries.cos(1), 128)


def test_grid_too_coarse(cond):
    with pytest.raises(InvalidArgument):
        fd_solve(DiskSpec(0, 0.5), cond, FourierSeries.cos(1), 32)


def test_inclusion_must_be_interior(cond):
    with pytest.raises(InvalidArgument):
        fd_solve(DiskSpec(0.5, 0.49), cond, FourierSeries.cos(1), 64)


def test_homogeneous_medium_is_exact():
    sol = fd_solve(DiskSpec(0, 0.5), Conductivities(1, 1), FourierSeries.cos(1), 128)
    assert compare(FourierSeries.cos(1), sol.neumann) < 1e-12


def test_concentric_error_frozen(disk_solution):
    ref = concentric_dtn(FourierSeries.cos(1), 0.5, Conductivities(1, 2))
    assert compare(disk_solution, ref) == pytest.approx(6.082187534165157e-4, rel=1e-6)
    assert disk_solution.residual < 1e-10


def test_maximum_principle(disk_solution):
    values = disk_solution.values[np.isfinite(disk_solution.values)]
    assert values.max() <= 1 + 1e-12
    assert values.min() >= -1 - 1e-12
    assert values.max() == pytest.approx(0.9842436855287001, rel=1e-10)


def test_interface_trace(disk_solution):
    # Exact trace on |z| = 0.5 is (1 - μ)ρ/(1 - μρ²) cos θ = (4/11) cos θ
    assert 2 * disk_solution.interface_trace[1].real == pytest.approx(4 / 11, abs=2e-3)


def test_interpolation_reproduces_cubics():
    h = 2.0 / 64
    x = np.linspace(-1, 1, 65)
    X, Y = np.meshgrid(x, x)
    U = X ** 3 - 2 * X * Y ** 2 + Y
    z = np.array([0.13 + 0.27j, -0.4 - 0.05j])
    np.testing.assert_allclose(interpolate(U, h, z), z.real ** 3 - 2 * z.real * z.imag ** 2 + z.imag,
                               atol=1e-12)


def test_dump(tmp_path, disk_solution):
    raw, side = disk_solution.dump(tmp_path / "u")
    meta = json.loads(side.read_text())
    data = np.fromfile(raw, dtype="<f8").reshape(meta["shape"])
    assert meta["shape"] == [129, 129]
    np.testing.assert_array_equal(np.isnan(data), np.isnan(disk_solution.values))
    assert np.isnan(data[0, 0])


@pytest.mark.slow
def test_second_order_convergence(cond):
    ref = concentric_dtn(FourierSeries.cos(1), 0.5, cond)
    errors = [compare(fd_solve(DiskSpec(0, 0.5), cond, FourierSeries.cos(1), n), ref) for n in (256, 512)]
    assert np.log2(errors[0] / errors[1]) >= 1.8


@pytest.mark.slow
def test_perturbed_disk_agrees_with_spectral(cond):
    incl = PerturbedDiskSpec(DiskSpec(0, 0.4), FourierSeries.cos(3), 0.02)
    spectral = dtn_perturbed_disk(incl, FourierSeries.cos(1), cond)
    sol = fd_solve(incl, cond, FourierSeries.cos(1), 256)
    assert compare(sol, spectral) / sobolev_norm(spectral.neumann, -0.5) < 2e-3
