import numpy as np
import pytest

from conformal_eit.conformal import interface_map
from conformal_eit.dtn import (
    Conductivities,
    InterfaceSystem,
    annulus_solution,
    concentric_dtn,
    concentric_multiplier,
    dtn_error_norm,
    dtn_perturbed_disk,
    interface_operator,
    interface_rhs,
    perturbation_norm,
    solve_interface,
    transplanted_dtn,
)
from conformal_eit.errors import InvalidArgument, PreconditionFailure
from conformal_eit.fourier import CircleMap, FourierSeries, nodes
from conformal_eit.geometry import PerturbedDiskSpec
from conformal_eit.identify import loglog_fit


def test_conductivity_contrast(cond):
    assert cond.mu == pytest.approx(1 / 3)
    assert cond.kappa == pytest.approx(0.5)
    back = Conductivities.from_mu(1 / 3)
    assert back.sigma2 == pytest.approx(2.0)


@pytest.mark.parametrize("sigma1, sigma2", [(0, 1), (1, -2)])
def test_conductivity_rejects_non_positive(sigma1, sigma2):
    with pytest.raises(InvalidArgument):
        Conductivities(sigma1, sigma2)


@pytest.mark.parametrize("n, expected", [
    (0, 0.0),
    (1, 13 / 11),
    (2, 2.0851063829787235),
    (-3, 3.031413612565445),
])
def test_concentric_multiplier(cond, n, expected):
    assert concentric_multiplier(n, 0.5, cond) == pytest.approx(expected, rel=1e-14)


def test_concentric_multiplier_without_inclusion(cond):
    np.testing.assert_allclose(concentric_multiplier(np.arange(-4, 5), 0.0, cond), np.abs(np.arange(-4, 5)))


def test_concentric_dtn_cos(cond):
    g = concentric_dtn(FourierSeries.cos(1), 0.5, cond).neumann
    assert g[1] == pytest.approx(13 / 22, abs=1e-15)
    assert g[0] == 0


@pytest.mark.parametrize("radius", [-0.1, 1.0])
def test_concentric_dtn_radius(cond, radius):
    with pytest.raises(InvalidArgument):
        concentric_dtn(FourierSeries.cos(1), radius, cond)


def test_annulus_solution_boundary_values():
    Fe = FourierSeries.cos(2) + FourierSeries.constant(0.5, 2)
    h = FourierSeries.sin(1) - FourierSeries.constant(0.2, 1)
    t = nodes(16)
    eps = 1e-9
    np.testing.assert_allclose(annulus_solution(Fe, h, 0.4, 1 - eps, t), np.real(Fe(t)), atol=1e-7)
    np.testing.assert_allclose(annulus_solution(Fe, h, 0.4, 0.4 + eps, t), np.real(h(t)), atol=1e-7)


def test_annulus_solution_is_harmonic():
    Fe = FourierSeries.cos(3)
    h = FourierSeries.sin(2)
    r, t, d = 0.7, 0.9, 1e-3
    u = lambda rr, tt: annulus_solution(Fe, h, 0.4, rr, tt)
    lap = ((u(r + d, t) - 2 * u(r, t) + u(r - d, t)) / d ** 2
           + (u(r + d, t) - u(r - d, t)) / (2 * d * r)
           + (u(r, t + d) - 2 * u(r, t) + u(r, t - d)) / (d * r) ** 2)
    assert abs(lap) < 1e-5


def test_annulus_solution_domain():
    with pytest.raises(InvalidArgument):
        annulus_solution(FourierSeries.cos(1), FourierSeries.cos(1), 0.4, 0.3, 0.0)


def test_identity_interface_has_closed_form_solution(cond):
    rho = 0.4
    Fe = FourierSeries.cos(1) + 0.3 * FourierSeries.sin(3)
    trace = solve_interface(Fe, rho, CircleMap.identity(), cond, degree=16)
    n = np.abs(Fe.modes)
    closed = (1 - cond.mu) * rho ** n * Fe.coeffs / (1 - cond.mu * rho ** (2 * n))
    assert trace.h.resize(Fe.degree).allclose(FourierSeries(closed), atol=1e-12)
    assert trace.contraction < 1e-12


def test_identity_transplant_is_concentric(cond):
    rho = 0.4
    Fe = FourierSeries.cos(2)
    h = solve_interface(Fe, rho, CircleMap.identity(), cond, degree=16).h
    g = transplanted_dtn(Fe, h, rho, cond).neumann
    ref = concentric_dtn(Fe, rho, cond).neumann
    assert g.resize(2).allclose(ref, atol=1e-13)


def test_operator_at_identity_is_diagonal(cond):
    h = FourierSeries.cos(2) + FourierSeries.sin(5)
    a = interface_operator(h, 0.4, CircleMap.identity(), cond, "T_xi")
    b = interface_operator(h, 0.4, CircleMap.identity(), cond, "T")
    assert a.resize(5).allclose(b, atol=1e-13)
    with pytest.raises(InvalidArgument):
        interface_operator(h, 0.4, CircleMap.identity(), cond, "S")


def test_interface_rhs_rejects_rho(cond):
    with pytest.raises(InvalidArgument):
        interface_rhs(FourierSeries.cos(1), 1.2, CircleMap.identity(), cond)


def test_composed_splitting_contracts_where_diagonal_fails(cond, cos3_inclusion):
    geo = interface_map(cos3_inclusion(0.016))
    system = InterfaceSystem(geo.rho, geo.xi, cond, 64)
    assert system.contraction("composed") == pytest.approx(0.04747741358899444, rel=1e-6)
    assert system.contraction("diagonal") == pytest.approx(1.9742408103841829, rel=1e-6)
    with pytest.raises(PreconditionFailure):
        solve_interface(FourierSeries.cos(1), geo.rho, geo.xi, cond, degree=64, splitting="diagonal")


def test_perturbation_norm_frozen(cond, cos3_inclusion):
    geo = interface_map(cos3_inclusion(0.016))
    assert perturbation_norm(geo.rho, geo.xi, cond) == pytest.approx(0.13969474524457023, rel=1e-6)


def test_unperturbed_pipeline_collapses(cond):
    r = dtn_perturbed_disk(PerturbedDiskSpec.disk(0.4), FourierSeries.cos(1), cond)
    ref = concentric_dtn(FourierSeries.cos(1), 0.4, cond).neumann
    assert r.neumann.resize(1).allclose(ref, atol=1e-13)
    assert r.rho == pytest.approx(0.4, abs=1e-12)


def test_perturbed_pipeline_frozen(cond, cos3_inclusion):
    r = dtn_perturbed_disk(cos3_inclusion(0.016), FourierSeries.cos(1), cond)
    assert r.rho == pytest.approx(0.4008049739114579, rel=1e-10)
    assert r.neumann[1] == pytest.approx(0.556406936249918, abs=1e-10)
    assert abs(r.neumann.mean) < 1e-10
    assert r.meta["xi_w1inf"] == pytest.approx(0.2670173472549666, rel=1e-6)
    assert r.meta["interface_residual"] < 1e-12


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_invisible_inclusion(mode, cos3_inclusion):
    f = FourierSeries.cos(mode)
    r = dtn_perturbed_disk(cos3_inclusion(0.02), f, Conductivities(1.5, 1.5))
    assert r.neumann.resize(mode).allclose(1.5 * mode * f, atol=1e-11)


def test_error_is_linear_in_eps(cond, cos3_inclusion):
    eps = [0.004, 0.008, 0.016, 0.032]
    errors = [dtn_error_norm(cos3_inclusion(e), FourierSeries.cos(1), cond) for e in eps]
    np.testing.assert_allclose(errors, [1.827e-4, 3.660e-4, 7.360e-4, 1.503e-3], rtol=2e-3)
    slope, _, r2 = loglog_fit(eps, errors)
    assert 0.8 <= slope <= 1.5
    assert r2 >= 0.98
