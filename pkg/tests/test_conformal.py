import numpy as np
import pytest

from conformal_eit.conformal import (
    annulus_conjugation,
    compose_maps,
    first_order_interior,
    garrick_solve,
    interface_map,
    invert_circle_map,
    theodorsen_solve,
)
from conformal_eit.errors import InvalidArgument, PreconditionFailure
from conformal_eit.fourier import CircleMap, FourierSeries, hilbert_transform, nodes
from conformal_eit.geometry import DiskSpec, PerturbedDiskSpec
from conformal_eit.identify import loglog_fit


def unit_perturbation(eps, k=1):
    return PerturbedDiskSpec(DiskSpec(0, 1.0), FourierSeries.cos(k), eps)


def test_theodorsen_circle_is_identity():
    phi = theodorsen_solve(PerturbedDiskSpec.disk(0.7))
    assert phi.sup_displacement() < 1e-14


def test_theodorsen_first_order():
    phi = theodorsen_solve(unit_perturbation(0.05))
    t = np.linspace(0, 2 * np.pi, 400)
    gap = np.max(np.abs(phi(t) - (t - 0.05 * np.sin(t))))
    assert gap == pytest.approx(6.552434983975175e-4, rel=1e-6)


def test_theodorsen_residual_is_small():
    spec = unit_perturbation(0.05, 3)
    phi = theodorsen_solve(spec, tol=1e-12)
    t = nodes(512)
    update = hilbert_transform(FourierSeries.from_function(lambda s: np.log(spec.polar_radius(phi(s))), 64))
    assert np.max(np.abs(phi(t) - t - np.real(update(t)))) < 1e-10


def test_theodorsen_rejects_delta_condition():
    # r = 1 - 0.2 cos 8θ has sup|r'/r| = 2
    with pytest.raises(PreconditionFailure):
        theodorsen_solve(PerturbedDiskSpec(DiskSpec(0, 1.0), FourierSeries.cos(8), 0.2))


def test_theodorsen_gap_is_second_order():
    eps = np.array([0.01, 0.02, 0.04])
    t = np.linspace(0, 2 * np.pi, 400)
    gaps = [np.max(np.abs(theodorsen_solve(unit_perturbation(e))(t) - (t - e * np.sin(t)))) for e in eps]
    slope, _, _ = loglog_fit(eps, gaps)
    assert slope >= 1.9


def test_first_order_interior_matches_formula():
    m = first_order_interior(unit_perturbation(0.05))
    assert m.displacement.allclose(-0.05 * FourierSeries.sin(1), atol=1e-15)


def test_garrick_circle():
    res = garrick_solve(PerturbedDiskSpec.disk(0.5))
    assert res.rho == pytest.approx(0.5, abs=1e-12)
    assert res.inner_map.sup_displacement() < 1e-10
    assert res.outer_map.sup_displacement() < 1e-10


def test_garrick_perturbed_values():
    res = garrick_solve(PerturbedDiskSpec(DiskSpec(0, 0.5), FourierSeries.cos(3), 0.05))
    assert res.rho == pytest.approx(0.5063506929179463, rel=1e-9)
    assert res.inner_map.sup_displacement() == pytest.approx(0.10050115388406143, rel=1e-7)
    assert res.outer_map.sup_displacement() == pytest.approx(0.02531635010605674, rel=1e-7)


def test_garrick_normalization():
    res = garrick_solve(PerturbedDiskSpec(DiskSpec(0, 0.4), FourierSeries.cos(2), 0.03))
    assert abs(res.inner_map.displacement.mean) < 1e-12
    assert abs(res.outer_map.displacement.mean) < 1e-12


def test_garrick_requires_inner_inside():
    with pytest.raises((PreconditionFailure, InvalidArgument)):
        garrick_solve(PerturbedDiskSpec(DiskSpec(0, 0.98), FourierSeries.cos(1), 0.05))


@pytest.mark.parametrize("kind, rho, series, mode, gain", [
    ("H", 0.0, FourierSeries.cos(1), 1, -0.5j),
    ("H", 0.5, FourierSeries.cos(1), 1, -0.5j * 5 / 3),
    ("K", 0.5, FourierSeries.cos(2), 2, -0.5j * 8 / 15),
    ("K", 0.0, FourierSeries.cos(2), 2, 0.0),
])
def test_annulus_conjugation_multipliers(kind, rho, series, mode, gain):
    out = annulus_conjugation(series, rho, kind)
    assert out[mode] == pytest.approx(gain, abs=1e-15)
    assert out.is_real()


def test_annulus_conjugation_parity():
    even = FourierSeries.cos(1) + FourierSeries.cos(3) + FourierSeries.constant(2.0, 3)
    out = annulus_conjugation(even, 0.3, "H")
    t = np.linspace(0.1, 3, 9)
    np.testing.assert_allclose(np.real(out(-t)), -np.real(out(t)), atol=1e-14)
    assert abs(out.mean) == 0


def test_annulus_conjugation_rejects_rho():
    with pytest.raises(InvalidArgument):
        annulus_conjugation(FourierSeries.cos(1), 1.0, "H")


@pytest.mark.parametrize("circle_map", [
    CircleMap.identity(),
    CircleMap(0.1 * FourierSeries.sin(1)),
    CircleMap(0.2 * FourierSeries.cos(2) + 0.05 * FourierSeries.sin(5)),
])
def test_inverse_roundtrip(circle_map):
    inv = invert_circle_map(circle_map)
    t = nodes(256)
    np.testing.assert_allclose(inv(circle_map(t)), t, atol=1e-10)
    np.testing.assert_allclose(circle_map(inv(t)), t, atol=1e-10)
    np.testing.assert_allclose(inv.derivative(t), 1 / circle_map.derivative(inv(t)), atol=1e-9)


def test_inverse_of_rotation():
    inv = invert_circle_map(CircleMap.rotation(0.4))
    np.testing.assert_allclose(inv(nodes(8)), nodes(8) - 0.4, atol=1e-12)


def test_compose_maps():
    a = CircleMap(0.1 * FourierSeries.sin(1))
    b = CircleMap.rotation(0.3)
    t = nodes(32)
    np.testing.assert_allclose(compose_maps(a, b)(t), a(b(t)), atol=1e-12)


def test_interface_map_circle():
    xi, rho, psi = interface_map(PerturbedDiskSpec.disk(0.5))
    assert rho == pytest.approx(0.5, abs=1e-12)
    assert xi.sup_displacement() < 1e-10
    assert psi.sup_displacement() < 1e-10


@pytest.mark.parametrize("eps, ratio, rho", [
    (0.001, 12.252996208743427, 0.5000025952152605),
    (0.005, 12.507542604536903, 0.5000648666859545),
    (0.02, 13.530871564408242, 0.5010344641468722),
    (0.05, 15.973177673134028, 0.5063506929179463),
])
def test_interface_map_scaling(eps, ratio, rho):
    im = interface_map(PerturbedDiskSpec(DiskSpec(0, 0.5), FourierSeries.cos(3), eps))
    assert im.xi.w1inf_distance() / eps == pytest.approx(ratio, rel=1e-6)
    assert im.rho == pytest.approx(rho, rel=1e-9)
    assert np.min(im.xi.derivative(nodes(4096))) > 0
