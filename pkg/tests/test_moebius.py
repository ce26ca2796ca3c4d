import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conformal_eit.dtn import Conductivities, concentric_dtn
from conformal_eit.errors import InvalidArgument
from conformal_eit.fourier import FourierSeries, compose, nodes, sobolev_norm
from conformal_eit.geometry import DiskSpec
from conformal_eit.moebius import MoebiusMap, transplant_dtn

inside = st.tuples(st.floats(0, 0.6), st.floats(0, 2 * np.pi)).map(lambda p: p[0] * np.exp(1j * p[1]))


def concentric(radius, cond):
    return lambda f: concentric_dtn(f, radius, cond).neumann


def test_rejects_b_outside_disk():
    with pytest.raises(InvalidArgument):
        MoebiusMap(1.0)


def test_forward_examples():
    assert MoebiusMap(0).forward(0.3 + 0.2j) == pytest.approx(0.3 + 0.2j)
    m = MoebiusMap(0.3)
    assert m.forward(1) == pytest.approx(1.0)
    w = m.forward(1j)
    assert w == pytest.approx((-0.6 + 0.91j) / 1.09, abs=1e-15)
    assert abs(w) == pytest.approx(1.0, abs=1e-15)
    assert np.angle(w) == pytest.approx(2.153709915750631, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(inside, st.floats(0, 2 * np.pi), st.floats(0, 1))
def test_forward_maps_disk_to_disk(b, t, r):
    m = MoebiusMap(b)
    z = r * np.exp(1j * t)
    assert abs(m.forward(z)) <= 1 + 1e-12
    assert m.inverse(m.forward(z)) == pytest.approx(z, abs=1e-12)


def test_boundary_phase_values():
    phase = MoebiusMap(0.3).boundary_phase()
    assert phase(0.0) == pytest.approx(0.0, abs=1e-14)
    assert phase(np.pi / 2) == pytest.approx(2.153709915750631, abs=1e-12)
    assert phase.min_derivative() > 0
    assert MoebiusMap(0).boundary_phase().sup_displacement() == 0.0


@pytest.mark.parametrize("b", [0.3, 0.2 + 0.3j, -0.5j])
def test_phase_and_inverse_compose_to_identity(b):
    m = MoebiusMap(b)
    t = nodes(64)
    np.testing.assert_allclose(m.inverse_phase()(m.boundary_phase()(t)), t, atol=1e-10)


@pytest.mark.parametrize("theta, expected", [(0.0, 0.91 / 0.49), (np.pi, 0.91 / 1.69)])
def test_radial_derivative_factor(theta, expected):
    assert MoebiusMap(0.3).radial_derivative_factor(theta) == pytest.approx(expected, rel=1e-14)


def test_radial_derivative_factor_matches_finite_difference():
    m = MoebiusMap(0.2 + 0.1j)
    t = np.linspace(0, 6, 7)
    h = 1e-6
    fd = (np.abs(m.forward(np.exp(1j * t))) - np.abs(m.forward((1 - h) * np.exp(1j * t)))) / h
    np.testing.assert_allclose(m.radial_derivative_factor(t), fd, rtol=1e-5)


@pytest.mark.parametrize("kind, k, expected", [
    ("cos", 0, 0.3),
    ("cos", 1, 0.455),
    ("cos", 2, -0.1365),
    ("exp1", 0, 0.3),
    ("exp1", 1, 0.91),
    ("exp1", 2, -0.273),
    ("exp1", -1, 0.0),
    ("exp2", 0, 0.09),
    ("exp2", 2, 0.6643),
])
def test_pullback_coefficients_frozen(kind, k, expected):
    assert MoebiusMap(0.3).pullback_coefficient(kind, k) == pytest.approx(expected, abs=1e-14)


def test_pullback_identity_map():
    m = MoebiusMap(0)
    assert [m.pullback_coefficient("exp2", k) for k in range(-2, 4)] == [0, 0, 0, 0, 1, 0]


@pytest.mark.parametrize("kind, f", [
    ("cos", FourierSeries.cos(1)),
    ("exp1", FourierSeries.from_modes({1: 1})),
    ("exp2", FourierSeries.from_modes({2: 1})),
])
@pytest.mark.parametrize("b", [0.3, 0.2 + 0.3j, -0.4 + 0.1j])
def test_pullback_matches_fft(kind, f, b):
    m = MoebiusMap(b)
    numeric = compose(f, m.inverse_phase(), degree=48)
    err = max(abs(numeric[k] - m.pullback_coefficient(kind, k)) for k in range(-32, 33))
    assert err < 1e-10


def test_pullback_unknown_kind():
    with pytest.raises(InvalidArgument):
        MoebiusMap(0.1).pullback_coefficient("tan", 1)


@pytest.mark.parametrize("b", [0.5j, 0.3 - 0.2j, -0.45])
def test_phase_preserves_half_norm(b):
    f = FourierSeries.cos(3) + 0.5 * FourierSeries.sin(8) - 0.2 * FourierSeries.cos(5)
    out = compose(f, MoebiusMap(b).boundary_phase(), degree=1024)
    ref = sobolev_norm(f, 0.5)
    assert abs(sobolev_norm(out, 0.5) - ref) / ref < 1e-6


def test_transplant_centered_is_concentric(cond):
    g = transplant_dtn(MoebiusMap(0), concentric(0.5, cond), FourierSeries.cos(1))
    assert 2 * g[1].real == pytest.approx(13 / 11, abs=1e-12)
    ref = concentric_dtn(FourierSeries.cos(1) + FourierSeries.sin(4), 0.5, cond).neumann
    g = transplant_dtn(MoebiusMap(0), concentric(0.5, cond), FourierSeries.cos(1) + FourierSeries.sin(4))
    assert g.resize(ref.degree).allclose(ref, atol=1e-12)


def test_transplant_invisible_inclusion():
    g = transplant_dtn(MoebiusMap(0.2), concentric(0.5, Conductivities(1, 1)), FourierSeries.cos(1))
    assert g.resize(1).allclose(FourierSeries.cos(1), atol=1e-14)
    assert g.resize(40).allclose(FourierSeries.cos(1).resize(40), atol=1e-14)


def test_transplant_conserves_flux(cond):
    g = transplant_dtn(MoebiusMap(0.2 + 0.1j), concentric(0.3, cond), FourierSeries.cos(1))
    assert abs(g.mean) < 1e-10
    assert g[1] == pytest.approx(0.5281583609686225, abs=1e-12)
    assert g[2] == pytest.approx(0.010322255590795717 - 0.005161127795397796j, abs=1e-12)


def test_centering_maps_disk_to_centered_disk():
    disk = DiskSpec(0.2 + 0.1j, 0.3)
    mob, r2 = MoebiusMap.centering(disk)
    pts = disk.center + disk.radius * np.exp(1j * nodes(32))
    np.testing.assert_allclose(np.abs(mob.forward(pts)), r2, atol=1e-14)
    back = mob.preimage_disk(r2)
    assert back.center == pytest.approx(disk.center, abs=1e-14)
    assert back.radius == pytest.approx(disk.radius, abs=1e-14)
