"""
Inclusion geometry: disks, star-shaped ε-perturbations of centered disks,
the δ-condition of the Theodorsen iteration, and symmetric-difference areas.

A perturbed disk is described in polar form r(θ) = R - ε·δ(θ) about the
origin. Off-center perturbed inclusions are represented as the preimage of a
centered one under a disk automorphism (see :class:`ShiftedInclusion`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UnsupportedGeometry
from .fourier import FourierSeries, derivative, evaluate, nodes, to_samples

DEFAULT_DELTA0 = 0.1
DEFAULT_RHO0 = 0.1

AREA_NODES = 16384


@dataclass(frozen=True)
class DiskSpec:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise InvalidArgument(f"disk radius must be positive, got {self.radius}")
        if abs(self.center) >= 1:
            raise InvalidArgument("disk center must lie inside the unit disk")

    def is_feasible(self, delta0: float = DEFAULT_DELTA0, rho0: float = DEFAULT_RHO0) -> bool:
        """|b| + R < 1 - δ₀ and R ≥ ρ₀."""
        return abs(self.center) + self.radius < 1 - delta0 and self.radius >= rho0

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def level_set(self, z) -> np.ndarray:
        """Negative inside, zero on the boundary."""
        return np.abs(np.asarray(z) - self.center) - self.radius

    def polar_radius(self, theta) -> np.ndarray:
        """Distance from the origin to the boundary along direction θ."""
        if abs(self.center) >= self.radius:
            raise UnsupportedGeometry("disk is not star-shaped about the origin")
        t = np.asarray(theta, dtype=float)
        p = np.real(self.center * np.exp(-1j * t))
        return p + np.sqrt(p * p - abs(self.center) ** 2 + self.radius ** 2)

    def area(self) -> float:
        return np.pi * self.radius ** 2


@dataclass(frozen=True)
class PerturbedDiskSpec:
    """Star-shaped domain r(θ) = R - ε·δ(θ) about the origin."""

    base: DiskSpec
    delta: FourierSeries
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "eps", float(self.eps))
        if self.base.center != 0:
            raise InvalidArgument(
                "perturbed disks are centered; use ShiftedInclusion for off-center ones"
            )
        if self.eps < 0:
            raise InvalidArgument("eps must be non-negative")
        if not self.delta.is_real(1e-10):
            raise InvalidArgument("perturbation δ must be real-valued")
        if self.min_radius() <= 0:
            raise InvalidArgument("polar radius R - εδ(θ) must stay positive")

    @classmethod
    def from_normal_offset(cls, base: DiskSpec, delta_normal: FourierSeries,
                           eps: float) -> "PerturbedDiskSpec":
        """First-order conversion of ∂D = x + εδ(x)ν(x): δ_polar = -δ_normal."""
        return cls(base, -delta_normal, eps)

    @classmethod
    def disk(cls, radius: float) -> "PerturbedDiskSpec":
        return cls(DiskSpec(0, radius), FourierSeries.zeros(0), 0.0)

    @property
    def radius(self) -> float:
        return self.base.radius

    @property
    def center(self) -> complex:
        return 0j

    def radius_series(self) -> FourierSeries:
        return FourierSeries.constant(self.radius) - self.eps * self.delta

    def polar_radius(self, theta) -> np.ndarray:
        return self.radius - self.eps * np.real(evaluate(self.delta, theta))

    def _grid(self) -> np.ndarray:
        return nodes(max(1024, 32 * max(self.delta.degree, 1)))

    def min_radius(self) -> float:
        return float(np.min(self.polar_radius(self._grid())))

    def c2_norm_bound(self) -> float:
        """Upper bound Σ(1 + |n| + n²)|c_n| on ‖δ‖_{C²}."""
        n = np.abs(self.delta.modes)
        return float(np.sum((1 + n + n * n) * np.abs(self.delta.coeffs)))

    def in_class(self, delta0: float = DEFAULT_DELTA0, rho0: float = DEFAULT_RHO0) -> bool:
        """Membership test for the a-priori class C[ε]."""
        return (self.c2_norm_bound() < 1
                and self.base.is_feasible(delta0, rho0)
                and float(np.max(self.polar_radius(self._grid()))) < 1 - delta0)

    def contains(self, z) -> np.ndarray:
        return self.level_set(z) < 0

    def level_set(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.abs(z) - self.polar_radius(np.angle(z))

    def area(self) -> float:
        r = self.polar_radius(nodes(AREA_NODES))
        return float(0.5 * np.mean(r * r) * 2 * np.pi)


@dataclass(frozen=True)
class ShiftedInclusion:
    """
    Preimage of a centered inclusion under the disk automorphism w_b,
    i.e. D = w_b^{-1}(inner). A true disk is the case inner.eps == 0.
    """

    moebius_b: complex
    inner: PerturbedDiskSpec

    def contains(self, z) -> np.ndarray:
        return self.level_set(z) < 0

    def level_set(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        b = self.moebius_b
        w = (z - b) / (1 - np.conj(b) * z)
        return self.inner.level_set(w)


def polar_radius(spec: PerturbedDiskSpec, theta) -> np.ndarray:
    return spec.polar_radius(theta)


def delta_condition(spec: PerturbedDiskSpec, factor: int = 32) -> float:
    """sup_θ |r'(θ)/r(θ)| on a grid of at least ``factor``×deg δ nodes."""
    count = max(1024, factor * max(spec.delta.degree, 1))
    r_series = spec.radius_series()
    r = np.real(to_samples(r_series, count))
    dr = np.real(to_samples(derivative(r_series), count))
    return float(np.max(np.abs(dr / r)))


def _polar_profile(domain, theta) -> np.ndarray:
    if isinstance(domain, (DiskSpec, PerturbedDiskSpec)):
        return domain.polar_radius(theta)
    raise UnsupportedGeometry(f"no polar description for {type(domain).__name__}")


def _lens_symmetric_difference(a: DiskSpec, b: DiskSpec) -> float:
    d = abs(a.center - b.center)
    r1, r2 = a.radius, b.radius
    if d >= r1 + r2:
        overlap = 0.0
    elif d <= abs(r1 - r2):
        overlap = np.pi * min(r1, r2) ** 2
    else:
        x1 = (d * d + r1 * r1 - r2 * r2) / (2 * d * r1)
        x2 = (d * d + r2 * r2 - r1 * r1) / (2 * d * r2)
        overlap = (r1 * r1 * np.arccos(x1) + r2 * r2 * np.arccos(x2)
                   - 0.5 * np.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)))
    return float(a.area() + b.area() - 2 * overlap)


def symmetric_difference_area(a, b, n_nodes: int = AREA_NODES) -> float:
    """
    |A Δ B|. Two disks use the exact lens formula; otherwise both sets must
    be star-shaped about the origin and the area is (1/2)∫|r_A² - r_B²| dθ.
    """
    if isinstance(a, DiskSpec) and isinstance(b, DiskSpec):
        return _lens_symmetric_difference(a, b)
    theta = nodes(n_nodes)
    ra = _polar_profile(a, theta)
    rb = _polar_profile(b, theta)
    return float(0.5 * np.mean(np.abs(ra * ra - rb * rb)) * 2 * np.pi)


# -- JSON ------------------------------------------------------------------

def _coeffs_to_json(series: FourierSeries) -> list:
    return [[float(c.real), float(c.imag)] for c in series.coeffs]


def _coeffs_from_json(raw) -> FourierSeries:
    vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in raw]
    if len(vals) % 2 != 1:
        raise InvalidArgument("delta.coeffs must list modes -N..N (odd length)")
    return FourierSeries(np.array(vals, dtype=complex))


def spec_to_dict(spec) -> dict:
    """Serialize to {"center":[re,im],"radius":r,"delta":{"coeffs":[...]},"eps":e}."""
    if isinstance(spec, DiskSpec):
        return {"center": [spec.center.real, spec.center.imag], "radius": spec.radius,
                "delta": {"coeffs": [[0.0, 0.0]]}, "eps": 0.0}
    if isinstance(spec, PerturbedDiskSpec):
        return {"center": [0.0, 0.0], "radius": spec.radius,
                "delta": {"coeffs": _coeffs_to_json(spec.delta)}, "eps": spec.eps}
    if isinstance(spec, ShiftedInclusion):
        from .moebius import MoebiusMap
        disk = MoebiusMap(spec.moebius_b).preimage_disk(spec.inner.radius)
        out = spec_to_dict(spec.inner)
        out["center"] = [disk.center.real, disk.center.imag]
        out["radius"] = disk.radius
        return out
    raise InvalidArgument(f"cannot serialize {type(spec).__name__}")


def spec_from_dict(data: dict):
    """
    Inverse of :func:`spec_to_dict`.

    Returns a DiskSpec when there is no perturbation, a PerturbedDiskSpec for
    centered perturbed inclusions, and a ShiftedInclusion when an off-center
    base carries a perturbation (δ is then attached to the centered image of
    the base disk under the automorphism that centers it).
    """
    try:
        center = complex(data["center"][0], data["center"][1])
        radius = float(data["radius"])
        eps = float(data.get("eps", 0.0))
        delta_raw = data.get("delta", {"coeffs": [0.0]}).get("coeffs", [0.0])
    except (KeyError, TypeError, IndexError, AttributeError) as exc:
        raise InvalidArgument(f"malformed domain spec: {exc!r}") from exc
    delta = _coeffs_from_json(delta_raw)
    base = DiskSpec(center, radius)
    unperturbed = eps == 0.0 or not np.any(delta.coeffs)
    if unperturbed:
        return base
    if center == 0:
        return PerturbedDiskSpec(base, delta, eps)
    from .moebius import MoebiusMap
    mob, r2 = MoebiusMap.centering(base)
    return ShiftedInclusion(mob.b, PerturbedDiskSpec(DiskSpec(0, r2), delta, eps))


def load_spec(path) -> object:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
