"""
Disk automorphisms w(z) = (z - b)/(1 - b̄z) and the transplantation of
Dirichlet-to-Neumann data through them.

On the unit circle w(e^{iθ}) = e^{iφ(θ)}. The phase displacement has the
closed form φ(θ) - θ = 2·arg(1 - b e^{-iθ}) whose Fourier coefficients are
c_{-k} = i b^k/k, c_k = -i b̄^k/k (k ≥ 1); phases are computed from that
and never from an arctan expression, so no branch bookkeeping is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgument
from .fourier import CircleMap, FourierSeries, compose, evaluate, from_samples, nodes
from .geometry import DiskSpec

KINDS = ("cos", "exp1", "exp2")
_KIND_ALIASES = {
    "cos∘φ⁻¹": "cos", "cos": "cos",
    "e^{iφ⁻¹}": "exp1", "exp1": "exp1",
    "e^{2iφ⁻¹}": "exp2", "exp2": "exp2",
}


def phase_degree(b: complex, floor: int = 8) -> int:
    """Truncation degree at which |b|^N drops below 1e-17."""
    r = abs(b)
    if r < 1e-15:
        return floor
    return max(floor, int(np.ceil(np.log(1e-17) / np.log(r))) + 8)


@dataclass(frozen=True)
class MoebiusMap:
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "b", complex(self.b))
        if not abs(self.b) < 1:
            raise InvalidArgument(f"Moebius parameter must satisfy |b| < 1, got {self.b}")

    def forward(self, z):
        z = np.asarray(z, dtype=complex)
        return (z - self.b) / (1 - np.conj(self.b) * z)

    __call__ = forward

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        return (w + self.b) / (1 + np.conj(self.b) * w)

    def inverse_map(self) -> "MoebiusMap":
        return MoebiusMap(-self.b)

    # -- boundary correspondence -----------------------------------------
    def _displacement(self, degree: int | None = None) -> FourierSeries:
        n = phase_degree(self.b) if degree is None else degree
        c = np.zeros(2 * n + 1, dtype=complex)
        k = np.arange(1, n + 1)
        c[n - k] = 1j * self.b ** k / k
        c[n + k] = -1j * np.conj(self.b) ** k / k
        return FourierSeries(c)

    def boundary_phase(self, degree: int | None = None) -> CircleMap:
        """φ with w(e^{iθ}) = e^{iφ(θ)}."""
        return CircleMap(self._displacement(degree))

    def inverse_phase(self, degree: int | None = None) -> CircleMap:
        """φ⁻¹, the boundary phase of w⁻¹ (the automorphism with parameter -b)."""
        return self.inverse_map().boundary_phase(degree)

    def radial_derivative_factor(self, theta):
        """∂_r|w(re^{iθ})| at r = 1, which equals φ'(θ) = (1-|b|²)/|1 - b̄e^{iθ}|²."""
        t = np.asarray(theta, dtype=float)
        return (1 - abs(self.b) ** 2) / np.abs(1 - np.conj(self.b) * np.exp(1j * t)) ** 2

    # -- closed-form pulled-back coefficients -----------------------------
    def pullback_coefficient(self, kind: str, k: int) -> complex:
        """
        c_k of cos∘φ⁻¹, e^{iφ⁻¹} or e^{2iφ⁻¹}.

        With s = 1 - |b|² and e^{iφ⁻¹(θ)} = b + s e^{iθ}/(1 + b̄e^{iθ}):
          e^{iφ⁻¹}:  b (k=0), s(-b̄)^{k-1} (k>0), 0 (k<0)
          e^{2iφ⁻¹}: b² (k=0), 2bs (k=1), s(-b̄)^{k-2}[k-1-(k+1)|b|²] (k≥2)
          cos∘φ⁻¹:  Re b (k=0), (s/2)(-b̄)^{k-1} (k>0), conjugate mirror (k<0)
        """
        try:
            kind = _KIND_ALIASES[kind]
        except KeyError:
            raise InvalidArgument(f"unknown pullback kind {kind!r}") from None
        b = self.b
        s = 1 - abs(b) ** 2
        if kind == "exp1":
            if k == 0:
                return b
            return s * (-np.conj(b)) ** (k - 1) if k > 0 else 0j
        if kind == "exp2":
            if k == 0:
                return b * b
            if k == 1:
                return 2 * b * s
            if k >= 2:
                return s * (-np.conj(b)) ** (k - 2) * (k - 1 - (k + 1) * abs(b) ** 2)
            return 0j
        if k == 0:
            return complex(b.real)
        if k > 0:
            return 0.5 * s * (-np.conj(b)) ** (k - 1)
        return 0.5 * s * (-b) ** (-k - 1)

    def pullback_series(self, kind: str, degree: int) -> FourierSeries:
        return FourierSeries(np.array(
            [self.pullback_coefficient(kind, k) for k in range(-degree, degree + 1)]))

    # -- disks ---------------------------------------------------------------
    @classmethod
    def centering(cls, disk: DiskSpec) -> tuple["MoebiusMap", float]:
        """
        The automorphism sending ``disk`` onto a centered disk, and that
        disk's radius R₂. Its parameter b lies on the ray through the center
        and is the common symmetric point of ∂disk and the unit circle.
        """
        c, R = disk.center, disk.radius
        d = abs(c)
        if abs(c) + R >= 1:
            raise InvalidArgument("disk must lie inside the unit disk")
        if d == 0:
            return cls(0), R
        p = 1 + d * d - R * R
        # smaller root of d·s² - p·s + d, in the cancellation-free form
        s = 2 * d / (p + np.sqrt(p * p - 4 * d * d))
        u = np.exp(1j * np.angle(c))
        mob = cls(s * u)
        r2 = float(abs(mob.forward(c + R * u)))
        return mob, r2

    def preimage_disk(self, radius: float) -> DiskSpec:
        """w⁻¹ of the centered disk of the given radius."""
        s = abs(self.b)
        if s == 0:
            return DiskSpec(0, radius)
        u = self.b / s
        p1 = (radius + s) / (1 + s * radius)
        p2 = (s - radius) / (1 - s * radius)
        return DiskSpec(0.5 * (p1 + p2) * u, 0.5 * (p1 - p2))


def transplant_dtn(mob: MoebiusMap, concentric: Callable[[FourierSeries], FourierSeries],
                   f: FourierSeries, degree: int | None = None) -> FourierSeries:
    """
    Neumann data of the disk w⁻¹(B_{R₂}) from the concentric DtN map:

        Λ(f)(θ) = φ'(θ) · [Λ_C(f∘φ⁻¹)](φ(θ)).

    ``concentric`` maps Dirichlet data on the unit circle to the Neumann
    data of the centered problem.
    """
    nb = phase_degree(mob.b)
    work = degree if degree is not None else max(f.degree * nb, nb) + 16
    pulled = compose(f, mob.inverse_phase(), degree=work)
    g_conc = concentric(pulled)
    phase = mob.boundary_phase()
    theta = nodes(2 * (2 * work + 1))
    vals = mob.radial_derivative_factor(theta) * evaluate(g_conc, phase(theta))
    out = from_samples(vals).truncate(work)
    if f.is_real():
        out = out.real_part()
    return out
