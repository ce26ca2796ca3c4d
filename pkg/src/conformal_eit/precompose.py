"""
Superposition operators F_ξ: f ↦ f∘ξ acting on H^{1/2}(S^1).

Operators are studied on the truncated space spanned by e^{inθ}/√|n|,
0 < |n| ≤ N, which is orthonormal for the H^{1/2} seminorm. Column n of the
matrix holds the coefficients of e^{inξ(θ)}/√|n| on the same basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .conformal import invert_circle_map
from .errors import InvalidArgument
from .fourier import CircleMap, FourierSeries, compose, nodes, sobolev_norm


@dataclass(frozen=True)
class ModulusOfContinuity:
    """ω_δ(t) = max(t^{δ+1/2}, t^δ)."""

    delta: float

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InvalidArgument("modulus exponent must lie in (0, 1)")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidArgument("modulus of continuity is defined for t ≥ 0")
        out = np.maximum(t ** (self.delta + 0.5), t ** self.delta)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    degree: int

    @property
    def modes(self) -> np.ndarray:
        n = np.arange(-self.degree, self.degree + 1)
        return n[n != 0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def _grid_for(xi: CircleMap, degree: int) -> int:
    dmax = float(np.max(xi.derivative_samples()))
    top = int(np.ceil(1.5 * degree * dmax)) + degree + 64
    return 4 * top


def exponential_spectrum(xi: CircleMap, n, out_degree: int,
                         grid: int | None = None) -> np.ndarray:
    """
    Coefficients of e^{inξ(θ)} for each n (columns) on modes |m| ≤ out_degree
    (rows), from an FFT on ``grid`` nodes.
    """
    n = np.atleast_1d(np.asarray(n))
    grid = grid or max(_grid_for(xi, int(np.max(np.abs(n)))), 2 * out_degree + 2)
    t = nodes(grid)
    E = np.exp(1j * np.outer(xi(t), n))
    spec = np.fft.fft(E, axis=0) / grid
    m = np.arange(-out_degree, out_degree + 1)
    return spec[m % grid, :]


def operator_matrix(xi: CircleMap, degree: int) -> OperatorMatrix:
    """F_ξ compressed to the H^{1/2}-orthonormal basis of modes 0 < |n| ≤ degree."""
    if degree < 1:
        raise InvalidArgument("truncation degree must be positive")
    n = np.arange(-degree, degree + 1)
    n = n[n != 0]
    spec = exponential_spectrum(xi, n, degree)
    spec = np.delete(spec, degree, axis=0)
    w = np.sqrt(np.abs(n).astype(float))
    return OperatorMatrix(w[:, None] * spec / w[None, :], degree)


def operator_norm(xi: CircleMap, degree: int) -> float:
    """Largest singular value of the compressed F_ξ (a lower bound for ‖F_ξ‖)."""
    if degree < 4:
        raise InvalidArgument("operator norm needs degree ≥ 4")
    return operator_matrix(xi, degree).norm()


def doubling_constant(xi: CircleMap, interval_samples: int = 100) -> float:
    """
    sup |ξ(2I)|/|ξ(I)| over arcs I with midpoints and half-lengths on an
    ``interval_samples`` × ``interval_samples`` grid; 2I shares the midpoint
    of I and has twice its length, and |I| < π.
    """
    if interval_samples < 2:
        raise InvalidArgument("need at least two samples per direction")
    mid = nodes(interval_samples)
    half = (np.pi / 2) * np.arange(1, interval_samples + 1) / (interval_samples + 1)
    M, L = np.meshgrid(mid, half, indexing="ij")
    inner = xi(M + L) - xi(M - L)
    outer = xi(M + 2 * L) - xi(M - 2 * L)
    return float(np.max(outer / inner))


def quasisymmetric_bound(doubling: float) -> float:
    """√(K + 1/K)."""
    return float(np.sqrt(doubling + 1.0 / doubling))


def basis_distortion(n: int, xi: CircleMap, rtol: float = 1e-12) -> float:
    """‖e^{inξ} - e^{inθ}‖_{H^{1/2}}, refining the transform until it settles."""
    if n < 1:
        raise InvalidArgument("mode index must be positive")
    grid = _grid_for(xi, n)
    prev = None
    for _ in range(6):
        t = nodes(grid)
        vals = np.exp(1j * n * xi(t)) - np.exp(1j * n * t)
        c = np.fft.fftshift(np.fft.fft(vals)) / grid
        m = np.arange(-grid // 2, grid // 2)
        value = float(np.sqrt(np.sum(np.abs(m) * np.abs(c) ** 2)))
        if prev is not None and abs(value - prev) <= rtol * max(value, 1e-300):
            return value
        prev = value
        grid *= 2
    return value


def distortion_bound(n: int, xi: CircleMap, delta: float) -> float:
    """n^{1+2δ} ω_{2δ}(‖ξ - I‖_{W^{1,∞}})."""
    return n ** (1 + 2 * delta) * ModulusOfContinuity(2 * delta)(xi.w1inf_distance())


def distortion_table(xi: CircleMap, n_max: int, delta: float = 0.25) -> list[tuple]:
    """Rows (n, distortion, bound, ratio) for n = 1..n_max."""
    rows = []
    for n in range(1, n_max + 1):
        d = basis_distortion(n, xi)
        b = distortion_bound(n, xi, delta)
        rows.append((n, d, b, d / b if b > 0 else 0.0))
    return rows


class CompositionError(NamedTuple):
    error: float
    bound: float


def reported_exponent(delta: float) -> float:
    """δ′ used for the composition bound: the midpoint δ/2 of (0, δ)."""
    return delta / 2


def composition_error(u: FourierSeries, xi: CircleMap, delta: float) -> CompositionError:
    """
    (‖u∘ξ - u‖_{H^{1/2}}, ‖u‖_{H^{1+δ}} ω_{δ′}(‖ξ - I‖_{W^{1,∞}})) with δ′ = δ/2.

    Both quantities are seminorms, so adding a constant to u changes neither.
    """
    if not 0 < delta < 1:
        raise InvalidArgument("δ must lie in (0, 1)")
    dmax = float(np.max(xi.derivative_samples()))
    out_deg = int(np.ceil(1.5 * max(u.degree, 1) * dmax)) + 2 * xi.degree + 32
    composed = compose(u, xi, degree=out_deg)
    error = sobolev_norm(composed - u, 0.5)
    bound = sobolev_norm(u, 1 + delta) * ModulusOfContinuity(reported_exponent(delta))(
        xi.w1inf_distance())
    return CompositionError(error, float(bound))


def norm_symmetry_check(xi: CircleMap, degree: int) -> tuple[float, float]:
    """Truncated norms of F_ξ and F_{ξ⁻¹}; equal in the untruncated limit."""
    inv = invert_circle_map(xi, n_nodes=max(256, 8 * degree))
    return operator_norm(xi, degree), operator_norm(inv, degree)
