"""
Boundary correspondence of conformal maps onto star-shaped domains.

* Theodorsen: the disk onto a star-shaped D, fixed point of
  φ(θ) - θ = H(log r(φ(θ))).
* Theodorsen–Garrick: the annulus ρ < |w| < 1 onto Ω \\ D̄ with Ω the unit
  disk. The outer correspondence φ₀ and inner correspondence φ₁ satisfy
  φ₀ - θ = -K_ρ(log r₁∘φ₁), φ₁ - θ = -H_ρ(log r₁∘φ₁) and
  log ρ = mean(log r₁∘φ₁).

All correspondences are angle-to-angle (polar angle of the image point).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidArgument, PreconditionFailure
from .fourier import (
    CircleMap,
    FourierSeries,
    from_samples,
    hilbert_transform,
    nodes,
    to_samples,
)
from .geometry import PerturbedDiskSpec, delta_condition


@dataclass(frozen=True)
class GarrickResult:
    rho: float
    outer_map: CircleMap
    inner_map: CircleMap
    iterations: int = 0
    residual: float = 0.0


@dataclass(frozen=True)
class InterfaceMap:
    """ξ = (φ^e)⁻¹∘φ^i together with the pieces it was built from."""

    xi: CircleMap
    rho: float
    psi_e: CircleMap
    phi_i: CircleMap
    phi_e: CircleMap

    def __iter__(self):
        return iter((self.xi, self.rho, self.psi_e))


def trim(series: FourierSeries, atol: float = 1e-15) -> FourierSeries:
    """Drop trailing modes whose magnitude is below ``atol``."""
    c = np.abs(series.coeffs)
    n = series.degree
    big = np.nonzero(c > atol)[0]
    if big.size == 0:
        return series.truncate(0)
    top = int(np.max(np.abs(big - n)))
    return series.truncate(top)


def annulus_conjugation(series: FourierSeries, rho: float, kind: str = "H") -> FourierSeries:
    """
    Conjugation operators of the annulus ρ < |w| < 1, as odd multipliers:

        H_ρ: -i sgn(m) (1 + ρ^{2|m|}) / (1 - ρ^{2|m|})
        K_ρ: -2i sgn(m) ρ^{|m|} / (1 - ρ^{2|m|})

    and 0 on m = 0.
    """
    if not 0 <= rho < 1:
        raise InvalidArgument(f"annulus modulus must lie in [0, 1), got {rho}")
    key = kind.upper()[:1]
    m = np.abs(series.modes).astype(float)
    sgn = np.sign(series.modes)
    q = rho ** (2 * m)
    denom = np.where(m == 0, 1.0, 1 - q)
    if key == "H":
        mult = -1j * sgn * (1 + q) / denom
    elif key == "K":
        mult = -2j * sgn * rho ** m / denom
    else:
        raise InvalidArgument(f"unknown annulus operator {kind!r}")
    return FourierSeries(series.coeffs * mult)


def _grid_size(spec: PerturbedDiskSpec, n_nodes: int | None) -> int:
    if n_nodes is not None:
        if n_nodes % 2:
            raise InvalidArgument("grid size must be even")
        return n_nodes
    return max(256, 64 * max(spec.delta.degree, 1))


def _to_map(displacement_samples: np.ndarray) -> CircleMap:
    d = from_samples(displacement_samples).real_part()
    return CircleMap(trim(d))


def theodorsen_solve(boundary: PerturbedDiskSpec, tol: float = 1e-12, max_iter: int = 200,
                     n_nodes: int | None = None, damping: float = 1.0) -> CircleMap:
    """
    Boundary correspondence φ of the conformal map of the unit disk onto
    the star-shaped domain r(φ) (normalized Ψ(0) = 0, Ψ'(0) > 0).

    Raises PreconditionFailure when sup|r'/r| ≥ 1 and DivergenceError if
    the sup-norm residual does not fall below ``tol``.
    """
    dc = delta_condition(boundary)
    if dc >= 1:
        raise PreconditionFailure(f"δ-condition violated: sup|r'/r| = {dc:.3f} ≥ 1")
    count = _grid_size(boundary, n_nodes)
    theta = nodes(count)
    d = np.zeros(count)
    lam = damping
    prev = np.inf
    for it in range(1, max_iter + 1):
        v = np.log(boundary.polar_radius(theta + d))
        update = np.real(to_samples(hilbert_transform(from_samples(v)), count))
        residual = float(np.max(np.abs(update - d)))
        if residual < tol:
            return _to_map(update)
        if residual > prev and lam > 0.5:
            lam = 0.5
        prev = residual
        d = d + lam * (update - d)
    raise DivergenceError("Theodorsen iteration did not converge", residual, max_iter)


def garrick_solve(inner: PerturbedDiskSpec, tol: float = 1e-12, max_iter: int = 200,
                  n_nodes: int | None = None, damping: float = 1.0) -> GarrickResult:
    """
    Theodorsen–Garrick iteration for Ω \\ D̄ with Ω the unit disk.

    Both displacement functions have zero mean at every iterate, which is
    the rotational normalization of the pair.
    """
    dc = delta_condition(inner)
    if dc >= 1:
        raise PreconditionFailure(f"δ-condition violated: sup|r'/r| = {dc:.3f} ≥ 1")
    if float(np.max(inner.polar_radius(nodes(1024)))) >= 1:
        raise PreconditionFailure("inner boundary must lie inside the unit circle")
    count = _grid_size(inner, n_nodes)
    theta = nodes(count)
    d1 = np.zeros(count)
    rho = float(np.exp(np.mean(np.log(inner.polar_radius(theta)))))
    lam = damping
    prev = np.inf
    for it in range(1, max_iter + 1):
        v = np.log(inner.polar_radius(theta + d1))
        rho_new = float(np.exp(np.mean(v)))
        vs = from_samples(v)
        update = -np.real(to_samples(annulus_conjugation(vs, rho_new, "H"), count))
        residual = max(float(np.max(np.abs(update - d1))), abs(rho_new - rho))
        rho = rho_new
        if residual < tol:
            d0 = -np.real(to_samples(annulus_conjugation(vs, rho, "K"), count))
            return GarrickResult(rho, _to_map(d0), _to_map(update), it, residual)
        if residual > prev and lam > 0.5:
            lam = 0.5
        prev = residual
        d1 = d1 + lam * (update - d1)
    raise DivergenceError("Theodorsen–Garrick iteration did not converge", residual, max_iter)


def invert_circle_map(circle_map: CircleMap, tol: float = 1e-12, n_nodes: int | None = None,
                      max_newton: int = 50, max_nodes: int = 1 << 15) -> CircleMap:
    """
    ξ⁻¹ by Newton's method at each node, ξ(x) = t.

    The inverse is not a trigonometric polynomial, so the node count is
    doubled (up to ``max_nodes``) until the round trip ξ⁻¹∘ξ is within
    10·tol of the identity on an independent probe grid.
    """
    circle_map.require_monotone()
    count = n_nodes or max(256, 8 * circle_map.degree)
    count += count % 2
    probe = nodes(257)
    while True:
        t = nodes(count)
        x = t - circle_map(t) + t
        for _ in range(max_newton):
            step = (circle_map(x) - t) / circle_map.derivative(x)
            x = x - step
            if np.max(np.abs(step)) < 0.1 * tol:
                break
        inv = _to_map(x - t)
        err = float(np.max(np.abs(inv(circle_map(probe)) - probe)))
        if err <= max(tol, 1e-13) * 10:
            return inv
        if n_nodes is not None or 2 * count > max_nodes:
            raise DivergenceError("circle-map inversion inaccurate", err, max_newton)
        count *= 2


def compose_maps(outer: CircleMap, inner: CircleMap, n_nodes: int | None = None) -> CircleMap:
    """The circle map outer∘inner."""
    count = n_nodes or max(256, 8 * (outer.degree + inner.degree))
    count += count % 2
    t = nodes(count)
    return _to_map(outer(inner(t)) - t)


def interface_map(inclusion: PerturbedDiskSpec, tol: float = 1e-12,
                  n_nodes: int | None = None) -> InterfaceMap:
    """
    ξ = (φ^e)⁻¹∘φ^i, with φ^i the interior (Theodorsen) correspondence and
    φ^e = φ₁ the inner correspondence of the annulus map. ψe = φ₀ is the
    outer-boundary correspondence.
    """
    phi_i = theodorsen_solve(inclusion, tol, n_nodes=n_nodes)
    gar = garrick_solve(inclusion, tol, n_nodes=n_nodes)
    phi_e = gar.inner_map
    xi = compose_maps(invert_circle_map(phi_e, tol), phi_i)
    return InterfaceMap(xi, gar.rho, gar.outer_map, phi_i, phi_e)


def first_order_interior(boundary: PerturbedDiskSpec) -> CircleMap:
    """Linearized correspondence θ - (ε/R)·Hδ(θ)."""
    return CircleMap(-(boundary.eps / boundary.radius) * hilbert_transform(boundary.delta))
