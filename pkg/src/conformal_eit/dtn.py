"""
Dirichlet-to-Neumann maps for disks and ε-perturbed disks in the unit disk.

The perturbed-disk pipeline transplants the transmission problem to the
annulus B₁ \\ B̄_ρ and the disk B_ρ. Writing F^e = f∘ψe for the outer data
and h for the exterior trace on |w| = ρ, the transmission condition becomes

    T_ξ h = b(F^e),
    T_ξ h(θ) = Σ |n| c_n(h∘ξ) e^{inθ} + ξ'(θ) κ Σ |n| (1+ρ^{2|n|})/(1-ρ^{2|n|}) c_n(h) e^{inξ(θ)},
    b(θ)     = 2 ξ'(θ) κ Σ |n| ρ^{|n|}/(1-ρ^{2|n|}) c_n(F^e) e^{inξ(θ)},

with κ = σ₁/σ₂, plus the side condition c₀(h) = c₀(F^e) coming from the
zero-flux log mode. Neumann data on the outer circle then follows from the
annulus series, and is pulled back through ψe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conformal import InterfaceMap, interface_map, invert_circle_map
from .errors import DivergenceError, InvalidArgument, PreconditionFailure
from .fourier import (
    CircleMap,
    FourierSeries,
    compose,
    evaluate,
    from_samples,
    nodes,
    sobolev_norm,
)
from .geometry import PerturbedDiskSpec

DEFAULT_DEGREE = 128


@dataclass(frozen=True)
class Conductivities:
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise InvalidArgument("conductivities must be positive")

    @property
    def mu(self) -> float:
        """Contrast (σ₂ - σ₁)/(σ₂ + σ₁)."""
        return (self.sigma2 - self.sigma1) / (self.sigma2 + self.sigma1)

    @property
    def kappa(self) -> float:
        return self.sigma1 / self.sigma2

    @classmethod
    def from_mu(cls, mu: float, sigma1: float = 1.0) -> "Conductivities":
        if not -1 < mu < 1:
            raise InvalidArgument("contrast must lie in (-1, 1)")
        return cls(sigma1, sigma1 * (1 + mu) / (1 - mu))


@dataclass(frozen=True)
class DtnResult:
    neumann: FourierSeries
    method: str
    rho: float | None = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InterfaceTrace:
    h: FourierSeries
    iterations: int = 0
    residual: float = 0.0
    contraction: float = 0.0


def _abs_modes(series_or_modes) -> np.ndarray:
    modes = series_or_modes.modes if isinstance(series_or_modes, FourierSeries) else series_or_modes
    return np.abs(modes).astype(float)


def concentric_multiplier(n, radius: float, cond: Conductivities) -> np.ndarray:
    """σ₁|n| (1 + μρ^{2|n|}) / (1 - μρ^{2|n|})."""
    a = np.abs(np.asarray(n)).astype(float)
    q = cond.mu * radius ** (2 * a)
    return cond.sigma1 * a * (1 + q) / (1 - q)


def concentric_dtn(f: FourierSeries, radius: float, cond: Conductivities) -> DtnResult:
    """Neumann data of a centered disk inclusion of the given radius."""
    if not 0 <= radius < 1:
        raise InvalidArgument("inclusion radius must lie in [0, 1)")
    g = f.apply_multiplier(lambda n: concentric_multiplier(n, radius, cond))
    return DtnResult(g, "closed-form", radius)


def annulus_solution(Fe: FourierSeries, h: FourierSeries, rho: float, r, theta) -> np.ndarray:
    """
    Harmonic function in ρ < r < 1 equal to Fe on r = 1 and h on r = ρ,
    evaluated at (r, θ).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= rho) or np.any(r >= 1):
        raise InvalidArgument("annulus solution is evaluated for ρ < r < 1 only")
    theta = np.asarray(theta, dtype=float)
    d = max(Fe.degree, h.degree)
    F = Fe.resize(d).coeffs
    H = h.resize(d).coeffs
    n = np.arange(-d, d + 1)
    a = np.abs(n)
    r_b, t_b = np.broadcast_arrays(r, theta)
    out = (np.log(r_b) / np.log(rho)) * (H[d] - F[d]) + F[d]
    nz = a > 0
    rb = r_b[..., None]
    an = a[nz]
    q = rho ** (2 * an)
    outer = (rb ** an - rho ** (2 * an) / rb ** an) / (1 - q)
    inner = -(rho ** an) * (rb ** an - rb ** (-an)) / (1 - q)
    phase = np.exp(1j * t_b[..., None] * n[nz])
    out = out + np.sum((outer * F[nz] + inner * H[nz]) * phase, axis=-1)
    return np.real(out) if Fe.is_real() and h.is_real() else out


# -- interface operators --------------------------------------------------

def _weights(n, rho: float, cond: Conductivities):
    a = _abs_modes(n)
    q = rho ** (2 * a)
    den = np.where(a == 0, 1.0, 1 - q)
    inner = cond.kappa * a * (1 + q) / den
    source = 2 * cond.kappa * a * rho ** a / den
    return a, inner, source


def _pushforward(values_on_grid: np.ndarray, degree: int) -> FourierSeries:
    return from_samples(values_on_grid).truncate(degree)


def interface_rhs(Fe: FourierSeries, rho: float, xi: CircleMap, cond: Conductivities,
                  degree: int | None = None) -> FourierSeries:
    """b(θ) = 2ξ'(θ)(σ₁/σ₂) Σ ρ^{|n|}/(1-ρ^{2|n|}) |n| c_n(F^e) e^{inξ(θ)}."""
    if not 0 < rho < 1:
        raise InvalidArgument("ρ must lie in (0, 1)")
    _, _, w = _weights(Fe.modes, rho, cond)
    s = FourierSeries(Fe.coeffs * w)
    out_deg = degree or _output_degree(Fe.degree, xi)
    t = nodes(4 * out_deg + 4)
    vals = xi.derivative(t) * evaluate(s, xi(t))
    out = _pushforward(vals, out_deg)
    return out.real_part() if Fe.is_real() else out


def interface_operator(h: FourierSeries, rho: float, xi: CircleMap, cond: Conductivities,
                       variant: str = "T_xi", degree: int | None = None) -> FourierSeries:
    """
    Apply T_ξ (``variant="T_xi"``) or its ξ = Id diagonal counterpart T
    (``variant="T"``, gain |n|[1 + κ(1+ρ^{2|n|})/(1-ρ^{2|n|})]).
    """
    a, w_inner, _ = _weights(h.modes, rho, cond)
    if variant == "T":
        return FourierSeries(h.coeffs * (a + w_inner))
    if variant not in ("T_xi", "T_ξ"):
        raise InvalidArgument(f"unknown interface operator variant {variant!r}")
    out_deg = degree or _output_degree(h.degree, xi)
    composed = compose(h, xi, degree=out_deg)
    first = composed.apply_multiplier(np.abs)
    t = nodes(4 * out_deg + 4)
    s = FourierSeries(h.coeffs * w_inner)
    second = _pushforward(xi.derivative(t) * evaluate(s, xi(t)), out_deg)
    out = first + second
    return out.real_part() if h.is_real() else out


def _output_degree(degree: int, xi: CircleMap) -> int:
    """Enough output modes to hold e^{inξ} for |n| ≤ degree."""
    dmax = float(np.max(xi.derivative_samples()))
    return int(np.ceil(degree * dmax * 1.5)) + 32


class InterfaceSystem:
    """
    Matrix form of T_ξ from the modes |n| ≤ N of h to the modes |m| ≤ M of
    the residual, with M large enough that e^{inξ} is fully represented.
    """

    def __init__(self, rho: float, xi: CircleMap, cond: Conductivities,
                 degree: int = DEFAULT_DEGREE):
        if not 0 < rho < 1:
            raise InvalidArgument("ρ must lie in (0, 1)")
        self.rho, self.xi, self.cond, self.N = rho, xi, cond, degree
        self.M = _output_degree(degree, xi)
        self.n = np.arange(-degree, degree + 1)
        self.m = np.arange(-self.M, self.M + 1)
        grid = 4 * self.M + 4
        t = nodes(grid)
        X = xi(t)
        E = np.exp(1j * np.outer(X, self.n))
        A = self._project(E, grid)
        B = self._project(xi.derivative(t)[:, None] * E, grid)
        self.an, w_inner, self.w_source = _weights(self.n, rho, cond)
        self.am, wm_inner, _ = _weights(self.m, rho, cond)
        self.matrix = self.am[:, None] * A + B * w_inner[None, :]
        self.source_matrix = B * self.w_source[None, :]
        self.diag_m = self.am + wm_inner          # T on the residual modes
        self.diag_n = self.an + w_inner           # T on the unknown modes
        self._xi_inv = None

    def _project(self, values: np.ndarray, grid: int) -> np.ndarray:
        spec = np.fft.fft(values, axis=0) / grid
        return spec[self.m % grid, :]

    def rhs(self, Fe: FourierSeries) -> np.ndarray:
        return self.source_matrix @ Fe.resize(self.N).coeffs

    def apply(self, h: np.ndarray) -> np.ndarray:
        return self.matrix @ h

    def residual_norm(self, r: np.ndarray) -> float:
        """H^{-1/2} norm of a residual on the m-modes."""
        nz = self.am > 0
        return float(np.sqrt(np.sum(np.abs(r[nz]) ** 2 / self.am[nz])))

    def _composed_preconditioner(self) -> np.ndarray:
        if self._xi_inv is None:
            inv = invert_circle_map(self.xi)
            grid = 4 * self.M + 4
            t = nodes(grid)
            E = np.exp(1j * np.outer(inv(t), self.m))
            spec = np.fft.fft(E, axis=0) / grid
            C = spec[self.n % grid, :]
            tinv = np.where(self.am == 0, 0.0, 1.0 / np.where(self.am == 0, 1.0, self.diag_m))
            self._xi_inv = C * tinv[None, :]
        return self._xi_inv

    def _diagonal_preconditioner(self) -> np.ndarray:
        P = np.zeros((self.n.size, self.m.size), dtype=complex)
        rows = np.arange(self.n.size)
        cols = self.n + self.M
        tinv = np.where(self.an == 0, 0.0, 1.0 / np.where(self.an == 0, 1.0, self.diag_n))
        P[rows, cols] = tinv
        return P

    def preconditioner(self, splitting: str) -> np.ndarray:
        if splitting == "composed":
            return self._composed_preconditioner()
        if splitting == "diagonal":
            return self._diagonal_preconditioner()
        raise InvalidArgument(f"unknown splitting {splitting!r}")

    def iteration_matrix(self, splitting: str) -> np.ndarray:
        P = self.preconditioner(splitting)
        return np.eye(self.n.size) - P @ self.matrix

    def contraction(self, splitting: str = "composed") -> float:
        """
        ‖I - P⁻¹T_ξ‖ on the non-constant modes of h, in the H^{1/2}
        norm; P = T∘F_ξ for ``composed`` and P = T for ``diagonal``.
        """
        K = self.iteration_matrix(splitting)
        nz = self.an > 0
        w = np.sqrt(self.an[nz])
        return float(np.linalg.norm(w[:, None] * K[np.ix_(nz, nz)] / w[None, :], 2))


def perturbation_norm(rho: float, xi: CircleMap, cond: Conductivities,
                      degree: int = 64, alpha: float = 0.75) -> float:
    """‖T_ξ - T‖ as an operator H^{1+α} → H^{-1/2} on modes |n| ≤ degree."""
    sysm = InterfaceSystem(rho, xi, cond, degree)
    D = sysm.matrix.copy()
    D[sysm.n + sysm.M, np.arange(sysm.n.size)] -= sysm.diag_n
    nzn = sysm.an > 0
    nzm = sysm.am > 0
    D = D[np.ix_(nzm, nzn)]
    left = sysm.am[nzm] ** -0.5
    right = sysm.an[nzn] ** (-(1 + alpha))
    return float(np.linalg.norm(left[:, None] * D * right[None, :], 2))


def solve_interface(Fe: FourierSeries, rho: float, xi: CircleMap, cond: Conductivities,
                    tol: float = 1e-12, max_iter: int = 100, degree: int = DEFAULT_DEGREE,
                    splitting: str = "composed") -> InterfaceTrace:
    """
    Fixed-point solution h ← h + P⁻¹(b - T_ξ h) of the interface equation.

    The contraction ‖I - P⁻¹T_ξ‖ is estimated first; an estimate ≥ 1 raises
    PreconditionFailure. The default ``composed`` splitting P = T∘F_ξ
    contracts at a rate proportional to ‖ξ - I‖ at every truncation degree;
    ``diagonal`` (P = T) is the plain Neumann series, which only contracts
    while degree·‖ξ - I‖ stays small.
    """
    sysm = InterfaceSystem(rho, xi, cond, degree)
    q = sysm.contraction(splitting)
    if q >= 1:
        raise PreconditionFailure(
            f"interface iteration does not contract (estimate {q:.3f} ≥ 1)")
    b = sysm.rhs(Fe)
    P = sysm.preconditioner(splitting)
    h = P @ b
    c0 = Fe[0]
    h[sysm.N] = c0
    residual = np.inf
    for it in range(1, max_iter + 1):
        r = b - sysm.apply(h)
        residual = sysm.residual_norm(r)
        if residual < tol:
            break
        h = h + P @ r
        h[sysm.N] = c0
    else:
        raise DivergenceError("interface iteration did not converge", residual, max_iter)
    out = FourierSeries(h)
    if Fe.is_real():
        out = out.real_part()
    return InterfaceTrace(out, it, residual, q)


def transplanted_dtn(Fe: FourierSeries, h: FourierSeries, rho: float,
                     cond: Conductivities) -> DtnResult:
    """
    σ₁∂_r of the annulus solution at r = 1:
    c_n = σ₁|n|/(1-ρ^{2|n|}) [(1+ρ^{2|n|})c_n(F^e) - 2ρ^{|n|}c_n(h)], c₀ = 0.
    """
    d = max(Fe.degree, h.degree)
    F = Fe.resize(d)
    H = h.resize(d)
    a = _abs_modes(F)
    q = rho ** (2 * a)
    den = np.where(a == 0, 1.0, 1 - q)
    c = cond.sigma1 * a / den * ((1 + q) * F.coeffs - 2 * rho ** a * H.coeffs)
    c[d] = 0.0
    return DtnResult(FourierSeries(c), "transplant", rho)


def dtn_perturbed_disk(inclusion: PerturbedDiskSpec, f: FourierSeries, cond: Conductivities,
                       tol: float = 1e-12, degree: int = DEFAULT_DEGREE,
                       splitting: str = "composed",
                       geometry: InterfaceMap | None = None) -> DtnResult:
    """
    Λ_D(f) for a centered ε-perturbed disk:
    interface_map → F^e = f∘ψe → solve_interface → transplanted DtN →
    g(α) = Λᵗ(ψe⁻¹(α)) / ψe'(ψe⁻¹(α)).
    """
    geo = geometry or interface_map(inclusion, tol)
    xi, rho, psi_e = geo.xi, geo.rho, geo.psi_e
    Fe = compose(f, psi_e, degree=degree)
    if f.is_real():
        Fe = Fe.real_part()
    trace = solve_interface(Fe, rho, xi, cond, tol=tol, degree=degree, splitting=splitting)
    lam_t = transplanted_dtn(Fe, trace.h, rho, cond).neumann
    psi_inv = invert_circle_map(psi_e, tol)
    t = nodes(4 * degree + 4)
    th = psi_inv(t)
    vals = evaluate(lam_t, th) / psi_e.derivative(th)
    g = from_samples(vals).truncate(degree)
    if f.is_real():
        g = g.real_part()
    meta = {
        "xi_w1inf": xi.w1inf_distance(),
        "contraction": trace.contraction,
        "interface_iterations": trace.iterations,
        "interface_residual": trace.residual,
    }
    return DtnResult(g, "transplant", rho, meta)


def dtn_error_norm(inclusion: PerturbedDiskSpec, f: FourierSeries, cond: Conductivities,
                   tol: float = 1e-12, degree: int = DEFAULT_DEGREE,
                   geometry: InterfaceMap | None = None) -> float:
    """‖Λ_D(f) - Λ_B(f)‖_{H^{-1/2}} with B the base disk of the inclusion."""
    g = dtn_perturbed_disk(inclusion, f, cond, tol, degree, geometry=geometry).neumann
    g0 = concentric_dtn(f, inclusion.radius, cond).neumann
    return sobolev_norm(g - g0, -0.5)
