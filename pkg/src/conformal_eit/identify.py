"""
Disk identification from one Cauchy pair (cos θ, g).

A disk D = disk(c, R) inside the unit disk is the preimage w⁻¹(B_ρ) of a
centered disk under the automorphism w with parameter b on the ray through c.
Its Neumann data for f = cos θ has, with s = |b| and
λ(ρ, m) = (1 + μρ^{2m})/(1 - μρ^{2m}),

    c₁(g) = ½σ₁(1-s²)² Σ_{m≥1} m λ(ρ,m) s^{2(m-1)}
    c₂(g) = -b̄ σ₁(1-s²)² [-λ(ρ,1) + ½ Σ_{m≥2} m λ(ρ,m) s^{2(m-2)} (m-1-(m+1)s²)]

so c₂ fixes the direction of b and the pair (c₁, |c₂|) fixes (s, ρ).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .dtn import Conductivities, concentric_dtn, dtn_perturbed_disk
from .errors import InvalidArgument, NoDiskFound, OptimizationFailure
from .fourier import FourierSeries, sobolev_norm
from .geometry import (
    DEFAULT_DELTA0,
    DEFAULT_RHO0,
    DiskSpec,
    PerturbedDiskSpec,
    symmetric_difference_area,
)
from .moebius import MoebiusMap, transplant_dtn

NO_DISK_THRESHOLD = 1e-3
FD_STEP = 1e-7


@dataclass(frozen=True)
class IdentificationResult:
    disk: DiskSpec
    residual: float
    iterations: int = 0
    symdiff_to_truth: float | None = None
    trace: list = field(default_factory=list, repr=False)

    @property
    def b(self) -> complex:
        return self.disk.center

    @property
    def radius(self) -> float:
        return self.disk.radius


def _lam(R, m, mu):
    q = mu * np.asarray(R, dtype=float) ** (2 * np.asarray(m))
    return (1 + q) / (1 - q)


def f_coefficients(b: complex, R1: float, R2: float, cond: Conductivities, k: int) -> complex:
    """
    c_k(F) = c_k(Λ_{D₂} cos θ) - c_k(Λ_{D₁} cos θ) in the frame where D₁ is
    centered with radius R₁ and D₂ = w_b⁻¹(B_{R₂}):

        c_k(F) = ½kσ₁(1-|b|²)²(-b̄)^{k-1} (λ(R₂,k) - λ(R₁,1)),  k ≥ 1,

    c₀(F) = 0 and c_{-k} = conj(c_k).
    """
    if not abs(b) < 1:
        raise InvalidArgument("|b| must be below 1")
    if not (0 < R1 < 1 and 0 < R2 < 1):
        raise InvalidArgument("radii must lie in (0, 1)")
    if k == 0:
        return 0j
    kk = abs(k)
    mu = cond.mu
    val = (0.5 * kk * cond.sigma1 * (1 - abs(b) ** 2) ** 2 * (-np.conj(complex(b))) ** (kk - 1)
           * (_lam(R2, kk, mu) - _lam(R1, 1, mu)))
    return complex(val) if k > 0 else complex(np.conj(val))


# -- forward model -----------------------------------------------------------

def disk_neumann(disk: DiskSpec, cond: Conductivities, f: FourierSeries | None = None,
                 degree: int | None = None) -> FourierSeries:
    """Λ_disk(f) through the centering automorphism and the concentric multiplier."""
    f = FourierSeries.cos() if f is None else f
    mob, r2 = MoebiusMap.centering(disk)
    if mob.b == 0:
        g = concentric_dtn(f, r2, cond).neumann
        return g if degree is None else g.resize(degree)
    return transplant_dtn(mob, lambda F: concentric_dtn(F, r2, cond).neumann, f, degree)


def _series_sums(s: float, R: float, mu: float):
    """
    The two series of the module docstring with λ replaced by λ - 1; the
    λ ≡ 1 parts sum to 1/(1-s²)² and 0 respectively, so nothing cancels.
    """
    top = 8 if s == 0 else max(8, int(np.ceil(np.log(1e-18) / np.log(s) / 2)) + 4)
    m = np.arange(1, top + 1)
    q = mu * R ** (2 * m)
    excess = 2 * q / (1 - q)
    sum1 = np.sum(m * excess * s ** (2 * (m - 1)))
    m2 = m[1:]
    x = -excess[0] + 0.5 * np.sum(m2 * excess[1:] * s ** (2 * (m2 - 2))
                                  * (m2 - 1 - (m2 + 1) * s * s))
    return float(sum1), float(x)


def _c1_c2(t: float, R: float, cond: Conductivities) -> tuple[float, float]:
    """
    c₁(g) - σ₁/2 and the signed magnitude t·X·σ₁(1-t²)² of c₂(g) along a
    fixed direction.
    """
    s = abs(t)
    sum1, x = _series_sums(s, R, cond.mu)
    pref = cond.sigma1 * (1 - s * s) ** 2
    return 0.5 * pref * sum1, t * pref * x


def _misfit(g_model: FourierSeries, g: FourierSeries) -> float:
    return sobolev_norm(g_model - g, -0.5)


def concentric_radius(lam: float, cond: Conductivities) -> float:
    """R with σ₁(1 + μR²)/(1 - μR²) = λ, i.e. R² = (λ - σ₁)/(μ(λ + σ₁))."""
    mu = cond.mu
    if mu == 0:
        raise InvalidArgument("equal conductivities: the inclusion is invisible")
    r2 = (lam - cond.sigma1) / (mu * (lam + cond.sigma1))
    if not 0 < r2 < 1:
        raise NoDiskFound(f"concentric inversion gives R² = {r2:.3e} outside (0, 1)")
    return float(np.sqrt(r2))


def recover_disk_exact(g: FourierSeries, cond: Conductivities,
                       threshold: float = NO_DISK_THRESHOLD) -> IdentificationResult:
    """
    Closed-form identification of a disk from Λ_D(cos θ).

    The first two Neumann coefficients are inverted for the automorphism
    parameter and the centered radius; the candidate is then checked against
    all of g, and a misfit above ``threshold``·‖g‖_{H^{-1/2}} raises
    NoDiskFound carrying the candidate.
    """
    if cond.mu == 0:
        raise InvalidArgument("equal conductivities: the inclusion is invisible")
    gnorm = sobolev_norm(g, -0.5)
    if gnorm == 0:
        raise NoDiskFound("zero Neumann data")
    c1 = float(np.real(g[1]))
    c2 = complex(g[2]) if g.degree >= 2 else 0j
    if abs(c1 - 0.5 * cond.sigma1) <= 1e-12 * abs(c1) and abs(c2) <= 1e-12 * abs(c1):
        raise NoDiskFound("Neumann data equals the inclusion-free response (R → 0)")
    if abs(c2) <= 1e-14 * abs(c1):
        candidates = [(0j, concentric_radius(2 * c1, cond))]
    else:
        candidates = _moebius_candidates(c1, c2, cond)
    best = None
    for b, rho in candidates:
        try:
            disk = MoebiusMap(b).preimage_disk(rho)
            model = disk_neumann(disk, cond, degree=g.degree)
        except InvalidArgument:
            continue
        res = _misfit(model, g)
        if best is None or res < best.residual:
            best = IdentificationResult(disk, res)
    if best is None:
        raise NoDiskFound("no admissible disk parameters")
    if best.residual > threshold * gnorm:
        raise NoDiskFound(f"data not explained by a disk (misfit {best.residual:.3e})", best)
    return best


def _moebius_candidates(c1: float, c2: complex, cond: Conductivities):
    direction = np.conj(-c2 / abs(c2))     # b = t·direction with t real
    target = np.array([c1 - 0.5 * cond.sigma1, abs(c2)])
    scale = np.abs(target)

    def resid(p):
        t, R = p
        a1, a2 = _c1_c2(t, R, cond)
        return (np.array([a1, a2]) - target) / scale

    found = []
    for t0 in (-0.6, -0.3, -0.1, 0.1, 0.3, 0.6):
        for R0 in (0.15, 0.35, 0.6):
            sol = least_squares(resid, [t0, R0], bounds=([-0.999, 1e-4], [0.999, 0.999]),
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
            if np.max(np.abs(sol.fun)) < 1e-8:
                t, R = sol.x
                if not any(abs(t - u) < 1e-7 and abs(R - v) < 1e-7 for u, v in found):
                    found.append((t, R))
    return [(t * direction, R) for t, R in found]


# -- least squares -------------------------------------------------------------

def _feasible(p, delta0: float, rho0: float) -> bool:
    c = abs(complex(p[0], p[1]))
    return p[2] >= rho0 and c + p[2] < 1 - delta0


def _residual_vector(p, g: FourierSeries, cond, f, degree: int) -> np.ndarray:
    model = disk_neumann(DiskSpec(complex(p[0], p[1]), p[2]), cond, f, degree=degree)
    k = np.arange(1, degree + 1)
    d = (model - g).resize(degree).coeffs[degree + 1:]
    w = np.sqrt(2.0 / k)
    return np.concatenate([w * d.real, w * d.imag])


def fit_disk(g: FourierSeries, cond: Conductivities, init: DiskSpec | None = None,
             f: FourierSeries | None = None, max_iter: int = 100, tol: float = 1e-10,
             delta0: float = DEFAULT_DELTA0, rho0: float = DEFAULT_RHO0,
             degree: int | None = None) -> IdentificationResult:
    """
    Minimize ‖Λ_disk(f) - g‖²_{H^{-1/2}} over (Re c, Im c, R) by damped
    Gauss–Newton with a forward-difference Jacobian.

    The iterate stays in the feasible set |c| + R < 1 - δ₀, R ≥ ρ₀; the step
    length halves until the objective decreases. For real data the objective
    only involves the modes k ≥ 1.
    """
    f_is_cos = f is None
    f = FourierSeries.cos() if f is None else f
    degree = degree or max(g.degree, 8)
    if init is None:
        init = _initial_guess(g, cond) if f_is_cos else DiskSpec(0, 0.5)
    p = np.array([init.center.real, init.center.imag, init.radius])
    trace: list[dict] = []
    if not _feasible(p, delta0, rho0):
        trace.append({"iteration": 0, "params": p.tolist(), "reason": "infeasible start"})
        raise OptimizationFailure("initial disk outside the feasible set", trace)
    r = _residual_vector(p, g, cond, f, degree)
    obj = 0.5 * float(r @ r)
    it = 0
    for it in range(1, max_iter + 1):
        J = np.empty((r.size, 3))
        for j in range(3):
            q = p.copy()
            q[j] += FD_STEP
            if not _feasible(q, delta0 * 0.999, rho0 * 0.999):
                q[j] -= 2 * FD_STEP
                J[:, j] = (r - _residual_vector(q, g, cond, f, degree)) / FD_STEP
            else:
                J[:, j] = (_residual_vector(q, g, cond, f, degree) - r) / FD_STEP
        grad = J.T @ r
        gnorm = float(np.linalg.norm(grad))
        trace.append({"iteration": it, "objective": obj, "gradient": gnorm, "params": p.tolist()})
        if gnorm <= tol:
            break
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        if np.linalg.norm(step) <= 1e-13 * (1 + np.linalg.norm(p)):
            break
        lam = 1.0
        accepted = False
        while lam > 2.0 ** -40:
            q = p + lam * step
            if _feasible(q, delta0, rho0):
                rq = _residual_vector(q, g, cond, f, degree)
                oq = 0.5 * float(rq @ rq)
                if oq < obj:
                    p, r, obj, accepted = q, rq, oq, True
                    break
            lam *= 0.5
        if not accepted:
            if np.linalg.norm(step) <= 1e-9 * (1 + np.linalg.norm(p)):
                break
            raise OptimizationFailure("line search failed", trace)
    disk = DiskSpec(complex(p[0], p[1]), p[2])
    return IdentificationResult(disk, float(np.sqrt(2 * obj)), it, None, trace)


def _initial_guess(g: FourierSeries, cond: Conductivities) -> DiskSpec:
    try:
        return recover_disk_exact(g, cond).disk
    except NoDiskFound as exc:
        if exc.best is not None:
            return exc.best.disk
    except InvalidArgument:
        pass
    return DiskSpec(0, 0.5)


# -- stability experiment ---------------------------------------------------

@dataclass(frozen=True)
class StabilityTable:
    rows: list
    slope: float
    intercept: float
    r_squared: float

    @property
    def envelope(self) -> float:
        """Smallest C with symdiff ≤ C ε^slope on every row with ε > 0."""
        vals = [row[1] / row[0] ** self.slope for row in self.rows if row[0] > 0]
        return float(max(vals)) if vals else 0.0


def loglog_fit(x, y) -> tuple[float, float, float]:
    """Least-squares line through (log x, log y): (slope, intercept, R²)."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        return float("nan"), float("nan"), float("nan")
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def stability_row(shape: FourierSeries, eps: float, cond: Conductivities,
                  base_radius: float = 0.4, degree: int = 128) -> tuple:
    """(ε, |D Δ D_fit|, residual, Re c, Im c, R) for one perturbation size."""
    incl = PerturbedDiskSpec(DiskSpec(0, base_radius), shape, eps)
    f = FourierSeries.cos()
    g = dtn_perturbed_disk(incl, f, cond, degree=degree).neumann
    fit = fit_disk(g, cond)
    sd = symmetric_difference_area(fit.disk, incl)
    return (eps, sd, fit.residual, fit.disk.center.real, fit.disk.center.imag, fit.disk.radius)


def stability_experiment(shape: FourierSeries, eps_grid, cond: Conductivities,
                         base_radius: float = 0.4, degree: int = 128,
                         mapper=map) -> StabilityTable:
    """
    Fit a disk to Λ_{D_ε}(cos θ) for each ε and record |D_ε Δ D_fit|.

    ``mapper`` may be a parallel map (e.g. ``Executor.map``); rows are kept
    in the order of ``eps_grid``.
    """
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise InvalidArgument("empty ε grid")
    rows = list(mapper(_StabilityJob(shape, cond, base_radius, degree), eps_grid))
    pos = [(r[0], r[1]) for r in rows if r[0] > 0 and r[1] > 0]
    if len(pos) >= 2:
        slope, intercept, r2 = loglog_fit(*zip(*pos))
    else:
        slope = intercept = r2 = float("nan")
    return StabilityTable(rows, slope, intercept, r2)


@dataclass(frozen=True)
class _StabilityJob:
    shape: FourierSeries
    cond: Conductivities
    base_radius: float
    degree: int

    def __call__(self, eps: float) -> tuple:
        return stability_row(self.shape, eps, self.cond, self.base_radius, self.degree)
