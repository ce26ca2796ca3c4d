"""
Finite-difference reference solver for div(σ∇u) = 0 in the unit disk with
σ = σ₂ on the inclusion and σ₁ elsewhere, u = f on the unit circle.

The unit disk is embedded in a uniform grid over [-1, 1]². Every face of
the 5-point flux stencil carries a conductivity smoothed over the h×h cell
around its midpoint: in cells cut by the inclusion boundary this is the
tensor with the harmonic mean of σ along the interface normal and the
arithmetic mean along the tangent, weighted by the exact fill fraction (a
scalar harmonic mean is only first order for oblique interfaces). A link
leaving the unit disk is shortened to the boundary crossing, where f is
imposed exactly (Shortley–Weller). Neumann data is read off along radii
with a one-sided second-order difference on locally interpolated values.
This code shares nothing with the spectral pipeline beyond the Fourier
transform of the final samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import shapely
from scipy.sparse.linalg import spsolve

from .dtn import Conductivities, DtnResult
from .errors import InvalidArgument, SolverFailure
from .fourier import FourierSeries, evaluate, from_samples, nodes, sobolev_norm
from .geometry import DiskSpec, PerturbedDiskSpec, ShiftedInclusion

NEUMANN_ANGLES = 256
POLYGON_VERTICES = 8192


@dataclass(frozen=True)
class GridSolution:
    grid_size: int
    values: np.ndarray
    neumann: FourierSeries
    interface_trace: FourierSeries | None = None
    residual: float = 0.0

    @property
    def spacing(self) -> float:
        return 2.0 / self.grid_size

    def coordinates(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.grid_size + 1)

    def dump(self, path) -> tuple[Path, Path]:
        """Write u as raw little-endian float64 (NaN outside the disk) plus a JSON sidecar."""
        path = Path(path)
        raw = path.with_suffix(".bin")
        side = path.with_suffix(".json")
        self.values.astype("<f8").tofile(raw)
        meta = {
            "shape": list(self.values.shape),
            "dtype": "float64",
            "byte_order": "little",
            "order": "C",
            "axes": ["y", "x"],
            "bounding_box": [-1.0, 1.0, -1.0, 1.0],
            "outside_value": "NaN",
        }
        side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return raw, side


def _level_set(inclusion):
    if isinstance(inclusion, (DiskSpec, PerturbedDiskSpec, ShiftedInclusion)):
        return inclusion.level_set
    raise InvalidArgument(f"unsupported inclusion type {type(inclusion).__name__}")


def _boundary_points(inclusion, count: int = POLYGON_VERTICES) -> np.ndarray:
    theta = nodes(count)
    if isinstance(inclusion, DiskSpec):
        return inclusion.center + inclusion.radius * np.exp(1j * theta)
    if isinstance(inclusion, PerturbedDiskSpec):
        return inclusion.polar_radius(theta) * np.exp(1j * theta)
    if isinstance(inclusion, ShiftedInclusion):
        w = inclusion.inner.polar_radius(theta) * np.exp(1j * theta)
        b = inclusion.moebius_b
        return (w + b) / (1 + np.conj(b) * w)
    raise InvalidArgument(f"unsupported inclusion type {type(inclusion).__name__}")


def _normals(level, z: np.ndarray, step: float = 1e-7) -> np.ndarray:
    """Unit outward normal of the level set through z, as complex numbers."""
    gx = level(z + step) - level(z - step)
    gy = level(z + 1j * step) - level(z - 1j * step)
    g = gx + 1j * gy
    return g / np.abs(g)


def _face_tensors(inclusion, level, cond: Conductivities, mid: np.ndarray, h: float):
    """
    Smoothed conductivity tensor (Sxx, Sxy, Syy) on h×h cells centred at the
    face midpoints ``mid``: harmonic mean of σ along the interface normal and
    arithmetic mean along the tangent, weighted by the exact fill fraction.
    """
    inside = level(mid) < 0
    iso = np.where(inside, cond.sigma2, cond.sigma1).astype(float)
    sxx, syy, sxy = iso.copy(), iso.copy(), np.zeros(mid.shape)
    near = np.abs(level(mid)) < 1.5 * h
    if not np.any(near):
        return sxx, sxy, syy
    zc = mid[near]
    poly = shapely.Polygon(np.column_stack([_boundary_points(inclusion).real,
                                            _boundary_points(inclusion).imag]))
    cells = shapely.box(zc.real - h / 2, zc.imag - h / 2, zc.real + h / 2, zc.imag + h / 2)
    frac = shapely.area(shapely.intersection(cells, poly)) / (h * h)
    frac = np.clip(frac, 0.0, 1.0)
    arith = frac * cond.sigma2 + (1 - frac) * cond.sigma1
    harm = 1.0 / (frac / cond.sigma2 + (1 - frac) / cond.sigma1)
    n = _normals(level, zc)
    nx, ny = n.real, n.imag
    sxx[near] = harm * nx * nx + arith * (1 - nx * nx)
    syy[near] = harm * ny * ny + arith * (1 - ny * ny)
    sxy[near] = (harm - arith) * nx * ny
    return sxx, sxy, syy


def _exit_fraction(z: np.ndarray, step: complex) -> np.ndarray:
    """Distance t along the unit direction ``step`` from z to the unit circle."""
    e = step / abs(step)
    pe = np.real(z * np.conj(e))
    return -pe + np.sqrt(pe * pe - (np.abs(z) ** 2 - 1))


def fd_solve(inclusion, cond: Conductivities, f: FourierSeries, grid_size: int,
             trace_angles: int = NEUMANN_ANGLES) -> GridSolution:
    """
    Solve the transmission problem on a (grid_size+1)² node grid.

    Nodes whose four neighbours lie in the disk use the flux form
    Σ_faces S∇u·ν with the smoothed tensor S of each face (the off-diagonal
    part needs the four diagonal neighbours and only appears next to the
    inclusion). Nodes next to the unit circle use the Shortley–Weller
    stencil with σ₁ and exact boundary values.
    """
    if grid_size < 64:
        raise InvalidArgument("grid_size must be at least 64")
    level = _level_set(inclusion)
    probe = nodes(2048)
    if np.any(level(0.98 * np.exp(1j * probe)) < 0):
        raise InvalidArgument("inclusion must lie strictly inside the unit disk")
    G = grid_size
    h = 2.0 / G
    x = np.linspace(-1.0, 1.0, G + 1)
    X, Y = np.meshgrid(x, x)                 # [row=y, col=x]
    Z = X + 1j * Y
    inside = np.abs(Z) < 1 - 1e-12
    idx = -np.ones(Z.shape, dtype=np.int64)
    n_unknown = int(inside.sum())
    idx[inside] = np.arange(n_unknown)
    rows, cols = np.nonzero(inside)
    z = Z[rows, cols]
    me = np.arange(n_unknown)

    regular = (inside[rows, cols + 1] & inside[rows, cols - 1]
               & inside[rows + 1, cols] & inside[rows - 1, cols])
    A_rows, A_cols, A_vals = [], [], []
    diag = np.zeros(n_unknown)
    rhs = np.zeros(n_unknown)

    def couple(mask, dr, dc, vals):
        nr, nc = rows[mask] + dr, cols[mask] + dc
        if not np.all(inside[nr, nc]):
            raise InvalidArgument("inclusion too close to the outer boundary for this grid")
        A_rows.append(me[mask])
        A_cols.append(idx[nr, nc])
        A_vals.append(vals)

    # -- flux form at regular nodes ------------------------------------------
    reg = regular
    zr = z[reg]
    faces = {
        "E": _face_tensors(inclusion, level, cond, zr + h / 2, h),
        "W": _face_tensors(inclusion, level, cond, zr - h / 2, h),
        "N": _face_tensors(inclusion, level, cond, zr + 1j * h / 2, h),
        "S": _face_tensors(inclusion, level, cond, zr - 1j * h / 2, h),
    }
    inv_h2 = 1.0 / (h * h)
    q = 0.25 * inv_h2
    sxx_e, sxy_e, _ = faces["E"]
    sxx_w, sxy_w, _ = faces["W"]
    _, syx_n, syy_n = faces["N"]
    _, syx_s, syy_s = faces["S"]
    # normal parts
    for dr, dc, coef in ((0, 1, sxx_e), (0, -1, sxx_w), (1, 0, syy_n), (-1, 0, syy_s)):
        couple(reg, dr, dc, -coef * inv_h2)
    diag[reg] += (sxx_e + sxx_w + syy_n + syy_s) * inv_h2
    # cross parts: F_E ∋ Sxy_E (u_N + u_NE - u_S - u_SE)/4h, F_W likewise with W,
    # G_N ∋ Syx_N (u_E + u_NE - u_W - u_NW)/4h, G_S likewise with S
    cross = [
        (sxy_e, ((1, 0, 1), (1, 1, 1), (-1, 0, -1), (-1, 1, -1))),
        (-sxy_w, ((1, 0, 1), (1, -1, 1), (-1, 0, -1), (-1, -1, -1))),
        (syx_n, ((0, 1, 1), (1, 1, 1), (0, -1, -1), (1, -1, -1))),
        (-syx_s, ((0, 1, 1), (-1, 1, 1), (0, -1, -1), (-1, -1, -1))),
    ]
    for coef, stencil in cross:
        nz = coef != 0
        if not np.any(nz):
            continue
        mask = np.zeros(n_unknown, dtype=bool)
        mask[np.nonzero(reg)[0][nz]] = True
        for dr, dc, sgn in stencil:
            couple(mask, dr, dc, -sgn * coef[nz] * q)

    # -- Shortley-Weller next to the unit circle ----------------------------------
    irr = ~regular
    zi = z[irr]
    if np.any(level(zi) < 0) or np.any(np.abs(level(zi)) < 2 * h):
        raise InvalidArgument("inclusion too close to the outer boundary for this grid")
    for pair in (((0, 1), (0, -1)), ((1, 0), (-1, 0))):
        arms = []
        for dr, dc in pair:
            nb_inside = inside[rows[irr] + dr, cols[irr] + dc]
            step = complex(dc * h, dr * h)
            length = np.full(zi.shape, h)
            length[~nb_inside] = _exit_fraction(zi[~nb_inside], step)
            arms.append((dr, dc, nb_inside, length, zi + length * step / h))
        total = arms[0][3] + arms[1][3]
        for dr, dc, nb_inside, length, zb in arms:
            coef = 2.0 * cond.sigma1 / (length * total)
            sub = np.zeros(n_unknown)
            sub[irr] = coef
            diag += sub
            mask = np.zeros(n_unknown, dtype=bool)
            mask[np.nonzero(irr)[0][nb_inside]] = True
            couple(mask, dr, dc, -coef[nb_inside])
            if np.any(~nb_inside):
                fb = np.real(evaluate(f, np.angle(zb[~nb_inside])))
                tgt = np.nonzero(irr)[0][~nb_inside]
                np.add.at(rhs, tgt, coef[~nb_inside] * fb)

    A_rows.append(me)
    A_cols.append(me)
    A_vals.append(diag)
    A = sp.csr_matrix((np.concatenate(A_vals), (np.concatenate(A_rows), np.concatenate(A_cols))),
                      shape=(n_unknown, n_unknown))
    try:
        u = spsolve(A.tocsc(), rhs)
    except RuntimeError as exc:
        raise SolverFailure(f"sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(u)):
        raise SolverFailure("sparse solve returned non-finite values")
    res = float(np.linalg.norm(A @ u - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if res > 1e-10:
        raise SolverFailure(f"linear residual {res:.2e} above 1e-10")

    U = np.full(Z.shape, np.nan)
    U[rows, cols] = u
    neumann = _neumann(U, f, cond, h, trace_angles)
    trace = _interface_trace(U, inclusion, h, trace_angles)
    return GridSolution(G, U, neumann, trace, res)


def _lagrange_weights(s: np.ndarray) -> np.ndarray:
    """Cubic Lagrange weights for nodes -1, 0, 1, 2 at offsets s ∈ [0, 1)."""
    return np.stack([
        -s * (s - 1) * (s - 2) / 6,
        (s + 1) * (s - 1) * (s - 2) / 2,
        -(s + 1) * s * (s - 2) / 2,
        (s + 1) * s * (s - 1) / 6,
    ], axis=-1)


def interpolate(U: np.ndarray, h: float, z: np.ndarray) -> np.ndarray:
    """Local 4×4 tensor cubic interpolation of grid values at points z."""
    z = np.asarray(z, dtype=complex)
    gx = (z.real + 1.0) / h
    gy = (z.imag + 1.0) / h
    ix = np.floor(gx).astype(int)
    iy = np.floor(gy).astype(int)
    wx = _lagrange_weights(gx - ix)
    wy = _lagrange_weights(gy - iy)
    out = np.zeros(z.shape)
    for a in range(4):
        for b in range(4):
            vals = U[iy + a - 1, ix + b - 1]
            out += wy[..., a] * wx[..., b] * vals
    if not np.all(np.isfinite(out)):
        raise SolverFailure("interpolation stencil left the computational domain")
    return out


def _neumann(U, f, cond, h, count) -> FourierSeries:
    theta = nodes(count)
    e = np.exp(1j * theta)
    d = 4 * h
    u0 = np.real(evaluate(f, theta))
    u1 = interpolate(U, h, (1 - d) * e)
    u2 = interpolate(U, h, (1 - 2 * d) * e)
    dudr = (3 * u0 - 4 * u1 + u2) / (2 * d)
    return from_samples(cond.sigma1 * dudr).real_part()


def _interface_trace(U, inclusion, h, count) -> FourierSeries | None:
    theta = nodes(count)
    if isinstance(inclusion, DiskSpec):
        pts = inclusion.center + inclusion.radius * np.exp(1j * theta)
    elif isinstance(inclusion, PerturbedDiskSpec):
        pts = inclusion.polar_radius(theta) * np.exp(1j * theta)
    else:
        return None
    return from_samples(interpolate(U, h, pts)).real_part()


def compare(reference: GridSolution, candidate, s: float = -0.5) -> float:
    """‖g_ref - g_cand‖_{H^s} on the common truncation."""
    g = candidate.neumann if isinstance(candidate, DtnResult) else candidate
    ref = reference.neumann if isinstance(reference, GridSolution) else reference
    d = min(ref.degree, g.degree)
    return sobolev_norm(ref.truncate(d) - g.truncate(d), s)
