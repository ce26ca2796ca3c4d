"""
Truncated Fourier series on the unit circle.

Convention: f(e^{iθ}) = Σ_{n=-N}^{N} c_n e^{inθ} with
c_n = (1/2π) ∫ f(θ) e^{-inθ} dθ. Coefficients are stored in a dense array
indexed n = -N..N, so ``coeffs[N + n]`` is c_n.

Sobolev norms are seminorms: the n = 0 mode is always dropped, i.e. functions
are considered modulo the constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument


def nodes(count: int) -> np.ndarray:
    """Equispaced angles 2πj/count, j = 0..count-1."""
    return 2.0 * np.pi * np.arange(count) / count


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Complex coefficients c_{-N..N} of a trigonometric polynomial."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise InvalidArgument("coefficient array must be 1-D with odd length 2N+1")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, degree: int) -> "FourierSeries":
        return cls(np.zeros(2 * degree + 1, dtype=complex))

    @classmethod
    def constant(cls, value: complex, degree: int = 0) -> "FourierSeries":
        c = np.zeros(2 * degree + 1, dtype=complex)
        c[degree] = value
        return cls(c)

    @classmethod
    def from_modes(cls, modes: dict[int, complex], degree: int | None = None) -> "FourierSeries":
        """Build a series from a sparse ``{n: c_n}`` mapping."""
        top = max((abs(n) for n in modes), default=0)
        degree = top if degree is None else degree
        if degree < top:
            raise InvalidArgument(f"degree {degree} cannot hold mode {top}")
        c = np.zeros(2 * degree + 1, dtype=complex)
        for n, value in modes.items():
            c[degree + n] += value
        return cls(c)

    @classmethod
    def cos(cls, k: int = 1, degree: int | None = None) -> "FourierSeries":
        if k == 0:
            return cls.constant(1.0, degree or 0)
        return cls.from_modes({k: 0.5, -k: 0.5}, degree)

    @classmethod
    def sin(cls, k: int = 1, degree: int | None = None) -> "FourierSeries":
        return cls.from_modes({k: -0.5j, -k: 0.5j}, degree)

    @classmethod
    def from_function(cls, func, degree: int, oversample: int = 4) -> "FourierSeries":
        """Sample ``func`` on a fine grid and keep modes up to ``degree``."""
        m = max(oversample * degree, degree + 1)
        return from_samples(func(nodes(2 * m))).truncate(degree)

    # -- basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        n = self.degree
        return np.arange(-n, n + 1)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.degree:
            return 0j
        return complex(self.coeffs[self.degree + n])

    @property
    def mean(self) -> complex:
        return self[0]

    def is_real(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
        return bool(np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) <= tol * scale)

    def real_part(self) -> "FourierSeries":
        """Series of Re f, i.e. (c_n + conj(c_{-n}))/2."""
        c = self.coeffs
        return FourierSeries(0.5 * (c + np.conj(c[::-1])))

    # -- arithmetic -------------------------------------------------------
    def resize(self, degree: int) -> "FourierSeries":
        """Zero-pad or truncate to ``degree``."""
        n = self.degree
        if degree == n:
            return self
        out = np.zeros(2 * degree + 1, dtype=complex)
        k = min(n, degree)
        out[degree - k:degree + k + 1] = self.coeffs[n - k:n + k + 1]
        return FourierSeries(out)

    truncate = resize

    def _aligned(self, other: "FourierSeries"):
        d = max(self.degree, other.degree)
        return self.resize(d).coeffs, other.resize(d).coeffs

    def __add__(self, other):
        if isinstance(other, FourierSeries):
            a, b = self._aligned(other)
            return FourierSeries(a + b)
        return self + FourierSeries.constant(other)

    __radd__ = __add__

    def __neg__(self):
        return FourierSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, FourierSeries):
            return NotImplemented
        return FourierSeries(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FourierSeries(self.coeffs / scalar)

    def apply_multiplier(self, multiplier) -> "FourierSeries":
        """Return the series with c_n replaced by m(n)·c_n."""
        return FourierSeries(self.coeffs * multiplier(self.modes))

    def allclose(self, other: "FourierSeries", atol: float = 1e-12) -> bool:
        a, b = self._aligned(other)
        return bool(np.max(np.abs(a - b), initial=0.0) <= atol)

    # -- evaluation -------------------------------------------------------
    def __call__(self, theta):
        return evaluate(self, theta)

    def samples(self, count: int) -> np.ndarray:
        """Values at ``count`` equispaced nodes; exact when count > 2N."""
        return to_samples(self, count)


def from_samples(samples) -> FourierSeries:
    """
    Transform 2M equispaced samples into a degree M-1 series.

    The Nyquist mode -M is discarded, so samples of a trigonometric
    polynomial of degree ≤ M-1 are reproduced exactly.
    """
    v = np.asarray(samples)
    if v.ndim != 1 or v.size == 0 or v.size % 2:
        raise InvalidArgument("from_samples needs a non-empty, even-length 1-D array")
    m = v.size // 2
    spectrum = np.fft.fft(v) / v.size
    # spectrum[k] ↔ mode k for k < M, mode k - 2M for k ≥ M
    c = np.concatenate([spectrum[m + 1:], spectrum[:m]])
    return FourierSeries(c)


def to_samples(series: FourierSeries, count: int) -> np.ndarray:
    """Inverse of :func:`from_samples`; aliases when count ≤ 2N."""
    buf = np.zeros(count, dtype=complex)
    np.add.at(buf, series.modes % count, series.coeffs)
    return np.fft.ifft(buf) * count


def evaluate(series: FourierSeries, theta) -> np.ndarray:
    """Exact evaluation Σ c_n e^{inθ} at arbitrary angles."""
    t = np.asarray(theta, dtype=float)
    flat = t.reshape(-1)
    out = np.empty(flat.size, dtype=complex)
    n = series.degree
    # Clenshaw-free direct sum, chunked to bound memory
    chunk = max(1, 2 ** 22 // (2 * n + 1))
    for start in range(0, flat.size, chunk):
        block = flat[start:start + chunk]
        phase = np.exp(1j * np.outer(block, series.modes))
        out[start:start + chunk] = phase @ series.coeffs
    out = out.reshape(t.shape)
    return out if t.ndim else out[()]


def hilbert_transform(series: FourierSeries) -> FourierSeries:
    """Conjugate function: c_n ↦ -i·sgn(n)·c_n."""
    return series.apply_multiplier(lambda n: -1j * np.sign(n))


def derivative(series: FourierSeries) -> FourierSeries:
    return series.apply_multiplier(lambda n: 1j * n)


def sobolev_norm(series: FourierSeries, s: float) -> float:
    """
    Seminorm (Σ_{n≠0} |n|^{2s} |c_n|²)^{1/2}.

    For s = 1/2 this is the usual H^{1/2}(S^1) norm of functions modulo
    constants; negative s gives the dual norms used for Neumann data.
    """
    n = series.modes
    mask = n != 0
    w = np.abs(n[mask]).astype(float) ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(series.coeffs[mask]) ** 2)))


def intrinsic_half_norm(series: FourierSeries, resolution: int | None = None) -> float:
    """
    Gagliardo form of the H^{1/2} seminorm,

        ( (1/4π) ∬ |f(θ) - f(α)|² / |e^{iθ} - e^{iα}|² dθ dα )^{1/2},

    by the tensor trapezoid rule. On the diagonal the integrand is replaced
    by its limit |f'(θ)|². For a degree-N polynomial the integrand is a
    trigonometric polynomial of degree ≤ 2N-2 in each variable, so any
    resolution above 2N integrates it exactly; below 4N is refused.
    """
    deg = series.degree
    if resolution is None:
        resolution = max(8, 8 * deg)
    if resolution < 4 * deg:
        raise InvalidArgument(
            f"resolution {resolution} below 4x degree {deg} would alias"
        )
    theta = nodes(resolution)
    f = to_samples(series, resolution)
    df = to_samples(derivative(series), resolution)
    num = np.abs(f[:, None] - f[None, :]) ** 2
    den = np.abs(np.exp(1j * theta)[:, None] - np.exp(1j * theta)[None, :]) ** 2
    np.fill_diagonal(den, 1.0)
    integrand = num / den
    np.fill_diagonal(integrand, np.abs(df) ** 2)
    h = 2.0 * np.pi / resolution
    total = integrand.sum() * h * h / (4.0 * np.pi)
    return float(np.sqrt(total))


def compose(series: FourierSeries, circle_map, oversample: int = 2,
            degree: int | None = None) -> FourierSeries:
    """
    Truncated series of f∘ξ.

    f is evaluated exactly at the mapped nodes ξ(θ_j) and transformed back.
    The output degree is ``oversample × deg f`` unless ``degree`` is given;
    the sampling grid always carries ``oversample`` times the output degree.
    """
    if oversample < 2:
        raise InvalidArgument("oversample factor must be ≥ 2")
    circle_map.require_monotone()
    out_deg = degree if degree is not None else max(1, oversample * series.degree)
    m = oversample * out_deg + 1
    theta = nodes(2 * m)
    values = evaluate(series, circle_map(theta))
    return from_samples(values).truncate(out_deg)


@dataclass(frozen=True, eq=False)
class CircleMap:
    """
    Orientation-preserving diffeomorphism ξ of S^1, stored through its
    periodic displacement d = ξ - Id as a real Fourier series.
    """

    displacement: FourierSeries
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.check:
            if not self.displacement.is_real(1e-9):
                raise InvalidArgument("displacement of a circle map must be real")
            if self.sup_displacement() >= np.pi:
                raise InvalidArgument("displacement sup-norm must be below π")
            self.require_monotone()

    @classmethod
    def identity(cls, degree: int = 0) -> "CircleMap":
        return cls(FourierSeries.zeros(degree))

    @classmethod
    def rotation(cls, angle: float) -> "CircleMap":
        return cls(FourierSeries.constant(angle))

    @classmethod
    def from_displacement_samples(cls, samples, degree: int | None = None,
                                  check: bool = True) -> "CircleMap":
        d = from_samples(np.real(np.asarray(samples))).real_part()
        if degree is not None:
            d = d.truncate(degree)
        return cls(d, check=check)

    @classmethod
    def from_function(cls, func, degree: int, oversample: int = 4) -> "CircleMap":
        """``func`` returns ξ(θ) (not the displacement)."""
        m = oversample * degree
        theta = nodes(2 * m)
        return cls.from_displacement_samples(func(theta) - theta, degree)

    @property
    def degree(self) -> int:
        return self.displacement.degree

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        return t + np.real(evaluate(self.displacement, t))

    def derivative(self, theta) -> np.ndarray:
        return 1.0 + np.real(evaluate(derivative(self.displacement), theta))

    def grid(self, factor: int = 32) -> np.ndarray:
        return nodes(max(256, factor * max(self.degree, 1)))

    def derivative_samples(self, factor: int = 32) -> np.ndarray:
        count = max(256, factor * max(self.degree, 1))
        return 1.0 + np.real(to_samples(derivative(self.displacement), count))

    def min_derivative(self) -> float:
        return float(self.derivative_samples().min())

    def require_monotone(self):
        if self.min_derivative() <= 0.0:
            raise InvalidArgument("circle map is not monotone (ξ' ≤ 0 somewhere)")

    def sup_displacement(self) -> float:
        count = max(256, 32 * max(self.degree, 1))
        return float(np.max(np.abs(to_samples(self.displacement, count))))

    def w1inf_distance(self) -> float:
        """max(sup|ξ - Id|, sup|ξ' - 1|) on a 32×degree grid."""
        return max(self.sup_displacement(),
                   float(np.max(np.abs(self.derivative_samples() - 1.0))))
