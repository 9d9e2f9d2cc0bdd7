"""Dimensional constants, domain descriptors, radial profiles, grids and quadrature.

Radial profiles keep their breakpoints as *log* radii so that plateau radii
like k*exp(-k**N) stay representable for any k. Grids are cell centred: values
live at cell centres, every cell carries the measure h1*h2 and the Dirichlet
condition is imposed on the walls of the bounding box (ghost value = -u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, sparse
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, InvalidDimension, ToleranceNotMet

DEFAULT_RADIAL_TOL = 1e-10


# --------------------------------------------------------------------------
# constants
# --------------------------------------------------------------------------

def _gamma_half_plus_one(N: int) -> float:
    """Gamma(N/2 + 1) in closed form for integer N."""
    if N % 2 == 0:
        return float(math.factorial(N // 2))
    n = (N + 1) // 2  # Gamma(n + 1/2) with n = (N+1)/2
    return math.factorial(2 * n) * math.sqrt(math.pi) / (4**n * math.factorial(n))


def sphere_measure(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N."""
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise InvalidDimension(f"dimension must be an integer >= 2, got {N!r}")
    N = int(N)
    return N * math.pi ** (N / 2) / _gamma_half_plus_one(N)


def sharp_exponent(N: int) -> float:
    """Critical Moser exponent alpha_N = N * omega_{N-1}^{1/(N-1)}."""
    omega = sphere_measure(N)
    return N * omega ** (1.0 / (N - 1))


@dataclass(frozen=True)
class DimensionalConstants:
    N: int
    omega: float
    alpha_sharp: float

    @classmethod
    def for_dim(cls, N: int) -> "DimensionalConstants":
        return cls(int(N), sphere_measure(N), sharp_exponent(N))

    @property
    def ball_volume(self) -> float:
        return self.omega / self.N


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """One of: ball(radius), strip(truncation L), rectangle(half-length k), disc(metric).

    Planar kinds expose ``bounds`` = (x1min, x1max, x2min, x2max) of the
    truncated box the grid covers.
    """

    kind: str
    param: float = 1.0
    metric: str = "euclidean"

    def __post_init__(self):
        if self.kind not in ("ball", "strip", "rectangle", "disc"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.kind in ("ball", "strip", "rectangle") and not self.param > 0:
            raise DomainError(f"{self.kind} parameter must be positive, got {self.param}")

    @property
    def inradius(self) -> float:
        if self.kind == "ball":
            return self.param
        if self.kind == "rectangle":
            return min(self.param, 1.0)
        # strip of width 2 and the unit disc both have inradius 1
        return 1.0

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        if self.kind in ("strip", "rectangle"):
            return (-self.param, self.param, -1.0, 1.0)
        if self.kind == "disc":
            return (-1.0, 1.0, -1.0, 1.0)
        r = self.param
        return (-r, r, -r, r)

    def contains(self, x1, x2):
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        if self.kind in ("strip", "rectangle"):
            return (np.abs(x1) < self.param) & (np.abs(x2) < 1.0)
        r = 1.0 if self.kind == "disc" else self.param
        return x1**2 + x2**2 < r**2


def strip(L: float) -> DomainSpec:
    return DomainSpec("strip", float(L))


def rectangle(k: float) -> DomainSpec:
    return DomainSpec("rectangle", float(k))


def disc(metric: str = "euclidean") -> DomainSpec:
    return DomainSpec("disc", 1.0, metric)


# --------------------------------------------------------------------------
# radial profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstSegment:
    """U(r) = value for exp(log_r0) <= r < exp(log_r1)."""

    log_r0: float
    log_r1: float
    value: float

    def __call__(self, log_r):
        return np.full_like(np.asarray(log_r, dtype=float), self.value)

    def scaled(self, log_s: float) -> "ConstSegment":
        return ConstSegment(self.log_r0 - log_s, self.log_r1 - log_s, self.value)


@dataclass(frozen=True)
class LogSegment:
    """U(r) = slope * (log_r_zero - log r) on [exp(log_r0), exp(log_r1)).

    ``log_r_zero`` is the log radius where the logarithmic law would vanish.
    """

    log_r0: float
    log_r1: float
    slope: float
    log_r_zero: float

    def __call__(self, log_r):
        return self.slope * (self.log_r_zero - np.asarray(log_r, dtype=float))

    def scaled(self, log_s: float) -> "LogSegment":
        return LogSegment(self.log_r0 - log_s, self.log_r1 - log_s, self.slope,
                          self.log_r_zero - log_s)


def _ball_volume_between(log_r0: float, log_r1: float, N: int) -> float:
    """omega/N * (r1^N - r0^N) without forming tiny radii explicitly."""
    omega = sphere_measure(N)
    hi = math.exp(N * log_r1) if log_r1 < 700.0 / N else math.inf
    lo = 0.0 if log_r0 == -math.inf else math.exp(N * log_r0)
    return omega / N * (hi - lo)


@dataclass(frozen=True)
class RadialProfile:
    """Radial function u(x) = U(|x|) on R^N.

    Two representations:
      * analytic: ``segments`` of ConstSegment / LogSegment, ordered by radius;
      * sampled: step values ``step_values[i]`` on the shell whose cumulative
        measure runs from ``step_volumes[i-1]`` to ``step_volumes[i]``
        (volumes include the omega/N factor and refer to dimension ``dim``).
    U vanishes beyond the last segment / step.
    """

    segments: tuple = ()
    step_values: np.ndarray | None = None
    step_volumes: np.ndarray | None = None
    dim: int | None = None
    monotone: bool = True
    resolution: float | None = None
    label: str = ""

    @property
    def is_sampled(self) -> bool:
        return self.step_values is not None

    @property
    def support_radius(self) -> float:
        if self.is_sampled:
            if len(self.step_volumes) == 0:
                return 0.0
            return self.radius_of_volume(self.step_volumes[-1])
        if not self.segments:
            return 0.0
        return math.exp(self.segments[-1].log_r1)

    @property
    def log_support_radius(self) -> float:
        if self.is_sampled:
            r = self.support_radius
            return math.log(r) if r > 0 else -math.inf
        return self.segments[-1].log_r1 if self.segments else -math.inf

    def radius_of_volume(self, v):
        omega = sphere_measure(self.dim)
        return (self.dim * np.asarray(v, dtype=float) / omega) ** (1.0 / self.dim)

    def step_radii(self) -> np.ndarray:
        """Outer radius of every step shell."""
        return self.radius_of_volume(self.step_volumes)

    def at_log_radius(self, log_r):
        log_r = np.asarray(log_r, dtype=float)
        if self.is_sampled:
            return self(np.exp(log_r))
        out = np.zeros_like(log_r)
        for seg in self.segments:
            m = (log_r >= seg.log_r0) & (log_r < seg.log_r1)
            if np.any(m):
                out[m] = seg(log_r[m])
        return out

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_sampled:
            omega = sphere_measure(self.dim)
            vol = omega / self.dim * r**self.dim
            idx = np.searchsorted(self.step_volumes, vol, side="right")
            vals = np.append(self.step_values, 0.0)
            return vals[np.minimum(idx, len(self.step_values))]
        with np.errstate(divide="ignore"):
            return self.at_log_radius(np.log(r))

    def scaled(self, s: float) -> "RadialProfile":
        """Profile of x -> u(s x)."""
        if self.is_sampled:
            return RadialProfile(step_values=self.step_values,
                                 step_volumes=self.step_volumes / s**self.dim,
                                 dim=self.dim, monotone=self.monotone,
                                 resolution=None if self.resolution is None else self.resolution / s,
                                 label=self.label)
        log_s = math.log(s)
        return RadialProfile(tuple(seg.scaled(log_s) for seg in self.segments), dim=self.dim,
                             monotone=self.monotone, label=self.label)

    def times(self, c: float) -> "RadialProfile":
        """Profile of c*u."""
        if self.is_sampled:
            return RadialProfile(step_values=c * self.step_values, step_volumes=self.step_volumes,
                                 dim=self.dim, monotone=self.monotone and c >= 0,
                                 resolution=self.resolution, label=self.label)
        segs = []
        for seg in self.segments:
            if isinstance(seg, ConstSegment):
                segs.append(ConstSegment(seg.log_r0, seg.log_r1, c * seg.value))
            else:
                segs.append(LogSegment(seg.log_r0, seg.log_r1, c * seg.slope, seg.log_r_zero))
        return RadialProfile(tuple(segs), dim=self.dim, monotone=self.monotone and c >= 0,
                             label=self.label)

    def resampled(self, h: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Uniform radial nodes R_j = j*h and a piecewise-linear reading of U there.

        For sampled profiles the step value of every shell is attached to the
        shell's mid-volume radius; resampling at spacing h averages out the
        cell-level jitter of the sorted values.
        """
        if not self.is_sampled:
            rmax = self.support_radius
            h = h or rmax / 2048
            R = np.arange(0.0, rmax + h, h)
            return R, self(R)
        V = self.step_volumes
        if len(V) == 0:
            return np.array([0.0]), np.array([0.0])
        Vprev = np.concatenate(([0.0], V[:-1]))
        rho = self.radius_of_volume(0.5 * (Vprev + V))
        rmax = float(self.radius_of_volume(V[-1]))
        h = h or self.resolution or rmax / 512
        pts_r = np.concatenate((rho, [rmax]))
        pts_v = np.concatenate((self.step_values, [0.0]))
        R = np.arange(0.0, rmax + h, h)
        U = np.interp(R, pts_r, pts_v, left=self.step_values[0], right=0.0)
        return R, U


def constant_profile(value: float, radius: float) -> RadialProfile:
    return RadialProfile((ConstSegment(-math.inf, math.log(radius), float(value)),),
                         label="constant")


def step_profile(values: Sequence[float], volumes: Sequence[float], N: int,
                 resolution: float | None = None) -> RadialProfile:
    values = np.asarray(values, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    monotone = bool(np.all(np.diff(values) <= 0) and np.all(values >= 0))
    return RadialProfile(step_values=values, step_volumes=volumes, dim=int(N),
                         monotone=monotone, resolution=resolution, label="sampled")


# --------------------------------------------------------------------------
# radial quadrature
# --------------------------------------------------------------------------

def _log_segment_integral(seg: LogSegment, integrand, N: int, tol: float,
                          panel: float) -> tuple[float, float]:
    """int f(U(r)) r^{N-1} dr over the segment, with t = -log r."""
    t0, t1 = -seg.log_r1, -seg.log_r0
    if not math.isfinite(t1):
        raise DomainError("logarithmic segment cannot reach r = 0")
    n = max(1, int(math.ceil((t1 - t0) / panel)))
    edges = np.linspace(t0, t1, n + 1)

    def g(t):
        u = seg.slope * (seg.log_r_zero + t)
        return float(integrand(u)) * math.exp(-N * t)

    val = err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(g, a, b, epsabs=tol / n, epsrel=1e-12, limit=200)
        val += v
        err += e
    return val, err


def radial_integral(profile: RadialProfile, integrand: Callable, N: int,
                    tol: float = DEFAULT_RADIAL_TOL, rtol: float = 1e-9) -> float:
    """omega_{N-1} * int_0^inf integrand(U(rho)) rho^{N-1} drho.

    Constant pieces are integrated exactly; logarithmic pieces are integrated
    in t = log(1/rho) over panels of bounded length so the exponential weight
    never spans more than a few decades within one panel.
    """
    omega = sphere_measure(N)
    if profile.is_sampled:
        if profile.dim != N:
            raise DomainError(f"sampled profile has dimension {profile.dim}, asked for {N}")
        dV = np.diff(np.concatenate(([0.0], profile.step_volumes)))
        fv = np.asarray(integrand(profile.step_values), dtype=float)
        fv = np.broadcast_to(fv, dV.shape)
        return float(np.sum(fv * dV))
    total = 0.0
    err = 0.0
    for seg in profile.segments:
        if isinstance(seg, ConstSegment):
            vol = _ball_volume_between(seg.log_r0, seg.log_r1, N)
            fv = float(integrand(seg.value))
            if vol > 0 and fv != 0:
                total += fv * vol
        else:
            v, e = _log_segment_integral(seg, integrand, N, tol, panel=max(8.0 / N, 1.0))
            total += omega * v
            err += omega * e
    if err > max(tol, rtol * abs(total)):
        raise ToleranceNotMet("radial quadrature did not converge", err)
    return total


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Cell-centred samples on a uniform tensor grid over a truncated planar domain.

    ``values[i, j]`` is the value at (x1[i], x2[j]). ``weight`` is an optional
    density multiplying the cell area in integrals (e.g. a conformal factor on
    the disc); the Dirichlet energy is always the Euclidean one.
    """

    domain: DomainSpec
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray
    weight: np.ndarray | None = field(default=None)

    @property
    def h1(self) -> float:
        lo, hi = self.domain.bounds[:2]
        return (hi - lo) / len(self.x1)

    @property
    def h2(self) -> float:
        lo, hi = self.domain.bounds[2:]
        return (hi - lo) / len(self.x2)

    @property
    def shape(self):
        return self.values.shape

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    @property
    def cell_measure(self):
        if self.weight is None:
            return self.cell_area
        return self.cell_area * self.weight

    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.domain, self.x1, self.x2, np.asarray(values, dtype=float),
                            self.weight)

    def with_weight(self, weight) -> "GridFunction":
        return GridFunction(self.domain, self.x1, self.x2, self.values, weight)

    def __mul__(self, c: float) -> "GridFunction":
        return self.with_values(c * self.values)

    __rmul__ = __mul__


def make_grid(domain: DomainSpec, n1: int, n2: int) -> tuple[np.ndarray, np.ndarray]:
    x1lo, x1hi, x2lo, x2hi = domain.bounds
    h1 = (x1hi - x1lo) / n1
    h2 = (x2hi - x2lo) / n2
    x1 = x1lo + h1 * (np.arange(n1) + 0.5)
    x2 = x2lo + h2 * (np.arange(n2) + 0.5)
    return x1, x2


def grid_from_function(domain: DomainSpec, n1: int, n2: int, func: Callable,
                       weight: Callable | None = None) -> GridFunction:
    """Sample func(x1, x2) at cell centres; cells outside the domain are set to 0."""
    x1, x2 = make_grid(domain, n1, n2)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    inside = domain.contains(X1, X2)
    vals = np.where(inside, func(X1, X2), 0.0).astype(float)
    w = None
    if weight is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(inside, weight(X1, X2), 0.0)
    return GridFunction(domain, x1, x2, vals, w)


def zero_grid(domain: DomainSpec, n1: int, n2: int) -> GridFunction:
    return grid_from_function(domain, n1, n2, lambda a, b: np.zeros_like(a))


def strip_grid(L: float, n1: int, n2: int, func: Callable | None = None) -> GridFunction:
    func = func or (lambda a, b: np.zeros_like(a))
    return grid_from_function(strip(L), n1, n2, func)


def rectangle_grid(k: float, n1: int, n2: int, func: Callable | None = None) -> GridFunction:
    func = func or (lambda a, b: np.zeros_like(a))
    return grid_from_function(rectangle(k), n1, n2, func)


def disc_grid(n: int, func: Callable | None = None, weight: Callable | None = None) -> GridFunction:
    func = func or (lambda a, b: np.zeros_like(a))
    return grid_from_function(disc(), n, n, func, weight)


def grid_integral(u: GridFunction, integrand: Callable) -> float:
    """Sum of integrand(value) * cell measure."""
    vals = np.asarray(integrand(u.values), dtype=float)
    return float(np.sum(vals * u.cell_measure))


def grid_gradient(u: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise gradient: centred differences inside, one-sided on the boundary ring."""
    g1, g2 = np.gradient(u.values, u.h1, u.h2)
    return g1, g2


def energy_density(u: GridFunction) -> np.ndarray:
    """Per-cell share of the discrete Dirichlet integral int |grad u|^2.

    Every interior face contributes (jump)^2 * (face length / centre distance)
    split evenly between its two cells; wall faces see the ghost value -u at
    distance h/2 and contribute 2 u^2 * (face length / h) to their cell.
    """
    v = u.values
    r1 = u.h2 / u.h1
    r2 = u.h1 / u.h2
    dens = np.zeros_like(v)
    d1 = np.diff(v, axis=0) ** 2 * r1
    dens[:-1, :] += 0.5 * d1
    dens[1:, :] += 0.5 * d1
    d2 = np.diff(v, axis=1) ** 2 * r2
    dens[:, :-1] += 0.5 * d2
    dens[:, 1:] += 0.5 * d2
    dens[0, :] += 2.0 * v[0, :] ** 2 * r1
    dens[-1, :] += 2.0 * v[-1, :] ** 2 * r1
    dens[:, 0] += 2.0 * v[:, 0] ** 2 * r2
    dens[:, -1] += 2.0 * v[:, -1] ** 2 * r2
    return dens


def grid_energy_density(u: GridFunction, N: int = 2) -> np.ndarray:
    """Per-cell approximation of |grad u|^N * cell area."""
    dens = energy_density(u)
    if N == 2:
        return dens
    area = u.cell_area
    return area * (dens / area) ** (N / 2.0)


def dirichlet_matrix(n1: int, n2: int, h1: float, h2: float) -> sparse.csr_matrix:
    """Sparse A with u.T @ A @ u equal to the discrete Dirichlet integral (row-major u)."""

    def lap1d(n):
        main = np.full(n, 2.0)
        main[0] = main[-1] = 3.0
        off = -np.ones(n - 1)
        return sparse.diags([off, main, off], [-1, 0, 1], format="csr")

    A = sparse.kron(lap1d(n1), sparse.identity(n2), format="csr") * (h2 / h1)
    A = A + sparse.kron(sparse.identity(n1), lap1d(n2), format="csr") * (h1 / h2)
    return A.tocsr()


def sample(u: GridFunction, points: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of u at points (..., 2); zero on and beyond the walls."""
    x1lo, x1hi, x2lo, x2hi = u.domain.bounds
    ax1 = np.concatenate(([x1lo], u.x1, [x1hi]))
    ax2 = np.concatenate(([x2lo], u.x2, [x2hi]))
    padded = np.pad(u.values, 1)
    interp = RegularGridInterpolator((ax1, ax2), padded, method="linear",
                                     bounds_error=False, fill_value=0.0)
    pts = np.asarray(points, dtype=float)
    return interp(pts.reshape(-1, 2)).reshape(pts.shape[:-1])
