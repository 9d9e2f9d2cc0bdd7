"""Truncated exponentials, Dirichlet energies, Lebesgue norms and the MT functional."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, PhiOverflow
from .geometry import (ConstSegment, GridFunction, LogSegment, RadialProfile,
                       grid_energy_density, grid_integral, radial_integral,
                       sharp_exponent, sphere_measure)
from .report import Report

OVERFLOW_EXPONENT = 700.0
TAIL_TERMS = 30


def _tail_series(x: np.ndarray, k: int) -> np.ndarray:
    """sum_{j>=k} x^j/j! for 0 <= x <= 1, smallest terms first with Neumaier compensation."""
    terms = [x**k / math.factorial(k)]
    for j in range(k + 1, k + TAIL_TERMS):
        terms.append(terms[-1] * x / j)
    total = np.zeros_like(x)
    comp = np.zeros_like(x)
    for term in reversed(terms):
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + comp


def truncated_exp(x, k: int):
    """e^x - sum_{j<k} x^j/j! for x >= 0, accurate to ~1e-15 relative.

    Raises PhiOverflow for x above the overflow threshold.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x > OVERFLOW_EXPONENT):
        raise PhiOverflow(float(np.max(x)))
    if k <= 0:
        return np.exp(x)
    small = x <= 1.0
    out = np.empty_like(x)
    if np.any(small):
        out[small] = _tail_series(x[small], k)
    if np.any(~small):
        xl = x[~small]
        partial = np.zeros_like(xl)
        term = np.ones_like(xl)
        for j in range(1, k):
            term = term * xl / j
            partial += term
        out[~small] = np.expm1(xl) - partial
    return out


def log_truncated_exp(x, k: int):
    """log(e^x - sum_{j<k} x^j/j!) without overflow; -inf at x = 0 when k >= 1."""
    x = np.asarray(x, dtype=float)
    if k <= 0:
        return x.copy()
    out = np.empty_like(x)
    mid = x <= OVERFLOW_EXPONENT
    if np.any(mid):
        with np.errstate(divide="ignore"):
            out[mid] = np.log(truncated_exp(x[mid], k))
    big = ~mid
    if np.any(big):
        xb = x[big]
        corr = np.zeros_like(xb)
        for j in range(k):
            corr += np.exp(j * np.log(xb) - gammaln(j + 1) - xb)
        out[big] = xb + np.log1p(-corr)
    return out


@dataclass(frozen=True)
class TruncatedExpSpec:
    """Phi^alpha_k(u) = e^{alpha |u|^{N/(N-1)}} minus its first k_trunc Taylor terms."""

    N: int = 2
    alpha: float | None = None
    k_trunc: int | None = None

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", sharp_exponent(self.N))
        if self.k_trunc is None:
            object.__setattr__(self, "k_trunc", self.N - 1)
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.k_trunc < 1:
            raise DomainError(f"k_trunc must be >= 1, got {self.k_trunc}")

    @property
    def q(self) -> float:
        return self.N / (self.N - 1)

    def exponent(self, u):
        return self.alpha * np.abs(np.asarray(u, dtype=float)) ** self.q


def phi_eval(spec: TruncatedExpSpec, u):
    """Truncated exponential of u; scalar in, float out; array in, array out."""
    x = spec.exponent(u)
    try:
        val = truncated_exp(x, spec.k_trunc)
    except PhiOverflow as exc:
        flat = np.atleast_1d(x)
        i = int(np.argmax(flat))
        loc = float(np.atleast_1d(np.asarray(u, dtype=float))[i])
        raise PhiOverflow(exc.exponent, location=f"u={loc:.6g}") from None
    return float(val) if np.ndim(val) == 0 else val


def phi_derivative(spec: TruncatedExpSpec, u):
    """d/du Phi^alpha_k(u) = x'(u) * Phi_{k-1}(x)."""
    u = np.asarray(u, dtype=float)
    x = spec.exponent(u)
    dx = spec.alpha * spec.q * np.abs(u) ** (spec.q - 1) * np.sign(u)
    val = dx * truncated_exp(x, spec.k_trunc - 1)
    return float(val) if np.ndim(val) == 0 else val


def phi_identity_check(spec: TruncatedExpSpec, samples=None, tol: float = 1e-12) -> Report:
    """Phi^alpha(u) == Phi((alpha/alpha_N)^{(N-1)/N} u) at sampled u (relative deviation)."""
    if spec.k_trunc != spec.N - 1:
        raise DomainError("identity requires k_trunc = N - 1")
    samples = np.asarray([0.0, 0.1, 0.5, 1.0, 2.0] if samples is None else samples, dtype=float)
    sharp = TruncatedExpSpec(spec.N)
    c = (spec.alpha / sharp.alpha) ** ((spec.N - 1) / spec.N)
    lhs = np.atleast_1d(phi_eval(spec, samples))
    rhs = np.atleast_1d(phi_eval(sharp, c * samples))
    scale = np.maximum(np.abs(lhs), np.finfo(float).tiny)
    dev = np.where(lhs == rhs, 0.0, np.abs(lhs - rhs) / scale)
    worst = float(np.max(dev)) if dev.size else 0.0
    return Report(worst <= tol, worst, {"samples": samples, "lhs": lhs, "rhs": rhs})


def tail_bound_check(N: int, u_samples) -> Report:
    """Phi(u) <= alpha_N^{N-1} |u|^N e^{alpha_N |u|^{N/(N-1)}} / (N-1)!, compared in logs."""
    u = np.abs(np.asarray(u_samples, dtype=float))
    if np.any(np.asarray(u_samples) < 0):
        raise DomainError("samples must be nonnegative")
    spec = TruncatedExpSpec(N)
    x = spec.exponent(u)
    pos = u > 0
    log_ratio = np.full_like(u, -np.inf)
    xp = x[pos]
    log_lhs = log_truncated_exp(xp, N - 1)
    log_rhs = (N - 1) * np.log(xp) + xp - gammaln(N)
    log_ratio[pos] = log_lhs - log_rhs
    ratio = np.exp(log_ratio)
    worst = float(np.max(ratio)) if ratio.size else 0.0
    return Report(worst <= 1.0 + 1e-12, worst, {"ratio": ratio})


# --------------------------------------------------------------------------
# integrals of a function
# --------------------------------------------------------------------------

def _profile_dim(u: RadialProfile, N: int | None) -> int:
    N = N if N is not None else u.dim
    if N is None:
        raise DomainError("dimension required for an analytic radial profile")
    return int(N)


def mt_functional(u, spec: TruncatedExpSpec, overflow: str = "raise") -> float:
    """int Phi^alpha(u) over the domain (radial quadrature or grid sum).

    With overflow="inf" an overflowing integrand yields +inf instead of PhiOverflow.
    """

    def f(t):
        return phi_eval(spec, t)

    try:
        if isinstance(u, RadialProfile):
            return radial_integral(u, f, spec.N)
        return grid_integral(u, f)
    except PhiOverflow:
        if overflow == "inf":
            return math.inf
        raise


def profile_energy(u: RadialProfile, N: int, radius: float = math.inf) -> float:
    """int_{B_radius} |grad u|^N for a radial profile.

    Closed form on analytic segments (energy of a log piece on [r0, r1] is
    omega*|B|^N*log(r1/r0)); sampled profiles use their uniform radial
    resampling with piecewise-linear U.
    """
    omega = sphere_measure(N)
    if not u.is_sampled:
        log_cut = math.log(radius) if radius > 0 else -math.inf
        total = 0.0
        for seg in u.segments:
            if isinstance(seg, LogSegment):
                hi = min(seg.log_r1, log_cut)
                if hi > seg.log_r0:
                    total += omega * abs(seg.slope) ** N * (hi - seg.log_r0)
            elif not isinstance(seg, ConstSegment):
                raise DomainError(f"unknown segment {seg!r}")
        return total
    if u.dim != N:
        raise DomainError(f"sampled profile has dimension {u.dim}, asked for {N}")
    R, U = u.resampled()
    if len(R) < 2:
        return 0.0
    h = R[1] - R[0]
    slope = np.abs(np.diff(U)) / h
    lo, hi = R[:-1], R[1:]
    if math.isfinite(radius):
        hi = np.minimum(hi, radius)
    shell = np.clip(hi**N - lo**N, 0.0, None) / N
    return float(omega * np.sum(slope**N * shell))


def dirichlet_energy(u, N: int | None = None) -> float:
    """int |grad u|^N."""
    if isinstance(u, RadialProfile):
        return profile_energy(u, _profile_dim(u, N))
    return float(np.sum(grid_energy_density(u, 2 if N is None else N)))


def lp_norm(u, p: float, N: int | None = None) -> float:
    """(int |u|^p)^{1/p}; p may be non-integer."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if isinstance(u, RadialProfile):
        val = radial_integral(u, lambda t: np.abs(t) ** p, _profile_dim(u, N))
    else:
        val = grid_integral(u, lambda t: np.abs(t) ** p)
    return max(val, 0.0) ** (1.0 / p)


def normalize_energy(u: GridFunction, N: int = 2) -> GridFunction:
    """Rescale so the discrete Dirichlet integral equals 1."""
    E = dirichlet_energy(u, N)
    if E <= 0:
        raise DomainError("cannot normalize the zero function")
    return u * E ** (-1.0 / N)
