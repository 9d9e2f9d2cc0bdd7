"""Closed-form generators for the explicit test sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .conformal import MobiusMap, mobius_apply, mobius_ball_image
from .errors import DomainError, GridTooCoarse, SupportExitsTruncation
from .geometry import (ConstSegment, DomainSpec, GridFunction, LogSegment, RadialProfile,
                       grid_from_function, rectangle, sample, sphere_measure, strip)


def moser(N: int, k: float) -> RadialProfile:
    """Plateau k^{N-1}/omega^{1/N} for |x| <= k e^{-k^N}, log(k/|x|)/(k omega^{1/N}) up to |x| = k."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    w = sphere_measure(N) ** (1.0 / N)
    log_k = math.log(k)
    edge = log_k - float(k) ** N
    segs = (ConstSegment(-math.inf, edge, k ** (N - 1) / w),
            LogSegment(edge, log_k, 1.0 / (k * w), log_k))
    return RadialProfile(segs, dim=N, label=f"moser(N={N},k={k})")


def scaled_moser(N: int, k: float, C: float) -> RadialProfile:
    """x -> u_k(s x) with s = (N!/(N^{N+1} C))^{1/N}, so that int v^N <= C."""
    if not C > 0:
        raise DomainError(f"C must be positive, got {C}")
    s = (math.factorial(N) / (N ** (N + 1) * C)) ** (1.0 / N)
    prof = moser(N, k).scaled(s)
    return RadialProfile(prof.segments, dim=N, label=f"scaled_moser(N={N},k={k},C={C})")


def capped_moser(N: int, R: float | None = None, log_inv_R: float | None = None) -> RadialProfile:
    """Unit-energy profile: plateau (log 1/R)^{(N-1)/N}/omega^{1/N} below R/2, zero beyond 1/2.

    Pass ``log_inv_R`` directly when R itself would underflow.
    """
    if log_inv_R is None:
        if R is None or not 0 < R < 0.5:
            raise DomainError(f"R must lie in (0, 1/2), got {R}")
        log_inv_R = -math.log(R)
    L = float(log_inv_R)
    if not L > math.log(2.0):
        raise DomainError("R must be below 1/2")
    w = sphere_measure(N) ** (1.0 / N)
    edge = -L - math.log(2.0)
    half = -math.log(2.0)
    segs = (ConstSegment(-math.inf, edge, L ** ((N - 1) / N) / w),
            LogSegment(edge, half, 1.0 / (L ** (1.0 / N) * w), half))
    return RadialProfile(segs, dim=N, label=f"capped_moser(N={N},log1/R={L:.6g})")


def strip_eigenfunction(k: float, n1: int = 256, n2: int = 128,
                        L: float | None = None) -> GridFunction:
    """cos(pi x1/(2k)) cos(pi x2/2) on (-k,k)x(-1,1), zero elsewhere.

    The grid covers the rectangle itself, or the strip truncated at L >= k.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    dom = rectangle(k) if L is None else strip(L)
    if L is not None and L < k:
        raise DomainError(f"truncation L={L} does not cover the rectangle k={k}")
    width = 2.0 * (k if L is None else L)
    cells_across = 2.0 * k * n1 / width
    if cells_across < 16 or n2 < 16:
        raise GridTooCoarse(f"{cells_across:.1f} x {n2} cells across the rectangle, need 16")

    def phi(x1, x2):
        inside = np.abs(x1) < k
        return np.where(inside, np.cos(np.pi * x1 / (2 * k)) * np.cos(np.pi * x2 / 2), 0.0)

    return grid_from_function(dom, n1, n2, phi)


def jensen_lower_bound(k: float) -> float:
    """Jensen lower bound 4k(e^{(4/pi) k/(k^2+1)} - 1) for the normalized rectangle eigenfunction."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return 4.0 * k * math.expm1(4.0 / math.pi * k / (k * k + 1.0))


def vanishing_family(base: GridFunction, k: float) -> GridFunction:
    """Translate by (k, 0); exact shift when k is a whole number of cells."""
    if k == 0:
        return base
    h1 = base.h1
    shift = k / h1
    vals = base.values
    cols = np.nonzero(np.any(vals != 0, axis=1))[0]
    if cols.size == 0:
        return base
    n1 = vals.shape[0]
    if abs(shift - round(shift)) < 1e-9:
        m = int(round(shift))
        if cols[-1] + m >= n1 or cols[0] + m < 0:
            raise SupportExitsTruncation(f"translate by {k} leaves the truncated strip")
        out = np.zeros_like(vals)
        if m >= 0:
            out[m:, :] = vals[:n1 - m, :]
        else:
            out[:m, :] = vals[-m:, :]
        return base.with_values(out)
    lo = base.x1[cols[0]] + k - h1
    hi = base.x1[cols[-1]] + k + h1
    x1lo, x1hi = base.domain.bounds[:2]
    if hi > x1hi or lo < x1lo:
        raise SupportExitsTruncation(f"translate by {k} leaves the truncated strip")
    X1, X2 = base.mesh()
    pts = np.stack((X1 - k, X2), axis=-1)
    return base.with_values(sample(base, pts))


@dataclass(frozen=True)
class MobiusBump:
    """Disc function x -> U(|phi_{-c}(x)|), i.e. base composed with the inverse of phi_c."""

    base: RadialProfile
    center: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = mobius_apply(MobiusMap(-self.center), x)
        return self.base(np.linalg.norm(y, axis=-1))

    def support_ball(self, radius: float = 0.5):
        return mobius_ball_image(MobiusMap(self.center), radius)

    def on_grid(self, n: int, weight: Callable | None = None) -> GridFunction:
        dom = DomainSpec("disc")
        return grid_from_function(dom, n, n, lambda a, b: self(np.stack((a, b), axis=-1)),
                                  weight)


def mobius_bump_family(base: RadialProfile, centers: Sequence) -> list[MobiusBump]:
    """Members base o phi_{x_k}^{-1}; each supported in phi_{x_k}(B_{1/2})."""
    if base.support_radius > 0.5 + 1e-12:
        raise DomainError("base profile must be supported in the ball of radius 1/2")
    out = []
    for c in centers:
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if np.linalg.norm(c) >= 1:
            raise DomainError("centers must lie in the open unit ball")
        out.append(MobiusBump(base, c))
    return out


def radial_bump(radius: float, height: float = 1.0) -> Callable:
    """Smooth compactly supported bump (1 - (r/radius)^2)^3 centred at the origin."""

    def f(x1, x2):
        s = (x1**2 + x2**2) / radius**2
        return height * np.where(s < 1, (1 - s) ** 3, 0.0)

    return f


def profile_rows(profile: RadialProfile, radii) -> list[tuple[float, float]]:
    radii = np.asarray(radii, dtype=float)
    return list(zip(radii.tolist(), np.asarray(profile(radii)).tolist()))


def grid_rows(u: GridFunction) -> list[tuple[float, float, float]]:
    X1, X2 = u.mesh()
    return list(zip(X1.ravel().tolist(), X2.ravel().tolist(), u.values.ravel().tolist()))
