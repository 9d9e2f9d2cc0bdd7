"""Moebius self-maps of the unit ball, the disc-to-strip map, conformal densities, transport."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutsideDomain, SingularPoint
from .geometry import DomainSpec, GridFunction, grid_from_function, sample, strip

SINGULAR_EPS = 1e-14


@dataclass(frozen=True)
class MobiusMap:
    a: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if np.linalg.norm(a) >= 1:
            raise OutsideDomain(f"|a| must be < 1, got {np.linalg.norm(a)}")
        object.__setattr__(self, "a", a)

    @property
    def inverse(self) -> "MobiusMap":
        return MobiusMap(-self.a)

    def __call__(self, x):
        return mobius_apply(self, x)


def _as_map(m) -> MobiusMap:
    return m if isinstance(m, MobiusMap) else MobiusMap(m)


def mobius_apply(m, x):
    """phi_a(x) = ((1-|a|^2) x + (|x|^2 + 2<a,x> + 1) a) / (|a|^2 |x|^2 + 2<a,x> + 1)."""
    m = _as_map(m)
    a = m.a
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != a.shape[0]:
        raise DomainError(f"point dimension {x.shape[-1]} != map dimension {a.shape[0]}")
    aa = a @ a
    xx = np.sum(x * x, axis=-1)
    ax = x @ a
    den = aa * xx + 2 * ax + 1
    if np.any(np.abs(den) < SINGULAR_EPS):
        raise SingularPoint("Moebius denominator vanishes (x = -a/|a|^2)")
    num = (1 - aa) * x + (xx + 2 * ax + 1)[..., None] * a
    return num / den[..., None]


def mobius_ball_image(m, R: float):
    """Image of B_R(0): centre (1-R^2) a/(1-R^2|a|^2), radius R(1-|a|^2)/(1-R^2|a|^2)."""
    if not 0 < R < 1:
        raise DomainError(f"R must lie in (0, 1), got {R}")
    m = _as_map(m)
    aa = m.a @ m.a
    den = 1 - R * R * aa
    return (1 - R * R) / den * m.a, R * (1 - aa) / den


def _check_disc(y):
    y = np.asarray(y, dtype=float)
    if np.any(np.sum(y * y, axis=-1) >= 1):
        raise OutsideDomain("point outside the open unit disc")
    return y


def disc_strip(y):
    """Conformal map from the unit disc onto R x (-1, 1); (+-1, 0) go to x1 = -+infinity."""
    y = _check_disc(y)
    y1, y2 = y[..., 0], y[..., 1]
    r2 = y1 * y1 + y2 * y2
    x1 = np.log(((y1 - 1) ** 2 + y2**2) / ((y1 + 1) ** 2 + y2**2)) / math.pi
    x2 = 2.0 / math.pi * np.arctan2(2 * y2, 1 - r2)
    return np.stack((x1, x2), axis=-1)


def strip_disc(x):
    """Inverse of disc_strip: z = tanh(pi (-x1 + i x2) / 4)."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x[..., 1]) >= 1):
        raise OutsideDomain("point outside the strip |x2| < 1")
    z = np.tanh(math.pi * (-x[..., 0] + 1j * x[..., 1]) / 4.0)
    return np.stack((z.real, z.imag), axis=-1)


def disc_strip_jacobian(y):
    """|det D disc_strip| = 16 / (pi^2 ((y1+1)^2 + y2^2)((y1-1)^2 + y2^2))."""
    y = _check_disc(y)
    y1, y2 = y[..., 0], y[..., 1]
    return 16.0 / (math.pi**2 * ((y1 + 1) ** 2 + y2**2) * ((y1 - 1) ** 2 + y2**2))


def hyperbolic_density(x):
    """Volume density 4/(1-|x|^2)^2 of the Poincare disc metric (N = 2)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 >= 1):
        raise OutsideDomain("point outside the open unit disc")
    return 4.0 / (1.0 - r2) ** 2


def _jacobian_weight(a, b):
    return 16.0 / (math.pi**2 * ((a + 1) ** 2 + b**2) * ((a - 1) ** 2 + b**2))


def transport(u: GridFunction, direction: str = "strip->disc", n: int = 512,
              L: float | None = None, n2: int | None = None) -> GridFunction:
    """Compose with the disc-strip map and resample bilinearly on the target grid.

    strip->disc returns an n x n disc grid weighted by the Jacobian, so that
    grid_integral reproduces strip integrals. disc->strip needs the target
    truncation L and returns an n x n2 strip grid.
    """
    if direction == "strip->disc":
        if u.domain.kind not in ("strip", "rectangle"):
            raise DomainError("strip->disc transport needs a strip grid")

        def f(a, b):
            y = np.stack((a, b), axis=-1)
            r2 = a * a + b * b
            out = np.zeros_like(a)
            m = r2 < 1
            out[m] = sample(u, disc_strip(y[m]))
            return out

        return grid_from_function(DomainSpec("disc"), n, n, f, _jacobian_weight)
    if direction == "disc->strip":
        if u.domain.kind != "disc":
            raise DomainError("disc->strip transport needs a disc grid")
        if L is None:
            raise DomainError("disc->strip transport needs the truncation L")
        n2 = n2 or max(16, n // 4)

        def g(a, b):
            return sample(u, strip_disc(np.stack((a, b), axis=-1)))

        return grid_from_function(strip(L), n, n2, g)
    raise DomainError(f"unknown direction {direction!r}")


def fd_jacobian(f, x, h: float = 1e-6):
    """Central finite-difference Jacobian of a map R^n -> R^n at x (shape (n,))."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h)
    return J

