"""First Dirichlet eigenvalue: closed form on rectangles and inverse power iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import cg

from .errors import DomainError, GridTooCoarse, NonConvergence
from .functionals import dirichlet_energy, lp_norm
from .geometry import GridFunction, dirichlet_matrix, rectangle_grid


def rectangle_lambda1(k: float) -> float:
    """lambda_1((-k,k) x (-1,1)) = pi^2 (k^2 + 1) / (4 k^2); k = inf gives the strip value."""
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")
    if math.isinf(k):
        return math.pi**2 / 4
    return math.pi**2 * (k * k + 1) / (4 * k * k)


def vanishing_level(k: float = math.inf) -> float:
    """4 pi / lambda_1, the value reachable by spreading sequences."""
    return 4 * math.pi / rectangle_lambda1(k)


def rayleigh(u: GridFunction, N: int = 2) -> float:
    """int |grad u|^N / int |u|^N."""
    den = lp_norm(u, N) ** N
    if den == 0:
        raise DomainError("Rayleigh quotient of the zero function")
    return dirichlet_energy(u, N) / den


@dataclass
class EigenResult:
    lambda1: float
    eigenvector: GridFunction
    iterations: int
    residual: float


def lambda1_numeric(k: float, n1: int = 200, n2: int = 100, tol: float = 1e-10,
                    max_iter: int = 10_000) -> EigenResult:
    """Inverse power iteration on the cell-centred 5-point Dirichlet Laplacian of Omega_k.

    Inner solves use conjugate gradients warm-started from the previous iterate.
    Needs at least 16 cells per unit length along x1 and 32 along x2.
    """
    if n1 / (2 * k) < 16 or n2 / 2 < 32:
        raise GridTooCoarse(f"{n1}x{n2} is too coarse for the rectangle k={k}")
    u = rectangle_grid(k, n1, n2)
    area = u.cell_area
    M = dirichlet_matrix(n1, n2, u.h1, u.h2) / area
    x = np.ones(n1 * n2)
    x /= np.linalg.norm(x)
    lam = float(x @ (M @ x))
    y = x / lam
    for it in range(1, max_iter + 1):
        y, info = cg(M, x, x0=y, rtol=1e-12, atol=0.0, maxiter=20 * (n1 + n2))
        if info < 0:
            raise NonConvergence("conjugate gradients broke down", residual=info)
        x_new = y / np.linalg.norm(y)
        lam_new = float(x_new @ (M @ x_new))
        change = abs(lam_new - lam) / lam_new
        x, lam = x_new, lam_new
        y = x / lam
        if change < tol:
            break
    else:
        res = float(np.linalg.norm(M @ x - lam * x))
        raise NonConvergence(f"no convergence after {max_iter} iterations", residual=res)
    res = float(np.linalg.norm(M @ x - lam * x))
    if x.sum() < 0:
        x = -x
    vec = u.with_values(x.reshape(n1, n2))
    return EigenResult(lam, vec, it, res)
