"""Distribution functions, Schwarz and Steiner rearrangements, and the comparison checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EnergyNotNormalized
from .functionals import dirichlet_energy, lp_norm, profile_energy
from .geometry import (ConstSegment, GridFunction, RadialProfile, _ball_volume_between,
                       grid_energy_density, sphere_measure, step_profile)
from .report import Report

PS_MARGIN = 0.02


@dataclass(frozen=True)
class DistributionFunction:
    thresholds: np.ndarray
    measures: np.ndarray


def _cell_measures(u: GridFunction) -> np.ndarray:
    return np.broadcast_to(u.cell_measure, u.values.shape)


def distribution(u, t: float, N: int | None = None) -> float:
    """|{u > t}|."""
    if isinstance(u, GridFunction):
        return float(np.sum(_cell_measures(u)[u.values > t]))
    if u.is_sampled:
        dV = np.diff(np.concatenate(([0.0], u.step_volumes)))
        return float(np.sum(dV[u.step_values > t]))
    N = N or u.dim
    if N is None:
        raise DomainError("dimension required for an analytic profile")
    total = 0.0
    for seg in u.segments:
        if isinstance(seg, ConstSegment):
            if seg.value > t:
                total += _ball_volume_between(seg.log_r0, seg.log_r1, N)
            continue
        # slope*(c - log r) > t  <=>  log r < c - t/slope  (slope > 0)
        if seg.slope > 0:
            lo, hi = seg.log_r0, min(seg.log_r1, seg.log_r_zero - t / seg.slope)
        elif seg.slope < 0:
            lo, hi = max(seg.log_r0, seg.log_r_zero - t / seg.slope), seg.log_r1
        else:
            lo, hi = (seg.log_r0, seg.log_r1) if 0 > t else (0.0, 0.0)
        if hi > lo:
            total += _ball_volume_between(lo, hi, N)
    return total


def distribution_function(u, thresholds, N: int | None = None) -> DistributionFunction:
    t = np.sort(np.asarray(thresholds, dtype=float))
    return DistributionFunction(t, np.array([distribution(u, s, N) for s in t]))


def _require_nonnegative(values):
    if np.any(np.asarray(values) < 0):
        raise DomainError("rearrangement needs a nonnegative function")


def schwarz(u, N: int | None = None) -> RadialProfile:
    """Radially nonincreasing rearrangement.

    Grid input: cell values sorted in descending order (ties by cell index)
    are stacked on concentric shells whose measures are the cell measures.
    Only positive cells are kept; the profile vanishes beyond their total measure.
    """
    if isinstance(u, GridFunction):
        _require_nonnegative(u.values)
        N = N or 2
        vals = u.values.ravel()
        meas = _cell_measures(u).ravel()
        order = np.argsort(-vals, kind="stable")
        keep = order[vals[order] > 0]
        # resampling at two cell widths averages out the cell-level jitter of
        # the sorted values; the residual bias is O(h^2)
        return step_profile(vals[keep], np.cumsum(meas[keep]), N,
                            resolution=2.0 * min(u.h1, u.h2))
    if u.is_sampled:
        _require_nonnegative(u.step_values)
        if u.monotone:
            return u
        dV = np.diff(np.concatenate(([0.0], u.step_volumes)))
        order = np.argsort(-u.step_values, kind="stable")
        return step_profile(u.step_values[order], np.cumsum(dV[order]), u.dim, u.resolution)
    if u.monotone:
        return u
    N = N or u.dim
    r = np.linspace(0.0, u.support_radius, 4097)
    mid = 0.5 * (r[1:] + r[:-1])
    vals = u(mid)
    _require_nonnegative(vals)
    omega = sphere_measure(N)
    dV = omega / N * np.diff(r**N)
    order = np.argsort(-vals, kind="stable")
    return step_profile(vals[order], np.cumsum(dV[order]), N, resolution=r[1])


def placement_order(n: int) -> np.ndarray:
    """Cells of a line of length n, from the centre outwards, alternating sides.

    Position p receives the rank-th largest value, rank = index of p in this order.
    """
    c = n // 2
    order = [c]
    if n % 2:
        for j in range(1, c + 1):
            order += [c + j, c - j]
    else:
        order.append(c - 1)
        for j in range(1, c):
            order += [c + j, c - 1 - j]
    return np.asarray(order[:n])


def steiner(u: GridFunction, axis: int) -> GridFunction:
    """Symmetric-decreasing rearrangement of every grid line parallel to x_axis."""
    if axis not in (1, 2):
        raise DomainError(f"axis must be 1 or 2, got {axis}")
    _require_nonnegative(u.values)
    ax = axis - 1
    n = u.values.shape[ax]
    desc = -np.sort(-u.values, axis=ax)
    rank_of_pos = np.empty(n, dtype=int)
    rank_of_pos[placement_order(n)] = np.arange(n)
    return u.with_values(np.take(desc, rank_of_pos, axis=ax))


def double_symmetrize(u: GridFunction) -> GridFunction:
    """Steiner in x1, then in x2."""
    return steiner(steiner(u, 1), 2)


def is_double_symmetric(u: GridFunction, tol: float = 0.0) -> bool:
    """True when every line is nonincreasing along the centre-outward placement order."""
    v = u.values
    if np.any(v < -tol):
        return False
    o1 = placement_order(v.shape[0])
    o2 = placement_order(v.shape[1])
    return bool(np.all(np.diff(v[o1, :], axis=0) <= tol)
                and np.all(np.diff(v[:, o2], axis=1) <= tol))


# --------------------------------------------------------------------------
# comparison checks
# --------------------------------------------------------------------------

def _energy(w, N):
    if isinstance(w, RadialProfile):
        return profile_energy(w, N)
    return dirichlet_energy(w, N)


def polya_szego_check(u, symmetrized, N: int = 2, margin: float = PS_MARGIN) -> Report:
    """E(symmetrized) - E(u) must not exceed margin * E(u)."""
    e0 = _energy(u, N)
    e1 = _energy(symmetrized, N)
    diff = e1 - e0
    rel = diff / e0 if e0 > 0 else 0.0
    return Report(diff <= margin * e0 + 1e-14, rel, {"energy": e0, "energy_sym": e1})


def level_energy_check(u: GridFunction, radii, N: int = 2, margin: float = PS_MARGIN) -> Report:
    """int_{B_rho} |grad u*|^N <= int_{u > t} |grad u|^N with t = u*(rho), up to margin * E(u)."""
    _require_nonnegative(u.values)
    star = schwarz(u, N)
    dens = grid_energy_density(u, N)
    total = float(np.sum(dens))
    rows = []
    worst = -math.inf
    for rho in radii:
        t = float(star(np.array([rho]))[0])
        if t > 0:
            lhs = profile_energy(star, N, radius=rho)
            rhs = float(np.sum(dens[u.values > t]))
        else:
            # t = 0 is the global Polya-Szego comparison
            lhs = profile_energy(star, N)
            rhs = total
        gap = (lhs - rhs) / total if total > 0 else 0.0
        worst = max(worst, gap)
        rows.append((rho, t, lhs, rhs))
    return Report(worst <= margin, worst, {"rows": rows})


def decay_bound_check(u: GridFunction, lambda1: float, radii, N: int = 2,
                      tol: float = 1e-6, margin: float = PS_MARGIN) -> Report:
    """u*(r)^N <= N/(omega r^N lambda1) (1 - int_{B_r}|grad u*|^N) at every radius.

    The energy defect carries an additive margin for the discrete rearrangement.
    """
    E = dirichlet_energy(u, N)
    if abs(E - 1) > tol:
        raise EnergyNotNormalized(f"Dirichlet energy {E:.12g} is not 1")
    if not lambda1 > 0:
        raise DomainError("lambda1 must be positive")
    star = schwarz(u, N)
    omega = sphere_measure(N)
    rows = []
    worst = -math.inf
    for r in radii:
        val = float(star(np.array([r]))[0]) ** N
        inner = profile_energy(star, N, radius=r)
        bound = N / (omega * r**N * lambda1) * max(1.0 - inner + margin, 0.0)
        worst = max(worst, val - bound)
        rows.append((r, val, bound))
    return Report(worst <= 0.0, worst, {"rows": rows})


def radial_bound_check(profile: RadialProfile, radii, N: int | None = None,
                       rtol: float = 1e-10) -> Report:
    """U(r) <= (N/omega)^{1/N} ||u||_N / r for a nonincreasing profile."""
    N = N or profile.dim
    norm = lp_norm(profile, N, N)
    c = (N / sphere_measure(N)) ** (1.0 / N) * norm
    r = np.asarray(radii, dtype=float)
    vals = profile(r)
    bound = c / r
    ratio = vals / bound
    worst = float(np.max(ratio))
    return Report(worst <= 1.0 + rtol, worst, {"radii": r, "values": vals, "bound": bound})


def hyperbolic_bound_check(profile: RadialProfile, radii, N: int | None = None,
                           rtol: float = 1e-10) -> Report:
    """U(r) <= ||grad u||_N (log 1/r)^{(N-1)/N} / omega^{1/N} for profiles in the unit ball."""
    N = N or profile.dim
    if profile.support_radius > 1 + 1e-12:
        raise DomainError("profile must be supported in the unit ball")
    grad = profile_energy(profile, N) ** (1.0 / N)
    r = np.asarray(radii, dtype=float)
    vals = profile(r)
    bound = grad * np.log(1.0 / r) ** ((N - 1) / N) / sphere_measure(N) ** (1.0 / N)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(vals > 0, vals / bound, 0.0)
    worst = float(np.max(ratio))
    return Report(worst <= 1.0 + rtol, worst, {"radii": r, "values": vals, "bound": bound})
