"""Concentration-compactness diagnostics on the strip: mass profiles, theta, trichotomy, envelopes.

Family members are strip GridFunctions or TransportedProfiles (a radial disc
profile composed with the inverse disc-strip map). The latter are integrated
in the disc by polar quadrature, so arbitrarily thin plateaus are handled
exactly; the strip region of interest is pulled back by an indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conformal import disc_strip, strip_disc
from .errors import (ClassViolation, DomainError, EnergyNotNormalized, NotStabilized)
from .functionals import (TruncatedExpSpec, dirichlet_energy, log_truncated_exp, phi_eval)
from .geometry import (ConstSegment, GridFunction, RadialProfile,
                       grid_energy_density, grid_from_function, sharp_exponent)
from .rearrangement import is_double_symmetric
from .report import Report

ALPHA2 = sharp_exponent(2)
THRESHOLDS = {"concentrating": 0.95, "vanishing": 0.05, "dichotomy_low": 0.05,
              "escape": 0.05, "trend": 0.2, "stability": 0.05}


@dataclass(frozen=True)
class TransportedProfile:
    """Strip function x -> U(|psi^{-1}(x)|) for a radial profile U on the unit disc."""

    profile: RadialProfile
    label: str = ""

    def __call__(self, x):
        y = strip_disc(np.asarray(x, dtype=float))
        return self.profile(np.linalg.norm(y, axis=-1))

    def on_grid(self, like: GridFunction) -> GridFunction:
        return grid_from_function(like.domain, len(like.x1), len(like.x2),
                                  lambda a, b: self(np.stack((a, b), axis=-1)))


@dataclass
class MassProfile:
    energy_eps: float
    energy_window: float
    energy_total: float
    mt_eps: float
    mt_window: float
    mt_total: float


# --------------------------------------------------------------------------
# regions and per-member masses
# --------------------------------------------------------------------------

def _region_mask(x1, x2, region):
    kind, size = region
    if kind == "ball":
        return x1 * x1 + x2 * x2 < size * size
    if kind == "window":
        return np.abs(x1) < size
    return np.ones_like(x1, dtype=bool)


def _log_mt_integrand(u):
    """log(e^{4 pi u^2} - 1)."""
    return log_truncated_exp(ALPHA2 * np.asarray(u, dtype=float) ** 2, 1)


def _disc_indicator(y, region):
    r2 = np.sum(y * y, axis=-1)
    ok = r2 < 1
    out = np.zeros(y.shape[:-1], dtype=bool)
    if np.any(ok):
        x = disc_strip(y[ok])
        out[ok] = _region_mask(x[..., 0], x[..., 1], region)
    return out


def _jac(y):
    y1, y2 = y[..., 0], y[..., 1]
    return 16.0 / (math.pi**2 * ((y1 + 1) ** 2 + y2**2) * ((y1 - 1) ** 2 + y2**2))


def _transported_masses(tp: TransportedProfile, region, n_theta: int = 256, n_gl: int = 24,
                        panel: float = 0.5):
    """(energy, MT integral) of a transported profile over a strip region."""
    prof = tp.profile
    if prof.is_sampled:
        raise DomainError("transported profiles must be analytic")
    th = 2 * math.pi * (np.arange(n_theta) + 0.5) / n_theta
    dth = 2 * math.pi / n_theta
    ct, st = np.cos(th), np.sin(th)
    gx, gw = np.polynomial.legendre.leggauss(n_gl)
    energy = 0.0
    mt = 0.0
    for seg in prof.segments:
        if seg.log_r1 >= 0:
            raise DomainError("profile must be supported inside the unit disc")
        if isinstance(seg, ConstSegment):
            r1 = math.exp(seg.log_r1)
            s = 0.5 * (gx + 1)
            ws = 0.5 * gw
            y = np.stack((r1 * s[:, None] * ct[None, :], r1 * s[:, None] * st[None, :]), -1)
            w = _jac(y) * _disc_indicator(y, region)
            inner = float(np.sum(w * (ws * s)[:, None]) * dth)   # int over unit-scaled disc
            lf = float(_log_mt_integrand(seg.value))
            mt += math.exp(lf + 2 * seg.log_r1) * inner if np.isfinite(lf) else 0.0
            continue
        n = max(1, int(math.ceil((seg.log_r1 - seg.log_r0) / panel)))
        edges = np.linspace(seg.log_r0, seg.log_r1, n + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            t = 0.5 * (b - a) * gx + 0.5 * (b + a)
            wt = 0.5 * (b - a) * gw
            r = np.exp(t)
            y = np.stack((r[:, None] * ct[None, :], r[:, None] * st[None, :]), -1)
            ind = _disc_indicator(y, region)
            frac = ind.sum(axis=1) * dth                       # angular measure inside
            energy += float(np.sum(wt * seg.slope**2 * frac))
            u = seg(t)
            with np.errstate(over="ignore"):
                g = np.exp(_log_mt_integrand(u) + 2 * t)
            jac_in = np.sum(_jac(y) * ind, axis=1) * dth
            mt += float(np.sum(wt * g * jac_in))
    return energy, mt


def _grid_masses(u: GridFunction, region):
    X1, X2 = u.mesh()
    m = _region_mask(X1, X2, region)
    dens = grid_energy_density(u, 2)
    mt = phi_eval(TruncatedExpSpec(2), u.values) * u.cell_measure
    return float(np.sum(dens[m])), float(np.sum(mt[m]))


def _masses(member, region):
    if isinstance(member, TransportedProfile):
        return _transported_masses(member, region)
    return _grid_masses(member, region)


def mass_profile(member, eps: float = 0.1, R: float = 4.0) -> MassProfile:
    e_eps, m_eps = _masses(member, ("ball", eps))
    e_win, m_win = _masses(member, ("window", R))
    if isinstance(member, TransportedProfile):
        e_tot = dirichlet_energy(member.profile, 2)
        _, m_tot = _masses(member, ("all", None))
    else:
        e_tot, m_tot = _masses(member, ("all", None))
    return MassProfile(e_eps, e_win, e_tot, m_eps, m_win, m_tot)


# --------------------------------------------------------------------------
# theta and classification
# --------------------------------------------------------------------------

def theta_statistic(family: Sequence, eps: float = 0.1, S_ref: float | None = None,
                    tol: float = THRESHOLDS["stability"]) -> float:
    """MT mass of the last member inside B_eps divided by S_ref.

    S_ref defaults to the last member's own MT integral. Raises NotStabilized
    when eps and eps/2 disagree by more than tol.
    """
    last = family[-1]
    _, m1 = _masses(last, ("ball", eps))
    _, m2 = _masses(last, ("ball", eps / 2))
    if S_ref is None:
        _, S_ref = _masses(last, ("all", None))
    if not S_ref > 0:
        raise DomainError("S_ref must be positive")
    th1, th2 = m1 / S_ref, m2 / S_ref
    if abs(th1 - th2) > tol:
        raise NotStabilized(f"theta differs between eps and eps/2: {th1:.4f} vs {th2:.4f}",
                            (th1, th2))
    return th1


@dataclass
class Classification:
    verdict: str
    theta: float
    point: tuple | None = None
    limit: object = None
    evidence: list = field(default_factory=list)
    thetas: list = field(default_factory=list)

    def __str__(self) -> str:
        if self.verdict == "concentrating":
            return f"concentrating({self.point[0]:.4g},{self.point[1]:.4g})"
        if self.verdict == "dichotomy":
            return f"dichotomy({self.theta:.4f})"
        return self.verdict


def _concentration_point(member):
    if isinstance(member, TransportedProfile):
        return (0.0, 0.0)
    dens = grid_energy_density(member, 2)
    i, j = np.unravel_index(int(np.argmax(dens)), dens.shape)
    return (float(member.x1[i]), float(member.x2[j]))


def classify(family: Sequence, eps: float = 0.1, R: float | None = None,
             thresholds: dict | None = None) -> Classification:
    """Trichotomy verdict from the last members' mass profiles.

    Rules, in order: theta > 0.95 concentrating; MT fraction inside the window
    Omega_R below 0.05 vanishing; 0.05 <= theta <= 0.95 with at least 0.05 of
    the MT mass outside the window dichotomy; otherwise compact. A jump of
    theta above 0.2 between the last two members gives 'undetermined'.
    """
    th = dict(THRESHOLDS)
    th.update(thresholds or {})
    if len(family) < 4:
        raise DomainError("classification needs at least 4 members")
    if R is None:
        grid = next((m for m in family if isinstance(m, GridFunction)), None)
        R = grid.domain.bounds[1] / 2 if grid is not None else 4.0
    profiles = [mass_profile(m, eps, R) for m in family]
    for p in profiles:
        if not p.mt_total > 0:
            raise DomainError("family member with zero MT integral")
    thetas = [p.mt_eps / p.mt_total for p in profiles]
    theta = thetas[-1]
    last = profiles[-1]
    window = last.mt_window / last.mt_total
    kw = dict(theta=theta, evidence=profiles, thetas=thetas)
    if abs(thetas[-1] - thetas[-2]) > th["trend"]:
        return Classification("undetermined", **kw)
    if theta > th["concentrating"]:
        return Classification("concentrating", point=_concentration_point(family[-1]), **kw)
    if window < th["vanishing"]:
        return Classification("vanishing", **kw)
    if th["dichotomy_low"] <= theta <= th["concentrating"] and 1 - window >= th["escape"]:
        return Classification("dichotomy", **kw)
    return Classification("compact", limit=family[-1], **kw)


# --------------------------------------------------------------------------
# envelope and remainder compactness
# --------------------------------------------------------------------------

def envelope(x1, x2, lambda1: float = math.pi**2 / 4):
    """Pointwise bound for u^4 on the symmetric class."""
    x1 = np.abs(np.asarray(x1, dtype=float))
    x2 = np.abs(np.asarray(x2, dtype=float))
    c = (1 / math.sqrt(lambda1) + 1) ** 4
    with np.errstate(divide="ignore"):
        return np.where(x1 <= 1, c / x2**2, 4 / x1**2)


def envelope_check(u: GridFunction, lambda1: float = math.pi**2 / 4, eps: float = 0.1,
                   rtol: float = 1e-9) -> Report:
    """u^4 <= envelope and u <= sqrt(2/|x1|) ||grad u|| at every cell centre outside B_eps."""
    if not is_double_symmetric(u):
        raise ClassViolation("function is not even and nonincreasing in both variables")
    E = dirichlet_energy(u, 2)
    if E > 1 + 1e-6:
        raise EnergyNotNormalized(f"Dirichlet energy {E:.8g} exceeds 1")
    X1, X2 = u.mesh()
    out = X1**2 + X2**2 >= eps * eps
    v = u.values[out]
    env = envelope(X1[out], X2[out], lambda1)
    r1 = np.max(v**4 / env) if v.size else 0.0
    ax1 = np.abs(X1[out])
    with np.errstate(divide="ignore"):
        side = np.where(ax1 > 0, np.sqrt(2 / ax1) * math.sqrt(E), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        line = np.where(side > 0, v / side, np.where(v > 0, np.inf, 0.0))
    r2 = np.max(line) if v.size else 0.0
    worst = float(max(r1, r2))
    return Report(worst <= 1 + rtol, worst, {"envelope_ratio": float(r1),
                                             "line_ratio": float(r2)})


def remainder_compactness_check(family: Sequence[GridFunction], eps: float = 0.1,
                                R: float = 4.0, limit: GridFunction | None = None,
                                mode: str = "tail", tol: float = 1e-3) -> Report:
    """int_{Omega_R minus B_eps} |T(u_k) - T(u)| along the family.

    mode="tail": T(s) = e^{4 pi s^2} - 1 - 4 pi s^2; mode="full": T(s) = e^{4 pi s^2} - 1.
    Passes when the sequence is nonincreasing and ends below tol.
    """
    if mode == "tail":
        def T(s):
            return phi_eval(TruncatedExpSpec(2, k_trunc=2), s)
    elif mode == "full":
        def T(s):
            return phi_eval(TruncatedExpSpec(2), s)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    vals = []
    for u in family:
        X1, X2 = u.mesh()
        m = (np.abs(X1) < R) & (X1**2 + X2**2 >= eps * eps)
        ref = 0.0 if limit is None else T(limit.values)
        diff = np.abs(T(u.values) - ref) * u.cell_measure
        vals.append(float(np.sum(diff[m])))
    vals = np.array(vals)
    ok = bool(np.all(np.diff(vals) <= 1e-12 * max(vals.max(), 1.0)) and vals[-1] <= tol)
    return Report(ok, float(vals[-1]), {"values": vals})


def canonical_families(L: float = 8.0, n1: int = 512, n2: int = 128,
                       eps: float = 0.1) -> dict:
    """Four reference families on the strip truncated at L.

    vanishing: a fixed bump translated by 0, 2, 4, 6.
    concentrating: capped Moser profiles with log(1/R) = 16, 32, 64, 128, transported.
    dichotomy: a bump of radius below eps/2 at the origin plus a copy translated
        by 0..6, normalized jointly (theta = 1/2 by symmetry once they separate).
    compact: the normalized eigenfunction of Omega_2, repeated.
    """
    from .families import capped_moser, radial_bump, strip_eigenfunction, vanishing_family
    from .functionals import normalize_energy
    from .geometry import strip_grid

    base = normalize_energy(strip_grid(L, n1, n2, radial_bump(0.9)))
    shifts = [0.0, 2.0, 4.0, 6.0]
    vanishing = [vanishing_family(base, s) for s in shifts]
    concentrating = [TransportedProfile(capped_moser(2, log_inv_R=Lk), f"log1/R={Lk}")
                     for Lk in (16.0, 32.0, 64.0, 128.0)]
    narrow = strip_grid(L, n1, n2, radial_bump(0.4 * eps))
    dichotomy = []
    for s in [2.0, 3.0, 4.0, 6.0]:
        pair = narrow.with_values(narrow.values + vanishing_family(narrow, s).values)
        dichotomy.append(normalize_energy(pair))
    compact = [normalize_energy(strip_eigenfunction(2, n1, n2, L=L))] * 4
    return {"vanishing": vanishing, "concentrating": concentrating,
            "dichotomy": dichotomy, "compact": compact}
