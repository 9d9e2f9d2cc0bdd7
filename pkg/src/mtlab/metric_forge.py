"""Bump-sequence conformal metrics on the disc and the series that decide (un)boundedness.

The metric is zeta * g_h with zeta = (1 + sum_k eta_k)^{2/N}, where eta_k is a
bump of height a_k on the Moebius image of B_{R_k}(0) centred at x_k. All
per-k quantities are kept in log form (log 1/R_k, log a_k) because R_k may be
far below the smallest double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .conformal import MobiusMap, hyperbolic_density, mobius_apply, mobius_ball_image
from .errors import ConditionViolated, DomainError, NonConvergence
from .functionals import log_truncated_exp
from .geometry import RadialProfile, sharp_exponent, sphere_measure
from .report import Report

FAMILIES = ("const", "power", "power_log", "log_damped", "exp_decay", "trunc_exp", "f0",
            "max", "weighted")


@dataclass
class NonlinearitySpec:
    """Even nonlinearity f(|u|) with log-value and log-derivative evaluators.

    ``log_value`` and ``dlog`` (= f'/f) are the primitives; ``value`` and
    ``derivative`` are derived from them, so huge exponentials never overflow
    until a caller asks for the plain value.
    """

    family: str
    params: dict = field(default_factory=dict)
    parts: tuple = ()
    N: int = 2

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")

    # -- primitives --------------------------------------------------------
    def log_value(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        p = self.params
        fam = self.family
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam == "const":
                return np.full_like(u, math.log(p["c"]))
            if fam == "power":
                return p["p"] * np.log(u)
            if fam == "power_log":
                lg = np.log(u)
                return np.where(lg > 0, p["p"] * lg + np.log(np.where(lg > 0, lg, 1.0)), -np.inf)
            if fam == "log_damped":
                return p["p"] * np.log(u) - np.log1p(np.log1p(u))
            if fam == "exp_decay":
                return -1.0 / u
            if fam == "trunc_exp":
                return log_truncated_exp(p["beta"] * u ** p["q"], p["n_removed"])
            if fam == "f0":
                q = self.N / (self.N - 1)
                return sharp_exponent(self.N) * u**q - 2 * q * np.log(u)
            if fam == "max":
                return np.max([part.log_value(u) for part in self.parts], axis=0)
            # weighted
            return self.parts[0].log_value(u) + p["s"] * np.log1p(u ** p["m"])

    def dlog(self, u):
        """f'(u)/f(u) for u > 0."""
        u = np.abs(np.asarray(u, dtype=float))
        p = self.params
        fam = self.family
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam == "const":
                return np.zeros_like(u)
            if fam == "power":
                return p["p"] / u
            if fam == "power_log":
                return p["p"] / u + 1.0 / (u * np.log(u))
            if fam == "log_damped":
                return p["p"] / u - 1.0 / ((1 + u) * (1 + np.log1p(u)))
            if fam == "exp_decay":
                return 1.0 / u**2
            if fam == "trunc_exp":
                beta, q, n = p["beta"], p["q"], p["n_removed"]
                x = beta * u**q
                ratio = np.exp(log_truncated_exp(x, n - 1) - log_truncated_exp(x, n))
                return beta * q * u ** (q - 1) * ratio
            if fam == "f0":
                q = self.N / (self.N - 1)
                return sharp_exponent(self.N) * q * u ** (q - 1) - 2 * q / u
            if fam == "max":
                logs = np.array([part.log_value(u) for part in self.parts])
                ders = np.array([part.dlog(u) for part in self.parts])
                idx = np.argmax(logs, axis=0)
                return np.take_along_axis(ders, idx[None, ...], axis=0)[0]
            base = self.parts[0].dlog(u)
            m, s = p["m"], p["s"]
            return base + s * m * u ** (m - 1) / (1 + u**m)

    def value(self, u):
        with np.errstate(over="ignore"):
            v = np.exp(self.log_value(u))
        return float(v) if np.ndim(v) == 0 else v

    def derivative(self, u):
        """f'(u) for u > 0 (even extension: f'(-u) = -f'(u))."""
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            v = np.sign(u) * np.exp(self.log_value(u)) * self.dlog(u)
        return float(v) if np.ndim(v) == 0 else v

    def __call__(self, u):
        return self.value(u)

    def describe(self) -> str:
        if self.parts:
            inner = ",".join(part.describe() for part in self.parts)
            extra = ",".join(f"{k}={v:g}" for k, v in self.params.items())
            return f"{self.family}({inner}{';' + extra if extra else ''})"
        return f"{self.family}(" + ",".join(f"{k}={v:g}" for k, v in self.params.items()) + ")"


# -- constructors -----------------------------------------------------------

def constant(c: float, N: int = 2) -> NonlinearitySpec:
    return NonlinearitySpec("const", {"c": float(c)}, N=N)


def power(p: float, N: int = 2) -> NonlinearitySpec:
    return NonlinearitySpec("power", {"p": float(p)}, N=N)


def power_log(p: float, N: int = 2) -> NonlinearitySpec:
    """|u|^p log|u| (positive part)."""
    return NonlinearitySpec("power_log", {"p": float(p)}, N=N)


def log_damped_power(p: float, N: int = 2) -> NonlinearitySpec:
    """|u|^p / (1 + log(1 + |u|))."""
    return NonlinearitySpec("log_damped", {"p": float(p)}, N=N)


def exp_decay(N: int = 2) -> NonlinearitySpec:
    """e^{-1/|u|}."""
    return NonlinearitySpec("exp_decay", {}, N=N)


def max_of(*parts: NonlinearitySpec) -> NonlinearitySpec:
    return NonlinearitySpec("max", {}, tuple(parts), N=parts[0].N)


def truncated_exponential(beta: float, q: float, n_removed: int, N: int = 2) -> NonlinearitySpec:
    """e^{beta|u|^q} - sum_{j<n_removed} (beta|u|^q)^j/j!."""
    return NonlinearitySpec("trunc_exp", {"beta": float(beta), "q": float(q),
                                          "n_removed": int(n_removed)}, N=N)


def phi_alpha(alpha: float, N: int = 2) -> NonlinearitySpec:
    return truncated_exponential(alpha, N / (N - 1), N - 1, N)


def exp_fractional(beta: float, q: float, N: int = 2) -> NonlinearitySpec:
    """e^{beta|u|^q} minus the Taylor terms j = 0..floor(N/q)."""
    if not 0 < q < N / (N - 1):
        raise DomainError(f"q must lie in (0, N/(N-1)), got {q}")
    return truncated_exponential(beta, q, int(math.floor(N / q)) + 1, N)


def weighted(base: NonlinearitySpec, m: float, s: float) -> NonlinearitySpec:
    """base(u) * (1 + |u|^m)^s."""
    return NonlinearitySpec("weighted", {"m": float(m), "s": float(s)}, (base,), N=base.N)


def f0(N: int = 2) -> NonlinearitySpec:
    """e^{alpha_N |u|^{N/(N-1)}} / |u|^{2N/(N-1)}."""
    return NonlinearitySpec("f0", {}, N=N)


def case_preset(case: int, N: int = 2, p: float | None = None,
                alpha: float | None = None) -> tuple[NonlinearitySpec, NonlinearitySpec]:
    """(f1, f2) pair realising each of the seven behaviours; case 7 returns (f1, f0)."""
    p = float(N + 1) if p is None else float(p)
    aN = sharp_exponent(N)
    alpha = aN / 2 if alpha is None else float(alpha)
    if case == 1:
        return power(N, N), max_of(exp_decay(N), power_log(N, N))
    if case == 2:
        return (max_of(power(N, N), log_damped_power(p, N)),
                max_of(exp_decay(N), power(p, N)))
    if case == 3:
        return max_of(power(N, N), power(p, N)), max_of(exp_decay(N), power_log(p, N))
    if case == 4:
        return truncated_exponential(1.0, 1.0, N, N), truncated_exponential(2.0, 1.0, N, N)
    if case == 5:
        return weighted(phi_alpha(alpha, N), 1.0, -1.0), phi_alpha(alpha, N)
    if case == 6:
        return phi_alpha(alpha, N), weighted(phi_alpha(alpha, N), 1.0, 1.0)
    if case == 7:
        return weighted(phi_alpha(aN, N), 2 * N / (N - 1), -1.0), f0(N)
    raise DomainError(f"case must be in 1..7, got {case}")


def domination_pairs(case: int, N: int = 2, p: float | None = None,
                     alpha: float | None = None):
    """(label, g, h) triples: g/h must stay bounded for large u in each case."""
    p = float(N + 1) if p is None else float(p)
    aN = sharp_exponent(N)
    alpha = aN / 2 if alpha is None else float(alpha)
    f1, f2 = case_preset(case, N, p, alpha)
    if case == 1:
        return [("f2 <= C |u|^q, q=N+1", f2, power(N + 1, N))]
    if case == 2:
        r = 0.5 * (N + p)
        return [("|u|^r <= C f1, r in [N,p)", power(r, N), f1),
                ("f2 <= C |u|^q, q=p", f2, power(p, N))]
    if case == 3:
        return [("|u|^p <= C f1", power(p, N), f1),
                ("f2 <= C |u|^q, q=p+1", f2, power(p + 1, N))]
    if case == 4:
        return [("|u|^r <= C f1, r=N+2", power(N + 2, N), f1),
                ("f2 <= C Phi^beta, beta=1", f2, phi_alpha(1.0, N))]
    if case == 5:
        return [("Phi^gamma <= C f1, gamma=alpha/2", phi_alpha(alpha / 2, N), f1)]
    if case == 6:
        beta = 0.5 * (alpha + aN)
        return [("f2 <= C Phi^beta, beta>alpha", f2, phi_alpha(beta, N))]
    if case == 7:
        return [("f1 <= C f0", f1, f2), ("f0 <= C f1", f2, f1)]
    raise DomainError(f"case must be in 1..7, got {case}")


def domination_check(case: int, N: int = 2, u_range=(1.0, 50.0), n: int = 400,
                     **kw) -> Report:
    """Each ratio g/h is finite and does not climb above its first-half maximum later on."""
    u = np.linspace(u_range[0], u_range[1], n)
    rows = []
    ok = True
    worst = -math.inf
    for label, g, h in domination_pairs(case, N, **kw):
        lr = g.log_value(u) - h.log_value(u)
        rise = float(np.max(lr[n // 2:]) - np.max(lr[: n // 2]))
        good = bool(np.all(np.isfinite(lr)) and rise <= 1e-3)
        ok &= good
        worst = max(worst, rise)
        rows.append((label, float(np.max(lr)), rise, good))
    return Report(ok, worst, {"rows": rows})


# --------------------------------------------------------------------------
# the f-tilde transform and the growth index
# --------------------------------------------------------------------------

def moser_height(log_inv_R, N: int):
    """(log 1/R)^{(N-1)/N} / omega^{1/N}."""
    L = np.asarray(log_inv_R, dtype=float)
    return L ** ((N - 1) / N) / sphere_measure(N) ** (1.0 / N)


def log_inv_radius_for_height(u, N: int):
    """Inverse of moser_height."""
    return (np.asarray(u, dtype=float) * sphere_measure(N) ** (1.0 / N)) ** (N / (N - 1))


def log_tilde(f: NonlinearitySpec, log_inv_R, N: int):
    return f.log_value(moser_height(log_inv_R, N))


def tilde_transform(f: NonlinearitySpec, R: float | None = None, N: int = 2,
                    log_inv_R: float | None = None):
    """f evaluated at the Moser height of radius R."""
    if log_inv_R is None:
        if R is None or R >= 1 or R <= 0:
            raise DomainError(f"R must lie in (0, 1), got {R}")
        log_inv_R = -math.log(R)
    elif log_inv_R <= 0:
        raise DomainError("R must be below 1")
    return f.value(moser_height(log_inv_R, N))


@dataclass
class GrowthIndex:
    value: float
    samples: np.ndarray
    estimates: np.ndarray

    @property
    def condition_holds(self) -> bool:
        return self.value > 0


def growth_index(f: NonlinearitySpec, N: int = 2, samples=(1e2, 1e3, 1e4),
                 rel_spread: float = 0.05) -> GrowthIndex:
    """N - (N-1)/alpha_N * lim f'(u)/(u^{1/(N-1)} f(u)), read off at three decades."""
    u = np.asarray(samples, dtype=float)
    lim = f.dlog(u) / u ** (1.0 / (N - 1))
    est = N - (N - 1) / sharp_exponent(N) * lim
    if not np.all(np.isfinite(est)) or np.ptp(est) > rel_spread * N:
        raise NonConvergence("growth-index limit did not settle", samples=u, residual=est)
    return GrowthIndex(float(est[-1]), u, est)


# --------------------------------------------------------------------------
# bump metric
# --------------------------------------------------------------------------

def bump_profile(s):
    """1 on [0, 1/2], quintic smoothstep down to 0 at 1, 0 beyond."""
    s = np.asarray(s, dtype=float)
    t = np.clip(2.0 * (1.0 - s), 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t)


@dataclass
class BumpMetricSpec:
    N: int
    centers: np.ndarray          # (K, N)
    log_inv_R: np.ndarray        # (K,)
    log_a: np.ndarray            # (K,)
    case: str = ""
    schedule: str = ""
    summable_verified: bool = False

    @property
    def K(self) -> int:
        return len(self.log_inv_R)

    @property
    def R(self) -> np.ndarray:
        return np.exp(-self.log_inv_R)

    @property
    def a(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_a)

    def ball(self, k: int):
        """Euclidean centre and radius of B_k = phi_{x_k}(B_{R_k}(0)); k is 1-based."""
        R = float(self.R[k - 1])
        c = self.centers[k - 1]
        if R == 0.0:
            return c.copy(), 0.0
        return mobius_ball_image(MobiusMap(c), R)

    def balls_disjoint(self) -> bool:
        balls = [self.ball(k) for k in range(1, self.K + 1)]
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                (ci, ri), (cj, rj) = balls[i], balls[j]
                if np.linalg.norm(ci - cj) <= ri + rj:
                    return False
        return True

    def eta(self, x, k: int):
        """a_k beta(|phi_{-x_k}(x)| / R_k)."""
        y = mobius_apply(MobiusMap(-self.centers[k - 1]), x)
        r = np.linalg.norm(y, axis=-1)
        with np.errstate(divide="ignore"):
            s = np.exp(np.log(r) + self.log_inv_R[k - 1])
        return self.a[k - 1] * bump_profile(s)

    def volume_factor(self, x):
        """1 + sum_k eta_k: density of dV_g with respect to dV_h."""
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for k in range(1, self.K + 1):
            out = out + self.eta(x, k)
        return out

    def zeta(self, x):
        return self.volume_factor(x) ** (2.0 / self.N)

    def to_text(self) -> str:
        lines = [f"N={self.N}", f"K={self.K}", f"case={self.case}",
                 f"schedule={self.schedule}", f"summable_verified={int(self.summable_verified)}"]
        for k in range(self.K):
            x = " ".join(f"{v:.17g}" for v in self.centers[k])
            lines.append(f"k={k + 1} x={x} R={self.R[k]:.17g} a={self.a[k]:.17g} "
                         f"log_inv_R={self.log_inv_R[k]:.17g} log_a={self.log_a[k]:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BumpMetricSpec":
        head = {}
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("k="):
                rows.append(line)
            else:
                key, _, val = line.partition("=")
                head[key] = val
        N = int(head["N"])
        centers, L, la = [], [], []
        for row in rows:
            x_part = row.split(" x=")[1].split(" R=")[0]
            centers.append([float(v) for v in x_part.split()])
            fields = dict(tok.split("=") for tok in row.split() if "=" in tok and not tok.startswith("x="))
            L.append(float(fields["log_inv_R"]))
            la.append(float(fields["log_a"]))
        if len(rows) != int(head["K"]):
            raise DomainError("row count does not match K")
        return cls(N, np.array(centers, dtype=float).reshape(len(rows), N), np.array(L),
                   np.array(la), head.get("case", ""), head.get("schedule", ""),
                   bool(int(head.get("summable_verified", "0"))))


def separated_centers(log_inv_R: np.ndarray, N: int, safety: float = 1.01) -> np.ndarray:
    """Centres on the positive x1 axis with x_1 = 0 and 1 - x_k = (1 - rhs_k)/safety,
    where rhs_k is the separation threshold for |x_k|."""
    R = np.exp(-np.asarray(log_inv_R, dtype=float))
    K = len(R)
    x = np.zeros(K)
    for k in range(1, K):
        r0, r1, xp = R[k], R[k - 1], x[k - 1]
        den = 1 + r0 * r1 + r0 * xp + r1 * xp
        gap = (1 - r0) * (1 - r1) * (1 - xp) / den   # 1 - rhs, computed without cancellation
        x[k] = 1.0 - gap / safety
    centers = np.zeros((K, N))
    centers[:, 0] = x
    return centers


def _log_ratio(f1, f2, u):
    return f1.log_value(u) - f2.log_value(u)


def check_condition2(f1: NonlinearitySpec, f2: NonlinearitySpec,
                     samples=None) -> np.ndarray:
    """log(f1/f2) must strictly decrease over u = 10..1e6."""
    u = np.logspace(1, 6, 26) if samples is None else np.asarray(samples, dtype=float)
    lr = _log_ratio(f1, f2, u)
    if not (np.all(np.isfinite(lr)) and np.all(np.diff(lr) < 0)):
        raise ConditionViolated("f1/f2 does not decay on the sampled range")
    return lr


def monotone_start(f1, f2, N: int) -> float:
    """Smallest log(1/R) >= log 2 from which f1/f2 at the Moser height decreases strictly."""
    u = np.logspace(-3, 6, 2000)
    lr = _log_ratio(f1, f2, u)
    inc = np.nonzero(~(np.diff(lr) < 0))[0]
    u0 = u[inc[-1] + 1] if inc.size else u[0]
    return max(math.log(2.0), float(log_inv_radius_for_height(u0, N)))


def _balanced_log_a(f1, f2, L, N):
    return N * L - 0.5 * (log_tilde(f1, L, N) + log_tilde(f2, L, N))


def build_metric(f1: NonlinearitySpec, f2: NonlinearitySpec, N: int = 2, K: int = 20,
                 case: str = "", safety: float = 1.01) -> BumpMetricSpec:
    """Radii, amplitudes and centres of the bump metric separating f1 from f2.

    Zero growth index of f2 selects a_k = k, R_k = e^{-k^3}. Otherwise
    a_k = 1/(R_k^N sqrt(f1~ f2~)) with R_k = R_1 2^{-(k-1)}, falling back to
    R_k = R_1 e^{1-k^2} when the upper-series terms are not yet negligible at K.
    R_1 <= 1/2 is the first radius from which f1/f2 decreases.
    """
    ks = np.arange(1, K + 1, dtype=float)
    try:
        zero_index = abs(growth_index(f2, N).value) < 0.05 * N
    except NonConvergence:
        zero_index = False
    if zero_index:
        L = ks**3
        log_a = np.log(ks)
        terms = ks / L
        stable = terms[-1] <= 1e-2 * terms.sum()
        return BumpMetricSpec(N, separated_centers(L, N, safety), L, log_a, case,
                              "a_k=k,R_k=exp(-k^3)", bool(stable))
    check_condition2(f1, f2)
    L0 = monotone_start(f1, f2, N)
    schedules = [("geometric", L0 + (ks - 1) * math.log(2.0)),
                 ("gaussian", L0 - math.log(2.0) + ks**2)]
    for name, L in schedules:
        up = np.exp(0.5 * (log_tilde(f1, L, N) - log_tilde(f2, L, N)))
        stable = bool(up[-1] <= 1e-6 * up.sum())
        if stable:
            break
    log_a = _balanced_log_a(f1, f2, L, N)
    return BumpMetricSpec(N, separated_centers(L, N, safety), L, log_a, case, name, stable)


def bound_terms(spec: BumpMetricSpec, f1, f2, N: int, k: int) -> tuple[float, float]:
    """(a_k R_k^N f1~(R_k), omega/(2N) a_k R_k^N f2~(R_k)) for 1-based k."""
    if not 1 <= k <= spec.K:
        raise DomainError(f"k must lie in 1..{spec.K}")
    L = spec.log_inv_R[k - 1]
    base = spec.log_a[k - 1] - N * L
    up = base + float(log_tilde(f1, L, N))
    lo = base + float(log_tilde(f2, L, N))
    with np.errstate(over="ignore"):
        return float(np.exp(up)), float(sphere_measure(N) / (2 * N) * np.exp(lo))


def series_terms(spec: BumpMetricSpec, f1, f2, N: int) -> tuple[np.ndarray, np.ndarray]:
    up, lo = zip(*(bound_terms(spec, f1, f2, N, k) for k in range(1, spec.K + 1)))
    return np.array(up), np.array(lo)


def zero_index_partial_sums(spec: BumpMetricSpec) -> np.ndarray:
    """Partial sums of a_k / log(1/R_k)."""
    return np.cumsum(spec.a / spec.log_inv_R)


def tilde_f0_integral(log_inv_R: float, N: int = 2) -> float:
    """int_0^R f0~(rho) rho^{N-1} drho by quadrature in t = log(1/rho)."""
    f = f0(N)

    def g(t):
        return math.exp(float(log_tilde(f, t, N)) - N * t)

    val, _ = integrate.quad(g, log_inv_R, np.inf, epsrel=1e-12, limit=200)
    return val


def capped_moser_energy_check(spec: BumpMetricSpec, k: int, N: int = 2, n: int = 512,
                              tol: float = 0.05) -> Report:
    """Unit energy of w_k (closed form) and of w_k o phi_{x_k}^{-1} on an n x n disc grid.

    The grid comparison counts only when the image of the plateau spans at least
    four cells; otherwise it is reported as unresolved.
    """
    from .families import MobiusBump, capped_moser
    from .functionals import dirichlet_energy

    L = float(spec.log_inv_R[k - 1])
    w = capped_moser(N, log_inv_R=L)
    exact = dirichlet_energy(w, N)
    details = {"exact": exact, "plateau": float(w(np.array([0.0]))[0]),
               "support": w.support_radius}
    ok = abs(exact - 1) < 1e-12
    worst = abs(exact - 1)
    if N == 2:
        h = 2.0 / n
        c = spec.centers[k - 1]
        plateau_R = 0.5 * math.exp(-L)
        _, img = mobius_ball_image(MobiusMap(c), plateau_R) if plateau_R > 0 else (c, 0.0)
        resolved = img >= 4 * h
        details["resolved"] = resolved
        if resolved:
            grid_E = dirichlet_energy(MobiusBump(w, c).on_grid(n), 2)
            details["grid"] = grid_E
            worst = max(worst, abs(grid_E - 1))
            ok = ok and abs(grid_E - 1) <= tol
    return Report(ok, worst, details)


def prop22_ratios(centers, base: RadialProfile | None = None,
                  zeta: Callable | None = None, n_r: int = 48, n_theta: int = 96) -> np.ndarray:
    """int |u_k|^2 dV_g / int |grad u_k|^2 dV_g for u_k = base o phi_{x_k}^{-1}, N = 2.

    g = zeta g_h; the Moebius maps are hyperbolic isometries so the numerator
    is computed in pulled-back polar coordinates, and the denominator is the
    (conformally invariant) Euclidean energy of the base.
    """
    from .families import capped_moser
    from .functionals import dirichlet_energy

    base = capped_moser(2, R=0.25) if base is None else base
    zeta = (lambda r2: 1.0 / (1.0 - r2)) if zeta is None else zeta
    den = dirichlet_energy(base, 2)
    # radial panels at the profile breakpoints
    edges = sorted({0.0, base.support_radius} |
                   {math.exp(s.log_r1) for s in getattr(base, "segments", ()) if s.log_r1 < 0})
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_r)
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    out = []
    for c in centers:
        c = np.atleast_1d(np.asarray(c, dtype=float))
        m = MobiusMap(c)
        num = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            r = 0.5 * (b - a) * gl_x + 0.5 * (b + a)
            wr = 0.5 * (b - a) * gl_w
            R_, T_ = np.meshgrid(r, th, indexing="ij")
            y = np.stack((R_ * np.cos(T_), R_ * np.sin(T_)), axis=-1)
            x = mobius_apply(m, y)
            integrand = base(R_) ** 2 * zeta(np.sum(x * x, axis=-1)) * hyperbolic_density(y)
            num += np.sum(integrand * (wr * r)[:, None]) * (2 * math.pi / n_theta)
        out.append(num / den)
    return np.array(out)


