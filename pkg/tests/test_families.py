import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mtlab.errors import DomainError, GridTooCoarse, SupportExitsTruncation
from mtlab.families import (MobiusBump, capped_moser, jensen_lower_bound, mobius_bump_family,
                            moser, radial_bump, scaled_moser, strip_eigenfunction,
                            vanishing_family)
from mtlab.functionals import (TruncatedExpSpec, dirichlet_energy, lp_norm, mt_functional,
                               normalize_energy)
from mtlab.geometry import grid_integral, sphere_measure, strip_grid
from mtlab.spectral import rayleigh, rectangle_lambda1

VANISHING = 16 / math.pi


def jensen_oracle(k):
    k = mp.mpf(k)
    return float(4 * k * mp.expm1(4 * k / (mp.pi * (k * k + 1))))


def test_moser_plateau_value():
    assert moser(2, 3)(np.array([0.0]))[0] == pytest.approx(3 / math.sqrt(2 * math.pi), rel=1e-15)
    assert moser(2, 3)(np.array([0.0]))[0] == pytest.approx(1.19683, abs=1e-5)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_moser_shape(N):
    for k in (1, 2, 4):
        u = moser(N, k)
        assert u.support_radius == pytest.approx(k)
        assert dirichlet_energy(u, N) == pytest.approx(1.0, abs=1e-12)
        assert lp_norm(u, N) ** N <= math.factorial(N) / N ** (N + 1) * (1 + 1e-12)


def test_moser_rejects_small_k():
    with pytest.raises(DomainError):
        moser(2, 0.5)


def test_scaled_moser():
    N = 2
    C0 = math.factorial(N) / N ** (N + 1)
    u, v = moser(2, 3), scaled_moser(2, 3, C0)
    r = np.geomspace(1e-5, 3, 30)
    assert np.allclose(u(r), v(r), rtol=1e-14)
    w = scaled_moser(2, 3, 1.0)
    # the volume factor is N^{N+1} C / N! = 4
    assert lp_norm(w, 2) ** 2 == pytest.approx(4 * lp_norm(u, 2) ** 2, rel=1e-10)
    assert lp_norm(w, 2) ** 2 <= 1 + 1e-12
    assert dirichlet_energy(w, 2) == pytest.approx(1.0, abs=1e-12)
    spec = TruncatedExpSpec(2)
    assert mt_functional(w, spec) == pytest.approx(4 * mt_functional(u, spec), rel=1e-8)
    vals = [mt_functional(scaled_moser(2, k, 1.0), spec) for k in range(1, 7)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_subcritical_bounded_over_scaled_moser():
    # empirical: at 0.9 alpha_N the functional stays bounded along the family
    spec = TruncatedExpSpec(2, alpha=0.9 * 4 * math.pi)
    vals = [mt_functional(scaled_moser(2, k, 1.0), spec) for k in range(1, 7)]
    # the family does not blow up: the tail decreases, unlike at the sharp exponent
    assert vals[3] > vals[4] > vals[5]
    sharp = [mt_functional(scaled_moser(2, k, 1.0), TruncatedExpSpec(2)) for k in (4, 5, 6)]
    assert sharp[0] < sharp[1] < sharp[2]


@given(st.integers(2, 4), st.floats(0.8, 100.0))
def test_capped_moser(N, L):
    w = capped_moser(N, log_inv_R=L)
    assert w(np.array([0.0]))[0] == pytest.approx(L ** ((N - 1) / N) / sphere_measure(N) ** (1 / N))
    assert dirichlet_energy(w, N) == pytest.approx(1.0, abs=1e-12)
    assert w.support_radius == pytest.approx(0.5)


def test_capped_moser_limit_and_errors():
    w = capped_moser(2, R=0.5 - 1e-9)
    assert w(np.array([0.0]))[0] == pytest.approx(math.sqrt(math.log(2)) / math.sqrt(2 * math.pi), rel=1e-6)
    with pytest.raises(DomainError):
        capped_moser(2, R=0.7)


def test_strip_eigenfunction():
    phi = strip_eigenfunction(2, 256, 128)
    i, j = np.unravel_index(np.argmax(phi.values), phi.values.shape)
    assert phi.values[i, j] == pytest.approx(1.0, abs=1e-3)
    assert grid_integral(phi, lambda t: t * t) == pytest.approx(2.0, rel=5e-3)
    assert dirichlet_energy(phi) == pytest.approx(5 * math.pi**2 / 8, rel=5e-3)
    assert dirichlet_energy(phi) == pytest.approx(6.1685, rel=5e-3)
    with pytest.raises(GridTooCoarse):
        strip_eigenfunction(2, 8, 8)
    with pytest.raises(DomainError):
        strip_eigenfunction(4, 256, 64, L=2)


@pytest.mark.parametrize("k", [1, 2, 4, 8])
def test_eigenfunction_rayleigh(k):
    phi = strip_eigenfunction(k, 64 * k, 128)
    assert rayleigh(phi) == pytest.approx(rectangle_lambda1(k), rel=5e-3)


def test_jensen_values():
    for k in (1, 2, 4, 10, 100):
        assert jensen_lower_bound(k) == pytest.approx(jensen_oracle(k), rel=1e-14)
    assert jensen_lower_bound(2) == pytest.approx(5.31295, abs=1e-5)
    assert jensen_lower_bound(4) == pytest.approx(5.589, abs=1e-3)
    assert jensen_lower_bound(100) == pytest.approx(5.125, abs=1e-3)
    assert jensen_lower_bound(1) == pytest.approx(3.560, abs=1e-3)
    assert jensen_lower_bound(1) < VANISHING


def test_jensen_decreases_to_vanishing_level():
    ks = np.arange(10, 2000, 7)
    gaps = np.array([jensen_lower_bound(k) for k in ks]) - VANISHING
    assert np.all(gaps > 0) and np.all(np.diff(gaps) < 0)
    assert jensen_lower_bound(1e7) == pytest.approx(VANISHING, rel=1e-6)


def test_vanishing_family():
    base = normalize_energy(strip_grid(8, 512, 64, radial_bump(0.9)))
    assert vanishing_family(base, 0) is base
    spec = TruncatedExpSpec(2)
    m0 = mt_functional(base, spec)
    X1, X2 = base.mesh()
    ball = X1**2 + X2**2 < 0.1**2
    for k in range(1, 6):
        u = vanishing_family(base, k)
        assert mt_functional(u, spec) == pytest.approx(m0, rel=1e-13)
        assert dirichlet_energy(u) == pytest.approx(1.0, rel=1e-13)
        if k >= 1:
            assert np.all(u.values[ball] == 0)
    half = vanishing_family(base, 0.51)
    assert mt_functional(half, spec) == pytest.approx(m0, rel=0.02)
    with pytest.raises(SupportExitsTruncation):
        vanishing_family(base, 7.5)


def test_mobius_bump_family():
    base = capped_moser(2, R=0.25)
    fam = mobius_bump_family(base, [[0.0, 0.0], [0.5, 0.0], [0.9, 0.0]])
    x = np.array([[0.1, 0.2], [0.0, 0.0]])
    assert np.allclose(fam[0](x), base(np.linalg.norm(x, axis=1)))
    c, r = fam[2].support_ball()
    assert c[0] > 0.8 and r < 0.2
    from mtlab.metric_forge import prop22_ratios
    # with zeta = 1 the numerator is the hyperbolic L^2 mass, invariant under isometries
    inv = prop22_ratios([[0.0, 0.0], [0.5, 0.0], [0.9, 0.0]], base, lambda r2: np.ones_like(r2))
    assert np.ptp(inv) / inv[0] < 0.01
    g = fam[1].on_grid(512)
    assert dirichlet_energy(g) == pytest.approx(1.0, rel=0.02)
    with pytest.raises(DomainError):
        mobius_bump_family(moser(2, 1), [[0.0, 0.0]])


def test_mobius_bump_is_member():
    m = MobiusBump(capped_moser(2, R=0.25), np.array([0.3, 0.0]))
    assert m(np.array([0.3, 0.0])) == pytest.approx(capped_moser(2, R=0.25)(np.array([0.0]))[0])
