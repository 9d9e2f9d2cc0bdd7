import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mtlab.conformal import (MobiusMap, disc_strip, disc_strip_jacobian, fd_jacobian,
                             hyperbolic_density, mobius_apply, mobius_ball_image, strip_disc,
                             transport)
from mtlab.errors import DomainError, OutsideDomain, SingularPoint
from mtlab.experiments import disc_strip_jacobian_gap, mobius_suite, transport_gaps
from mtlab.functionals import TruncatedExpSpec, dirichlet_energy, mt_functional
from mtlab.geometry import disc_grid, strip_grid

coord = st.floats(-0.69, 0.69)


def complex_oracle(a, x):
    z = complex(*x)
    b = complex(*a)
    w = (z + b) / (1 + b.conjugate() * z)
    return np.array([w.real, w.imag])


def test_mobius_examples():
    a = np.array([0.3, -0.4])
    assert np.array_equal(mobius_apply(a, np.zeros(2)), a)
    x = np.array([0.1, 0.7])
    assert np.allclose(mobius_apply(np.zeros(2), x), x, atol=0)
    y = mobius_apply([0.5, 0.0], [0.0, 0.5])
    assert y == pytest.approx([0.58824, 0.35294], abs=1e-5)


@given(coord, coord, coord, coord)
def test_mobius_matches_complex_oracle(a1, a2, x1, x2):
    a, x = np.array([a1, a2]), np.array([x1, x2])
    assert np.allclose(mobius_apply(a, x), complex_oracle(a, x), atol=1e-13)


@given(coord, coord, coord, coord)
def test_mobius_inverse_and_ball(a1, a2, x1, x2):
    m = MobiusMap([a1, a2])
    x = np.array([x1, x2])
    y = m(x)
    assert np.linalg.norm(y) < 1
    assert np.allclose(m.inverse(y), x, atol=1e-10)


def test_mobius_three_dimensions():
    m = MobiusMap([0.2, -0.1, 0.5])
    x = np.array([0.3, 0.3, -0.2])
    assert np.allclose(m.inverse(m(x)), x, atol=1e-12)
    J = fd_jacobian(m, x)
    s2 = np.trace(J.T @ J) / 3
    assert np.allclose(J.T @ J, s2 * np.eye(3), atol=1e-7 * s2)


def test_mobius_errors():
    with pytest.raises(OutsideDomain):
        MobiusMap([1.0, 0.0])
    m = MobiusMap([0.5, 0.0])
    with pytest.raises(SingularPoint):
        m(np.array([-2.0, 0.0]))


def test_mobius_suite_tolerances():
    w = mobius_suite(np.random.default_rng(3))
    assert w["origin"] == 0.0
    assert w["inverse"] <= 1e-10
    assert w["conformal"] <= 1e-6
    assert w["isometry"] <= 1e-6
    assert w["into_ball"] < 1


def test_ball_image_examples():
    c, r = mobius_ball_image(np.zeros(2), 0.3)
    assert np.allclose(c, 0) and r == pytest.approx(0.3)
    c, r = mobius_ball_image([0.5, 0.0], 0.5)
    assert c == pytest.approx([0.4, 0.0]) and r == pytest.approx(0.4)
    with pytest.raises(DomainError):
        mobius_ball_image([0.5, 0.0], 1.0)


def test_ball_image_boundary_consistency():
    a = np.array([0.6, 0.3])
    R = 0.45
    c, r = mobius_ball_image(a, R)
    t = np.linspace(0, 2 * np.pi, 500, endpoint=False)
    pts = R * np.stack((np.cos(t), np.sin(t)), axis=-1)
    d = np.linalg.norm(mobius_apply(a, pts) - c, axis=1)
    assert np.max(np.abs(d - r)) <= 1e-10


def test_disc_strip_examples():
    assert np.allclose(disc_strip([0.0, 0.0]), 0)
    xs = disc_strip(np.array([[1 - 1e-3, 0.0], [1 - 1e-9, 0.0]]))
    assert xs[1, 0] < xs[0, 0] < -2 and np.all(xs[:, 1] == 0)
    with pytest.raises(OutsideDomain):
        disc_strip([1.0, 0.0])


@given(st.floats(-6, 6), st.floats(-0.99, 0.99))
def test_strip_disc_roundtrip(x1, x2):
    y = strip_disc(np.array([x1, x2]))
    assert np.linalg.norm(y) < 1
    assert np.allclose(disc_strip(y), [x1, x2], atol=1e-9)


def test_disc_strip_conformal(rng):
    r = 0.9 * np.sqrt(rng.uniform(0, 1, 200))
    t = rng.uniform(0, 2 * np.pi, 200)
    for p in np.stack((r * np.cos(t), r * np.sin(t)), axis=-1):
        J = fd_jacobian(disc_strip, p)
        s2 = np.trace(J.T @ J) / 2
        assert np.max(np.abs(J.T @ J - s2 * np.eye(2))) <= 1e-6 * s2


def test_jacobian_examples():
    assert disc_strip_jacobian([0.0, 0.0]) == pytest.approx(16 / math.pi**2)
    assert disc_strip_jacobian([0.0, 0.5]) == pytest.approx(16 / (math.pi**2 * 1.5625))
    assert disc_strip_jacobian([0.0, 0.5]) == pytest.approx(1.03753, abs=1e-5)
    assert disc_strip_jacobian_gap(np.random.default_rng(0)) <= 1e-6


def test_jacobian_subharmonic_and_mean_value(rng):
    h = 1e-3
    pts = 0.8 * rng.uniform(-1, 1, (100, 2)) / math.sqrt(2)
    e = np.eye(2) * h
    lap = sum(disc_strip_jacobian(pts + d) + disc_strip_jacobian(pts - d) for d in e) \
        - 4 * disc_strip_jacobian(pts)
    assert np.all(lap > 0)
    t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    for rho in (0.3, 0.6, 0.9):
        circ = rho * np.stack((np.cos(t), np.sin(t)), axis=-1)
        assert disc_strip_jacobian(circ).mean() > disc_strip_jacobian([0.0, 0.0])


def test_hyperbolic_density():
    assert hyperbolic_density([0.0, 0.0]) == 4.0
    assert hyperbolic_density([0.5, 0.0]) == pytest.approx(64 / 9)
    with pytest.raises(OutsideDomain):
        hyperbolic_density([0.0, 1.0])


@given(coord, coord, coord, coord)
def test_hyperbolic_isometry(a1, a2, x1, x2):
    m = MobiusMap([a1, a2])
    x = np.array([x1, x2])
    J = fd_jacobian(m, x)
    lam2 = abs(np.linalg.det(J))
    assert hyperbolic_density(m(x)) * lam2 == pytest.approx(hyperbolic_density(x), rel=1e-6)


def test_transport_zero_and_invariance():
    z = transport(strip_grid(8, 128, 32), n=64)
    assert dirichlet_energy(z) == 0.0 and mt_functional(z, TruncatedExpSpec(2)) == 0.0
    de, dm = transport_gaps()
    assert de <= 0.01 and dm <= 0.02


def test_transport_back_and_forth():
    from mtlab.families import radial_bump
    u = strip_grid(8, 256, 64, radial_bump(0.8))
    d = transport(u, n=512)
    back = transport(d, "disc->strip", n=256, L=8, n2=64)
    assert np.max(np.abs(back.values - u.values)) < 0.02
    with pytest.raises(DomainError):
        transport(d, "disc->strip")
    with pytest.raises(DomainError):
        transport(disc_grid(8), "strip->disc")
