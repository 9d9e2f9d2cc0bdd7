import math

import numpy as np
import pytest

from mtlab.cc import (TransportedProfile, canonical_families, classify, envelope,
                      envelope_check, mass_profile, remainder_compactness_check,
                      theta_statistic)
from mtlab.errors import ClassViolation, DomainError, EnergyNotNormalized, NotStabilized
from mtlab.experiments import random_grid
from mtlab.families import radial_bump, strip_eigenfunction, vanishing_family
from mtlab.functionals import lp_norm, normalize_energy
from mtlab.geometry import strip, strip_grid
from mtlab.rearrangement import double_symmetrize


@pytest.fixture(scope="module")
def families():
    return canonical_families()


@pytest.mark.parametrize("name", ["vanishing", "concentrating", "dichotomy", "compact"])
def test_canonical_verdicts(families, name):
    c = classify(families[name])
    assert c.verdict == name


def test_concentrating_point_and_trend(families):
    c = classify(families["concentrating"])
    assert c.point == (0.0, 0.0)
    assert np.all(np.diff(c.thetas) > 0)
    assert c.theta > 0.99


def test_dichotomy_theta(families):
    c = classify(families["dichotomy"])
    assert abs(c.theta - 0.5) <= 0.05
    assert str(c).startswith("dichotomy(")


@pytest.mark.parametrize("name", ["vanishing", "concentrating", "dichotomy", "compact"])
def test_theta_eps_stable(families, name):
    # raises NotStabilized if eps and eps/2 disagree by more than 0.05
    theta_statistic(families[name])


def test_theta_values(families):
    assert theta_statistic(families["vanishing"]) == 0.0
    assert abs(theta_statistic(families["dichotomy"]) - 0.5) <= 0.05


def test_theta_not_stabilized():
    u = normalize_energy(strip_grid(8, 512, 128, radial_bump(0.2)))
    with pytest.raises(NotStabilized):
        theta_statistic([u])


def test_theta_bad_reference(families):
    with pytest.raises(DomainError):
        theta_statistic(families["compact"], S_ref=0.0)


def test_classify_needs_four(families):
    with pytest.raises(DomainError):
        classify(families["compact"][:3])


def test_classify_reindexing():
    base = normalize_energy(strip_grid(8, 512, 128, radial_bump(0.9)))
    for shifts in ([1.0, 3.0, 5.0, 6.0], [2.0, 4.0, 5.0, 6.0], [3.0, 4.0, 5.0, 6.5]):
        fam = [vanishing_family(base, s) for s in shifts]
        assert classify(fam).verdict == "vanishing"


def test_mass_profile_partials(families):
    for fam in families.values():
        for m in fam:
            p = mass_profile(m)
            assert p.mt_eps <= p.mt_window * (1 + 1e-12) + 1e-15
            assert p.mt_window <= p.mt_total * (1 + 1e-12) + 1e-15
            assert p.energy_eps <= p.energy_window + 1e-12
            assert p.energy_window <= p.energy_total * (1 + 1e-6) + 1e-12


def test_envelope_zero():
    assert envelope_check(strip_grid(8, 512, 128))


def test_envelope_phi4():
    u = normalize_energy(strip_eigenfunction(4, 512, 128, L=8))
    X1, X2 = u.mesh()
    out = X1**2 + X2**2 >= 0.01
    env = envelope(X1[out], X2[out])
    assert np.all(u.values[out] ** 4 <= env)
    assert envelope_check(u)


def test_envelope_random_symmetrized(rng):
    for _ in range(5):
        u = normalize_energy(double_symmetrize(random_grid(rng, 512, 128, domain=strip(8.0))))
        assert envelope_check(u)


def test_line_bound_pointwise(rng):
    # u <= sqrt(2/|x1|) ||grad u|| on the symmetric class
    for u in [normalize_energy(strip_eigenfunction(k, 512, 128, L=8)) for k in (1, 2, 4, 8)]:
        X1, _ = u.mesh()
        m = np.abs(X1) > 0.05
        assert np.all(u.values[m] <= np.sqrt(2 / np.abs(X1[m])))


def test_envelope_class_violation():
    u = strip_grid(8, 512, 128, lambda a, b: np.exp(-(a - 1) ** 2 - b**2))
    with pytest.raises(ClassViolation):
        envelope_check(normalize_energy(u))


def test_envelope_energy_violation():
    u = normalize_energy(strip_eigenfunction(2, 512, 128, L=8))
    with pytest.raises(EnergyNotNormalized):
        envelope_check(u.with_values(2 * u.values))


def test_remainder_constant_family():
    u = normalize_energy(strip_eigenfunction(2, 512, 128, L=8))
    r = remainder_compactness_check([u] * 4, limit=u)
    assert r and r.worst == 0.0


def test_remainder_vanishing_family():
    base = normalize_energy(strip_grid(8, 512, 128, radial_bump(0.9)))
    fam = [vanishing_family(base, s) for s in (2.0, 4.0, 6.0, 7.0)]
    r = remainder_compactness_check(fam, mode="full")
    assert r and r.worst == 0.0


def test_remainder_eigenfunction_family():
    fam = [normalize_energy(strip_eigenfunction(k, 2048, 128, L=32)) for k in (4, 8, 16, 32)]
    r = remainder_compactness_check(fam, R=4.0, tol=0.1)
    vals = r.details["values"]
    assert r
    # amplitude ~ 1/sqrt(k), so the quartic tail falls by about 4 per doubling
    assert np.all(vals[:-1] / vals[1:] > 2)


def test_remainder_bad_mode():
    u = strip_grid(8, 512, 128)
    with pytest.raises(DomainError):
        remainder_compactness_check([u], mode="other")


def test_vanishing_eigenfunction_chain():
    # normalized rectangle eigenfunctions: 4 pi int u^2 = 4 pi / lambda_1 -> 16/pi
    u = normalize_energy(strip_eigenfunction(10, 1536, 128, L=12))
    assert 4 * math.pi * lp_norm(u, 2) ** 2 == pytest.approx(16 / math.pi, rel=0.02)


def test_transported_profile_samples(families):
    tp = families["concentrating"][0]
    assert isinstance(tp, TransportedProfile)
    g = tp.on_grid(strip_grid(8, 256, 64))
    assert g.values.max() > 0
    assert g.values.max() <= float(tp(np.array([0.0, 0.0])))
