import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxzbethe.kernels import (
    Anisotropy, CoincidentRoots, Line, Rapidity, phi, phi2, phi2_limit, phi2_mixed,
    phi2_mixed_prime, phi2_prime, phi2_same, phi2_same_prime, phi_limit, phi_prime, phi_real,
    phi_real_prime, phi_shifted, phi_shifted_prime,
)

mp.mp.dps = 30
ETAS = [0.5, 0.45, 1 / 3, 0.25, 0.1, 0.01]


def _ratio(z, half):
    # exp(i phi) from the defining logarithm, evaluated with mpmath
    h = mp.mpc(0, half)
    return -mp.sinh(z - h) / mp.sinh(z + h)


def _close_mod_2pi(a, b, tol):
    d = (a - b + math.pi) % (2 * math.pi) - math.pi
    return abs(d) < tol


@pytest.mark.parametrize("x", ETAS)
def test_phi_matches_logarithm_on_both_lines(x):
    a = Anisotropy.from_pi(x)
    for re in np.linspace(-6, 6, 41):
        for line, im in ((Line.REAL, 0), (Line.SHIFTED, mp.pi / 2)):
            z = mp.mpc(re, im)
            ref = float(mp.arg(_ratio(z, a.eta / 2)))
            assert _close_mod_2pi(phi(Rapidity(re, line), a), ref, 1e-12)


@pytest.mark.parametrize("x", ETAS)
def test_phi2_matches_logarithm(x):
    a = Anisotropy.from_pi(x)
    for d in np.linspace(-5, 5, 40):
        ref_same = float(mp.arg(_ratio(mp.mpc(d, 0), a.eta)))
        ref_mixed = float(mp.arg(_ratio(mp.mpc(d, mp.pi / 2), a.eta)))
        assert _close_mod_2pi(phi2(d, True, a), ref_same, 1e-12)
        assert _close_mod_2pi(phi2(d, False, a), ref_mixed, 1e-12)


@pytest.mark.parametrize("x", ETAS)
def test_branches_continuous_and_odd(x):
    # grid jumps bounded by the analytic slope: no hidden 2 pi branch switches
    a = Anisotropy.from_pi(x)
    t = np.linspace(-8, 8, 160001)
    dt = t[1] - t[0]
    for f, fp in ((phi_real, phi_real_prime), (phi2_same, phi2_same_prime),
                  (phi_shifted, phi_shifted_prime)):
        v = f(t, a)
        bound = np.maximum(np.abs(fp(t[:-1], a)), np.abs(fp(t[1:], a)))
        assert np.all(np.abs(np.diff(v)) <= 1.05 * bound * dt + 1e-12)
    assert np.allclose(phi_real(t, a), -phi_real(-t, a), atol=1e-14)
    assert np.allclose(phi2_same(t, a), -phi2_same(-t, a), atol=1e-14)
    assert np.allclose(phi_shifted(t, a) - np.pi, np.pi - phi_shifted(-t, a), atol=1e-14)
    # mixed branch: odd, single 2 pi step at d = 0
    m = t[t != 0]
    assert np.allclose(phi2_mixed(m, a), -phi2_mixed(-m, a), atol=1e-14)
    if not a.is_xx:
        tp = t[t > 0]
        bound = np.abs(phi2_mixed_prime(tp, a))
        assert np.all(np.abs(np.diff(phi2_mixed(tp, a))) <= 1.05 * bound[:-1] * dt + 1e-12)
        assert phi2_mixed(1e-300, a) - phi2_mixed(-1e-300, a) == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("x", ETAS)
def test_limits(x):
    a = Anisotropy.from_pi(x)
    big = 40.0
    assert phi_real(big, a) == pytest.approx(phi_limit(1, Line.REAL, a), abs=1e-12)
    assert phi_real(-big, a) == pytest.approx(phi_limit(-1, Line.REAL, a), abs=1e-12)
    assert phi_shifted(big, a) == pytest.approx(phi_limit(1, Line.SHIFTED, a), abs=1e-12)
    assert phi_shifted(-big, a) == pytest.approx(phi_limit(-1, Line.SHIFTED, a), abs=1e-12)
    for s in (1, -1):
        assert phi2_same(s * big, a) == pytest.approx(phi2_limit(s, a), abs=1e-12)
        assert phi2_mixed(s * big, a) == pytest.approx(phi2_limit(s, a), abs=1e-12)


@pytest.mark.parametrize("x", ETAS)
def test_derivatives_against_mpmath(x):
    a = Anisotropy.from_pi(x)
    eta = mp.mpf(a.eta)
    fr = lambda t: 2 * mp.atan2(mp.tanh(t) * mp.cos(eta / 2), mp.sin(eta / 2))
    fs = lambda t: mp.pi - 2 * mp.atan2(mp.tanh(t) * mp.sin(eta / 2), mp.cos(eta / 2))
    gs = lambda t: 2 * mp.atan2(mp.tanh(t) * mp.cos(eta), mp.sin(eta))
    gm = lambda t: -2 * mp.atan(mp.tanh(t) * mp.tan(eta)) if a.eta < math.pi / 2 else mp.mpf(0)
    for t in (-3.0, -0.7, 0.05, 0.4, 2.5):
        assert phi_real_prime(t, a) == pytest.approx(float(mp.diff(fr, t)), rel=1e-7, abs=1e-12)
        assert phi_shifted_prime(t, a) == pytest.approx(float(mp.diff(fs, t)), rel=1e-7, abs=1e-12)
        assert phi2_same_prime(t, a) == pytest.approx(float(mp.diff(gs, t)), rel=1e-7, abs=1e-12)
        assert phi2_mixed_prime(t, a) == pytest.approx(float(mp.diff(gm, t)), rel=1e-7, abs=1e-12)


def test_large_argument_derivatives_are_finite():
    a = Anisotropy.from_pi(0.3)
    with np.errstate(all="raise"):
        for f in (phi_real_prime, phi_shifted_prime, phi2_same_prime, phi2_mixed_prime):
            assert f(800.0, a) == 0.0


def test_xx_point_is_exact():
    a = Anisotropy.from_pi(0.5)
    assert a.delta == 0.0 and a.is_xx
    assert np.all(phi2_mixed(np.linspace(-3, 3, 7), a) == 0.0)
    assert np.all(phi2_mixed_prime(np.linspace(-3, 3, 7), a) == 0.0)
    assert phi2_same(0.3, a) == 0.0


def test_shifted_phi_at_origin_and_range():
    a = Anisotropy.from_pi(1 / 3)
    assert phi(Rapidity(0.0, Line.SHIFTED), a) == math.pi
    v = phi_shifted(np.linspace(-10, 10, 101), a)
    assert np.all((v > math.pi - a.eta - 1e-12) & (v < math.pi + a.eta + 1e-12))


def test_coincident_same_line_raises():
    a = Anisotropy.from_pi(0.3)
    with pytest.raises(CoincidentRoots):
        phi2(0.0, True, a)
    with pytest.raises(CoincidentRoots):
        phi2_prime(0.0, True, a)
    assert phi2(0.0, False, a) == pytest.approx(math.pi)


def test_anisotropy_validation():
    with pytest.raises(ValueError):
        Anisotropy(0.0)
    with pytest.raises(ValueError):
        Anisotropy(2.0)
    with pytest.raises(ValueError):
        Anisotropy.from_delta(1.0)
    assert Anisotropy.from_delta(0.5).eta == pytest.approx(math.pi / 3)
    with pytest.raises(ValueError):
        Rapidity(math.inf)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(-10, 10))
def test_phi_prime_matches_difference_quotient(x, t):
    a = Anisotropy.from_pi(x)
    h = 1e-6
    for line in Line:
        fd = (phi(Rapidity(t + h, line), a) - phi(Rapidity(t - h, line), a)) / (2 * h)
        assert phi_prime(Rapidity(t, line), a) == pytest.approx(fd, rel=1e-6, abs=1e-7)


