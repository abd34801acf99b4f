import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypspeed.domains import Sector, Strip, VerticalHalfPlane
from hypspeed.harmonic import (SLIT, SlitPolyline, Theta, build_slit, c_theta, default_s_max,
                               gamma_star_lower, log_omega_theta, omega_theta_exact,
                               omega_theta_logpolar,
                               strong_markov_check, wos_measure)
from hypspeed.hypgeo import LogPolarPoint, dist_halfplane
from hypspeed.models import ingest_orbit, orbit_grid
from hypspeed.speeds import orbit_speeds

UHP = Sector(math.pi / 2, math.pi / 2)


def subtended_angle(w, a):
    """Angle at w between the vectors to -ia and ia, from their cross and dot products."""
    p, q = complex(0, a) - w, complex(0, -a) - w
    return math.atan2(abs(p.real * q.imag - p.imag * q.real), p.real * q.real + p.imag * q.imag)


def oscillating_orbit():
    s = np.linspace(0, 60, 600)
    th = 1.2 * np.sin(0.7 * s) ** 2
    rho = (1 + s) / np.cos(th)
    return ingest_orbit(zip(s, np.log(rho), th))


def test_omega_examples():
    assert omega_theta_exact(1, 1) == pytest.approx(0.5, abs=1e-15)
    assert omega_theta_exact(1, 1 + math.sqrt(2)) == pytest.approx(0.25, abs=1e-15)
    assert omega_theta_exact(1, 2) == pytest.approx(math.atan(4 / 3) / math.pi, rel=1e-14)
    assert omega_theta_exact(1, 2) == pytest.approx(0.295167, abs=1e-6)


@settings(max_examples=200)
@given(st.floats(1e-3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-2, 1e3))
def test_omega_matches_angle_rule(x, y, a):
    w = complex(x, y)
    assert omega_theta_exact(w, a) == pytest.approx(1 - subtended_angle(w, a) / math.pi, abs=1e-9)


@given(st.floats(1.01, 1e5))
def test_omega_at_one_closed_form(rho):
    assert omega_theta_exact(1, rho) == pytest.approx(math.atan(2 * rho / (rho**2 - 1)) / math.pi, rel=1e-12)


@given(st.floats(0.01, 100), st.floats(1e-2, 1e4))
def test_omega_decreasing_in_a(x, a):
    assert omega_theta_exact(complex(x, 0.3), a * 1.5) <= omega_theta_exact(complex(x, 0.3), a)


def test_omega_envelope_at_large_a():
    a = 1e6
    assert a * omega_theta_exact(1, a) == pytest.approx(2 / math.pi, rel=0.01)
    for a in np.geomspace(10, 1e6, 30):
        assert 0.2 <= a * omega_theta_exact(1, a) <= 0.7


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(-1.5, 1.5), st.floats(-50, 50))
def test_log_omega_consistent(L, th, log_a):
    u = LogPolarPoint(L, th)
    direct = omega_theta_exact(u.to_complex(), math.exp(log_a))
    if direct > 1e-300:
        assert math.exp(log_omega_theta(u, log_a)) == pytest.approx(direct, rel=1e-9, abs=1e-15)


def test_log_omega_far_regime():
    # far below modulus a the measure is about (2/pi) Re w / a; far above it is 1 - O(a/|w|)
    assert log_omega_theta(LogPolarPoint(-200, 0.3), 0.0) == pytest.approx(
        math.log(2 / math.pi) - 200 + math.log(math.cos(0.3)), rel=1e-12)
    assert log_omega_theta(LogPolarPoint(200, 0.3), 0.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("m", [UHP, Sector(math.pi / 4, math.pi / 4), Sector(0.3, 1.2), Strip(1),
                               VerticalHalfPlane()])
def test_orthogonal_speed_tracks_log_measure(m):
    orb = orbit_grid(m, 1, 1e6, 200)
    for sp, L in zip(orbit_speeds(orb), orb.log_rho):
        if L > math.log(3):
            om = omega_theta_exact(1, math.exp(L)) if L < 700 else None
            log_om = math.log(om) if om else log_omega_theta(LogPolarPoint(0, 0), L)
            assert abs(sp.v_o + 0.5 * log_om) <= 1


def test_c_theta_examples():
    assert c_theta(0.01) >= c_theta(0.3)
    assert c_theta(math.pi / 3) > 0
    for th in (0.1, 0.5, 1.0, 1.5):
        assert c_theta(th) == pytest.approx(2 / math.pi * math.atan(math.cos(th)), rel=1e-10)
    with pytest.raises(ValueError):
        c_theta(0)
    with pytest.raises(ValueError):
        c_theta(math.pi / 2)


def test_c_theta_brute_force_grid():
    c = math.sqrt(2) / 2
    x = np.linspace(c, 100, 2000)[:, None]
    y = np.linspace(-100, 100, 2001)[None, :]
    X, Y = np.broadcast_arrays(x, y)
    vals = (np.arctan2(X, 1 - Y) + np.arctan2(X, 1 + Y)) / math.pi
    vals = np.where(X**2 + Y**2 <= 100**2, vals, np.inf)
    assert c_theta(math.pi / 4) == pytest.approx(float(vals.min()), abs=1e-4)


def test_gamma_star_examples():
    orb = orbit_grid(UHP, 1, 1e4, 400)
    assert gamma_star_lower(orb, 10, 10) == pytest.approx(0.5, abs=1e-12)
    v = gamma_star_lower(orb, 10, 100)
    assert v > 0.5
    assert v == pytest.approx(omega_theta_exact(101 / 11, 1), rel=1e-9)
    with pytest.raises(ValueError):
        gamma_star_lower(orb, 10, 5)
    with pytest.raises(ValueError):
        gamma_star_lower(orb, 10, 1e5)


def test_gamma_star_on_oscillating_orbit():
    orb = oscillating_orbit()
    ts = np.linspace(0, 60, 50)
    for t in ts:
        for s in ts[ts >= t]:
            assert gamma_star_lower(orb, float(t), float(s)) >= 0.5 - 1e-12


def test_build_slit_real_axis_example():
    orb = orbit_grid(UHP, 0.5, 200, 50)
    sl = build_slit(orb, 1, 100)
    v = sl.vertices
    assert np.all(v.imag == 0)
    assert v[0].real == pytest.approx(2) and v[-1].real == pytest.approx(101)
    assert np.all(np.diff(v.real) > 0)
    assert sl.refinement == 16


def test_build_slit_spacing_and_invariants():
    orb = orbit_grid(Sector(0.4, 1.1), 1, 1e4, 50)
    sl = build_slit(orb, 2, 500, refinement=20)
    pts = [LogPolarPoint.from_complex(z) for z in sl.vertices]
    gaps = [dist_halfplane(p, q) for p, q in zip(pts[:-1], pts[1:])]
    assert max(gaps) <= 1 / 20 + 1e-12
    assert np.all(sl.vertices.real > 0)
    with pytest.raises(ValueError):
        sl.vertices[0] = 1.0


def test_build_slit_rejects_coarse_refinement():
    orb = orbit_grid(UHP, 1, 100, 10)
    with pytest.raises(ValueError):
        build_slit(orb, 1, 100, refinement=8)


def test_build_slit_interpolates_ingested_orbit():
    orb = ingest_orbit([(1, math.log(2), 0.0), (100, math.log(101), 0.0)])
    sl = build_slit(orb, 1, 100)
    length = dist_halfplane(LogPolarPoint(math.log(2), 0), LogPolarPoint(math.log(101), 0))
    assert len(sl.vertices) - 1 >= 16 * length
    with pytest.raises(ValueError):
        build_slit(orb, 1, 200)


def test_default_s_max_reaches_factor():
    orb = orbit_grid(UHP, 1, 10, 10)
    s = default_s_max(orb, 10)
    assert (1 + s) >= 1e3 * 11


def test_slit_polyline_validation():
    with pytest.raises(ValueError):
        SlitPolyline(np.array([1 + 0j]), 0, 1, 16)
    with pytest.raises(ValueError):
        SlitPolyline(np.array([1 + 0j, -1 + 0j]), 0, 1, 16)
    with pytest.raises(ValueError):
        SlitPolyline(np.array([1 + 0j, 1 + 0j]), 0, 1, 16)


def test_wos_plain_matches_oracle():
    for a in (1.0, 2.0):
        est = wos_measure(1.0, Theta(a), 40_000, seed=42)
        assert abs(est.mean - omega_theta_exact(1, a)) <= 3 * est.stderr
        assert est.valid and est.discarded == 0
        assert est.stderr == pytest.approx(math.sqrt(est.mean * (1 - est.mean) / est.n))


def test_wos_determinism_and_workers():
    a = wos_measure(1.0, Theta(2), 10_000, seed=7)
    b = wos_measure(1.0, Theta(2), 10_000, seed=7)
    c = wos_measure(1.0, Theta(2), 10_000, seed=7, workers=3)
    assert a == b == c
    d = wos_measure(1.0, Theta(2), 10_000, seed=8)
    assert d.mean != a.mean


def test_wos_stderr_scaling():
    a = wos_measure(1.0, Theta(2), 40_000, seed=3)
    b = wos_measure(1.0, Theta(2), 80_000, seed=3)
    assert a.stderr / b.stderr == pytest.approx(math.sqrt(2), rel=0.1)


def test_wos_rejects_bad_input():
    with pytest.raises(ValueError):
        wos_measure(-1.0, Theta(2), 100)
    with pytest.raises(ValueError):
        wos_measure(1.0, Theta(2), 100, eps=0)
    with pytest.raises(ValueError):
        wos_measure(1.0, SLIT, 100)
    orb = orbit_grid(UHP, 0.5, 100, 20)
    sl = build_slit(orb, 0, 50)
    with pytest.raises(ValueError):
        wos_measure(1.0, SLIT, 100, slit=sl)  # the slit starts at 1


def test_wos_slit_hall_small():
    orb = orbit_grid(UHP, 1, 1e5, 50)
    sl = build_slit(orb, 10)
    est = wos_measure(1.0, SLIT, 20_000, seed=1, slit=sl)
    assert est.s_max == sl.s_max
    assert omega_theta_exact(1, 11) < 2 * (est.mean + 3 * est.stderr)


def test_wos_max_steps_discards():
    est = wos_measure(1.0, Theta(2), 4000, seed=0, eps=1e-12, max_steps=3)
    assert est.discarded > 0 and not est.valid


def test_strong_markov_small():
    orb = orbit_grid(Sector(math.pi / 4, math.pi / 4), 1, 1e4, 50)
    rep = strong_markov_check(orb, 10, n=20_000, seed=5)
    assert rep.passed and abs(rep.lhs - rep.rhs) <= 3 * rep.stderr


def test_strong_markov_degenerate_reduces_to_plain_estimate():
    orb = orbit_grid(UHP, 1, 1e4, 50)
    rep = strong_markov_check(orb, 10, n=20_000, seed=9, s_max=0)
    plain = wos_measure(1.0, Theta(11.0), 20_000, seed=9)
    assert rep.rhs == plain.mean
    assert rep.lhs == pytest.approx(omega_theta_exact(1, 11.0), rel=1e-14)
    assert rep.passed


@given(st.floats(-1.5707963, 1.5707963), st.floats(-300, 300))
def test_log_omega_on_the_critical_circle(th, log_a):
    # [-ia, ia] subtends a right angle from every point of |w| = a
    assert omega_theta_logpolar(LogPolarPoint(log_a, th), log_a) == pytest.approx(0.5, abs=1e-14)
