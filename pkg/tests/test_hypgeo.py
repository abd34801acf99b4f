import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypspeed.harmonic import omega_theta_exact
from hypspeed.hypgeo import (LogPolarPoint, arc_At, cayley, dist_disc, dist_halfplane,
                             dist_halfplane_complex, inv_cayley, project_to_ray, tangential_offset)

mp.mp.dps = 50


def mp_dist_h(L1, t1, L2, t2):
    """Reference distance from the cross-ratio formula at 50 digits."""
    z = mp.exp(mp.mpf(L1)) * mp.expj(mp.mpf(t1))
    w = mp.exp(mp.mpf(L2)) * mp.expj(mp.mpf(t2))
    return mp.acosh(1 + abs(z - w) ** 2 / (2 * mp.re(z) * mp.re(w))) / 2


angles = st.floats(-1.55, 1.55)
logs = st.floats(-20, 20)
disc_pts = st.builds(lambda r, a: cmath.rect(r, a), st.floats(0, 0.999), st.floats(-math.pi, math.pi))


def test_cayley_examples():
    assert cayley(0) == 1
    assert abs(cayley(1j) - 1j) < 1e-15
    assert abs(cayley(0.5) - 3) < 1e-15
    assert cayley(-1) == 0
    assert inv_cayley(1) == 0
    assert abs(inv_cayley(3) - 0.5) < 1e-15
    assert abs(inv_cayley(4) - 0.6) < 1e-15


@pytest.mark.parametrize("z", [1.0, 1.5, 2j, complex(0.8, 0.8), float("nan")])
def test_cayley_rejects_outside_disc(z):
    with pytest.raises(ValueError):
        cayley(z)


def test_inv_cayley_rejects_left_half_plane():
    with pytest.raises(ValueError):
        inv_cayley(-1 + 1j)
    with pytest.raises(ValueError):
        inv_cayley(2j)


def test_log_polar_validation():
    with pytest.raises(ValueError):
        LogPolarPoint(0.0, math.pi / 2)
    with pytest.raises(ValueError):
        LogPolarPoint(float("inf"), 0.0)
    p = LogPolarPoint.from_complex(1 + 2j)
    assert abs(p.to_complex() - (1 + 2j)) < 1e-15
    assert abs(p.log_re - 0.0) < 1e-15


def test_dist_halfplane_examples():
    assert dist_halfplane(LogPolarPoint(2, 0), LogPolarPoint(0, 0)) == pytest.approx(1.0, abs=1e-15)
    u = LogPolarPoint(0.3, 0.4)
    assert dist_halfplane(u, u) == 0
    w = LogPolarPoint(0.5 * math.log(5), math.atan(2))
    assert dist_halfplane(LogPolarPoint(0, 0), w) == pytest.approx(0.5 * math.acosh(3), rel=1e-13)
    assert dist_halfplane(LogPolarPoint(0, 0), w) == pytest.approx(0.881373587019543, rel=1e-13)


@pytest.mark.parametrize("L1,t1,L2,t2", [
    (0, 0, 1e-7, 1e-7),  # near-coincident points
    (0, 0.3, 0, 0.3 + 1e-9),
    (350, 0.2, 0, 0),  # past the asymptotic switch
    (1000, 1.2, 999, -1.2),
    (-400, 0.5, 400, -0.5),
    (12, 1.5, 12, -1.5),
])
def test_dist_halfplane_against_high_precision(L1, t1, L2, t2):
    ref = float(mp_dist_h(L1, t1, L2, t2))
    got = dist_halfplane(LogPolarPoint(L1, t1), LogPolarPoint(L2, t2))
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_dist_disc_examples():
    assert dist_disc(0, 0) == 0
    r = (math.e**2 - 1) / (math.e**2 + 1)
    assert dist_disc(0, r) == pytest.approx(1.0, rel=1e-14)
    assert dist_disc(0, 0.5) == pytest.approx(0.5 * math.log(3), rel=1e-14)
    assert dist_disc(0, 0.5) == pytest.approx(0.549306144334055, rel=1e-13)


def test_projection_examples():
    assert project_to_ray(LogPolarPoint(5, 1.2)) == LogPolarPoint(5, 0)
    assert project_to_ray(LogPolarPoint(0, 0)) == LogPolarPoint(0, 0)


def test_projection_minimality_scan():
    u = LogPolarPoint(math.log(2), math.pi / 4)
    best = dist_halfplane(u, project_to_ray(u))
    for r in np.linspace(1, 4, 1000):
        assert best <= dist_halfplane(u, LogPolarPoint(math.log(r), 0)) + 1e-15


def test_tangential_offset_examples():
    assert tangential_offset(0) == 0
    assert tangential_offset(math.pi / 3) == pytest.approx(0.5 * math.acosh(2), rel=1e-14)
    assert tangential_offset(math.pi / 3) == pytest.approx(0.658478948462408, rel=1e-13)
    ref = tangential_offset(0.7)
    for L in (0, 10, 1e6):
        assert dist_halfplane(LogPolarPoint(L, 0.7), LogPolarPoint(L, 0)) == pytest.approx(ref, abs=1e-10)


def test_arc_examples():
    a = arc_At(0.0)
    assert a.normalized_length == 0.5
    assert abs(a.endpoint_a - 1j) < 1e-15 and abs(a.endpoint_b + 1j) < 1e-15
    assert arc_At(math.log(1 + math.sqrt(2))).normalized_length == pytest.approx(0.25, rel=1e-14)
    assert arc_At(math.log(2)).normalized_length == pytest.approx(math.atan(4 / 3) / math.pi, rel=1e-14)
    assert arc_At(math.log(2)).normalized_length == pytest.approx(0.295167235300867, rel=1e-12)
    with pytest.raises(ValueError):
        arc_At(-0.1)


@given(st.floats(0, 30))
def test_arc_matches_half_plane_measure(L):
    arc = arc_At(L)
    assert abs(abs(arc.endpoint_a) - 1) < 1e-12 and abs(abs(arc.endpoint_b) - 1) < 1e-12
    assert arc.normalized_length == pytest.approx(omega_theta_exact(1.0, math.exp(L)), abs=1e-12)


@given(st.floats(1.0, 50))
def test_arc_endpoints_are_boundary_limits(rho):
    # inv_cayley(+-i rho) lies on the unit circle already
    arc = arc_At(math.log(rho))
    z = (1j * rho - 1) / (1j * rho + 1)
    assert abs(z - arc.endpoint_a) < 1e-12 or abs(z - arc.endpoint_b) < 1e-12


@settings(max_examples=200)
@given(logs, angles, logs, angles, logs, angles)
def test_metric_axioms(L1, a1, L2, a2, L3, a3):
    p, q, r = LogPolarPoint(L1, a1), LogPolarPoint(L2, a2), LogPolarPoint(L3, a3)
    assert abs(dist_halfplane(p, q) - dist_halfplane(q, p)) <= 1e-12 * max(1, dist_halfplane(p, q))
    assert dist_halfplane(p, r) <= dist_halfplane(p, q) + dist_halfplane(q, r) + 1e-10
    assert dist_halfplane(p, q) >= 0


@settings(max_examples=300)
@given(disc_pts, disc_pts)
def test_cayley_is_an_isometry(z, w):
    d = dist_disc(z, w)
    h = dist_halfplane(LogPolarPoint.from_complex(cayley(z)), LogPolarPoint.from_complex(cayley(w)))
    assert h == pytest.approx(d, rel=1e-9, abs=1e-10)


def test_cayley_isometry_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        z, w = (cmath.rect(math.sqrt(rng.random()) * 0.999, rng.uniform(-math.pi, math.pi)) for _ in range(2))
        h = dist_halfplane_complex(cayley(z), cayley(w))
        assert abs(h - dist_disc(z, w)) <= 1e-10 * max(1.0, h)


@given(st.floats(-1.5, 1.5))
def test_tangential_offset_symmetric(th):
    assert tangential_offset(th) == tangential_offset(-th)


@given(logs, angles)
def test_orthogonal_distance_is_half_log(L, th):
    # distance from 1 to the projection equals half |log rho|
    assert dist_halfplane(LogPolarPoint(0, 0), project_to_ray(LogPolarPoint(L, th))) == pytest.approx(
        0.5 * abs(L), rel=1e-12, abs=1e-15)
