import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from hypspeed.domains import (Parabola, Sector, Strip, VerticalHalfPlane, Xi, axis_distance,
                              base_point, contains, delta_parabola, delta_xi, inclusion_check,
                              is_convex, model_text, parse_model, quasi_symmetry_scan,
                              side_distances)


def brute_parabola_distance(s, alpha):
    """Independent oracle: minimise the distance to the curve y = |x|^alpha directly."""
    f = lambda x: math.hypot(x, x**alpha - s)
    hi = s ** (1 / alpha)
    xs = np.linspace(0, hi, 20001)
    k = int(np.argmin([f(x) for x in xs]))
    lo_b, hi_b = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    res = optimize.minimize_scalar(f, bounds=(lo_b, hi_b), method="bounded", options={"xatol": 1e-14})
    return min(res.fun, f(0.0))


def test_parse_and_text_roundtrip():
    for txt in ["sector:0.785,0.785", "strip:1", "halfplane", "parabola:2", "xi:2,0.524",
                "strip:2@0.5,-1"]:
        m = parse_model(txt)
        assert parse_model(model_text(m)) == m
    assert parse_model("strip:1@0.5,-1").shift == complex(0.5, -1)


@pytest.mark.parametrize("bad", ["sector:1", "strip:0", "parabola:1", "xi:2,0", "xi:2,4",
                                 "disc:1", "sector:a,b", "sector:-0.1,1", "sector:0,0"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_model(bad)


def test_delta_parabola_examples():
    assert delta_parabola(1, 2) == pytest.approx(math.sqrt(3) / 2, rel=1e-12)
    assert delta_parabola(1.25, 2) == pytest.approx(1.0, rel=1e-12)
    d = delta_parabola(1e6, 3)
    assert 0.999 * 1e2 <= d <= 1e2


def test_delta_parabola_closed_form_alpha_2():
    for s in np.geomspace(1, 1e8, 300):
        assert delta_parabola(float(s), 2.0) == pytest.approx(math.sqrt(s - 0.25), rel=1e-10)


@pytest.mark.parametrize("alpha", [1.3, 1.7, 2.5, 3.0, 4.0])
@pytest.mark.parametrize("s", [1.0, 2.0, 7.5, 100.0, 1e4])
def test_delta_parabola_against_brute_force(alpha, s):
    assert delta_parabola(s, alpha) == pytest.approx(brute_parabola_distance(s, alpha), rel=1e-7)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_delta_parabola_envelope(alpha):
    s = np.geomspace(1, 1e8, 200)
    g = np.array([delta_parabola(float(x), alpha) for x in s]) / s ** (1 / alpha)
    assert np.all(np.diff(g) >= -1e-12)
    assert 0.99 < g[-1] <= 1.0 + 1e-12


def test_delta_xi_examples():
    p, m = delta_xi(4, 2, math.pi / 6)
    assert p == pytest.approx(2.0, rel=1e-12) and m == pytest.approx(math.sqrt(15) / 2, rel=1e-12)
    p, m = delta_xi(4, 2, math.pi / 2)
    assert p == 4.0 and m == pytest.approx(math.sqrt(15) / 2, rel=1e-12)
    p, m = delta_xi(1, 2, math.pi)
    assert p == 1.0 and m == pytest.approx(math.sqrt(3) / 2, rel=1e-12)


@given(st.floats(1, 1e6), st.floats(1.1, 4), st.floats(0.05, math.pi))
def test_xi_left_distance_is_parabola_distance(t, alpha, theta):
    assert delta_xi(t, alpha, theta)[1] == delta_parabola(t, alpha)


def test_quasi_symmetry_examples():
    t = np.geomspace(1, 1e6, 60)
    rep = quasi_symmetry_scan(Parabola(2), t)
    assert rep.verdict == "quasi-symmetric"
    assert np.allclose(rep.ratio, 1.0)
    rep = quasi_symmetry_scan(Xi(2, math.pi / 6), t)
    assert rep.verdict == "not quasi-symmetric"
    assert rep.slope == pytest.approx(0.5, abs=0.05)
    rep = quasi_symmetry_scan(Sector(math.pi / 4, math.pi / 4), t)
    assert rep.verdict == "quasi-symmetric" and rep.K_estimate == pytest.approx(1.0)


def test_quasi_symmetry_rejects_bad_grid():
    with pytest.raises(ValueError):
        quasi_symmetry_scan(Parabola(2), [0.5, 2])


def test_inclusion_examples():
    assert inclusion_check(Sector(math.pi / 4, math.pi / 4), Sector(math.pi / 2, math.pi / 2))
    assert inclusion_check(Strip(1), VerticalHalfPlane())
    assert not inclusion_check(Sector(math.pi / 2, math.pi / 2), Sector(math.pi / 4, math.pi / 4))
    assert inclusion_check(Sector(0.5, 0.0), Xi(2, 0.5))
    assert not inclusion_check(Sector(math.pi / 4, math.pi / 4), Parabola(2))


@pytest.mark.parametrize("m", [Sector(0.3, 1.0), Strip(2), VerticalHalfPlane(), Parabola(2.5), Xi(2, 1.0)])
def test_inclusion_reflexive(m):
    assert inclusion_check(m, m)


@pytest.mark.parametrize("inner,outer", [
    (Sector(0.2, 0.2), Sector(0.5, 0.7)),
    (Strip(1, 0.5), Strip(3)),
    (Strip(1), VerticalHalfPlane(-1)),
    (Sector(0.4, 0.0, 1 + 0j), VerticalHalfPlane()),
])
def test_inclusion_antisymmetric_on_strict_pairs(inner, outer):
    assert inclusion_check(inner, outer)
    assert not inclusion_check(outer, inner)


@pytest.mark.parametrize("m", [Sector(0.3, 1.0), Strip(2, 1 + 1j), VerticalHalfPlane(2j), Parabola(2.5),
                               Xi(2, 1.0), Xi(3, 2.5)])
def test_domains_starlike_at_infinity(m):
    # Omega + it is inside Omega: the base point and its upward translates are inside
    z0 = base_point(m)
    assert contains(m, z0)
    for t in (0.5, 10.0, 1e4):
        assert contains(m, z0 + 1j * t)


def test_convexity_flags():
    assert is_convex(Sector(1, 1)) and not is_convex(Sector(2, 2))
    assert is_convex(Parabola(2)) and is_convex(Xi(2, 1.0)) and not is_convex(Xi(2, 2.0))


@settings(max_examples=50)
@given(st.floats(1, 1e4))
def test_axis_distance_sector_right_angle(s):
    # for the upper half-plane the base point is i and the distance is the height
    assert axis_distance(Sector(math.pi / 2, math.pi / 2), s) == pytest.approx(s, rel=1e-12)


def test_side_distances_capped_by_t():
    plus, minus = side_distances(VerticalHalfPlane(), 3.0)
    assert plus == 3.0 and minus == 1.0
    plus, minus = side_distances(Strip(1), 0.2)
    assert plus == 0.2 and minus == 0.2


def test_delta_rejects_small_s():
    with pytest.raises(ValueError):
        delta_parabola(0.5, 2)
    with pytest.raises(ValueError):
        delta_xi(2, 0.5, 1)
