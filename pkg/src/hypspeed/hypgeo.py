"""Hyperbolic geometry of the unit disc and the right half-plane.

Distances use the density |dz| / (2 Re z) on the right half-plane H, so that
k_H(1, r) = 1/2 log r and k_D(0, r) = 1/2 log((1 + r) / (1 - r)).

Half-plane points are carried in log-polar form (log|w|, arg w) because
orbits of hyperbolic semigroups leave every double-precision box quickly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

HALF_PI = 0.5 * math.pi
LOG2 = math.log(2.0)

# beyond this the log-domain expansion replaces sinh/cosh
_LARGE_LOG = 300.0


@dataclass(frozen=True)
class LogPolarPoint:
    """A point rho * exp(i theta) of the right half-plane, stored as (log rho, theta)."""

    log_rho: float
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.log_rho):
            raise ValueError(f"log_rho must be finite, got {self.log_rho!r}")
        if not (-HALF_PI < self.theta < HALF_PI):
            raise ValueError(f"theta must lie in (-pi/2, pi/2), got {self.theta!r}")

    @classmethod
    def from_complex(cls, w: complex) -> "LogPolarPoint":
        w = complex(w)
        if not w.real > 0:
            raise ValueError(f"point {w!r} is not in the right half-plane")
        return cls(math.log(abs(w)), math.atan2(w.imag, w.real))

    def to_complex(self) -> complex:
        """Rectangular form; overflows for log_rho beyond ~709."""
        return cmath.rect(math.exp(self.log_rho), self.theta)

    @property
    def log_re(self) -> float:
        """log Re w, finite for every valid point."""
        return self.log_rho + math.log(math.cos(self.theta))


@dataclass(frozen=True)
class BoundaryArc:
    """Closed arc of the unit circle through 1 with conjugate endpoints."""

    endpoint_a: complex
    endpoint_b: complex
    normalized_length: float


def _arccosh1p(x: float) -> float:
    # arccosh(1 + x) without cancellation for small x
    return math.log1p(x + math.sqrt(x * (x + 2.0)))


def _check_disc(z: complex) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)) or abs(z) >= 1.0:
        raise ValueError(f"{z!r} is not a point of the unit disc")
    return z


def cayley(z: complex) -> complex:
    """C(z) = (1 + z) / (1 - z), mapping the disc onto the right half-plane and 1 to infinity.

    Boundary points other than 1 are accepted and land on the imaginary axis.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)) or abs(z) > 1.0 + 1e-15 or z == 1:
        raise ValueError(f"{z!r} is not in the closed unit disc minus 1")
    return (1.0 + z) / (1.0 - z)


def inv_cayley(u: complex) -> complex:
    u = complex(u)
    if not u.real > 0:
        raise ValueError(f"inv_cayley needs Re u > 0, got {u!r}")
    return (u - 1.0) / (u + 1.0)


def dist_halfplane(u: LogPolarPoint, w: LogPolarPoint) -> float:
    """Hyperbolic distance in H between two log-polar points.

    Uses cosh(2k) = 1 + 2 (sinh^2(D/2) + sin^2(dtheta/2)) / (cos theta_u cos theta_w)
    with D the difference of log-moduli, which only involves the modulus
    ratio and so never overflows for large but close points.
    """
    d = u.log_rho - w.log_rho
    dth = u.theta - w.theta
    cc = math.cos(u.theta) * math.cos(w.theta)
    if abs(d) <= _LARGE_LOG:
        x = 2.0 * (math.sinh(0.5 * d) ** 2 + math.sin(0.5 * dth) ** 2) / cc
        return 0.5 * _arccosh1p(x)
    # x ~ e^{|D|} / (2 cc); arccosh(1 + x) = log(2x) + O(1/x)
    return 0.5 * (abs(d) - math.log(cc))


def dist_halfplane_complex(z: complex, w: complex) -> float:
    """Same distance for rectangular points; k = 1/2 arccosh(1 + |z-w|^2 / (2 Re z Re w))."""
    z, w = complex(z), complex(w)
    if not (z.real > 0 and w.real > 0):
        raise ValueError("both points must lie in the right half-plane")
    return 0.5 * _arccosh1p(abs(z - w) ** 2 / (2.0 * z.real * w.real))


def dist_disc(z1: complex, z2: complex) -> float:
    """Hyperbolic distance in the unit disc, k_D = artanh of the pseudo-hyperbolic distance."""
    z1, z2 = _check_disc(z1), _check_disc(z2)
    den = abs(1.0 - z1.conjugate() * z2)
    p = abs(z1 - z2) / den
    a1, a2 = abs(z1), abs(z2)
    one_minus_p2 = (1.0 - a1) * (1.0 + a1) * (1.0 - a2) * (1.0 + a2) / den**2
    # artanh p = 1/2 log((1+p)^2 / (1-p^2))
    return math.log1p(p) - 0.5 * math.log(one_minus_p2)


def project_to_ray(u: LogPolarPoint) -> LogPolarPoint:
    """Closest point of the positive real axis; circles |w| = rho meet the axis orthogonally."""
    return LogPolarPoint(u.log_rho, 0.0)


def tangential_offset(theta: float) -> float:
    """Distance from rho e^{i theta} to the positive axis: 1/2 arccosh(1 / cos theta)."""
    if not abs(theta) < HALF_PI:
        raise ValueError(f"|theta| must be < pi/2, got {theta!r}")
    s = math.sin(0.5 * theta)
    return 0.5 * _arccosh1p(2.0 * s * s / math.cos(theta))


def arc_At(log_rho: float) -> BoundaryArc:
    """Boundary arc through 1 cut out by the circle |C(z)| = rho.

    The endpoints are the continuous extensions of inv_cayley(+-i rho),
    exp(+-2i arctan(1/rho)).  Seen from 0 the arc carries harmonic measure
    arg(a)/pi, which equals the harmonic measure of {iy : |y| >= rho} at 1
    in the half-plane.
    """
    if not log_rho >= 0:
        raise ValueError(f"arc_At needs log_rho >= 0, got {log_rho!r}")
    ang = 2.0 * math.atan(math.exp(-log_rho))
    a = cmath.rect(1.0, ang)
    return BoundaryArc(a, a.conjugate(), ang / math.pi)
