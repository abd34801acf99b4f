"""Koenigs-image model domains, boundary distances and inclusion tests.

Every model is a domain starlike at infinity (invariant under upward
translation), optionally translated by ``shift``:

* ``Sector(theta, eta)``: {z : arg(-iz) in (-theta, eta)}
* ``Strip(width)``: {0 < Re z < width}
* ``VerticalHalfPlane()``: {Re z > 0}
* ``Parabola(alpha)``: {Im z > |Re z|^alpha}
* ``Xi(alpha, theta)``: left half of ``Parabola(alpha)`` joined with the
  sector {arg z in (pi/2 - theta, pi/2)}
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

HALF_PI = 0.5 * math.pi
_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class Sector:
    theta: float
    eta: float
    shift: complex = 0j

    def __post_init__(self):
        if not (0 <= self.theta <= math.pi and 0 <= self.eta <= math.pi):
            raise ValueError("sector angles must lie in [0, pi]")
        if not self.theta + self.eta > 0:
            raise ValueError("sector opening theta + eta must be positive")

    @property
    def beta(self) -> float:
        return self.theta + self.eta

    @property
    def psi(self) -> float:
        """Direction of the bisector."""
        return HALF_PI + 0.5 * (self.eta - self.theta)


@dataclass(frozen=True)
class Strip:
    width: float
    shift: complex = 0j

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("strip width must be positive")


@dataclass(frozen=True)
class VerticalHalfPlane:
    shift: complex = 0j


@dataclass(frozen=True)
class Parabola:
    alpha: float
    shift: complex = 0j

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("parabola exponent alpha must exceed 1")


@dataclass(frozen=True)
class Xi:
    alpha: float
    theta: float
    shift: complex = 0j

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("Xi exponent alpha must exceed 1")
        if not 0 < self.theta <= math.pi:
            raise ValueError("Xi angle theta must lie in (0, pi]")


ModelSpec = Union[Sector, Strip, VerticalHalfPlane, Parabola, Xi]
CLOSED_FORM = (Sector, Strip, VerticalHalfPlane)
BOUND_ONLY = (Parabola, Xi)


def parse_model(text: str) -> ModelSpec:
    """Parse ``kind:arg,arg`` model text such as ``sector:0.785,0.785`` or ``xi:2,0.524``.

    An optional ``@re,im`` suffix sets the translation, e.g. ``strip:1@0.5,0``.
    Angles are radians.
    """
    body, _, shift_txt = text.strip().partition("@")
    kind, _, args_txt = body.partition(":")
    kind = kind.strip().lower()
    try:
        args = [float(a) for a in args_txt.split(",") if a.strip()]
        shift = 0j
        if shift_txt:
            re_, im_ = (float(v) for v in shift_txt.split(","))
            shift = complex(re_, im_)
    except ValueError as exc:
        raise ValueError(f"cannot parse model {text!r}: {exc}") from None
    arity = {"sector": 2, "strip": 1, "halfplane": 0, "parabola": 1, "xi": 2}
    if kind not in arity:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(arity)}")
    if len(args) != arity[kind]:
        raise ValueError(f"model {kind!r} takes {arity[kind]} parameter(s), got {len(args)}")
    if kind == "sector":
        return Sector(args[0], args[1], shift)
    if kind == "strip":
        return Strip(args[0], shift)
    if kind == "halfplane":
        return VerticalHalfPlane(shift)
    if kind == "parabola":
        return Parabola(args[0], shift)
    return Xi(args[0], args[1], shift)


def model_text(model: ModelSpec) -> str:
    """Inverse of :func:`parse_model` (17 significant digits)."""
    f = lambda v: format(v, ".17g")
    if isinstance(model, Sector):
        txt = f"sector:{f(model.theta)},{f(model.eta)}"
    elif isinstance(model, Strip):
        txt = f"strip:{f(model.width)}"
    elif isinstance(model, VerticalHalfPlane):
        txt = "halfplane"
    elif isinstance(model, Parabola):
        txt = f"parabola:{f(model.alpha)}"
    else:
        txt = f"xi:{f(model.alpha)},{f(model.theta)}"
    if model.shift != 0:
        txt += f"@{f(model.shift.real)},{f(model.shift.imag)}"
    return txt


def base_point(model: ModelSpec) -> complex:
    """Koenigs base point h(0), the image of the orbit start."""
    if isinstance(model, Sector):
        local = cmath.rect(1.0, model.psi)
    elif isinstance(model, Strip):
        local = complex(0.5 * model.width, 0.0)
    elif isinstance(model, VerticalHalfPlane):
        local = 1 + 0j
    else:
        local = 1j
    return model.shift + local


def is_convex(model: ModelSpec) -> bool:
    if isinstance(model, Sector):
        return model.beta <= math.pi
    if isinstance(model, Xi):
        return model.theta <= HALF_PI
    return True


def is_axis_symmetric(model: ModelSpec) -> bool:
    """Whether the domain is symmetric in the vertical line through its base point."""
    if isinstance(model, Sector):
        return model.theta == model.eta
    return isinstance(model, (Strip, Parabola))


def contains(model: ModelSpec, z: complex, closed: bool = False, tol: float = 1e-9) -> bool:
    """Membership of ``z`` in the model domain (or its closure, up to ``tol``)."""
    w = complex(z) - model.shift
    slack = tol * max(1.0, abs(w)) if closed else 0.0
    if isinstance(model, Sector):
        if w == 0:
            return closed
        a = cmath.phase(-1j * w)
        if model.beta >= 2 * math.pi - _ANGLE_TOL:
            return closed or abs(a) < math.pi
        aslack = slack / abs(w) if closed else 0.0
        if closed:
            return -model.theta - aslack <= a <= model.eta + aslack
        return -model.theta < a < model.eta
    if isinstance(model, Strip):
        if closed:
            return -slack <= w.real <= model.width + slack
        return 0 < w.real < model.width
    if isinstance(model, VerticalHalfPlane):
        return w.real >= -slack if closed else w.real > 0
    if isinstance(model, Parabola):
        lim = abs(w.real) ** model.alpha
        return w.imag >= lim - slack if closed else w.imag > lim
    # Xi
    if w.real <= 0:
        lim = abs(w.real) ** model.alpha
        return w.imag >= lim - slack if closed else w.imag > lim
    lo = HALF_PI - model.theta
    a = math.atan2(w.imag, w.real)
    if closed:
        return a >= lo - slack / abs(w)
    return a > lo


# ---------------------------------------------------------------------------
# distances to the boundary
# ---------------------------------------------------------------------------

def _eqmin(x: float, s: float, alpha: float) -> float:
    return x**alpha + x ** (2.0 - alpha) / alpha - s


def _eqmin_root(s: float, alpha: float, rtol: float = 1e-12) -> float:
    """Largest positive root of x^a + x^(2-a)/a - s = 0 by safeguarded Newton."""
    hi = s ** (1.0 / alpha)  # f(hi) = hi^(2-a)/a > 0
    lo = 0.5 * hi
    if _eqmin(lo, s, alpha) >= 0:
        if alpha > 2:
            # f is convex on (0, inf); its minimiser separates the two roots
            lo = ((alpha - 2.0) / alpha**2) ** (1.0 / (2.0 * alpha - 2.0))
            if _eqmin(lo, s, alpha) >= 0:
                raise ValueError(f"no positive root of the distance equation for s={s}, alpha={alpha}")
        else:
            while _eqmin(lo, s, alpha) >= 0:
                lo *= 0.5
                if lo < 1e-300:
                    raise ValueError("failed to bracket the distance equation root")
    x = hi
    for _ in range(200):
        fx = _eqmin(x, s, alpha)
        if fx > 0:
            hi = x
        else:
            lo = x
        dfx = alpha * x ** (alpha - 1.0) + (2.0 - alpha) / alpha * x ** (1.0 - alpha)
        step = fx / dfx if dfx != 0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= rtol * x_new or hi - lo <= rtol * hi:
            return x_new
        x = x_new
    return x


def delta_parabola(s: float, alpha: float) -> float:
    """Euclidean distance from ``i s`` to the boundary of the parabola domain."""
    if not s >= 1:
        raise ValueError(f"delta_parabola needs s >= 1, got {s!r}")
    if not alpha > 1:
        raise ValueError(f"delta_parabola needs alpha > 1, got {alpha!r}")
    x = _eqmin_root(s, alpha)
    # at the root x^a - s = -x^(2-a)/a exactly, which avoids cancellation
    gap = x ** (2.0 - alpha) / alpha
    return min(math.hypot(x, gap), s)


def delta_xi(t: float, alpha: float, theta: float) -> tuple[float, float]:
    """Right and left truncated boundary distances (delta+, delta-) of Xi(alpha, theta) at ``i t``."""
    Xi(alpha, theta)  # validates
    if not t >= 1:
        raise ValueError(f"delta_xi needs t >= 1, got {t!r}")
    plus = math.sin(theta) * t if theta < HALF_PI else t
    return plus, delta_parabola(t, alpha)


def _ray_distance(p: complex, apex: complex, d: complex, x0: float | None = None,
                  side: int = 0) -> float:
    """Distance from p to {apex + r d : r >= 0}, optionally cut to one side of Re = x0."""
    r_lo, r_hi = 0.0, math.inf
    if side:
        # keep side * (Re(apex + r d) - x0) >= 0
        c0 = side * (apex.real - x0)
        c1 = side * d.real
        if abs(c1) < 1e-15:
            if c0 < -1e-12:
                return math.inf
        elif c1 > 0:
            r_lo = max(r_lo, -c0 / c1)
        else:
            r_hi = min(r_hi, -c0 / c1)
        if r_lo > r_hi:
            return math.inf
    r = ((p - apex) * d.conjugate()).real
    r = min(max(r, r_lo), r_hi)
    return abs(p - (apex + r * d))


def _sector_rays(model: Sector) -> list[complex]:
    return [cmath.rect(1.0, HALF_PI - model.theta), cmath.rect(1.0, HALF_PI + model.eta)]


def axis_distance(model: ModelSpec, s: float) -> float:
    """Distance to the boundary from the point ``base_point + i (s - 1)`` of the vertical orbit line.

    s = 1 is the base point itself; for Parabola and Xi this is the point ``i s``.
    """
    if isinstance(model, Parabola):
        return delta_parabola(s, model.alpha)
    if isinstance(model, Xi):
        plus = math.sin(model.theta) * s if model.theta < HALF_PI else s
        return min(plus, delta_parabola(s, model.alpha))
    if isinstance(model, Strip):
        return 0.5 * model.width
    if isinstance(model, VerticalHalfPlane):
        return 1.0
    p = base_point(model) + 1j * (s - 1.0)
    return min(_ray_distance(p, model.shift, d) for d in _sector_rays(model))


def side_distances(model: ModelSpec, t: float) -> tuple[float, float]:
    """Truncated distances (delta+, delta-) at ``z0 + i t`` with z0 the base point.

    delta+ (delta-) measures the distance to the complement within
    Re w >= Re z0 (Re w <= Re z0), capped at t.
    """
    z0 = base_point(model)
    p = z0 + 1j * t
    x0 = z0.real
    if isinstance(model, Parabola):
        d = delta_parabola(1.0 + t, model.alpha)
        plus = minus = d
    elif isinstance(model, Xi):
        ray = cmath.rect(1.0, HALF_PI - model.theta)
        plus = _ray_distance(p, model.shift, ray, x0, +1)
        minus = min(delta_parabola(1.0 + t, model.alpha),
                    _ray_distance(p, model.shift, ray, x0, -1))
    elif isinstance(model, Sector):
        rays = _sector_rays(model)
        plus = min(_ray_distance(p, model.shift, d, x0, +1) for d in rays)
        minus = min(_ray_distance(p, model.shift, d, x0, -1) for d in rays)
    else:
        lines = [model.shift.real]
        if isinstance(model, Strip):
            lines.append(model.shift.real + model.width)
        plus = min([c - x0 for c in lines if c >= x0], default=math.inf)
        minus = min([x0 - c for c in lines if c <= x0], default=math.inf)
    return min(t, plus), min(t, minus)


@dataclass
class QuasiSymmetryReport:
    t_grid: list[float]
    ratio: list[float]
    verdict: str
    K_estimate: float
    slope: float


def quasi_symmetry_scan(model: ModelSpec, t_grid) -> QuasiSymmetryReport:
    """Compare delta+ and delta- along the orbit line.

    The verdict is "not quasi-symmetric" when log max(r, 1/r) grows against
    log t with fitted slope above 0.05 over the upper half of the grid.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0) or t[0] < 1:
        raise ValueError("t_grid must be increasing with every t >= 1")
    ratios = []
    for tk in t:
        plus, minus = side_distances(model, float(tk))
        ratios.append(plus / minus)
    r = np.array(ratios)
    dev = np.maximum(r, 1.0 / r)
    lt = np.log(t)
    upper = lt >= 0.5 * (lt[0] + lt[-1])
    if upper.sum() >= 2 and np.ptp(lt[upper]) > 0:
        slope = float(np.polyfit(lt[upper], np.log(dev[upper]), 1)[0])
    else:
        slope = 0.0
    verdict = "quasi-symmetric" if slope <= 0.05 else "not quasi-symmetric"
    return QuasiSymmetryReport(t.tolist(), r.tolist(), verdict, float(dev.max()), slope)


# ---------------------------------------------------------------------------
# inclusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Inclusion:
    """Outcome of an inclusion test; truthy when the inclusion holds."""

    holds: bool
    method: str  # "exact" or "sampled"

    def __bool__(self) -> bool:
        return self.holds


def _strip_bounds(m) -> tuple[float, float]:
    lo = m.shift.real
    return lo, (lo + m.width if isinstance(m, Strip) else math.inf)


def _exact_inclusion(inner: ModelSpec, outer: ModelSpec) -> Optional[bool]:
    tol = _ANGLE_TOL
    vertical = (Strip, VerticalHalfPlane)
    if isinstance(inner, vertical):
        ilo, ihi = _strip_bounds(inner)
        if isinstance(outer, vertical):
            olo, ohi = _strip_bounds(outer)
            return ilo >= olo - tol and ihi <= ohi + tol
        if isinstance(outer, Parabola):
            return False
        if isinstance(outer, Sector):
            px = outer.shift.real
            full_t = outer.theta >= math.pi - tol
            full_e = outer.eta >= math.pi - tol
            if full_t and full_e:
                # complement is the downward ray below the apex
                return not (ilo < px < ihi)
            if full_t:
                return ilo >= px - tol
            if full_e:
                return ihi <= px + tol
            return False
        return None
    if isinstance(inner, Sector):
        if isinstance(outer, Strip):
            return False
        if isinstance(outer, VerticalHalfPlane):
            return inner.eta <= tol and inner.shift.real >= outer.shift.real - tol
        if isinstance(outer, Parabola):
            return False
        if isinstance(outer, Sector):
            if outer.beta > math.pi + tol:
                return None
            return (inner.theta <= outer.theta + tol and inner.eta <= outer.eta + tol
                    and contains(outer, inner.shift, closed=True))
        if isinstance(outer, Xi):
            if inner.eta > tol:
                return False
            if inner.theta > outer.theta + tol and outer.theta < math.pi:
                return False
            cone = Sector(outer.theta, 0.0, outer.shift)
            if contains(cone, inner.shift, closed=True):
                return True
            return None
    if isinstance(inner, (Parabola, Xi)) and isinstance(outer, vertical):
        return False
    return None


def boundary_samples(model: ModelSpec, n: int = 10_000, extent: float = 1e4) -> np.ndarray:
    """Points on the model boundary, log-spaced out to distance ``extent``."""
    half = max(n // 2, 2)
    r = np.concatenate([[0.0], np.geomspace(1e-6, extent, half - 1)])
    p = model.shift
    if isinstance(model, Sector):
        pts = [p + r * d for d in _sector_rays(model)]
    elif isinstance(model, Strip):
        y = np.concatenate([-r[::-1], r[1:]])
        pts = [p + 1j * y, p + model.width + 1j * y]
    elif isinstance(model, VerticalHalfPlane):
        pts = [p + 1j * np.concatenate([-r[::-1], r])]
    elif isinstance(model, Parabola):
        x = r ** (1.0 / model.alpha)
        pts = [p + x + 1j * x**model.alpha, p - x + 1j * x**model.alpha]
    else:
        x = r ** (1.0 / model.alpha)
        pts = [p - x + 1j * x**model.alpha, p + r * cmath.rect(1.0, HALF_PI - model.theta)]
    return np.concatenate(pts)


def _interior_samples(model: ModelSpec, n: int = 2_000, extent: float = 1e3) -> np.ndarray:
    rng = np.random.default_rng(0)
    z0 = base_point(model)
    radius = np.geomspace(1e-3, extent, n)
    ang = rng.uniform(0, 2 * math.pi, n)
    cand = z0 + radius * np.exp(1j * ang)
    return np.array([c for c in cand if contains(model, c)])


def inclusion_check(inner: ModelSpec, outer: ModelSpec) -> Inclusion:
    """Decide whether ``inner`` is contained in ``outer``.

    Closed-form cases are decided exactly; everything else falls back to
    sampling 10,000 boundary points and a cloud of interior points of the
    inner domain, and the result is marked "sampled".
    """
    if inner == outer:
        return Inclusion(True, "exact")
    verdict = _exact_inclusion(inner, outer)
    if verdict is not None:
        return Inclusion(bool(verdict), "exact")
    for z in boundary_samples(inner):
        if not contains(outer, complex(z), closed=True):
            return Inclusion(False, "sampled")
    for z in _interior_samples(inner):
        if not contains(outer, complex(z), closed=True):
            return Inclusion(False, "sampled")
    return Inclusion(True, "sampled")
