"""Speeds of semigroup orbits, Euclidean rates, quadrature bounds and asymptotic fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import integrate

from .domains import ModelSpec, axis_distance, is_axis_symmetric, is_convex
from .hypgeo import LogPolarPoint, dist_halfplane, tangential_offset
from .models import Orbit

LOG2 = math.log(2.0)
_ORIGIN = LogPolarPoint(0.0, 0.0)
_MAX_EVALS = 10_000_000


@dataclass(frozen=True)
class SpeedTriple:
    t: float
    v: float
    v_o: float
    v_T: float


@dataclass(frozen=True)
class SpeedBound:
    t: float
    lower: float
    upper: float
    method: str  # "convex-quadrature" or "simply-connected"


@dataclass(frozen=True)
class AsymptoteFit:
    shape: str
    coefficient: float
    intercept: float
    residual_max: float
    window: tuple[float, float]


class EuclidRates(NamedTuple):
    dist_to_tau: float
    one_minus_mod: float
    log_dist_to_tau: float
    log_one_minus_mod: float


def speed_triple(u: LogPolarPoint, t: float) -> SpeedTriple:
    """Total, orthogonal and tangential speed of the orbit point u = C(phi_t(0)).

    The orthogonal speed is clamped at 0 for rho < 1, which genuine orbits
    never reach because rho cos theta >= 1.
    """
    return SpeedTriple(t, dist_halfplane(_ORIGIN, u), max(0.0, 0.5 * u.log_rho),
                       tangential_offset(u.theta))


def _log_abs_shift(log_rho: float, theta: float, sign: float) -> float:
    # log |u + sign| for u = rho e^{i theta}, scaled so nothing overflows
    if sign < 0:
        # |u - 1|^2 = (rho - 1)^2 + 4 rho sin^2(theta/2), no cancellation near u = 1
        sh = math.sin(0.5 * theta)
        if log_rho > 0:
            sq = math.expm1(-log_rho) ** 2 + 4.0 * math.exp(-log_rho) * sh * sh
            base = log_rho
        else:
            sq = math.expm1(log_rho) ** 2 + 4.0 * math.exp(log_rho) * sh * sh
            base = 0.0
        return base + 0.5 * math.log(sq) if sq > 0 else -math.inf
    c = math.cos(theta)
    if log_rho > 0:
        e = math.exp(-log_rho)
        base = log_rho
    else:
        e = math.exp(log_rho)
        base = 0.0
    return base + 0.5 * math.log1p(2.0 * e * c + e * e)


def euclid_rates(u: LogPolarPoint) -> EuclidRates:
    """|1 - phi| and 1 - |phi| for phi = inv_cayley(u), with their logarithms.

    Uses |1 - phi| = 2 / |u + 1| and 1 - |phi| = 4 Re u / (|u+1| (|u+1| + |u-1|)).
    The log values stay finite when the plain values underflow.
    """
    log_ap = _log_abs_shift(u.log_rho, u.theta, +1.0)
    log_am = _log_abs_shift(u.log_rho, u.theta, -1.0)
    log_dist = LOG2 - log_ap
    log_sum = np.logaddexp(log_ap, log_am)
    log_omm = 2 * LOG2 + u.log_re - log_ap - float(log_sum)
    return EuclidRates(math.exp(log_dist), math.exp(log_omm), log_dist, log_omm)


def orbit_speeds(orbit: Orbit) -> list[SpeedTriple]:
    return [speed_triple(orbit.point(i), float(t)) for i, t in enumerate(orbit.times)]


def _quad(f, a: float, b: float, rtol: float) -> float:
    # split at powers of 10 so each piece has bounded relative variation
    cuts = [a]
    edge = 10.0 ** math.floor(math.log10(a)) if a > 0 else 1.0
    while edge * 10 < b:
        edge *= 10
        if edge > a:
            cuts.append(edge)
    cuts.append(b)
    total = 0.0
    evals = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _err, info = integrate.quad(f, lo, hi, epsrel=rtol, epsabs=0.0, limit=200,
                                         full_output=True)[:3]
        evals += info["neval"]
        if evals > _MAX_EVALS:
            raise RuntimeError("quadrature exceeded the evaluation budget")
        total += val
    return total


def speed_bounds_quadrature(model: ModelSpec, t: float, rtol: float = 1e-10) -> SpeedBound:
    """Two-sided bound on the total speed from boundary distances along the orbit line.

    upper is the quasi-hyperbolic length of the vertical segment from the
    base point to base + it.  When the domain is convex and symmetric in that
    vertical line the segment is a quasi-hyperbolic geodesic and lower = upper/2.
    Otherwise lower = 1/4 log(1 + t / delta(base)), valid because delta is
    nondecreasing along the segment.
    """
    if not t >= 1:
        raise ValueError(f"speed bounds need t >= 1, got {t!r}")
    upper = _quad(lambda s: 1.0 / axis_distance(model, s), 1.0, 1.0 + t, rtol)
    if is_convex(model) and is_axis_symmetric(model):
        return SpeedBound(t, 0.5 * upper, upper, "convex-quadrature")
    lower = 0.25 * math.log1p(t / axis_distance(model, 1.0))
    return SpeedBound(t, lower, upper, "simply-connected")


def _basis(t: np.ndarray, shape: Union[str, tuple]) -> tuple[np.ndarray, str]:
    if shape in ("log", "log_t"):
        return np.log(t), "log_t"
    if isinstance(shape, tuple) and shape[0] == "power":
        gamma = float(shape[1])
        return t**gamma, f"power({gamma:g})"
    if isinstance(shape, str) and shape.startswith("power"):
        gamma = float(shape.split(":", 1)[1]) if ":" in shape else float(shape[6:-1])
        return t**gamma, f"power({gamma:g})"
    raise ValueError(f"unknown asymptote shape {shape!r}")


def fit_asymptote(samples: Sequence[tuple[float, float]], shape="log_t") -> AsymptoteFit:
    """Least-squares fit value ~ intercept + coefficient * basis(t) over the upper half (in log t).

    ``shape`` is ``"log_t"`` or ``("power", gamma)`` (also ``"power:gamma"``).
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 8:
        raise ValueError("fit_asymptote needs at least 8 (t, value) samples")
    t, val = arr[:, 0], arr[:, 1]
    if np.any(t <= 0) or t.max() / t.min() < 1e3 * (1 - 1e-12):
        raise ValueError("fit_asymptote needs samples spanning at least 3 decades of t > 0")
    lt = np.log(t)
    window = lt >= 0.5 * (lt.min() + lt.max())
    b, label = _basis(t[window], shape)
    A = np.column_stack([b, np.ones_like(b)])
    (coef, icpt), *_ = np.linalg.lstsq(A, val[window], rcond=None)
    resid = float(np.max(np.abs(val[window] / b - coef)))
    return AsymptoteFit(label, float(coef), float(icpt), resid,
                        (float(t[window].min()), float(t[window].max())))


def speed_bound_series(model: ModelSpec, times) -> list[SpeedBound]:
    return [speed_bounds_quadrature(model, float(t)) for t in times]
