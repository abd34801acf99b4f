"""Harmonic measure in the right half-plane and walk-on-spheres estimates in slit domains.

Theta(a) denotes the boundary set {iy : |y| >= a}.  Its harmonic measure at w
is one minus the angle under which the segment [-ia, ia] is seen from w,
divided by pi.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import optimize

from .domains import CLOSED_FORM, ModelSpec
from .hypgeo import LogPolarPoint, dist_halfplane
from .models import Orbit, orbit_point

TWO_OVER_PI = 2.0 / math.pi
BLOCK_SIZE = 2048
MAX_STEPS = 10**6
DISCARD_LIMIT = 1e-3
MIN_REFINEMENT = 16


@dataclass(frozen=True)
class Theta:
    """Boundary target {iy : |y| >= a}."""

    a: float


SLIT = "slit"
Target = Union[Theta, str]


@dataclass(frozen=True)
class SlitPolyline:
    vertices: np.ndarray  # complex, ordered by time
    t_start: float
    s_max: float
    refinement: int

    def __post_init__(self):
        v = np.array(self.vertices, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if len(v) < 2:
            raise ValueError("slit needs at least two vertices")
        if not np.all(np.isfinite(v)) or np.any(v.real <= 0):
            raise ValueError("slit vertices must be finite points of the right half-plane")
        if np.any(v[1:] == v[:-1]):
            raise ValueError("consecutive slit vertices must be distinct")


@dataclass(frozen=True)
class HMEstimate:
    mean: float
    stderr: float
    n: int
    eps_shell: float
    max_steps: int
    seed: int
    s_max: Optional[float]
    discarded: int = 0
    valid: bool = True


# ---------------------------------------------------------------------------
# exact formulas
# ---------------------------------------------------------------------------

def omega_theta_exact(w: complex, a: float) -> float:
    """omega(w, Theta(a), H) for Re w > 0 and a > 0.

    At w = 1 this is (2/pi) arctan(1/a), i.e. (1/pi) arctan(2a/(a^2-1)) for a > 1.
    """
    w = complex(w)
    if not w.real > 0 or not a > 0:
        raise ValueError("omega_theta_exact needs Re w > 0 and a > 0")
    x, y = w.real / a, w.imag / a
    # angles at w subtended by the two rays; their sum is pi minus the segment angle
    return (math.atan2(x, 1.0 - y) + math.atan2(x, 1.0 + y)) / math.pi


def log_omega_theta(u: LogPolarPoint, log_a: float) -> float:
    """log omega(u, Theta(e^log_a), H) for a log-polar point, valid for any scale gap."""
    d = u.log_rho - log_a
    if d < -30.0:
        # omega = (2/pi) x (1 + O(|w/a|^2)) with x = Re w / a
        return math.log(TWO_OVER_PI) + d + math.log(math.cos(u.theta))
    if d > 30.0:
        return math.log1p(-TWO_OVER_PI * math.exp(-d) * math.cos(u.theta))
    r = math.exp(d)
    x = r * math.cos(u.theta)
    # 1 -+ r sin(theta) without cancellation near the endpoints +-ia
    m = -math.expm1(d)
    below = m + 2.0 * r * math.sin(0.25 * math.pi - 0.5 * u.theta) ** 2
    above = m + 2.0 * r * math.sin(0.25 * math.pi + 0.5 * u.theta) ** 2
    return math.log((math.atan2(x, below) + math.atan2(x, above)) / math.pi)


def omega_theta_logpolar(u: LogPolarPoint, log_a: float) -> float:
    return math.exp(log_omega_theta(u, log_a))


def _running_min_L(orbit: Orbit, t: float) -> float:
    tail = orbit.log_rho[orbit.times > t]
    first = orbit.evaluate(t).log_rho
    return min(first, float(tail.min())) if len(tail) else first


def gamma_star_lower(orbit: Orbit, t: float, s: float) -> float:
    """omega(u_s, Theta(rho*), H) with rho* the smallest modulus of the orbit tail from t.

    Points of the tail have modulus at least rho*, hence the value is at least 1/2.
    """
    if s < t:
        raise ValueError(f"need s >= t, got s={s!r} < t={t!r}")
    if not (orbit.covers(t) and orbit.covers(s)):
        raise ValueError(f"times t={t!r}, s={s!r} outside orbit range "
                         f"[{orbit.times[0]!r}, {orbit.times[-1]!r}]")
    L_min = _running_min_L(orbit, t)
    p = orbit.evaluate(s)
    return omega_theta_logpolar(LogPolarPoint(p.log_rho - L_min, p.theta), 0.0)


def c_theta(theta: float) -> float:
    """Minimum of omega(w, Theta(1), H) over Re w >= cos(theta).

    The minimum sits on the line Re w = cos(theta); by symmetry only Im w >= 0
    is searched.  The search interval is doubled until the profile rises
    above the running minimum at its right end.
    """
    if not 0 < theta < 0.5 * math.pi:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta!r}")
    c = math.cos(theta)
    f = lambda y: omega_theta_exact(complex(c, y), 1.0)
    best = f(0.0)
    Y = 1.0
    while True:
        res = optimize.minimize_scalar(f, bounds=(0.0, Y), method="bounded",
                                       options={"xatol": 1e-12})
        best = min(best, float(res.fun))
        if f(Y) > best or Y > 1e8:
            break
        Y *= 2.0
    return best


# ---------------------------------------------------------------------------
# slits
# ---------------------------------------------------------------------------

def _tail_evaluator(orbit: Orbit):
    if isinstance(orbit.model, CLOSED_FORM):
        return lambda s: orbit_point(orbit.model, s)
    return orbit.interp


def default_s_max(orbit: Orbit, t: float, factor: float = 1e3) -> float:
    """Smallest doubling of t with rho(s) >= factor * rho(t) (ingested: the orbit end)."""
    if not isinstance(orbit.model, CLOSED_FORM):
        return float(orbit.times[-1])
    target = orbit_point(orbit.model, t).log_rho + math.log(factor)
    s = max(2.0 * t, 1.0)
    while orbit_point(orbit.model, s).log_rho < target:
        s *= 2.0
    return s


def build_slit(orbit: Orbit, t: float, s_max: Optional[float] = None,
               refinement: int = MIN_REFINEMENT) -> SlitPolyline:
    """Discretise the orbit tail {u_s : t <= s <= s_max} as a polyline.

    Consecutive vertices are at most 1/refinement apart in hyperbolic
    distance.  Closed-form orbits are sampled exactly; ingested orbits are
    interpolated linearly in (log rho, theta).
    """
    if refinement < MIN_REFINEMENT:
        raise ValueError(f"refinement must be >= {MIN_REFINEMENT}, got {refinement}")
    if s_max is None:
        s_max = default_s_max(orbit, t)
    if not s_max > t:
        raise ValueError("s_max must exceed t")
    if not isinstance(orbit.model, CLOSED_FORM) and not (orbit.covers(t) and orbit.covers(s_max)):
        raise ValueError(f"orbit covers [{orbit.times[0]!r}, {orbit.times[-1]!r}], "
                         f"slit needs [{t!r}, {s_max!r}]")
    ev = _tail_evaluator(orbit)
    h = 1.0 / refinement
    if isinstance(orbit.model, CLOSED_FORM):
        times = list(np.geomspace(t, s_max, 33)) if t > 0 else list(np.linspace(t, s_max, 33))
    else:
        inner = orbit.times[(orbit.times > t) & (orbit.times < s_max)]
        times = [t, *inner.tolist(), s_max]
    pts = [ev(s) for s in times]
    out_t, out_p = [times[0]], [pts[0]]
    stack = list(zip(times[1:], pts[1:]))[::-1]
    while stack:
        s, p = stack[-1]
        if dist_halfplane(out_p[-1], p) <= h:
            out_t.append(s)
            out_p.append(p)
            stack.pop()
        else:
            mid = 0.5 * (out_t[-1] + s)
            if not out_t[-1] < mid < s:
                raise ValueError("slit refinement stalled; orbit moves too fast in time")
            stack.append((mid, ev(mid)))
    verts = np.array([p.to_complex() for p in out_p])
    if not np.all(np.isfinite(verts)):
        raise ValueError("slit leaves double-precision range; lower s_max")
    keep = np.concatenate([[True], verts[1:] != verts[:-1]])
    return SlitPolyline(verts[keep], float(t), float(s_max), int(refinement))


# ---------------------------------------------------------------------------
# walk on spheres
# ---------------------------------------------------------------------------

def _slit_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = (d * d.conjugate()).real
    rel = p[:, None] - a[None, :]
    s = np.clip((rel * d.conjugate()[None, :]).real / dd[None, :], 0.0, 1.0)
    return np.abs(rel - s * d[None, :]).min(axis=1)


def _walk_block(args) -> tuple[float, float, int, int]:
    """Run one block of walks; returns (score sum, score square sum, completed, discarded)."""
    seed, block, count, start, kind, a, verts, eps, max_steps = args
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))
    pos = np.full(count, start, dtype=complex)
    alive = np.ones(count, dtype=bool)
    on_slit = np.zeros(count, dtype=bool)
    seg_a = seg_b = None
    if verts is not None:
        seg_a, seg_b = verts[:-1], verts[1:]
    steps = 0
    while alive.any() and steps < max_steps:
        idx = np.nonzero(alive)[0]
        p = pos[idx]
        r = p.real
        if seg_a is not None:
            ds = _slit_distance(p, seg_a, seg_b)
            hit_slit = (ds < eps) & (ds <= r)
            r = np.minimum(r, ds)
        else:
            hit_slit = np.zeros(len(idx), dtype=bool)
        done = r < eps
        on_slit[idx[hit_slit & done]] = True
        alive[idx[done]] = False
        move = ~done
        if move.any():
            ang = rng.random(int(move.sum())) * (2.0 * math.pi)
            pos[idx[move]] = p[move] + r[move] * np.exp(1j * ang)
        steps += 1
    finished = ~alive
    if kind == "theta":
        score = (np.abs(pos.imag) >= a) & ~on_slit
        score = score.astype(float)
    elif kind == "slit":
        score = on_slit.astype(float)
    else:  # markov: slit hits scored by the exact half-plane measure
        x, y = pos.real / a, pos.imag / a
        exact = (np.arctan2(x, 1.0 - y) + np.arctan2(x, 1.0 + y)) / math.pi
        score = np.where(on_slit, exact, np.where(np.abs(pos.imag) >= a, 1.0, 0.0))
    score = score[finished]
    return float(score.sum()), float((score * score).sum()), int(finished.sum()), int(count - finished.sum())


def _run_blocks(start: complex, kind: str, a: float, slit: Optional[SlitPolyline], n: int,
                eps: float, seed: int, max_steps: int, workers: int) -> tuple[float, float, int, int]:
    verts = None if slit is None else np.asarray(slit.vertices)
    jobs = []
    for block, lo in enumerate(range(0, n, BLOCK_SIZE)):
        jobs.append((int(seed), block, min(BLOCK_SIZE, n - lo), complex(start), kind, float(a),
                     verts, float(eps), int(max_steps)))
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_walk_block, jobs))
    else:
        results = [_walk_block(j) for j in jobs]
    # reduce in block order so the sum is independent of scheduling
    s1 = s2 = 0.0
    done = lost = 0
    for r1, r2, c, d in results:
        s1 += r1
        s2 += r2
        done += c
        lost += d
    return s1, s2, done, lost


def _check_start(start: complex, slit: Optional[SlitPolyline], eps: float) -> None:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    start = complex(start)
    r = start.real
    if slit is not None:
        v = np.asarray(slit.vertices)
        r = min(r, float(_slit_distance(np.array([start]), v[:-1], v[1:])[0]))
    if not r > eps:
        raise ValueError(f"start {start!r} is not in the domain at distance > eps from its boundary")


def wos_measure(start: complex, target: Target, n: int, eps: float = 1e-4, seed: int = 0,
                slit: Optional[SlitPolyline] = None, max_steps: int = MAX_STEPS,
                workers: int = 1) -> HMEstimate:
    """Walk-on-spheres estimate of omega(start, target, H minus slit).

    ``target`` is ``Theta(a)`` (axis hits with |Im| >= a) or ``SLIT``.  Walks
    are grouped in fixed blocks whose random streams depend only on
    (seed, block index), so ``workers`` never changes the result.
    """
    _check_start(start, slit, eps)
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(target, Theta):
        kind, a = "theta", target.a
        if not a > 0:
            raise ValueError("Theta(a) needs a > 0")
    elif target == SLIT:
        if slit is None:
            raise ValueError("slit target needs a slit")
        kind, a = "slit", 0.0
    else:
        raise ValueError(f"unknown target {target!r}")
    s1, _s2, done, lost = _run_blocks(start, kind, a, slit, n, eps, seed, max_steps, workers)
    mean = s1 / done if done else float("nan")
    stderr = math.sqrt(mean * (1.0 - mean) / done) if done else float("nan")
    return HMEstimate(mean, stderr, done, eps, max_steps, int(seed),
                      None if slit is None else slit.s_max, lost, lost <= DISCARD_LIMIT * n)


@dataclass(frozen=True)
class MarkovReport:
    lhs: float
    rhs: float
    stderr: float
    n: int
    discarded: int
    passed: bool


def strong_markov_check(orbit: Orbit, t: float, n: int = 200_000, eps: float = 1e-4,
                        seed: int = 0, s_max: Optional[float] = None,
                        refinement: int = MIN_REFINEMENT, workers: int = 1,
                        slit: Optional[SlitPolyline] = None, start: complex = 1.0) -> MarkovReport:
    """Compare omega(1, Theta_t, H) with its decomposition through the slit.

    Walks in H minus the slit that end on the axis score the indicator of
    Theta_t; walks ending on the slit at alpha score omega(alpha, Theta_t, H).
    Passing ``slit=None`` together with ``s_max=0`` runs the degenerate case
    in plain H.
    """
    a = math.exp(orbit.evaluate(t).log_rho)
    if slit is None and s_max != 0:
        slit = build_slit(orbit, t, s_max, refinement)
    _check_start(start, slit, eps)
    s1, s2, done, lost = _run_blocks(start, "markov", a, slit, n, eps, seed, max_steps=MAX_STEPS,
                                     workers=workers)
    lhs = omega_theta_exact(start, a)
    rhs = s1 / done
    var = max(s2 / done - rhs * rhs, 0.0) * done / max(done - 1, 1)
    se = math.sqrt(var / done)
    return MarkovReport(lhs, rhs, se, done, lost, abs(lhs - rhs) <= 3.0 * se)
