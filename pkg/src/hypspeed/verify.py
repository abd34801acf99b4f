"""Verification experiments over time grids, producing structured reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import harmonic
from .domains import (CLOSED_FORM, ModelSpec, Parabola, Sector, Xi,
                      delta_parabola, inclusion_check, model_text)
from .hypgeo import LOG2, LogPolarPoint, tangential_offset
from .models import Orbit, orbit_grid, time_grid
from .speeds import euclid_rates, fit_asymptote, speed_bounds_quadrature, speed_triple

EXACT_SLACK = 1e-9
SLOPE_FLOOR = -0.02
NONTANGENTIAL_TOL = 0.01


@dataclass(frozen=True)
class Grid:
    t_min: float = 1.0
    t_max: float = 1e6
    n: int = 200
    spacing: str = "log"

    def times(self) -> np.ndarray:
        return time_grid(self.t_min, self.t_max, self.n, self.spacing)

    def describe(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max, "n": self.n, "spacing": self.spacing}


DEFAULT_GRID = Grid()


def _jsonable(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class VerificationReport:
    """Outcome of one check; ``margin`` is the worst slack (negative means violated)."""

    name: str
    status: str
    margin: float
    grid: dict
    details: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "margin": _jsonable(self.margin),
                "grid": _jsonable(self.grid), "details": _jsonable(self.details),
                "notes": _jsonable(self.notes)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def _finish(name: str, margin: float, grid: dict, details, notes=None, tol: float = 0.0,
            flagged: bool = False) -> VerificationReport:
    notes = dict(notes or {})
    notes.setdefault("tolerance", tol)
    if flagged:
        status = "flagged"
    else:
        status = "pass" if margin >= -tol else "fail"
    return VerificationReport(name, status, float(margin), grid, list(details), notes)


def _ineq_report(name: str, orbit: Orbit, grid: dict,
                 checks: Callable[[float, LogPolarPoint], list[tuple[float, float]]],
                 tol: float = EXACT_SLACK) -> VerificationReport:
    # each check is (observed, bound) with the requirement observed <= bound
    worst = math.inf
    details = []
    for i, t in enumerate(orbit.times):
        pairs = checks(float(t), orbit.point(i))
        slack, obs, bnd = min((b - o, o, b) for o, b in pairs)
        details.append((float(t), obs, bnd))
        worst = min(worst, slack)
    return _finish(name, worst, grid, details, {"model": _model_label(orbit)}, tol)


def _model_label(orbit: Orbit) -> str:
    return "ingested" if orbit.model is None else model_text(orbit.model)


def _orbit_grid_desc(orbit: Orbit, grid: Optional[Grid]) -> dict:
    if grid is not None:
        return grid.describe()
    return {"t_min": float(orbit.times[0]), "t_max": float(orbit.times[-1]),
            "n": len(orbit), "spacing": "samples"}


# ---------------------------------------------------------------------------
# exact speed identities
# ---------------------------------------------------------------------------

def check_pythagoras(orbit: Orbit, grid: Optional[Grid] = None) -> VerificationReport:
    def checks(t, u):
        s = speed_triple(u, t)
        return [(s.v_o + s.v_T - 0.5 * LOG2, s.v), (s.v, s.v_o + s.v_T)]
    return _ineq_report("pythagoras", orbit, _orbit_grid_desc(orbit, grid), checks)


def check_julia(orbit: Orbit, grid: Optional[Grid] = None) -> VerificationReport:
    def checks(t, u):
        s = speed_triple(u, t)
        return [(s.v_T, s.v_o + 4 * LOG2)]
    return _ineq_report("julia", orbit, _orbit_grid_desc(orbit, grid), checks)


def check_ipereucl(orbit: Orbit, grid: Optional[Grid] = None) -> VerificationReport:
    def checks(t, u):
        s = speed_triple(u, t)
        r = euclid_rates(u)
        return [(abs(s.v + 0.5 * r.log_one_minus_mod), 0.5 * LOG2),
                (abs(s.v_o + 0.5 * r.log_dist_to_tau), 0.5 * LOG2),
                (abs(s.v_T - 0.5 * (r.log_dist_to_tau - r.log_one_minus_mod)), 1.5 * LOG2)]
    return _ineq_report("ipereucl", orbit, _orbit_grid_desc(orbit, grid), checks)


def check_dwmono(orbit: Orbit, grid: Optional[Grid] = None) -> VerificationReport:
    """Re u_t is nondecreasing along the orbit (log scale, consecutive samples)."""
    log_re = orbit.log_rho + np.log(np.cos(orbit.theta))
    steps = np.diff(log_re)
    details = [(float(t), float(a), float(b))
               for t, a, b in zip(orbit.times[1:], log_re[1:], log_re[:-1])]
    margin = float(steps.min()) if len(steps) else 0.0
    return _finish("dwmono", margin, _orbit_grid_desc(orbit, grid), details,
                   {"model": _model_label(orbit)}, EXACT_SLACK)


def check_total_implies_orthogonal(orbit: Orbit, grid: Optional[Grid] = None) -> VerificationReport:
    """For sampled t1 < t2 with v(t2) >= v(t1), log rho(t2) >= log rho(t1)."""
    v = np.array([speed_triple(orbit.point(i), float(t)).v for i, t in enumerate(orbit.times)])
    L = orbit.log_rho
    n = len(v)
    iu, ju = np.triu_indices(n, k=1)
    sel = v[ju] >= v[iu]
    slack = L[ju][sel] - L[iu][sel]
    details = []
    if len(slack):
        k = int(np.argmin(slack))
        i, j = int(iu[sel][k]), int(ju[sel][k])
        details.append((float(orbit.times[j]), float(L[j]), float(L[i])))
        margin = float(slack[k])
    else:
        margin = 0.0
    return _finish("totalimpliesortho", margin, _orbit_grid_desc(orbit, grid), details,
                   {"model": _model_label(orbit), "pairs_checked": int(sel.sum())}, EXACT_SLACK)


# ---------------------------------------------------------------------------
# good sequences, gamma*, scans
# ---------------------------------------------------------------------------

def good_sequence(orbit: Orbit) -> list[float]:
    """Times t_n >= 1, spaced by at least 1, at which rho_s >= rho_{t_n} for all later samples."""
    L = orbit.log_rho
    suffix_min = np.minimum.accumulate(L[::-1])[::-1]
    out: list[float] = []
    for t, l, m in zip(orbit.times, L, suffix_min):
        if t < 1 or l > m:
            continue
        if out and t < out[-1] + 1:
            continue
        out.append(float(t))
    return out


def check_gamma_star(orbit: Orbit, n: int = 50) -> VerificationReport:
    """gamma_star_lower >= 1/2 on an n x n grid of (t, s) with s >= t."""
    t0, t1 = float(orbit.times[0]), float(orbit.times[-1])
    if t0 > 0:
        ts = np.geomspace(t0, t1, n)
    else:
        ts = np.linspace(t0, t1, n)
    worst, details = math.inf, []
    for t in ts:
        ss = np.geomspace(t, t1, n) if t > 0 else np.linspace(t, t1, n)
        vals = [harmonic.gamma_star_lower(orbit, float(t), float(min(s, t1))) for s in ss]
        k = int(np.argmin(vals))
        details.append((float(t), float(vals[k]), 0.5))
        worst = min(worst, vals[k] - 0.5)
    grid = {"t_min": t0, "t_max": t1, "n": n, "spacing": "log" if t0 > 0 else "linear"}
    return _finish("gammastar", worst, grid, details, {"model": _model_label(orbit)}, 1e-12)


def question_scan(orbit: Orbit, times: Sequence[float]) -> list[tuple[float, float]]:
    """For each t, inf over sampled s >= t of omega(u_s, Theta(rho_t), H)."""
    out = []
    for t in times:
        if not orbit.covers(t):
            raise ValueError(f"t={t!r} outside orbit range")
        ut = orbit.interp(float(t))
        vals = [harmonic.omega_theta_logpolar(ut, ut.log_rho)]
        for i in np.nonzero(orbit.times > t)[0]:
            vals.append(harmonic.omega_theta_logpolar(orbit.point(int(i)), ut.log_rho))
        out.append((float(t), float(min(vals))))
    return out


# ---------------------------------------------------------------------------
# monotonicity of orthogonal speeds
# ---------------------------------------------------------------------------

def _slope_top_decade(times: np.ndarray, values: np.ndarray) -> float:
    sel = times >= times[-1] / 10.0
    if sel.sum() < 2:
        sel = np.ones_like(times, dtype=bool)
    lt = np.log(times[sel])
    if np.ptp(lt) == 0:
        return 0.0
    return float(np.polyfit(lt, values[sel], 1)[0])


def monotonicity_experiment(inner: ModelSpec, outer: ModelSpec, grid: Grid = DEFAULT_GRID,
                            nontangential_tol: float = NONTANGENTIAL_TOL,
                            delta_floor: float = 0.0) -> VerificationReport:
    """Delta(t) = v_o(inner) - v_o(outer) along a grid, with the applicable hypotheses listed.

    The margin is the smaller of inf Delta - delta_floor and slope + 0.02,
    the slope being that of Delta against log t over the top decade.  A
    bound-only outer model enters through Delta >= v_o(inner) - upper(outer),
    since the orthogonal speed never exceeds the total speed.
    """
    inc = inclusion_check(inner, outer)
    if not inc:
        raise ValueError(f"inclusion fails: {model_text(inner)} is not inside {model_text(outer)}")
    if not isinstance(inner, CLOSED_FORM):
        raise ValueError("inner model must have a closed-form orbit")
    times = grid.times()
    orb_in = orbit_grid(inner, grid.t_min, grid.t_max, grid.n, grid.spacing)
    sp_in = [speed_triple(orb_in.point(i), float(t)) for i, t in enumerate(times)]
    vo_in = np.array([s.v_o for s in sp_in])
    v_in = np.array([s.v for s in sp_in])
    limit = 0.5 * math.pi - nontangential_tol
    hyps = []
    if np.all(np.abs(orb_in.theta) <= limit):
        hyps.append("(1) inner non-tangential")
    notes: dict = {"inner": model_text(inner), "outer": model_text(outer),
                   "inclusion_method": inc.method, "nontangential_threshold": limit}
    if isinstance(outer, CLOSED_FORM):
        orb_out = orbit_grid(outer, grid.t_min, grid.t_max, grid.n, grid.spacing)
        sp_out = [speed_triple(orb_out.point(i), float(t)) for i, t in enumerate(times)]
        vo_out = np.array([s.v_o for s in sp_out])
        v_out = np.array([s.v for s in sp_out])
        if np.all(np.abs(orb_out.theta) <= limit):
            hyps.append("(2) outer non-tangential")
        L = orb_out.log_rho
        if np.array_equal(L, np.minimum.accumulate(L[::-1])[::-1]):
            hyps.append("(3) outer orthogonal speed nondecreasing")
        if np.all(np.diff(v_out) >= 0):
            hyps.append("(4) outer total speed nondecreasing")
        delta = vo_in - vo_out
        outer_gap = float(np.min(v_in + 0.5 * LOG2 - vo_out))
        notes["outer_speed_margin"] = outer_gap
        good = good_sequence(orb_out)
        if good:
            gmask = np.isin(times, good)
            notes["limsup_sup_on_good_sequence"] = float(delta[gmask].max())
        notes["delta_kind"] = "exact"
    else:
        upper = np.array([speed_bounds_quadrature(outer, float(t)).upper for t in times])
        delta = vo_in - upper
        if isinstance(outer, Parabola):
            hyps.append("(2) outer non-tangential (symmetric about the orbit axis)")
        elif isinstance(outer, Xi):
            hyps.append("outer starlike")
        outer_gap = math.inf
        notes["delta_kind"] = "lower bound via outer total-speed upper bound"
    inf_delta = float(delta.min())
    slope = _slope_top_decade(times, delta)
    margin = min(inf_delta - delta_floor, slope - SLOPE_FLOOR, outer_gap + EXACT_SLACK)
    notes.update({"hypotheses": hyps, "inf_delta": inf_delta, "slope_top_decade": slope,
                  "delta_floor": delta_floor, "slope_floor": SLOPE_FLOOR})
    details = [(float(t), float(d), delta_floor) for t, d in zip(times, delta)]
    # a negative margin from a bound is inconclusive rather than a violation
    inconclusive = margin < 0 and not isinstance(outer, CLOSED_FORM)
    if inconclusive:
        notes["inconclusive"] = "outer upper bound too weak to decide"
    return _finish("monotone", margin, grid.describe(), details, notes, 0.0,
                   flagged=not hyps or inconclusive)


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

RATE_CLAIMS = ("betsakos_half", "sector_exponent", "parabola_stretched", "xi_polynomial")
XI_ETAS = (0.2, 0.1, 0.05)


def _vo_fit(model: ModelSpec, grid: Grid):
    orb = orbit_grid(model, grid.t_min, grid.t_max, grid.n, grid.spacing)
    samples = [(float(t), speed_triple(orb.point(i), float(t)).v_o) for i, t in enumerate(orb.times)]
    return fit_asymptote(samples, "log_t")


def rate_check(claim: str, model: Optional[ModelSpec] = None, grid: Optional[Grid] = None,
               orbit: Optional[Orbit] = None) -> VerificationReport:
    """Check one convergence-rate claim.

    betsakos_half: |1 - phi_t(0)| sqrt(t) is finite and non-increasing past the window midpoint.
    sector_exponent: fitted v_o / log t matches pi / (2 (theta + eta)) within 2%.
    parabola_stretched: lower bound / ((alpha / (2 (alpha - 1))) t^(1 - 1/alpha)) in [0.95, 1.05]
    over the top decade.
    xi_polynomial: orthogonal-speed coefficients of W(theta) and W(theta, eta) for small eta.
    """
    if claim not in RATE_CLAIMS:
        raise ValueError(f"unknown claim {claim!r}; expected one of {', '.join(RATE_CLAIMS)}")
    if claim == "betsakos_half":
        if orbit is None:
            if not isinstance(model, CLOSED_FORM):
                raise ValueError("betsakos_half needs an exact orbit (closed-form model or --input)")
            g = grid or DEFAULT_GRID
            orbit = orbit_grid(model, g.t_min, g.t_max, g.n, g.spacing)
        times = orbit.times
        if times[0] <= 0:
            raise ValueError("betsakos_half needs t > 0")
        vals = np.array([euclid_rates(orbit.point(i)).log_dist_to_tau for i in range(len(orbit))])
        vals = vals + 0.5 * np.log(times)
        mid = len(vals) // 2
        tail_max = float(vals[mid:].max())
        margin = float(vals[mid] - tail_max)
        details = [(float(t), float(math.exp(v)), float(math.exp(vals[mid]))) for t, v in zip(times, vals)]
        notes = {"claim": claim, "sup": float(math.exp(vals.max())), "model": _model_label(orbit)}
        return _finish("rates", margin, _orbit_grid_desc(orbit, grid), details, notes, EXACT_SLACK)
    if claim == "sector_exponent":
        if not isinstance(model, Sector):
            raise ValueError("sector_exponent needs a sector model")
        g = grid or Grid(10.0, 1e6, 200, "log")
        fit = _vo_fit(model, g)
        pred = math.pi / (2 * model.beta)
        rel = abs(fit.coefficient / pred - 1.0)
        return _finish("rates", 0.02 - rel, g.describe(), [(fit.window[1], fit.coefficient, pred)],
                       {"claim": claim, "model": model_text(model), "fit": fit.__dict__,
                        "relative_error": rel})
    if claim == "parabola_stretched":
        if not isinstance(model, Parabola):
            raise ValueError("parabola_stretched needs a parabola model")
        g = grid or Grid(10.0, 1e8, 25, "log")
        a = model.alpha
        times = g.times()
        top = times[times >= times[-1] / 10.0]
        details, worst = [], math.inf
        for t in top:
            b = speed_bounds_quadrature(model, float(t))
            ratio = b.lower / ((a / (2 * (a - 1))) * t ** (1 - 1 / a))
            details.append((float(t), ratio, 1.0))
            worst = min(worst, 0.05 - abs(ratio - 1.0))
        return _finish("rates", worst, g.describe(), details,
                       {"claim": claim, "model": model_text(model), "band": [0.95, 1.05]})
    # xi_polynomial
    if not isinstance(model, Xi):
        raise ValueError("xi_polynomial needs a xi model")
    g = grid or Grid(10.0, 1e6, 200, "log")
    th = model.theta
    inner_pred = math.pi / (2 * th)
    fit_in = _vo_fit(Sector(th, 0.0), g)
    rel_in = abs(fit_in.coefficient / inner_pred - 1.0)
    details = [(0.0, fit_in.coefficient, inner_pred)]
    worst = 0.02 - rel_in
    eps_list = []
    for eta in XI_ETAS:
        fit_out = _vo_fit(Sector(th, eta), g)
        eps = eta / (th + eta)
        pred = inner_pred * (1 - eps)
        rel = abs(fit_out.coefficient / pred - 1.0)
        details.append((eta, fit_out.coefficient, pred))
        eps_list.append(eps)
        worst = min(worst, 0.02 - rel, fit_in.coefficient - fit_out.coefficient)
    return _finish("rates", worst, g.describe(), details,
                   {"claim": claim, "model": model_text(model), "etas": list(XI_ETAS),
                    "epsilons": eps_list, "detail_columns": "eta (0 = inner W(theta)), fitted, predicted"})


# ---------------------------------------------------------------------------
# Xi tangential sandwich
# ---------------------------------------------------------------------------

def xi_tangential_bounds(alpha: float, theta: float, t: float) -> tuple[float, float]:
    """The explicit lower and upper expressions for the tangential speed of Xi(alpha, theta)."""
    d = delta_parabola(t, alpha)
    lower = 0.25 * math.log1p((t - d / math.sin(0.5 * theta)) / d)
    beta_t = math.atan(d / t)
    # k_H(1, e^{i(pi/2 - (pi/theta) beta_t)}) is the power-map leg with r = |q_t|
    leg = tangential_offset(0.5 * math.pi - (math.pi / theta) * beta_t)
    return lower, 1.0 + leg


def xi_tangential_check(alpha: float, theta: float,
                        grid: Grid = Grid(10.0, 1e8, 25, "log"), tol: float = 0.02) -> VerificationReport:
    Xi(alpha, theta)  # parameter validation
    times = grid.times()
    details, order_margin = [], math.inf
    for t in times:
        lo, hi = xi_tangential_bounds(alpha, theta, float(t))
        details.append((float(t), lo, hi))
        order_margin = min(order_margin, hi - lo)
    t_top = float(times[-1])
    lo, hi = details[-1][1], details[-1][2]
    lo_r, hi_r = lo / math.log(t_top), hi / math.log(t_top)
    lo_target, hi_target = 0.25 * (1 - 1 / alpha), 0.5 * (1 - 1 / alpha)
    m_lo = tol - abs(lo_r - lo_target)
    m_hi = tol - abs(hi_r - hi_target)
    margin = min(order_margin, m_lo, m_hi)
    notes = {"alpha": alpha, "theta": theta, "lower_over_log_t": lo_r, "upper_over_log_t": hi_r,
             "lower_target": lo_target, "upper_target": hi_target,
             "lower_margin": m_lo, "upper_margin": m_hi, "order_margin": order_margin,
             "detail_columns": "t, lower, upper"}
    return _finish("xitangent", margin, grid.describe(), details, notes, 0.0)


# ---------------------------------------------------------------------------
# Monte Carlo suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCParams:
    n: int = 200_000
    eps: float = 1e-4
    seed: int = 0
    s_max: Optional[float] = None
    workers: int = 1
    refinement: int = harmonic.MIN_REFINEMENT


def hall_check(orbit: Orbit, t: float, mc: MCParams = MCParams(),
               sensitivity: bool = False) -> VerificationReport:
    """omega(1, Theta_t, H) < 2 omega(1, Gamma_t, H minus Gamma_t), the latter by walk-on-spheres."""
    slit = harmonic.build_slit(orbit, t, mc.s_max, mc.refinement)
    est = harmonic.wos_measure(1.0, harmonic.SLIT, mc.n, mc.eps, mc.seed, slit, workers=mc.workers)
    rho = math.exp(orbit.evaluate(t).log_rho)
    lhs = harmonic.omega_theta_exact(1.0, rho)
    rhs = 2.0 * (est.mean + 3.0 * est.stderr)
    notes = {"model": _model_label(orbit), "t": t, "omega_theta": lhs, "estimate": est.__dict__,
             "slit_vertices": len(slit.vertices)}
    if sensitivity:
        wide = harmonic.build_slit(orbit, t, 2.0 * slit.s_max, mc.refinement)
        est2 = harmonic.wos_measure(1.0, harmonic.SLIT, mc.n, mc.eps, mc.seed, wide, workers=mc.workers)
        notes["sensitivity_2x_s_max"] = {"mean": est2.mean, "difference": est2.mean - est.mean,
                                        "within_3_stderr": abs(est2.mean - est.mean) < 3 * est.stderr}
    grid = {"t": t, "n": mc.n, "eps": mc.eps, "seed": mc.seed, "s_max": slit.s_max}
    return _finish("hall", rhs - lhs, grid, [(t, rhs, lhs)], notes, 0.0, flagged=not est.valid)


def markov_check(orbit: Orbit, t: float, mc: MCParams = MCParams()) -> VerificationReport:
    rep = harmonic.strong_markov_check(orbit, t, mc.n, mc.eps, mc.seed, mc.s_max, mc.refinement,
                                       mc.workers)
    margin = 3.0 * rep.stderr - abs(rep.lhs - rep.rhs)
    grid = {"t": t, "n": mc.n, "eps": mc.eps, "seed": mc.seed, "s_max": mc.s_max}
    notes = {"model": _model_label(orbit), "lhs": rep.lhs, "rhs": rep.rhs, "stderr": rep.stderr,
             "discarded": rep.discarded}
    flagged = rep.discarded > harmonic.DISCARD_LIMIT * mc.n
    return _finish("markov", margin, grid, [(t, rep.rhs, rep.lhs)], notes, 0.0, flagged=flagged)


SUITES = ("pythagoras", "julia", "ipereucl", "dwmono", "totalimpliesortho", "hall", "markov",
          "monotone", "rates", "xitangent", "gammastar")

ORBIT_SUITES = {
    "pythagoras": check_pythagoras,
    "julia": check_julia,
    "ipereucl": check_ipereucl,
    "dwmono": check_dwmono,
    "totalimpliesortho": check_total_implies_orthogonal,
}
