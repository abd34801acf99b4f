"""Orbits u_t = C(phi_t(0)) of closed-form Koenigs models, and orbit files.

For a model with Koenigs image Omega and conformal map g : H -> Omega the
orbit of the base point solves g(u_t) = g(1) + it.  The three closed-form
families give

* Sector(theta, eta): u_t = (1 + t e^{i(theta-eta)/2})^(pi/(theta+eta))
* Strip(width):       u_t = exp(pi t / width)
* VerticalHalfPlane:  u_t = 1 + it
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .domains import BOUND_ONLY, CLOSED_FORM, ModelSpec, Sector, Strip, VerticalHalfPlane
from .hypgeo import LogPolarPoint

CSV_HEADER = ("t", "log_rho", "theta")
_DW_SLACK = math.log1p(-1e-9)


class BoundOnlyModelError(ValueError):
    """The model has no closed-form orbit; only speed bounds are available."""


class OrbitValidationError(ValueError):
    pass


class OrbitParseError(ValueError):
    pass


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class Orbit:
    """Samples (t, log rho_t, theta_t) of an orbit in the right half-plane.

    ``model`` is None for synthetic (ingested) orbits.  Arrays are made
    read-only on construction.
    """

    times: np.ndarray
    log_rho: np.ndarray
    theta: np.ndarray
    model: Optional[ModelSpec] = None
    source: str = "computed"

    def __post_init__(self):
        for name in ("times", "log_rho", "theta"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.times) == len(self.log_rho) == len(self.theta)) or len(self.times) == 0:
            raise OrbitValidationError("orbit arrays must be nonempty and of equal length")
        validate_orbit(self.times, self.log_rho, self.theta)

    def __len__(self) -> int:
        return len(self.times)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Orbit):
            return NotImplemented
        return (self.model == other.model
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.log_rho, other.log_rho)
                and np.array_equal(self.theta, other.theta))

    @property
    def points(self) -> list[LogPolarPoint]:
        return [LogPolarPoint(float(l), float(a)) for l, a in zip(self.log_rho, self.theta)]

    def point(self, i: int) -> LogPolarPoint:
        return LogPolarPoint(float(self.log_rho[i]), float(self.theta[i]))

    def covers(self, t: float) -> bool:
        return self.times[0] - 1e-12 <= t <= self.times[-1] + 1e-12

    def interp(self, t: float) -> LogPolarPoint:
        """Piecewise-linear interpolation in (log rho, theta)."""
        if not self.covers(t):
            raise ValueError(f"t={t!r} outside orbit range [{self.times[0]}, {self.times[-1]}]")
        return LogPolarPoint(float(np.interp(t, self.times, self.log_rho)),
                             float(np.interp(t, self.times, self.theta)))

    def evaluate(self, t: float) -> LogPolarPoint:
        """Exact point for closed-form models, interpolated otherwise."""
        if isinstance(self.model, CLOSED_FORM):
            return orbit_point(self.model, t)
        return self.interp(t)

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.times.tolist(), self.log_rho.tolist(), self.theta.tolist()))


def validate_orbit(times, log_rho, theta) -> None:
    """Check strictly increasing times and nondecreasing rho cos theta (Re of the orbit)."""
    times = np.asarray(times, dtype=float)
    log_rho = np.asarray(log_rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(log_rho)) and np.all(np.isfinite(theta))):
        raise OrbitValidationError("orbit samples must be finite")
    if np.any(np.abs(theta) >= 0.5 * math.pi):
        k = int(np.argmax(np.abs(theta) >= 0.5 * math.pi))
        raise OrbitValidationError(f"sample {k}: theta={theta[k]!r} outside (-pi/2, pi/2)")
    bad = np.nonzero(np.diff(times) <= 0)[0]
    if len(bad):
        k = int(bad[0])
        raise OrbitValidationError(f"times not strictly increasing at samples {k} and {k + 1} "
                                   f"(t={times[k]!r}, t={times[k + 1]!r})")
    log_re = log_rho + np.log(np.cos(theta))
    drop = np.nonzero(np.diff(log_re) < _DW_SLACK)[0]
    if len(drop):
        k = int(drop[0])
        raise OrbitValidationError(
            f"rho cos theta decreases between samples {k} and {k + 1} "
            f"(t={times[k]!r} -> t={times[k + 1]!r}); orbits satisfy Re u_s >= Re u_t for s >= t")


def orbit_point(model: ModelSpec, t: float) -> LogPolarPoint:
    """Half-plane representative of phi_t(0) for a closed-form model, in log-polar form."""
    if isinstance(model, BOUND_ONLY):
        raise BoundOnlyModelError("bound-only model; use `bounds`")
    if not t >= 0:
        raise ValueError(f"orbit time must be >= 0, got {t!r}")
    if isinstance(model, Sector):
        gamma = math.pi / model.beta
        z = 1.0 + t * complex(math.cos(0.5 * (model.theta - model.eta)),
                              math.sin(0.5 * (model.theta - model.eta)))
        return LogPolarPoint(gamma * math.log(abs(z)), gamma * math.atan2(z.imag, z.real))
    if isinstance(model, Strip):
        return LogPolarPoint(math.pi * t / model.width, 0.0)
    if isinstance(model, VerticalHalfPlane):
        return LogPolarPoint(math.log(math.hypot(1.0, t)), math.atan(t))
    raise TypeError(f"unknown model {model!r}")


def time_grid(t_min: float, t_max: float, n: int, spacing: str = "log") -> np.ndarray:
    if not (0 <= t_min < t_max):
        raise ValueError("t_min < t_max required (and t_min >= 0)")
    if n < 2:
        raise ValueError("n >= 2 required")
    if spacing == "log":
        if t_min <= 0:
            raise ValueError("log spacing needs t_min > 0")
        return np.geomspace(t_min, t_max, n)
    if spacing == "linear":
        return np.linspace(t_min, t_max, n)
    raise ValueError(f"spacing must be 'log' or 'linear', got {spacing!r}")


def orbit_grid(model: ModelSpec, t_min: float, t_max: float, n: int,
               spacing: str = "log") -> Orbit:
    times = time_grid(t_min, t_max, n, spacing)
    pts = [orbit_point(model, float(t)) for t in times]
    return Orbit(times, [p.log_rho for p in pts], [p.theta for p in pts], model, "computed")


def orbit_from_times(model: ModelSpec, times: Iterable[float]) -> Orbit:
    times = np.asarray(list(times), dtype=float)
    pts = [orbit_point(model, float(t)) for t in times]
    return Orbit(times, [p.log_rho for p in pts], [p.theta for p in pts], model, "computed")


def ingest_orbit(rows: Iterable[Sequence], first_line: int = 1,
                 line_numbers: Optional[Sequence[int]] = None) -> Orbit:
    """Build a synthetic orbit from (t, log_rho, theta) rows.

    Parse errors cite ``line_numbers[k]`` when given, else ``first_line + k``.
    """
    ts, ls, ths = [], [], []
    for k, row in enumerate(rows):
        line = line_numbers[k] if line_numbers is not None else first_line + k
        if len(row) != 3:
            raise OrbitParseError(f"line {line}: expected 3 fields t,log_rho,theta, got {len(row)}")
        try:
            t, l, th = (float(v) for v in row)
        except (TypeError, ValueError):
            raise OrbitParseError(f"line {line}: cannot parse {list(row)!r} as numbers") from None
        ts.append(t)
        ls.append(l)
        ths.append(th)
    if not ts:
        raise OrbitParseError("orbit data has no rows")
    return Orbit(ts, ls, ths, None, "ingested")


def write_orbit_csv(orbit: Orbit, dest: Union[str, Path, io.TextIOBase, None] = None) -> str:
    """Serialise as ``t,log_rho,theta`` with 17 significant digits; returns the text."""
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for t, l, th in orbit.rows():
        buf.write(f"{fmt17(t)},{fmt17(l)},{fmt17(th)}\n")
    text = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    elif dest is not None:
        dest.write(text)
    return text


def read_orbit_csv(src: Union[str, Path, io.TextIOBase]) -> Orbit:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
    else:
        text = src.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise OrbitParseError("line 1: empty orbit file") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise OrbitParseError(f"line 1: expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")
    rows, lines = [], []
    for row in reader:
        if row:
            rows.append(row)
            lines.append(reader.line_num)
    return ingest_orbit(rows, line_numbers=lines)
