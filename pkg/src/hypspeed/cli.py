"""Command-line front end.

    hypspeed orbit  --model sector:0.785398,0.785398 --tmin 1 --tmax 1e6 --n 200
    hypspeed speeds --model strip:1 --out speeds.csv
    hypspeed hm     --model sector:1.570796,1.570796 --t 10 --mc-n 200000 --seed 42
    hypspeed bounds --model parabola:2 --tmin 1 --tmax 1e8 --n 25
    hypspeed verify hall --model sector:1.570796,1.570796 --t 10
    hypspeed fit    --model sector:0.785398,0.785398 --target v_o --shape log_t
    hypspeed scan   --input orbit.csv

Tables go out as CSV (17 significant digits) and records as JSON unless
--format says otherwise.  Exit status: 0 success or pass, 1 fail, 2 usage error.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import harmonic, verify
from .domains import BOUND_ONLY, Xi, parse_model
from .models import Orbit, fmt17, orbit_grid, read_orbit_csv, write_orbit_csv
from .speeds import euclid_rates, fit_asymptote, speed_bounds_quadrature, speed_triple

SEED_ENV = "HYPSPEED_SEED"

# per-command default grids (t_min, t_max, n, spacing)
DEFAULT_GRIDS = {
    "orbit": (1.0, 1e6, 200, "log"),
    "speeds": (1.0, 1e6, 200, "log"),
    "bounds": (1.0, 1e6, 50, "log"),
    "scan": (1.0, 1e6, 200, "log"),
    "fit": (10.0, 1e6, 200, "log"),
    "verify": (1.0, 1e6, 200, "log"),
    "xitangent": (10.0, 1e8, 25, "log"),
    "rates": None,  # claim-specific defaults
}


class UsageError(Exception):
    pass


def _model_arg(text: str):
    try:
        return parse_model(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"{exc} (grammar: kind:p1,p2[@re,im] with kind in sector, strip, halfplane, "
            f"parabola, xi; angles in radians)") from None


def _target_arg(text: str):
    if text == "slit":
        return harmonic.SLIT
    kind, _, val = text.partition(":")
    if kind == "theta" and val:
        try:
            return harmonic.Theta(float(val))
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected 'slit' or 'theta:A', got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1 or v != float(text):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser(default_seed: int = 0) -> tuple[argparse.ArgumentParser, dict]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key=value lines; flags take precedence")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--model", type=_model_arg, help="e.g. sector:0.785,0.785 strip:1 parabola:2 xi:2,0.524")
    src.add_argument("--input", help="orbit CSV with header t,log_rho,theta")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--tmin", type=float)
    grid.add_argument("--tmax", type=float)
    grid.add_argument("--n", type=_positive_int)
    grid.add_argument("--spacing", choices=("log", "linear"))

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--t", type=float, default=10.0, help="orbit time of the slit start")
    mc.add_argument("--mc-n", type=_positive_int, default=200_000)
    mc.add_argument("--eps", type=float, default=1e-4)
    mc.add_argument("--seed", type=int, default=default_seed)
    mc.add_argument("--s-max", type=float)
    mc.add_argument("--workers", type=_positive_int, default=1)
    mc.add_argument("--refinement", type=int, default=harmonic.MIN_REFINEMENT)

    parser = argparse.ArgumentParser(prog="hypspeed", description="Hyperbolic speeds of semigroup orbits.")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    subs["orbit"] = sub.add_parser("orbit", parents=[common, src, grid], help="orbit samples")
    subs["speeds"] = sub.add_parser("speeds", parents=[common, src, grid], help="speed triples and rates")
    p = sub.add_parser("hm", parents=[common, src, mc], help="walk-on-spheres harmonic measure")
    p.add_argument("--target", type=_target_arg, help="slit (default with --model) or theta:A")
    subs["hm"] = p
    subs["bounds"] = sub.add_parser("bounds", parents=[common, src, grid], help="quadrature speed bounds")
    p = sub.add_parser("verify", parents=[common, src, grid, mc], help="run a verification suite")
    p.add_argument("suite", choices=verify.SUITES)
    p.add_argument("--outer", type=_model_arg, help="outer model for the monotone suite")
    p.add_argument("--claim", choices=verify.RATE_CLAIMS, help="claim for the rates suite")
    subs["verify"] = p
    p = sub.add_parser("fit", parents=[common, src, grid], help="fit an asymptotic shape")
    p.add_argument("--target", choices=("v", "v_o", "v_T"), default="v_o")
    p.add_argument("--shape", default="log_t", help="log_t or power:GAMMA")
    subs["fit"] = p
    subs["scan"] = sub.add_parser("scan", parents=[common, src, grid], help="inf of omega along the orbit tail")
    return parser, subs


def _read_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc.strerror}") from None
    out = {}
    for k, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"--config {path}: line {k}: expected key=value, got {line!r}")
        out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def _apply_config(argv: list[str], parser: argparse.ArgumentParser, subs: dict) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    command = next((a for a in argv if a in subs), None)
    if command is None:
        return
    cfg = _read_config(known.config)
    p = subs[command]
    dests = {a.dest for a in p._actions}
    for key in cfg:
        if key not in dests or key in ("config", "help", "suite"):
            raise UsageError(f"--config {known.config}: unknown key {key!r} for {command!r}")
    p.set_defaults(**cfg)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return fmt17(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(verify._jsonable(v), separators=(",", ":"))
    return str(v)


def _table(columns: Sequence[str], rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"columns": list(columns), "rows": verify._jsonable([list(r) for r in rows])},
                          indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_cell(v) for v in r) + "\n")
    return buf.getvalue()


def _record(rec: dict, fmt: str) -> str:
    if fmt == "csv":
        return _table(list(rec), [list(rec.values())], "csv")
    return json.dumps(verify._jsonable(rec), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _grid(args, key: str) -> verify.Grid:
    base = DEFAULT_GRIDS.get(key) or DEFAULT_GRIDS["verify"]
    vals = [args.tmin, args.tmax, args.n, args.spacing]
    g = verify.Grid(*(b if v is None else v for v, b in zip(vals, base)))
    g.times()  # validates
    return g


def _grid_given(args) -> bool:
    return any(getattr(args, k, None) is not None for k in ("tmin", "tmax", "n", "spacing"))


def _orbit(args, key: str) -> Orbit:
    if args.input and args.model is not None:
        raise UsageError("give either --model or --input, not both")
    if args.input:
        return read_orbit_csv(args.input)
    if args.model is None:
        raise UsageError("--model or --input is required")
    g = _grid(args, key)
    return orbit_grid(args.model, g.t_min, g.t_max, g.n, g.spacing)


def _mc(args) -> verify.MCParams:
    return verify.MCParams(args.mc_n, args.eps, args.seed, args.s_max, args.workers, args.refinement)


def cmd_orbit(args) -> int:
    orbit = _orbit(args, "orbit")
    if (args.format or "csv") == "csv":
        _emit(write_orbit_csv(orbit), args.out)
    else:
        _emit(_table(("t", "log_rho", "theta"), orbit.rows(), "json"), args.out)
    return 0


def cmd_speeds(args) -> int:
    orbit = _orbit(args, "speeds")
    rows = []
    for i, t in enumerate(orbit.times):
        u = orbit.point(i)
        s = speed_triple(u, float(t))
        r = euclid_rates(u)
        rows.append((s.t, s.v, s.v_o, s.v_T, r.dist_to_tau, r.one_minus_mod))
    _emit(_table(("t", "v", "v_o", "v_T", "dist_to_tau", "one_minus_mod"), rows, args.format or "csv"),
          args.out)
    return 0


def cmd_hm(args) -> int:
    target = args.target
    slit = None
    if args.model is not None or args.input:
        orbit = _orbit(args, "orbit") if args.input else None
        if orbit is None:
            if isinstance(args.model, BOUND_ONLY):
                raise UsageError("bound-only model; use `bounds`")
            orbit = orbit_grid(args.model, 0.0, max(args.t, 1.0), 2, "linear")
        slit = harmonic.build_slit(orbit, args.t, args.s_max, args.refinement)
        target = target or harmonic.SLIT
    elif target is None or target == harmonic.SLIT:
        raise UsageError("hm without --model/--input needs --target theta:A")
    est = harmonic.wos_measure(1.0, target, args.mc_n, args.eps, args.seed, slit, workers=args.workers)
    rec = {"target": "slit" if target == harmonic.SLIT else f"theta:{fmt17(target.a)}"}
    rec.update(est.__dict__)
    if slit is None:
        rec["exact"] = harmonic.omega_theta_exact(1.0, target.a)
    _emit(_record(rec, args.format or "json"), args.out)
    return 0 if est.valid else 1


def cmd_bounds(args) -> int:
    if args.model is None:
        raise UsageError("--model is required")
    g = _grid(args, "bounds")
    rows = []
    for t in g.times():
        b = speed_bounds_quadrature(args.model, float(t))
        rows.append((b.t, b.lower, b.upper, b.method))
    _emit(_table(("t", "lower", "upper", "method"), rows, args.format or "csv"), args.out)
    return 0


def _run_suite(args) -> verify.VerificationReport:
    suite = args.suite
    if suite in verify.ORBIT_SUITES:
        orbit = _orbit(args, "verify")
        return verify.ORBIT_SUITES[suite](orbit, None if args.input else _grid(args, "verify"))
    if suite == "gammastar":
        return verify.check_gamma_star(_orbit(args, "verify"))
    if suite in ("hall", "markov"):
        orbit = _orbit(args, "verify") if args.input else None
        if orbit is None:
            if args.model is None:
                raise UsageError("--model or --input is required")
            if isinstance(args.model, BOUND_ONLY):
                raise UsageError("bound-only model; use `bounds`")
            orbit = orbit_grid(args.model, 0.0, max(args.t, 1.0), 2, "linear")
        fn = verify.hall_check if suite == "hall" else verify.markov_check
        return fn(orbit, args.t, _mc(args))
    if suite == "monotone":
        if args.model is None or args.outer is None:
            raise UsageError("monotone needs --model (inner) and --outer")
        return verify.monotonicity_experiment(args.model, args.outer, _grid(args, "verify"))
    if suite == "rates":
        if args.claim is None:
            raise UsageError(f"rates needs --claim ({', '.join(verify.RATE_CLAIMS)})")
        orbit = read_orbit_csv(args.input) if args.input else None
        grid = _grid(args, "verify") if _grid_given(args) else None
        return verify.rate_check(args.claim, args.model, grid, orbit)
    # xitangent
    if not isinstance(args.model, Xi):
        raise UsageError("xitangent needs --model xi:ALPHA,THETA")
    return verify.xi_tangential_check(args.model.alpha, args.model.theta, _grid(args, "xitangent"))


def cmd_verify(args) -> int:
    rep = _run_suite(args)
    if (args.format or "json") == "csv":
        _emit(_table(("t", "observed", "bound"), rep.details, "csv"), args.out)
    else:
        _emit(rep.to_json() + "\n", args.out)
    print(f"{rep.name}: {rep.status} (margin {fmt17(rep.margin)})", file=sys.stderr)
    return 1 if rep.status == "fail" else 0


def cmd_fit(args) -> int:
    orbit = _orbit(args, "fit")
    samples = []
    for i, t in enumerate(orbit.times):
        s = speed_triple(orbit.point(i), float(t))
        samples.append((float(t), getattr(s, args.target)))
    shape = args.shape
    if shape.startswith("power"):
        try:
            shape = ("power", float(shape.split(":", 1)[1]))
        except (IndexError, ValueError):
            raise UsageError(f"--shape: expected log_t or power:GAMMA, got {args.shape!r}") from None
    elif shape != "log_t":
        raise UsageError(f"--shape: expected log_t or power:GAMMA, got {args.shape!r}")
    fit = fit_asymptote(samples, shape)
    rec = {"target": args.target, "shape": fit.shape, "coefficient": fit.coefficient,
           "intercept": fit.intercept, "residual_max": fit.residual_max,
           "window_lo": fit.window[0], "window_hi": fit.window[1]}
    _emit(_record(rec, args.format or "json"), args.out)
    return 0


def cmd_scan(args) -> int:
    orbit = _orbit(args, "scan")
    rows = verify.question_scan(orbit, orbit.times)
    _emit(_table(("t", "inf_omega"), rows, args.format or "csv"), args.out)
    return 0


COMMANDS = {"orbit": cmd_orbit, "speeds": cmd_speeds, "hm": cmd_hm, "bounds": cmd_bounds,
            "verify": cmd_verify, "fit": cmd_fit, "scan": cmd_scan}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, subs = build_parser(_default_seed())
        _apply_config(argv, parser, subs)
    except UsageError as exc:
        print(f"hypspeed: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"hypspeed {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"hypspeed {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
