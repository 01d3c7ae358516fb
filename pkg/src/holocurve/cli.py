"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 64 usage error.
Errors are reported as a JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import characteristics as ch
from . import diagnostics as dg
from . import interpolation as ip
from . import ostrowski as os_
from .config import GridSpec, RunConfig
from .curves import (
    Annulus,
    Curve,
    Disc,
    Rect,
    builtin_curve,
    parse_region,
    point,
    region_to_json,
    spherical_derivative,
)
from .io import (
    complex_list_to_json,
    complex_to_json,
    dump_json,
    load_json,
    parse_complex,
    write_csv,
)
from .rescaling import brody_extract, verify_rescaled

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# --- argument helpers ---------------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _complexes(text: str) -> list[complex]:
    return [parse_complex(x) for x in text.split(",") if x.strip()]


def load_curve(spec: str) -> Curve:
    """A JSON file path, or ``builtin:name[:key=value,...]``."""
    if spec.startswith("builtin:"):
        _, name, *rest = spec.split(":", 2)
        params = {}
        for kv in (rest[0].split(",") if rest else []):
            k, _, v = kv.partition("=")
            params[k.strip()] = _param(v.strip())
        return builtin_curve(name, **params)
    return Curve.from_json(load_json(spec))


def _param(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    try:
        return parse_complex(v)
    except ValueError:
        return v


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec(cfg.grid, cfg.grid)


def _emit(cfg: RunConfig, payload) -> None:
    text = dump_json(payload, cfg.out)
    if cfg.out is None and not cfg.quiet:
        print(text)


def _emit_csv(cfg: RunConfig, header, rows) -> None:
    text = write_csv(cfg.out, header, rows)
    if cfg.out is None and not cfg.quiet:
        sys.stdout.write(text)


# --- subcommands --------------------------------------------------------------------


def cmd_eval(args, cfg):
    curve = load_curve(args.curve)
    rows = []
    for z in _complexes(args.z):
        rows.append({
            "z": complex_to_json(z),
            "point": complex_list_to_json(point(curve, z)),
            "sphderiv": spherical_derivative(curve, z),
        })
    _emit(cfg, {"curve": curve.to_json(), "values": rows})


def cmd_sphderiv_grid(args, cfg):
    curve = load_curve(args.curve)
    region = parse_region(args.region)
    if isinstance(region, Rect):
        x0, x1, y0, y1 = region.x0, region.x1, region.y0, region.y1
    else:
        R = region.radius if isinstance(region, Disc) else region.r1
        c = region.center if isinstance(region, Disc) else 0j
        x0, x1, y0, y1 = c.real - R, c.real + R, c.imag - R, c.imag + R
    xs = np.linspace(x0, x1, cfg.grid)
    ys = np.linspace(y0, y1, cfg.grid)
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    inside = region.contains(Z)
    vals = np.full(Z.shape, np.nan)
    vals[inside] = spherical_derivative(curve, Z[inside], on_degenerate="nan")
    _emit_csv(cfg, ["x", "y", "value"], zip(Z.real, Z.imag, vals))


def cmd_char(args, cfg):
    rep = ch.char_report(load_curve(args.curve), _floats(args.r), cfg.tol)
    for w in rep.warnings:
        if not cfg.quiet:
            print(f"warning: {w}", file=sys.stderr)
    _emit(cfg, rep.to_json())


def cmd_order(args, cfg):
    fit = ch.order_estimate(load_curve(args.curve), args.r0, args.r1, args.points, cfg.tol)
    _emit(cfg, fit.to_json())


def cmd_rescale(args, cfg):
    curve = load_curve(args.curve)
    out = []
    for n in _floats(args.n):
        res = brody_extract(curve, n)
        ver = verify_rescaled(res, args.r, args.slack, _grid(cfg))
        out.append({"result": res.to_json(), "verify": ver.to_json()})
    _emit(cfg, out)


def _load_data(path: str) -> os_.OstrowskiData:
    return os_.OstrowskiData.from_json(load_json(path))


def cmd_ostrowski_check(args, cfg):
    th = os_.ConditionThresholds(*(_floats(args.thresholds) if args.thresholds else []))
    rep = os_.check_conditions(_load_data(args.data), th)
    _emit(cfg, rep.to_json())


def cmd_phi(args, cfg):
    d = _load_data(args.data)
    prof = os_.build_phi(d)
    t_range = _floats(args.t_range) if args.t_range else None
    text = prof.to_csv(cfg.out, t_range)
    if cfg.out is None and not cfg.quiet:
        sys.stdout.write(text)


def cmd_montel(args, cfg):
    curve = load_curve(args.curve)
    r0, r1 = _floats(args.annulus)
    rep = os_.montel_three_point_test(curve, _complexes(args.targets), args.delta, Annulus(r0, r1))
    rep = dict(rep)
    if rep.get("worst_center") is not None:
        rep["worst_center"] = complex_to_json(rep["worst_center"])
    _emit(cfg, rep)


def cmd_lehto(args, cfg):
    rows = os_.lehto_experiment(_floats(args.t), args.k_range, _grid(cfg))
    if cfg.out is not None and cfg.out.endswith(".csv"):
        _emit_csv(cfg, ["t", "sup", "argmax_re", "argmax_im", "truncation"],
                  [(r["t"], r["sup"], r["argmax"].real, r["argmax"].imag, r["truncation"]) for r in rows])
    else:
        _emit(cfg, [dict(r, argmax=complex_to_json(r["argmax"])) for r in rows])


def _random_problem(spec: str, K: float, n: int, rng) -> ip.InterpProblem:
    a, _, b = spec.partition("x")
    pts = [K * (i + 1j * j) for i in range(int(a)) for j in range(int(b or a))]
    targets = [rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1) for _ in pts]
    return ip.InterpProblem.build(pts, targets, n)


def cmd_interp_solve(args, cfg):
    if args.problem:
        prob = ip.InterpProblem.from_json(load_json(args.problem))
    elif args.lattice:
        prob = _random_problem(args.lattice, args.K, args.dimension, np.random.default_rng(cfg.seed))
    else:
        raise ValueError("need --problem or --lattice")
    tol = args.step_tol if args.step_tol is not None else min(cfg.tol, 1e-12)
    if args.normalize is not None:
        state, scale = ip.solve_normalized(prob, args.normalize, tol=tol, k_max=args.k_max)
    else:
        state, scale = ip.solve_interpolation(prob, tol, args.k_max), 1.0
    _emit(cfg, {"problem": prob.to_json(), "K": prob.E.K, "scale": scale, "solution": state.to_json()})


def cmd_interp_check(args, cfg):
    obj = load_json(args.solution)
    prob = ip.InterpProblem.from_json(obj["problem"])
    state = ip.InterpState.from_json(obj["solution"])
    region = parse_region(args.region) if args.region else _default_region(prob)
    q = ip.solution_quality(prob, state, region, _grid(cfg), scale=float(obj.get("scale", 1.0)))
    q["argmax"] = complex_to_json(q["argmax"])
    q["residual_ok"] = q["max_residual"] <= max(10 * cfg.tol, 1e-8)
    q["displacement"] = state.displacement
    q["region"] = region_to_json(region)
    _emit(cfg, q)


def _default_region(prob) -> Rect:
    p = prob.E.points
    pad = 5.0
    return Rect(p.real.min() - pad, p.real.max() + pad, p.imag.min() - pad, p.imag.max() + pad)


def cmd_chpm(args, cfg):
    region = parse_region(args.region)
    rep = dg.chpm_checks(load_curve(args.curve), region, n_grid=cfg.grid if args.n_grid is None else args.n_grid)
    _emit(cfg, rep.to_json())


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--grid", type=int, default=128)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None)
    common.add_argument("--quiet", action="store_true")

    p = _Parser(prog="holocurve", description="Numerics for holomorphic curves in P^n.", parents=[common])
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_, parents=[common])
        s.set_defaults(func=fn)
        return s

    curve_help = "curve JSON file or builtin:name[:k=v,...]"
    s = add("eval", cmd_eval, "evaluate f and f^# at points")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--z", required=True, help="comma-separated complex points, a+bi")

    s = add("sphderiv-grid", cmd_sphderiv_grid, "f^# on a grid, CSV x,y,value")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--region", required=True, help="rect:x0,x1,y0,y1 | disc:R | annulus:r0,r1")

    s = add("char", cmd_char, "characteristics T, A and the Jensen residual")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--r", required=True, help="comma-separated radii")

    s = add("order", cmd_order, "order estimate from log T against log r")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--r0", type=float, required=True)
    s.add_argument("--r1", type=float, required=True)
    s.add_argument("--points", type=int, default=12)

    s = add("rescale", cmd_rescale, "rescaling at the maximiser of (n-|z|) f^#")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--n", required=True, help="comma-separated disc radii")
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--slack", type=float, default=0.05)

    s = add("ostrowski-check", cmd_ostrowski_check, "conditions on zero/pole data")
    s.add_argument("--data", required=True)
    s.add_argument("--thresholds", default=None, help="C1,C2,C3,C4,C5")

    s = add("phi", cmd_phi, "phi profile as CSV t,phi,slope")
    s.add_argument("--data", required=True)
    s.add_argument("--t-range", default=None, help="t0,t1")

    s = add("montel", cmd_montel, "three-value disc test on C*")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--targets", required=True, help="three values, a+bi or inf")
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--annulus", required=True, help="r0,r1")

    s = add("lehto", cmd_lehto, "sup |z| f^# for truncated Lehto products")
    s.add_argument("--t", required=True, help="comma-separated t > 1")
    s.add_argument("--k-range", type=int, default=40)

    s = add("interp-solve", cmd_interp_solve, "solve an interpolation problem")
    s.add_argument("--problem", default=None)
    s.add_argument("--lattice", default=None, help="AxB lattice with random targets (uses --seed)")
    s.add_argument("--K", type=float, default=30.0)
    s.add_argument("--dimension", type=int, default=1)
    s.add_argument("--k-max", type=int, default=200)
    s.add_argument("--step-tol", type=float, default=None)
    s.add_argument("--normalize", type=float, default=None, metavar="K_REF",
                   help="solve on E shrunk to K_REF-sparse, then compose with z/lam")

    s = add("interp-check", cmd_interp_check, "quality of a solved interpolation")
    s.add_argument("--solution", required=True)
    s.add_argument("--region", default=None)

    s = add("chpm", cmd_chpm, "grid checks for entire curves with f^# <= 1")
    s.add_argument("--curve", required=True, help=curve_help)
    s.add_argument("--region", default="disc:5")
    s.add_argument("--n-grid", type=int, default=None)
    return p


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(args.subcommand, {}, args.out, args.tol, args.grid, args.seed, args.quiet)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except ValueError as exc:
        return _fail(EXIT_INVALID, exc)
    try:
        with warnings.catch_warnings():
            if cfg.quiet:
                warnings.simplefilter("ignore")
            args.func(args, cfg)
    except (ArithmeticError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (ValueError, KeyError, TypeError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(EXIT_INVALID, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
