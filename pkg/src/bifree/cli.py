"""Command-line front end.

Exit status is 0 on success, 1 for malformed input and 2 when a numerical
stage fails; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bifree_conv import (
    GaussianParams,
    GridSpec,
    LKQuintupleGeneral,
    as_law,
    bifree_convolve,
    compound_poisson_quintuple,
    compound_poisson_r,
    gaussian_closed_form,
    lambda_combine,
    lk_decompose,
    lk_r_general,
    lk_validate,
    load_quintuple,
)
from .bifree_r import partial_r
from .errors import InputError, NumericalError
from .limits import check_limit_theorem, clt_array, poisson_array
from .measure import GridDensity2D, Measure2D, _Atomic2D, load_measure, measure_from_dict
from .transform2d import g2, invert2d, write_grid_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def fmt_complex(v: complex) -> str:
    """``re+imi`` at 17 significant digits, with signed zeros normalized."""
    v = complex(v)
    re = v.real + 0.0
    im = v.imag + 0.0
    return f"{re:.17g}{im:+.17g}i"


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise InputError(f"cannot parse complex number {text!r}") from None


def parse_point(text: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"points are written z,w; got {text!r}")
    return parse_complex(parts[0]), parse_complex(parts[1])


def parse_measure_file(path: str):
    """Load a measure JSON file; signedness follows the weights."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: no such file")
    return load_measure(p)


def _planar(path: str) -> Measure2D:
    mu = parse_measure_file(path)
    if not isinstance(mu, _Atomic2D):
        raise InputError(f"{path}: expected planar atoms [s, t, w]")
    return mu


def _load_law_file(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: no such file")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, dict) and "gamma" in data:
        return LKQuintupleGeneral.from_dict(data)
    mu = measure_from_dict(data)
    if not isinstance(mu, _Atomic2D):
        raise InputError(f"{path}: expected planar atoms [s, t, w]")
    return mu


def _points(args) -> list[tuple[complex, complex]]:
    pts = [parse_point(p) for p in (args.point or [])]
    if not pts:
        raise InputError("give at least one --point z,w")
    return pts


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _grid(args, radius: float) -> GridSpec:
    n = args.grid
    y = args.y
    if args.range is not None:
        lo, hi = args.range
        return GridSpec((lo, hi), (lo, hi), n, n, y)
    return GridSpec.around(radius, y, n)


def _header(command: str, args) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"tool": "bifree", "version": __version__, "command": command, "parameters": params}


def cmd_eval_g(args):
    mu = _planar(args.measure)
    for z, w in _points(args):
        print(fmt_complex(g2(mu, z, w)))


def cmd_eval_r(args):
    mu = _planar(args.measure)
    for z, w in _points(args):
        print(fmt_complex(partial_r(mu, z, w)))


def cmd_convolve(args):
    a, b = _load_law_file(args.first), _load_law_file(args.second)
    radius = (as_law(a) + as_law(b)).support_radius
    res = bifree_convolve(a, b, _grid(args, radius), maxdeg=args.maxdeg)
    _emit(write_grid_csv(res.grid), args.out)
    if args.cumulants:
        Path(args.cumulants).write_text(res.cumulants.to_json() + "\n")


def cmd_invert(args):
    obj = _load_law_file(args.file)
    if isinstance(obj, LKQuintupleGeneral):
        rep = lk_validate(obj)
        if not rep.valid:
            raise InputError("quintuple is invalid; run lk-validate for details")
        law = obj.law()
        g, radius = law.g_evaluator(), law.support_radius
    else:
        g, radius = obj, obj.support_radius
    spec = _grid(args, radius)
    grid = invert2d(g, spec.x_range, spec.u_range, spec.n_x, spec.n_u, spec.y)
    _emit(write_grid_csv(grid), args.out)


def cmd_gaussian(args):
    p = GaussianParams(args.gamma1, args.gamma2, args.a, args.b, args.c)
    law = gaussian_closed_form(p)
    if args.point:
        for z, w in _points(args):
            print(fmt_complex(law.r(z, w)))
        return
    spec = _grid(args, law.support_radius)
    x = np.linspace(*spec.x_range, spec.n_x)
    u = np.linspace(*spec.u_range, spec.n_u)
    X, U = np.meshgrid(x, u, indexing="ij")
    grid = GridDensity2D(x, u, law.density(X, U), 0.0)
    _emit(write_grid_csv(grid), args.out)


def cmd_poisson(args):
    jump = _planar(args.jump)
    if not jump.is_probability:
        raise InputError("jump law must be a probability measure")
    if args.point:
        for z, w in _points(args):
            print(fmt_complex(compound_poisson_r(args.lam, jump, z, w)))
        return
    law = compound_poisson_quintuple(args.lam, jump).law()
    spec = _grid(args, law.support_radius)
    grid = invert2d(law.g_evaluator(), spec.x_range, spec.u_range, spec.n_x, spec.n_u, spec.y)
    _emit(write_grid_csv(grid), args.out)


def cmd_lk_validate(args):
    q = load_quintuple(args.quintuple)
    rep = lk_validate(q)
    report = _header("lk-validate", args)
    report.update(json.loads(rep.to_json()))
    report["verdict"] = "VALID" if rep.valid else "INVALID"
    print(json.dumps(report))


def cmd_lk_decompose(args):
    q = load_quintuple(args.quintuple)
    dec = lk_decompose(q)
    report = _header("lk-decompose", args)
    report["decomposition"] = dec.to_dict()
    print(json.dumps(report))


def cmd_lk_eval(args):
    q = load_quintuple(args.quintuple)
    for z, w in _points(args):
        print(fmt_complex(lk_r_general(q, z, w)))


def _demo(array, args, command):
    rep = check_limit_theorem(array, args.n)
    report = _header(command, args)
    report.update(rep.to_dict())
    if args.json:
        Path(args.json).write_text(json.dumps(report) + "\n")
    print(f"# bifree {__version__} {command} {array.name}")
    print(f"{'n':>8} {'err(a)':>12} {'err(b)':>12} {'err(c)':>12}")
    ea, eb, ec = (rep.error(k) for k in ("scaled_r", "d_functional", "rho_moments"))
    for i, n in enumerate(rep.ns):
        print(f"{n:>8d} {ea[i]:12.4e} {eb[i]:12.4e} {ec[i]:12.4e}")
    print(f"order(a) = {rep.order('scaled_r'):.4f}")
    print("cross residuals: " + ", ".join(f"{k} = {v:.3e}" for k, v in rep.cross.items()))
    print(f"equivalence: {'consistent' if rep.equivalent else 'VIOLATED'}")
    if rep.outside_omega:
        print(f"probes outside the auto-sized domain: {len(rep.outside_omega)}")


def cmd_clt_demo(args):
    _demo(clt_array(args.c), args, "clt-demo")


def cmd_poisson_demo(args):
    jump = _planar(args.jump)
    if not jump.is_probability:
        raise InputError("jump law must be a probability measure")
    _demo(poisson_array(args.lam, jump), args, "poisson-demo")


def cmd_semigroup(args):
    q = load_quintuple(args.quintuple)
    zero = LKQuintupleGeneral(0.0, 0.0)
    pts = _points(args)
    for t in args.t:
        qt = lambda_combine(q, zero, t, 0.0)
        vals = " ".join(fmt_complex(lk_r_general(qt, z, w)) for z, w in pts)
        print(f"{t:.17g} {vals}")


def _add_grid(p):
    p.add_argument("--grid", type=int, default=101, help="points per axis")
    p.add_argument("--y", type=float, default=0.05, help="smoothing width")
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"),
                   help="square grid window (default: support inflated by 3y)")
    p.add_argument("--out", help="CSV output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bifree", description="Bi-free transforms, convolution and limit laws.")
    ap.add_argument("--version", action="version", version=f"bifree {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval-g", help="planar Cauchy transform of a measure")
    p.add_argument("measure")
    p.add_argument("--point", action="append", help="z,w such as 'i,2i'")
    p.set_defaults(func=cmd_eval_g)

    p = sub.add_parser("eval-r", help="partial R-transform of a measure")
    p.add_argument("measure")
    p.add_argument("--point", action="append")
    p.set_defaults(func=cmd_eval_r)

    p = sub.add_parser("convolve", help="bi-free convolution of two laws")
    p.add_argument("first")
    p.add_argument("second")
    _add_grid(p)
    p.add_argument("--cumulants", help="cumulant table JSON output path")
    p.add_argument("--maxdeg", type=int, default=4)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("invert", help="density grid of a measure or quintuple")
    p.add_argument("file")
    _add_grid(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("gaussian", help="bi-free Gaussian density or R values")
    for name, default in (("gamma1", 0.0), ("gamma2", 0.0), ("a", 1.0), ("b", 1.0), ("c", 0.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    _add_grid(p)
    p.add_argument("--point", action="append")
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("poisson", help="bi-free compound Poisson R values or density")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--jump", required=True)
    _add_grid(p)
    p.add_argument("--point", action="append")
    p.set_defaults(func=cmd_poisson)

    for name, func, hlp in (("lk-validate", cmd_lk_validate, "check the constraint system"),
                            ("lk-decompose", cmd_lk_decompose, "Gaussian/product/Poisson split")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("quintuple")
        p.set_defaults(func=func)

    p = sub.add_parser("lk-eval", help="R-transform of a quintuple")
    p.add_argument("quintuple")
    p.add_argument("--point", action="append")
    p.set_defaults(func=cmd_lk_eval)

    p = sub.add_parser("clt-demo", help="bi-free central limit array")
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--json", help="full report output path")
    p.set_defaults(func=cmd_clt_demo)

    p = sub.add_parser("poisson-demo", help="bi-free Poisson array")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--jump", required=True)
    p.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--json")
    p.set_defaults(func=cmd_poisson_demo)

    p = sub.add_parser("semigroup", help="R values of t·q along a list of t")
    p.add_argument("quintuple")
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--point", action="append")
    p.set_defaults(func=cmd_semigroup)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help and --version exit 0
        return int(exc.code or 0)
    try:
        args.func(args)
    except NumericalError as exc:
        stage = f" (stage: {exc.stage})" if exc.stage else ""
        print(f"bifree: numerical failure{stage}: {exc}", file=sys.stderr)
        for k, v in exc.diagnostics.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return 2
    except (InputError, OSError, TypeError, ValueError) as exc:
        print(f"bifree: input error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
